"""Neighborhood label statistics and the two-step label-chain propositions.

Per-node metrics treat an empty neighborhood as "absent" (NaN) rather than
zero, and the graph-level homophily ratio averages only over nodes that have
neighbors. Label entropy uses the natural logarithm with a fixed 1e-10 floor
inside the log, so a C-class uniform neighborhood scores ln C.

The proposition checks quantify a two-step Markov chain on labels: each hop
keeps the label with probability alpha and otherwise moves uniformly to one
of the other C-1 labels. Closed forms for the two-hop statistics are checked
against a direct Monte-Carlo simulation of the same chain.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .graph import Graph, hop_sets

ENTROPY_EPS = 1e-10

HOP1 = "hop1"
WITHIN2 = "within2"


@dataclass
class HomophilyReport:
    per_node_h1: np.ndarray
    per_node_h_within2: np.ndarray
    graph_ratio: float
    histogram_h1: tuple
    histogram_h_within2: tuple


@dataclass
class EntropyReport:
    per_node_s1: np.ndarray
    per_node_s_within2: np.ndarray
    histogram_s1: tuple
    histogram_s_within2: tuple


@dataclass
class PropositionCheck:
    """Closed-form two-hop label-chain quantities, plus optional MC estimates.

    epsilon_same_vs_diff: P(y_o = y_v) - P(y_o != y_v) at two hops.
    epsilon_two_vs_one:   P(y_o = y_v) - P(y_m = y_v), two hops minus one.
    p_same_two_hop:       P(y_o = y_v) = alpha^2 + (1 - alpha)^2 / (C - 1).
    """

    alpha: float
    class_count: int
    epsilon_same_vs_diff: float
    epsilon_two_vs_one: float
    p_same_two_hop: float
    samples: Optional[int] = None
    mc_epsilon_same_vs_diff: Optional[float] = None
    mc_epsilon_two_vs_one: Optional[float] = None
    se_epsilon_same_vs_diff: Optional[float] = None
    se_epsilon_two_vs_one: Optional[float] = None


def _scope_neighbors(g: Graph, v: int, scope: str) -> np.ndarray:
    if scope == HOP1:
        return g.neighbors(v)
    if scope == WITHIN2:
        sets = hop_sets(g, v, 2)
        return np.fromiter(sorted(sets.within[2]), dtype=np.int64)
    raise ValueError(f"unknown scope {scope!r}")


def node_homophily(g: Graph, labels, v: int, scope: str = HOP1) -> float:
    """Fraction of scoped neighbors sharing v's label; NaN if none."""
    labels = np.asarray(labels)
    hood = _scope_neighbors(g, v, scope)
    if hood.size == 0:
        return float("nan")
    return float(np.mean(labels[hood] == labels[v]))


def graph_homophily(g: Graph, labels) -> float:
    """Mean 1-hop homophily over nodes that have at least one neighbor."""
    labels = np.asarray(labels)
    ratios = per_node_homophily(g, labels, HOP1)
    valid = ~np.isnan(ratios)
    if not np.any(valid):
        raise ValueError("graph has no edges; homophily ratio undefined")
    return float(np.mean(ratios[valid]))


def per_node_homophily(g: Graph, labels, scope: str = HOP1) -> np.ndarray:
    labels = np.asarray(labels)
    out = np.empty(g.n)
    for v in range(g.n):
        out[v] = node_homophily(g, labels, v, scope)
    return out


def label_entropy(g: Graph, labels, v: int, scope: str,
                  class_count: int) -> float:
    """Entropy of the scoped neighborhood's label distribution.

    Computed as -sum_y (p_y + eps) log(p_y + eps) over all class_count
    labels with eps = 1e-10; NaN for an empty neighborhood.
    """
    labels = np.asarray(labels)
    hood = _scope_neighbors(g, v, scope)
    if hood.size == 0:
        return float("nan")
    counts = np.bincount(labels[hood], minlength=class_count).astype(np.float64)
    p = counts / hood.size + ENTROPY_EPS
    return float(-np.sum(p * np.log(p)))


def per_node_entropy(g: Graph, labels, scope: str,
                     class_count: int) -> np.ndarray:
    labels = np.asarray(labels)
    out = np.empty(g.n)
    for v in range(g.n):
        out[v] = label_entropy(g, labels, v, scope, class_count)
    return out


def histogram(values, bin_count: int = 10, value_range=(0.0, 1.0)):
    """Equal-width histogram with a right-inclusive last bin.

    NaN entries (absent per-node values) are dropped before binning; an empty
    input yields all-zero counts.
    """
    if bin_count < 1:
        raise ValueError("bin_count must be at least 1")
    values = np.asarray(values, dtype=np.float64)
    values = values[~np.isnan(values)]
    counts, edges = np.histogram(values, bins=bin_count, range=value_range)
    return edges, counts


def homophily_report(g: Graph, labels, bins: int = 10) -> HomophilyReport:
    h1 = per_node_homophily(g, labels, HOP1)
    h2 = per_node_homophily(g, labels, WITHIN2)
    return HomophilyReport(
        per_node_h1=h1,
        per_node_h_within2=h2,
        graph_ratio=graph_homophily(g, labels),
        histogram_h1=histogram(h1, bins, (0.0, 1.0)),
        histogram_h_within2=histogram(h2, bins, (0.0, 1.0)),
    )


def entropy_report(g: Graph, labels, class_count: int,
                   bins: int = 10) -> EntropyReport:
    s1 = per_node_entropy(g, labels, HOP1, class_count)
    s2 = per_node_entropy(g, labels, WITHIN2, class_count)
    top = float(np.log(class_count))
    return EntropyReport(
        per_node_s1=s1,
        per_node_s_within2=s2,
        histogram_s1=histogram(s1, bins, (0.0, top)),
        histogram_s_within2=histogram(s2, bins, (0.0, top)),
    )


def proposition_closed_forms(alpha: float, class_count: int) -> PropositionCheck:
    """Closed-form two-hop quantities of the label chain.

    With C classes and per-hop retention alpha:
      P(y_o = y_v) - P(y_o != y_v) = (2a(aC - 2) + (3 - C)) / (C - 1)
      P(y_o = y_v) - P(y_m = y_v) = (a - 1)(aC - 1) / (C - 1)
    The first is <= 0 whenever alpha <= 2/C (for C >= 3); the second changes
    sign exactly at alpha = 1/C.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    if class_count < 2:
        raise ValueError("class_count must be at least 2")
    a, c = float(alpha), float(class_count)
    tau = (1.0 - a) ** 2 / (c - 1.0)
    return PropositionCheck(
        alpha=alpha,
        class_count=class_count,
        epsilon_same_vs_diff=(2.0 * a * (a * c - 2.0) + (3.0 - c)) / (c - 1.0),
        epsilon_two_vs_one=(a - 1.0) * (a * c - 1.0) / (c - 1.0),
        p_same_two_hop=a * a + tau,
    )


def _chain_step(y: np.ndarray, alpha: float, class_count: int, rng) -> np.ndarray:
    stay = rng.random(y.size) < alpha
    shift = rng.integers(1, class_count, size=y.size)
    return np.where(stay, y, (y + shift) % class_count)


def proposition_monte_carlo(alpha: float, class_count: int, samples: int,
                            seed: int = 0) -> PropositionCheck:
    """Simulate the two-step label chain and attach empirical estimates.

    Labels are drawn conditionally on y_v (fixed to class 0 by symmetry):
    y_v -> y_m -> y_o with the retention kernel. Standard errors come from
    the per-sample indicator differences.
    """
    if samples < 1:
        raise ValueError("samples must be positive")
    check = proposition_closed_forms(alpha, class_count)
    rng = np.random.default_rng(seed)
    y_v = np.zeros(samples, dtype=np.int64)
    y_m = _chain_step(y_v, alpha, class_count, rng)
    y_o = _chain_step(y_m, alpha, class_count, rng)

    same_o = (y_o == y_v).astype(np.float64)
    same_m = (y_m == y_v).astype(np.float64)
    d1 = 2.0 * same_o - 1.0           # P(same) - P(different) at two hops
    d2 = same_o - same_m              # two-hop minus one-hop retention
    check.samples = samples
    check.mc_epsilon_same_vs_diff = float(np.mean(d1))
    check.mc_epsilon_two_vs_one = float(np.mean(d2))
    denom = np.sqrt(samples)
    check.se_epsilon_same_vs_diff = float(np.std(d1, ddof=1) / denom) if samples > 1 else 0.0
    check.se_epsilon_two_vs_one = float(np.std(d2, ddof=1) / denom) if samples > 1 else 0.0
    return check


def jaccard_neighbor_distance(g: Graph, i: int, j: int) -> float:
    """1 - |N1(i) & N1(j)| / |N1(i) | N1(j)|; 0 when both are empty."""
    if not (0 <= i < g.n and 0 <= j < g.n):
        raise ValueError("node id out of range")
    a = g.neighbors(i)
    b = g.neighbors(j)
    union = np.union1d(a, b).size
    if union == 0:
        return 0.0
    inter = np.intersect1d(a, b).size
    return 1.0 - inter / union
