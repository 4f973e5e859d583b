"""Undirected graphs in CSR form, Laplacian operators, and hop queries.

The graph is immutable once built: symmetric adjacency with sorted rows, no
self-loops, no duplicate edges. Operators derived from it (normalized and
scaled Laplacians) are symmetric CSR matrices whose rows always contain an
explicit diagonal entry, so spectral shifts stay structural no-ops.
"""

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

NORMALIZED_LAPLACIAN = "normalized_laplacian"
SCALED_LAPLACIAN = "scaled_laplacian"

# Column-block width for spmm is chosen so the scratch buffer stays near this
# many float64 entries regardless of feature width.
_SPMM_BLOCK_ENTRIES = 8_000_000


def thread_count() -> int:
    """Kernel thread count from NODESPEC_THREADS; 1 = deterministic default."""
    raw = os.environ.get("NODESPEC_THREADS", "1")
    try:
        value = int(raw)
    except ValueError:
        return 1
    return max(1, value)


@dataclass(frozen=True)
class Graph:
    """Undirected graph: CSR adjacency over node ids 0..n-1."""

    n: int
    row_offsets: np.ndarray
    col_indices: np.ndarray
    edge_count: int

    def degrees(self) -> np.ndarray:
        return np.diff(self.row_offsets)

    def neighbors(self, v: int) -> np.ndarray:
        return self.col_indices[self.row_offsets[v]:self.row_offsets[v + 1]]


@dataclass(frozen=True)
class SparseOperator:
    """Symmetric real CSR matrix tagged with the Laplacian variant it holds."""

    n: int
    row_offsets: np.ndarray
    col_indices: np.ndarray
    values: np.ndarray
    kind: str

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.n, self.n))
        for i in range(self.n):
            lo, hi = self.row_offsets[i], self.row_offsets[i + 1]
            out[i, self.col_indices[lo:hi]] = self.values[lo:hi]
        return out


@dataclass
class HopSets:
    """BFS layers around a center node.

    ``exact[t]`` is the set of nodes at shortest-path distance exactly t
    (t >= 1, center excluded); ``within[t]`` is the union of exact[1..t].
    Unreachable nodes appear in neither map.
    """

    center: int
    exact: dict = field(default_factory=dict)
    within: dict = field(default_factory=dict)


def build_graph(edges, n: int) -> Graph:
    """Build a Graph from (i, j) pairs.

    Pairs are treated as undirected regardless of orientation; self-loops are
    dropped and duplicates collapsed. Raises ValueError on out-of-range ids.
    """
    if n < 0:
        raise ValueError("node count must be non-negative")
    pairs = np.asarray(list(edges), dtype=np.int64).reshape(-1, 2)
    if pairs.size:
        if pairs.min() < 0 or pairs.max() >= n:
            bad = pairs[(pairs < 0).any(axis=1) | (pairs >= n).any(axis=1)][0]
            raise ValueError(f"edge ({bad[0]}, {bad[1]}) out of range for n={n}")
        pairs = pairs[pairs[:, 0] != pairs[:, 1]]
    if pairs.size == 0:
        offsets = np.zeros(n + 1, dtype=np.int64)
        return Graph(n, offsets, np.empty(0, dtype=np.int64), 0)

    lo = np.minimum(pairs[:, 0], pairs[:, 1])
    hi = np.maximum(pairs[:, 0], pairs[:, 1])
    keys = np.unique(lo * n + hi)
    src = np.concatenate([keys // n, keys % n])
    dst = np.concatenate([keys % n, keys // n])
    order = np.lexsort((dst, src))
    src, dst = src[order], dst[order]

    offsets = np.zeros(n + 1, dtype=np.int64)
    np.add.at(offsets, src + 1, 1)
    np.cumsum(offsets, out=offsets)
    return Graph(n, offsets, dst.astype(np.int64), int(keys.size))


def normalized_laplacian(g: Graph) -> SparseOperator:
    """Symmetric normalized Laplacian I - D^{-1/2} A D^{-1/2}.

    Isolated nodes get an all-zero row (their D^{-1/2} entry is defined as 0),
    so the operator stays finite. Every row stores its diagonal explicitly.
    """
    deg = g.degrees().astype(np.float64)
    inv_sqrt = np.zeros(g.n)
    nz = deg > 0
    inv_sqrt[nz] = 1.0 / np.sqrt(deg[nz])

    counts = np.diff(g.row_offsets) + 1  # adjacency entries plus the diagonal
    offsets = np.zeros(g.n + 1, dtype=np.int64)
    np.cumsum(counts, out=offsets[1:])
    cols = np.empty(offsets[-1], dtype=np.int64)
    vals = np.empty(offsets[-1])
    for i in range(g.n):
        row = g.neighbors(i)
        pos = np.searchsorted(row, i)
        lo = offsets[i]
        cols[lo:lo + pos] = row[:pos]
        cols[lo + pos] = i
        cols[lo + pos + 1:offsets[i + 1]] = row[pos:]
        vals[lo:lo + pos] = -inv_sqrt[i] * inv_sqrt[row[:pos]]
        vals[lo + pos] = 1.0 if deg[i] > 0 else 0.0
        vals[lo + pos + 1:offsets[i + 1]] = -inv_sqrt[i] * inv_sqrt[row[pos:]]
    return SparseOperator(g.n, offsets, cols, vals, NORMALIZED_LAPLACIAN)


def scaled_laplacian(l: SparseOperator, lambda_max: float = 2.0) -> SparseOperator:
    """Scaled Laplacian 2 L / lambda_max - I, shifting the spectrum to [-1, 1]."""
    if lambda_max <= 0:
        raise ValueError("lambda_max must be positive")
    vals = l.values * (2.0 / lambda_max)
    diag_pos = _diagonal_positions(l)
    vals[diag_pos] -= 1.0
    return SparseOperator(l.n, l.row_offsets.copy(), l.col_indices.copy(), vals,
                          SCALED_LAPLACIAN)


def _diagonal_positions(op: SparseOperator) -> np.ndarray:
    pos = np.empty(op.n, dtype=np.int64)
    for i in range(op.n):
        lo, hi = op.row_offsets[i], op.row_offsets[i + 1]
        k = lo + np.searchsorted(op.col_indices[lo:hi], i)
        if k >= hi or op.col_indices[k] != i:
            raise ValueError(f"operator row {i} has no structural diagonal")
        pos[i] = k
    return pos


def estimate_lambda_max(op: SparseOperator, tol: float = 1e-9,
                        max_iters: int = 1000):
    """Power-iteration estimate of the largest eigenvalue.

    Returns (estimate, converged). The start vector is a fixed seeded draw so
    the estimate is deterministic; for a PSD operator the Rayleigh quotient
    converges to the top of the spectrum.
    """
    if op.n == 0:
        return 0.0, True
    v = np.random.default_rng(0x5EED).standard_normal(op.n)
    v /= np.linalg.norm(v)
    estimate = 0.0
    for _ in range(max_iters):
        w = spmm(op, v)
        norm = np.linalg.norm(w)
        if norm == 0.0:
            return 0.0, True
        new_estimate = float(v @ w)
        v = w / norm
        if abs(new_estimate - estimate) <= tol * max(1.0, abs(new_estimate)):
            return new_estimate, True
        estimate = new_estimate
    return estimate, False


def spmm(op: SparseOperator, x: np.ndarray) -> np.ndarray:
    """Sparse-dense product op @ x for x of shape (n,) or (n, c).

    Row sums are accumulated in fixed CSR order, so results are bit-identical
    whether or not column blocks run on the thread pool.
    """
    squeeze = x.ndim == 1
    x2 = x[:, None] if squeeze else x
    if x2.shape[0] != op.n:
        raise ValueError(f"operand rows {x2.shape[0]} != operator dim {op.n}")
    dtype = x2.dtype if x2.dtype.kind == "f" else np.float64
    out = np.zeros((op.n, x2.shape[1]), dtype=dtype)
    nnz = op.values.size
    if nnz:
        width = max(1, min(x2.shape[1], _SPMM_BLOCK_ENTRIES // nnz))
        blocks = [(c, min(c + width, x2.shape[1]))
                  for c in range(0, x2.shape[1], width)]
        workers = thread_count()
        if workers > 1 and len(blocks) > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                list(pool.map(lambda b: _spmm_block(op, x2, out, *b), blocks))
        else:
            for b in blocks:
                _spmm_block(op, x2, out, *b)
    return out[:, 0] if squeeze else out


def _spmm_block(op: SparseOperator, x: np.ndarray, out: np.ndarray,
                c0: int, c1: int) -> None:
    values = op.values.astype(out.dtype, copy=False)
    contrib = values[:, None] * x[op.col_indices, c0:c1]
    starts = op.row_offsets[:-1]
    nnz = op.values.size
    # reduceat misbehaves on empty segments: it emits contrib[start] instead
    # of zero, and errors when start == nnz, so clip and mask afterwards.
    sums = np.add.reduceat(contrib, np.minimum(starts, nnz - 1), axis=0)
    empty = np.diff(op.row_offsets) == 0
    sums[empty] = 0.0
    out[:, c0:c1] = sums


def hop_sets(g: Graph, v: int, max_hop: int) -> HopSets:
    """BFS layers around v up to max_hop."""
    if not 0 <= v < g.n:
        raise ValueError(f"node {v} out of range for n={g.n}")
    result = HopSets(center=v)
    seen = {v}
    frontier = [v]
    running: set = set()
    for t in range(1, max_hop + 1):
        layer = set()
        for u in frontier:
            for w in g.neighbors(u):
                w = int(w)
                if w not in seen:
                    seen.add(w)
                    layer.add(w)
        result.exact[t] = layer
        running = running | layer
        result.within[t] = set(running)
        if not layer:
            break
        frontier = sorted(layer)
    for t in range(len(result.exact) + 1, max_hop + 1):
        result.exact[t] = set()
        result.within[t] = set(running)
    return result


def hop_distances(g: Graph, v: int) -> np.ndarray:
    """Shortest-path distance from v to every node; -1 where unreachable."""
    dist = np.full(g.n, -1, dtype=np.int64)
    dist[v] = 0
    frontier = [v]
    t = 0
    while frontier:
        t += 1
        nxt = []
        for u in frontier:
            for w in g.neighbors(u):
                if dist[w] < 0:
                    dist[w] = t
                    nxt.append(int(w))
        frontier = nxt
    return dist


def induced_subgraph(g: Graph, nodes) -> tuple[Graph, np.ndarray]:
    """Induced subgraph on the given node set.

    Returns the subgraph and the sorted original ids, so position k of the
    id array is subgraph node k.
    """
    keep = np.unique(np.asarray(list(nodes), dtype=np.int64))
    if keep.size and (keep[0] < 0 or keep[-1] >= g.n):
        raise ValueError("subgraph node out of range")
    remap = -np.ones(g.n, dtype=np.int64)
    remap[keep] = np.arange(keep.size)
    edges = []
    for new_i, old_i in enumerate(keep):
        for old_j in g.neighbors(int(old_i)):
            new_j = remap[old_j]
            if new_j >= 0 and new_i < new_j:
                edges.append((new_i, int(new_j)))
    return build_graph(edges, keep.size), keep
