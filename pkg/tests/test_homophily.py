import numpy as np
import pytest

from nodespec.graph import build_graph
from nodespec.homophily import (entropy_report, graph_homophily, histogram,
                                homophily_report, jaccard_neighbor_distance,
                                label_entropy, node_homophily,
                                per_node_homophily, proposition_closed_forms,
                                proposition_monte_carlo)
from nodespec.synthetic import star_graph


def two_hop_chain_epsilons(alpha, classes):
    """Independent oracle: exact transition-matrix power of the label chain.

    One hop keeps the label with probability alpha, otherwise moves uniformly
    to one of the other classes; two hops is the matrix square.
    """
    kernel = np.full((classes, classes), (1 - alpha) / (classes - 1))
    np.fill_diagonal(kernel, alpha)
    two = kernel @ kernel
    p_same = two[0, 0]
    return 2 * p_same - 1, p_same - alpha


class TestNodeHomophily:
    def test_star_all_same(self):
        g = star_graph(4)
        labels = [0, 0, 0, 0, 0]
        assert node_homophily(g, labels, 0) == 1.0

    def test_star_none_same(self):
        g = star_graph(4)
        labels = [0, 1, 1, 1, 1]
        assert node_homophily(g, labels, 0) == 0.0

    def test_path_middle_half(self):
        g = build_graph([(0, 1), (1, 2)], 3)
        assert node_homophily(g, [0, 0, 1], 1) == 0.5

    def test_isolated_is_nan(self):
        g = build_graph([], 2)
        assert np.isnan(node_homophily(g, [0, 1], 0))

    def test_within_two_hops(self):
        g = build_graph([(0, 1), (1, 2)], 3)
        # scope of node 0 is {1, 2}
        assert node_homophily(g, [0, 0, 1], 0, scope="within2") == 0.5


class TestGraphHomophily:
    def test_fully_homophilic(self, triangle):
        assert graph_homophily(triangle, [1, 1, 1]) == 1.0

    def test_matches_mean_of_node_values(self):
        rng = np.random.default_rng(3)
        from nodespec.synthetic import er_graph
        g = er_graph(40, 0.15, seed=12)
        labels = rng.integers(0, 3, size=40)
        ratios = per_node_homophily(g, labels)
        valid = ~np.isnan(ratios)
        expected = float(np.mean(ratios[valid]))
        assert abs(graph_homophily(g, labels) - expected) <= 1e-12

    def test_all_isolated_is_error(self):
        with pytest.raises(ValueError):
            graph_homophily(build_graph([], 4), [0, 1, 0, 1])


class TestLabelEntropy:
    def test_degenerate_distribution(self):
        g = star_graph(6)
        labels = [1, 0, 0, 0, 0, 0, 0]
        value = label_entropy(g, labels, 0, "hop1", class_count=5)
        assert 0.0 <= value <= 1e-7

    def test_uniform_five_classes(self):
        g = star_graph(5)
        labels = [0, 0, 1, 2, 3, 4]
        value = label_entropy(g, labels, 0, "hop1", class_count=5)
        assert abs(value - 1.6094) < 1e-3

    def test_uniform_two_classes(self):
        g = star_graph(2)
        labels = [0, 0, 1]
        value = label_entropy(g, labels, 0, "hop1", class_count=2)
        assert abs(value - float(np.log(2))) < 1e-3

    def test_empty_neighborhood_is_nan(self):
        g = build_graph([], 2)
        assert np.isnan(label_entropy(g, [0, 1], 0, "hop1", class_count=2))

    def test_uniform_maximizes(self):
        # perturbing the neighbor label counts away from uniform lowers entropy
        rng = np.random.default_rng(7)
        uniform = star_graph(8)
        labels_uniform = [0] + [0, 0, 1, 1, 2, 2, 3, 3]
        top = label_entropy(uniform, labels_uniform, 0, "hop1", class_count=4)
        for _ in range(20):
            labels = [0] + rng.integers(0, 4, size=8).tolist()
            value = label_entropy(uniform, labels, 0, "hop1", class_count=4)
            assert value <= top + 1e-6


class TestHistogram:
    def test_endpoints(self):
        edges, counts = histogram([0.0, 1.0], 2, (0.0, 1.0))
        assert counts.tolist() == [1, 1]
        np.testing.assert_allclose(edges, [0.0, 0.5, 1.0])

    def test_single_value(self):
        _, counts = histogram([0.5] * 9, 10, (0.0, 1.0))
        assert counts.sum() == 9
        assert np.count_nonzero(counts) == 1

    def test_empty(self):
        _, counts = histogram([], 10, (0.0, 1.0))
        assert counts.tolist() == [0] * 10

    def test_nan_dropped(self):
        _, counts = histogram([0.5, float("nan")], 2, (0.0, 1.0))
        assert counts.sum() == 1

    def test_bad_bin_count(self):
        with pytest.raises(ValueError):
            histogram([0.5], 0)


class TestPropositionClosedForms:
    def test_reference_point(self):
        check = proposition_closed_forms(0.4, 5)
        assert abs(check.epsilon_same_vs_diff - (-0.5)) < 1e-12
        oracle = two_hop_chain_epsilons(0.4, 5)
        assert abs(check.epsilon_same_vs_diff - oracle[0]) < 1e-12
        assert abs(check.epsilon_two_vs_one - oracle[1]) < 1e-12

    def test_two_vs_one_zero_at_reciprocal(self):
        check = proposition_closed_forms(1.0 / 5.0, 5)
        assert check.epsilon_two_vs_one == 0.0

    def test_two_vs_one_reference_value(self):
        check = proposition_closed_forms(0.1, 5)
        assert abs(check.epsilon_two_vs_one - 0.1125) < 1e-12

    def test_matches_matrix_oracle_on_grid(self):
        for classes in range(2, 8):
            for alpha in np.linspace(0.0, 1.0, 21):
                check = proposition_closed_forms(float(alpha), classes)
                e1, e2 = two_hop_chain_epsilons(float(alpha), classes)
                assert abs(check.epsilon_same_vs_diff - e1) < 1e-12
                assert abs(check.epsilon_two_vs_one - e2) < 1e-12
                p_same = (check.epsilon_same_vs_diff + 1) / 2
                assert abs(check.p_same_two_hop - p_same) < 1e-12

    def test_nonpositive_below_two_over_c(self):
        for classes in range(3, 11):
            alphas = np.arange(0.0, 2.0 / classes + 1e-12, 0.01)
            for alpha in alphas:
                check = proposition_closed_forms(float(alpha), classes)
                assert check.epsilon_same_vs_diff <= 1e-12

    def test_sign_flip_exactly_at_one_over_c(self):
        for classes in range(2, 11):
            boundary = 1.0 / classes
            for alpha in np.arange(0.01, 1.0, 0.01):
                check = proposition_closed_forms(float(alpha), classes)
                if alpha < boundary - 1e-12:
                    assert check.epsilon_two_vs_one > 0
                elif alpha > boundary + 1e-12:
                    assert check.epsilon_two_vs_one < 0

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            proposition_closed_forms(1.5, 5)
        with pytest.raises(ValueError):
            proposition_closed_forms(0.5, 1)


class TestPropositionMonteCarlo:
    def test_matches_closed_form_within_three_se(self):
        check = proposition_monte_carlo(0.4, 5, samples=1_000_000, seed=1)
        assert abs(check.mc_epsilon_same_vs_diff - check.epsilon_same_vs_diff) \
            <= 3 * check.se_epsilon_same_vs_diff
        assert abs(check.mc_epsilon_same_vs_diff - (-0.5)) \
            <= 3 * check.se_epsilon_same_vs_diff

    def test_decay_above_reciprocal(self):
        check = proposition_monte_carlo(0.9, 5, samples=200_000, seed=2)
        assert check.epsilon_two_vs_one < 0
        assert check.mc_epsilon_two_vs_one < 0

    def test_boundary_is_zero_within_three_se(self):
        check = proposition_monte_carlo(0.2, 5, samples=200_000, seed=3)
        assert abs(check.mc_epsilon_two_vs_one) <= 3 * check.se_epsilon_two_vs_one

    def test_deterministic_given_seed(self):
        a = proposition_monte_carlo(0.3, 4, samples=10_000, seed=9)
        b = proposition_monte_carlo(0.3, 4, samples=10_000, seed=9)
        assert a.mc_epsilon_same_vs_diff == b.mc_epsilon_same_vs_diff


class TestJaccard:
    def test_identical_neighborhoods(self):
        g = build_graph([(0, 2), (1, 2)], 3)
        assert jaccard_neighbor_distance(g, 0, 1) == 0.0

    def test_disjoint_neighborhoods(self):
        g = build_graph([(0, 1), (2, 3)], 4)
        assert jaccard_neighbor_distance(g, 0, 2) == 1.0

    def test_partial_overlap(self):
        g = build_graph([(4, 1), (4, 2), (5, 2), (5, 3)], 6)
        assert abs(jaccard_neighbor_distance(g, 4, 5) - (1 - 1 / 3)) < 1e-12

    def test_both_empty(self):
        g = build_graph([], 2)
        assert jaccard_neighbor_distance(g, 0, 1) == 0.0


def test_reports_have_consistent_shapes(triangle):
    hom = homophily_report(triangle, [0, 0, 1], bins=4)
    ent = entropy_report(triangle, [0, 0, 1], class_count=2, bins=4)
    assert hom.per_node_h1.size == 3
    assert hom.histogram_h1[1].sum() == 3
    assert ent.per_node_s1.size == 3
    assert 0.0 <= hom.graph_ratio <= 1.0
    top = np.log(2) + 1e-6
    valid = ent.per_node_s1[~np.isnan(ent.per_node_s1)]
    assert np.all((valid >= -1e-6) & (valid <= top))
