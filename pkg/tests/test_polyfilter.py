import numpy as np
import pytest

from nodespec.graph import normalized_laplacian, scaled_laplacian, spmm
from nodespec.oracle import SpectralFilter, eigendecompose, exact_filter
from nodespec.polyfilter import (BASES, CoefficientMatrix, bernstein_operators,
                                 combine, frequency_response, propagate)
from nodespec.synthetic import er_graph, path_graph


def _operators(graph):
    lap = normalized_laplacian(graph)
    return {"monomial": lap, "bernstein": lap,
            "chebyshev": scaled_laplacian(lap, 2.0)}


class TestPropagate:
    def test_chebyshev_first_layers(self, rng):
        g = er_graph(15, 0.3, seed=1)
        op = _operators(g)["chebyshev"]
        x = rng.standard_normal((15, 4))
        stack = propagate("chebyshev", op, x, 3)
        np.testing.assert_array_equal(stack.layers[0], x)
        np.testing.assert_allclose(stack.layers[1], spmm(op, x), atol=1e-14)

    def test_chebyshev_order_two_dense_oracle(self, rng):
        g = er_graph(12, 0.3, seed=2)
        op = _operators(g)["chebyshev"]
        x = rng.standard_normal((12, 3))
        stack = propagate("chebyshev", op, x, 2)
        dense = op.to_dense()
        expected = 2.0 * dense @ (dense @ x) - x
        np.testing.assert_allclose(stack.layers[2], expected, atol=1e-10)

    def test_chebyshev_matches_dense_polynomial_to_order_ten(self, rng):
        g = er_graph(14, 0.25, seed=3)
        op = _operators(g)["chebyshev"]
        x = rng.standard_normal((14, 2))
        stack = propagate("chebyshev", op, x, 10)
        dense = op.to_dense()
        t_prev, t_cur = np.eye(14), dense
        for k in range(2, 11):
            t_prev, t_cur = t_cur, 2.0 * dense @ t_cur - t_prev
            np.testing.assert_allclose(stack.layers[k], t_cur @ x, atol=1e-9)

    def test_monomial_delta_support(self):
        g = path_graph(5)
        op = _operators(g)["monomial"]
        delta = np.zeros((5, 1))
        delta[0, 0] = 1.0
        stack = propagate("monomial", op, delta, 2)
        assert np.all(stack.layers[2][3:] == 0.0)

    def test_monomial_layers_are_operator_powers(self, rng):
        g = er_graph(10, 0.4, seed=4)
        op = _operators(g)["monomial"]
        x = rng.standard_normal((10, 2))
        stack = propagate("monomial", op, x, 3)
        dense = op.to_dense()
        np.testing.assert_allclose(stack.layers[3],
                                   dense @ dense @ dense @ x, atol=1e-10)

    def test_bernstein_layers_sum_to_input(self, rng):
        # partition of unity at the operator level: sum_k layers[k] = X
        g = er_graph(13, 0.3, seed=5)
        op = _operators(g)["bernstein"]
        x = rng.standard_normal((13, 3))
        stack = propagate("bernstein", op, x, 6)
        np.testing.assert_allclose(sum(stack.layers), x, atol=1e-10)

    def test_operator_kind_enforced(self, rng):
        g = er_graph(8, 0.4, seed=6)
        ops = _operators(g)
        x = rng.standard_normal((8, 1))
        with pytest.raises(ValueError, match="scaled_laplacian"):
            propagate("chebyshev", ops["monomial"], x, 2)
        with pytest.raises(ValueError, match="normalized_laplacian"):
            propagate("monomial", ops["chebyshev"], x, 2)

    def test_unknown_basis(self, rng):
        g = er_graph(8, 0.4, seed=7)
        with pytest.raises(ValueError, match="unknown basis"):
            propagate("jacobi", _operators(g)["monomial"],
                      rng.standard_normal((8, 1)), 2)


class TestBernsteinOperators:
    def test_factors_sum_to_identity(self):
        g = er_graph(9, 0.4, seed=8)
        lap = normalized_laplacian(g)
        low, high = bernstein_operators(lap)
        np.testing.assert_allclose(low.to_dense() + high.to_dense(),
                                   np.eye(9), atol=1e-14)


class TestCombine:
    def test_order_zero_selector(self, rng):
        g = er_graph(10, 0.3, seed=9)
        x = rng.standard_normal((10, 4))
        stack = propagate("monomial", _operators(g)["monomial"], x, 3)
        psi = np.zeros((10, 4))
        psi[:, 0] = 1.0
        np.testing.assert_array_equal(combine(stack, psi), stack.layers[0])

    def test_constant_rows_equal_global_filter(self, rng):
        g = er_graph(10, 0.3, seed=10)
        x = rng.standard_normal((10, 2))
        stack = propagate("chebyshev", _operators(g)["chebyshev"], x, 4)
        gamma = rng.uniform(-1, 1, size=5)
        global_out = sum(c * layer for c, layer in zip(gamma, stack.layers))
        np.testing.assert_allclose(combine(stack, np.tile(gamma, (10, 1))),
                                   global_out, atol=1e-12)

    def test_random_psi_matches_row_loop(self, rng):
        g = er_graph(5, 0.5, seed=11)
        x = rng.standard_normal((5, 3))
        stack = propagate("monomial", _operators(g)["monomial"], x, 2)
        psi = rng.standard_normal((5, 3))
        out = combine(stack, CoefficientMatrix(psi))
        for i in range(5):
            expected = sum(psi[i, k] * stack.layers[k][i] for k in range(3))
            np.testing.assert_allclose(out[i], expected, atol=1e-12)

    def test_shape_mismatch(self, rng):
        g = er_graph(6, 0.5, seed=12)
        stack = propagate("monomial", _operators(g)["monomial"],
                          rng.standard_normal((6, 2)), 2)
        with pytest.raises(ValueError):
            combine(stack, np.zeros((6, 5)))


class TestFrequencyResponse:
    def test_order_zero_constant(self):
        grid = np.linspace(0, 2, 9)
        np.testing.assert_allclose(
            frequency_response("monomial", [1.0], grid), 1.0)
        np.testing.assert_allclose(
            frequency_response("chebyshev", [1.0], grid), 1.0)

    def test_bernstein_order_zero_term(self):
        grid = np.linspace(0, 2, 9)
        # a lone k=0 coefficient of a degree-0 expansion is the constant 1
        np.testing.assert_allclose(
            frequency_response("bernstein", [1.0], grid), 1.0)

    def test_bernstein_first_basis_element(self):
        grid = np.linspace(0, 2, 9)
        got = frequency_response("bernstein", [1.0, 0.0, 0.0, 0.0], grid)
        np.testing.assert_allclose(got, (1.0 - grid / 2.0) ** 3, atol=1e-14)

    def test_chebyshev_linear_term(self):
        grid = np.linspace(0, 2, 21)
        got = frequency_response("chebyshev", [0.0, 1.0], grid)
        np.testing.assert_allclose(got, grid - 1.0, atol=1e-14)

    def test_monomial_at_zero(self):
        np.testing.assert_allclose(
            frequency_response("monomial", [1.0, 1.0], [0.0]), [1.0])

    def test_bernstein_partition_of_unity(self):
        grid = np.linspace(0, 2, 33)
        total = frequency_response("bernstein", np.ones(8), grid)
        np.testing.assert_allclose(total, 1.0, atol=1e-12)

    def test_grid_validation(self):
        with pytest.raises(ValueError):
            frequency_response("monomial", [1.0], [2.5])


class TestOracleEquivalence:
    def test_all_bases_match_exact_filter(self, rng):
        for trial in range(6):
            n = int(rng.integers(8, 33))
            g = er_graph(n, 0.25, seed=100 + trial)
            lap = normalized_laplacian(g)
            es = eigendecompose(lap)
            ops = _operators(g)
            x = rng.standard_normal(n)
            order = int(rng.integers(0, 9))
            coeffs = rng.uniform(-1, 1, size=order + 1)
            for basis in BASES:
                stack = propagate(basis, ops[basis], x[:, None], order)
                z = combine(stack, np.tile(coeffs, (n, 1)))[:, 0]
                filt = SpectralFilter(
                    lambda lam, b=basis: frequency_response(b, coeffs, lam))
                np.testing.assert_allclose(z, exact_filter(es, filt, x),
                                           atol=1e-10)

    def test_locality_delta_input(self, rng):
        g = path_graph(8)
        ops = _operators(g)
        delta = np.zeros((8, 1))
        delta[2, 0] = 1.0
        for basis in BASES:
            stack = propagate(basis, ops[basis], delta, 3)
            psi = rng.standard_normal((8, 4))
            out = combine(stack, psi)[:, 0]
            assert abs(out[6]) <= 1e-12 and abs(out[7]) <= 1e-12
