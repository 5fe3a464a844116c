from fractions import Fraction

import numpy as np
import pytest

import grafield as gf
from helpers import random_graph


def _field_bruteforce(g):
    """Elementwise oracle: form p and P by loops and divide."""
    n = g.n
    A = g.adjacency_dense()
    N = sum(A[i, j] for i in range(n) for j in range(n))
    d = [sum(A[i, j] for j in range(n)) for i in range(n)]
    C = np.empty((n, n))
    for x in range(n):
        for y in range(n):
            C[x, y] = (A[x, y] / N) / ((d[x] / N) * (d[y] / N))
    return C


def test_toy_field_exact(toy):
    C = gf.empirical_grafield(gf.network_pmf_mle(toy), gf.vertex_pmf_mle(toy)).C
    expected = {
        (0, 1): Fraction(22, 8),
        (1, 2): Fraction(22, 16),
        (1, 3): Fraction(22, 16),
        (2, 3): Fraction(22, 12),
    }
    for (i, j), val in expected.items():
        assert abs(C[i, j] - float(val)) < 1e-14
        assert abs(C[j, i] - float(val)) < 1e-14
    # zero everywhere off the edge pattern, including the diagonal
    mask = np.zeros((4, 4), dtype=bool)
    for (i, j) in expected:
        mask[i, j] = mask[j, i] = True
    assert np.all(C[~mask] == 0)


def test_toy_strength_ratios(toy):
    # the claims are exact in rational arithmetic
    assert Fraction(22, 8) / Fraction(22, 16) == 2
    assert Fraction(22, 8) / Fraction(22, 12) == Fraction(3, 2)
    C = gf.empirical_grafield(gf.network_pmf_mle(toy), gf.vertex_pmf_mle(toy)).C
    assert abs(C[0, 1] / C[1, 2] - 2.0) < 1e-14
    assert abs(C[0, 1] / C[1, 3] - 2.0) < 1e-14
    assert abs(C[0, 1] / C[2, 3] - 1.5) < 1e-14


def test_k3_field():
    k3 = gf.load_graph([(1, 2, 1.0), (1, 3, 1.0), (2, 3, 1.0)])
    C = gf.empirical_grafield(gf.network_pmf_mle(k3), gf.vertex_pmf_mle(k3)).C
    off = C[~np.eye(3, dtype=bool)]
    assert np.allclose(off, 1.5, atol=1e-14, rtol=0)
    assert np.all(np.diag(C) == 0)


def test_field_matches_bruteforce_oracle():
    rng = np.random.default_rng(23)
    g = random_graph(rng, 5)
    C = gf.empirical_grafield(gf.network_pmf_mle(g), gf.vertex_pmf_mle(g)).C
    assert np.allclose(C, _field_bruteforce(g), atol=1e-12, rtol=0)


def test_zero_probability_rejected():
    p = gf.make_vertex_pmf(np.array([0.5, 0.5, 0.0]), tag="MLE")
    P = gf.NetworkPMF(P=np.full((3, 3), 1 / 9), tag="MLE")
    with pytest.raises(gf.GraphValidationError):
        gf.empirical_grafield(P, p)


def test_normalization_invariant_random():
    rng = np.random.default_rng(41)
    for _ in range(100):
        g = random_graph(rng, int(rng.integers(3, 20)))
        C = gf.empirical_grafield(gf.network_pmf_mle(g), gf.vertex_pmf_mle(g))
        total = np.sum(C.C * C.cell_measure)
        assert abs(total - 1.0) < 1e-10
        assert np.allclose(C.C, C.C.T, atol=1e-12)


def test_scale_invariance():
    rng = np.random.default_rng(5)
    g = random_graph(rng, 8)
    C1 = gf.empirical_grafield(gf.network_pmf_mle(g), gf.vertex_pmf_mle(g)).C
    for c in (0.25, 7.0):
        g2 = gf.from_adjacency(c * g.adjacency_dense(), labels=g.labels)
        C2 = gf.empirical_grafield(gf.network_pmf_mle(g2), gf.vertex_pmf_mle(g2)).C
        assert np.allclose(C1, C2, atol=1e-12, rtol=0)


def _entropy_quadrature(C, p):
    """Cellwise quadrature oracle, all n^2 cells summed by loops."""
    total = 0.0
    for x in range(len(p)):
        for y in range(len(p)):
            total += (C[x, y] - 1.0) ** 2 * p[x] * p[y]
    return total


def test_k3_entropy_half():
    k3 = gf.load_graph([(1, 2, 1.0), (1, 3, 1.0), (2, 3, 1.0)])
    C = gf.empirical_grafield(gf.network_pmf_mle(k3), gf.vertex_pmf_mle(k3))
    oracle = _entropy_quadrature(C.C, C.p)
    assert abs(oracle - 0.5) < 1e-14
    assert abs(gf.graph_entropy(C) - 0.5) < 1e-14


def test_flat_field_zero_entropy():
    # rank-one weights (with loops) make the joint exactly the product of
    # marginals, so the field is identically 1
    w = np.array([1.0, 2.0, 0.5, 3.0])
    g = gf.from_adjacency(np.outer(w, w))
    C = gf.empirical_grafield(gf.network_pmf_mle(g), gf.vertex_pmf_mle(g))
    assert np.allclose(C.C, 1.0, atol=1e-12)
    assert gf.graph_entropy(C) < 1e-24


def test_entropy_matches_quadrature_random():
    rng = np.random.default_rng(99)
    for _ in range(20):
        g = random_graph(rng, int(rng.integers(3, 15)))
        C = gf.empirical_grafield(gf.network_pmf_mle(g), gf.vertex_pmf_mle(g))
        assert abs(gf.graph_entropy(C) - _entropy_quadrature(C.C, C.p)) < 1e-12


def test_entropy_parseval_toy(toy):
    C = gf.empirical_grafield(gf.network_pmf_mle(toy), gf.vertex_pmf_mle(toy))
    dec = gf.kl_decomposition(toy)
    assert abs(gf.graph_entropy(C) - np.sum(dec.eigenvalues**2)) < 1e-8
