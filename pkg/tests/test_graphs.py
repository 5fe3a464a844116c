import io

import numpy as np
import pytest

import grafield as gf
from helpers import random_graph


# printed adjacency of the 4-employee example, used as an independent oracle
TOY_A = np.array(
    [
        [0, 2, 0, 0],
        [2, 0, 3, 3],
        [0, 3, 0, 3],
        [0, 3, 3, 0],
    ],
    dtype=float,
)


def test_toy_graph_matches_printed_matrix(toy):
    assert np.array_equal(toy.adjacency_dense(), TOY_A)
    assert np.array_equal(toy.d, TOY_A.sum(axis=1))
    assert toy.d.tolist() == [2, 8, 6, 6]
    assert toy.N == 22


def test_single_edge():
    g = gf.load_graph([(1, 2, 1.0)])
    assert g.d.tolist() == [1, 1]
    assert g.N == 2


def test_duplicate_edges_sum():
    g = gf.load_graph([(1, 2, 1.0), (1, 2, 1.0)])
    assert g.adjacency_dense()[0, 1] == 2.0
    # reversed orientation merges too
    g2 = gf.load_graph([(1, 2, 1.0), (2, 1, 2.0)])
    assert g2.adjacency_dense()[0, 1] == 3.0
    assert g2.adjacency_dense()[1, 0] == 3.0


def test_self_loop_counted_once():
    g = gf.load_graph([(1, 2, 1.0), (1, 1, 3.0)])
    A = g.adjacency_dense()
    assert A[0, 0] == 3.0
    assert g.d[0] == 4.0
    assert g.N == 5.0
    assert g.N == g.d.sum()


def test_validation_errors():
    with pytest.raises(gf.GraphValidationError):
        gf.load_graph([])
    with pytest.raises(gf.GraphValidationError):
        gf.load_graph([(1, 2, -1.0)])
    with pytest.raises(gf.GraphValidationError):
        gf.load_graph([(1, 2, float("nan"))])
    with pytest.raises(gf.GraphValidationError):
        gf.load_graph([(1, 2)], labels=[1])  # vertex 2 missing from universe


def test_labels_remap_to_original():
    g = gf.load_graph([("blogA", "blogB", 1.0), ("blogB", "blogC", 2.0)])
    assert g.labels == ("blogA", "blogB", "blogC")
    assert g.index_of("blogC") == 2
    with pytest.raises(gf.GraphValidationError):
        g.index_of("nope")
    # integer labels sort numerically even when given out of order
    g2 = gf.load_graph([(10, 3, 1.0), (3, 7, 1.0)])
    assert g2.labels == (3, 7, 10)


def test_degree_sum_equals_total_mass_exactly():
    rng = np.random.default_rng(7)
    for _ in range(50):
        g = random_graph(rng, int(rng.integers(3, 25)))
        assert g.N == g.d.sum()
        # row-wise total is the defining summation order
        assert g.adjacency_dense().sum(axis=1).sum() == g.N
        assert np.isclose(g.adjacency_dense().sum(), g.N, rtol=1e-12, atol=0)


def test_vertex_pmf_toy(toy):
    p = gf.vertex_pmf_mle(toy)
    assert np.allclose(p.p, np.array([2, 8, 6, 6]) / 22, atol=0, rtol=0)
    assert p.tag == "MLE"


def test_vertex_pmf_symmetric_cases():
    k3 = gf.load_graph([(1, 2, 1.0), (1, 3, 1.0), (2, 3, 1.0)])
    assert np.allclose(gf.vertex_pmf_mle(k3).p, 1 / 3)
    path = gf.load_graph([(1, 2, 1.0)])
    assert np.allclose(gf.vertex_pmf_mle(path).p, 0.5)


def test_isolated_vertex_is_named():
    g = gf.load_graph([(1, 2, 1.0)], labels=[1, 2, 99])
    with pytest.raises(gf.IsolatedVertexError) as err:
        gf.vertex_pmf_mle(g)
    assert "99" in str(err.value)


def test_network_pmf_toy(toy):
    P = gf.network_pmf_mle(toy)
    assert P.P[0, 1] == 2 / 22
    assert P.P[1, 2] == 3 / 22
    assert abs(P.P.sum() - 1) < 1e-12
    assert np.array_equal(P.P, P.P.T)


def test_network_pmf_k3():
    k3 = gf.load_graph([(1, 2, 1.0), (1, 3, 1.0), (2, 3, 1.0)])
    P = gf.network_pmf_mle(k3).P
    off = P[~np.eye(3, dtype=bool)]
    assert np.allclose(off, 1 / 6)
    assert np.all(np.diag(P) == 0)


def test_marginal_consistency_random():
    rng = np.random.default_rng(11)
    for _ in range(100):
        g = random_graph(rng, int(rng.integers(3, 31)))
        p = gf.vertex_pmf_mle(g)
        P = gf.network_pmf_mle(g)
        assert np.max(np.abs(P.P.sum(axis=1) - p.p)) < 1e-12


def test_quantile_round_trip(toy):
    p = gf.vertex_pmf_mle(toy)
    for j in range(toy.n):
        assert p.quantile(p.F[j + 1]) == j
    # interior points of each cell map to the owning vertex
    rng = np.random.default_rng(3)
    for j in range(toy.n):
        us = rng.uniform(p.F[j] + 1e-12, p.F[j + 1], size=20)
        assert np.all(p.quantile(us) == j)
    with pytest.raises(ValueError):
        p.quantile(0.0)
    with pytest.raises(ValueError):
        p.quantile(1.5)


def test_quantile_skips_zero_mass_vertex():
    p = gf.make_vertex_pmf(np.array([0.5, 0.0, 0.5]), tag="MLE")
    # F[1] == F[2]; the left-continuous inverse lands on the earlier vertex
    assert p.quantile(p.F[1]) == 0
    assert p.quantile(1.0) == 2


def test_read_edge_list_parses_comments_and_defaults():
    text = "# comment\n1 2\n2 3 2.5\n\n"
    g = gf.read_edge_list(io.StringIO(text))
    A = g.adjacency_dense()
    assert A[0, 1] == 1.0 and A[1, 2] == 2.5
    with pytest.raises(gf.GraphValidationError):
        gf.read_edge_list(io.StringIO("1 2 3 4\n"))


def test_read_matrix_market(tmp_path):
    mm = tmp_path / "g.mtx"
    mm.write_text(
        "%%MatrixMarket matrix coordinate real symmetric\n"
        "3 3 3\n"
        "2 1 2.0\n"
        "3 1 1.0\n"
        "3 2 1.0\n"
    )
    g = gf.read_matrix_market(mm)
    assert g.n == 3
    assert g.adjacency_dense()[0, 1] == 2.0
    assert g.adjacency_dense()[1, 0] == 2.0
    assert g.N == 8.0


def test_read_labels(tmp_path, toy):
    f = tmp_path / "truth.csv"
    f.write_text("vertex,label\n1,a\n2,a\n3,b\n4,b\n")
    labels = gf.read_labels(f, toy)
    assert labels.tolist() == ["a", "a", "b", "b"]
    bad = tmp_path / "bad.csv"
    bad.write_text("vertex,label\n1,a\n")
    with pytest.raises(gf.GraphValidationError):
        gf.read_labels(bad, toy)


def test_write_edge_list_round_trip(tmp_path, toy):
    f = tmp_path / "toy.edges"
    gf.write_edge_list(toy, f)
    g2 = gf.read_edge_list(f)
    assert np.array_equal(g2.adjacency_dense(), toy.adjacency_dense())
    assert g2.labels == toy.labels
