"""Shared generators and oracles for the test suite."""

import numpy as np
import scipy.sparse as sparse
import scipy.sparse.csgraph as csgraph

import grafield as gf

TOY_EDGES = [(1, 2, 2.0), (2, 3, 3.0), (2, 4, 3.0), (3, 4, 3.0)]


def toy_graph():
    return gf.load_graph(TOY_EDGES)


def random_graph(rng, n, p_edge=0.45, weighted=True, ensure_degrees=True):
    """Random symmetric weighted graph; resamples until no vertex is isolated."""
    for _ in range(200):
        mask = rng.random((n, n)) < p_edge
        mask = np.triu(mask, 1)
        W = np.where(mask, rng.uniform(0.2, 3.0, (n, n)) if weighted else 1.0, 0.0)
        A = W + W.T
        if not ensure_degrees or np.all(A.sum(axis=1) > 0):
            return gf.from_adjacency(A)
    raise RuntimeError("failed to draw a graph without isolated vertices")


def is_connected(g):
    A = sparse.csr_matrix(g.adjacency_dense())
    ncomp, _ = csgraph.connected_components(A, directed=False)
    return ncomp == 1


def is_bipartite(g):
    A = g.adjacency_dense() > 0
    color = np.full(g.n, -1)
    for start in range(g.n):
        if color[start] >= 0:
            continue
        color[start] = 0
        stack = [start]
        while stack:
            u = stack.pop()
            for v in np.flatnonzero(A[u]):
                if color[v] < 0:
                    color[v] = 1 - color[u]
                    stack.append(v)
                elif color[v] == color[u]:
                    return False
    return True


def random_connected_graph(rng, n, p_edge=0.45, weighted=True):
    for _ in range(500):
        g = random_graph(rng, n, p_edge, weighted)
        if is_connected(g):
            return g
    raise RuntimeError("failed to draw a connected graph")


def random_connected_nonbipartite(rng, n, p_edge=0.45, weighted=True):
    for _ in range(500):
        g = random_connected_graph(rng, n, p_edge, weighted)
        if not is_bipartite(g):
            return g
    raise RuntimeError("failed to draw a non-bipartite graph")


def two_cliques_with_bridge(size=5):
    edges = []
    for i in range(1, size + 1):
        for j in range(i + 1, size + 1):
            edges.append((i, j, 1.0))
            edges.append((i + size, j + size, 1.0))
    edges.append((size, size + 1, 1.0))
    return gf.load_graph(edges)


def planted_sbm_with_pendants(seed, n_core=400, p_in=0.05, p_out=0.002, n_pendant=40):
    """Two planted blocks plus 40 degree-1 vertices arriving as detached pairs.

    The detached pairs are what break the unregularized route: their
    localized eigenvalues sit at +-1, above the block-split eigenvalue,
    while degree inflation pushes them below it.  Rare isolated core
    vertices are patched with one within-block edge so the unregularized
    baseline stays computable.
    """
    rng = np.random.default_rng(seed)
    half = n_core // 2
    block = np.repeat([0, 1], half)
    edges = []
    degree = np.zeros(n_core, dtype=int)
    for i in range(n_core):
        for j in range(i + 1, n_core):
            p = p_in if block[i] == block[j] else p_out
            if rng.random() < p:
                edges.append((i + 1, j + 1, 1.0))
                degree[i] += 1
                degree[j] += 1
    for i in np.flatnonzero(degree == 0):
        peers = np.flatnonzero((block == block[i]) & (np.arange(n_core) != i))
        j = int(rng.choice(peers))
        edges.append((min(i, j) + 1, max(i, j) + 1, 1.0))
        degree[i] += 1
        degree[j] += 1
    truth = list(block)
    for k in range(n_pendant // 2):
        a, b = n_core + 2 * k + 1, n_core + 2 * k + 2
        edges.append((a, b, 1.0))
        truth += [k % 2, k % 2]
    g = gf.load_graph(edges, labels=range(1, n_core + n_pendant + 1))
    return g, np.asarray(truth)


def match_generalized_pencil(dec, B, D, tol_vals=1e-10, tol_vecs=1e-8):
    """Assert the decomposition equals an independent solve of ``B x = lam D x``.

    The reference deflates the exact null direction (the constant, since
    the rows of B sum to zero) before calling the dense symmetric solver,
    so degeneracy between the flat direction and structural zeros cannot
    contaminate it.  Eigenvectors are compared per eigenvalue cluster, as
    D-orthogonal projectors when degenerate.
    """
    import scipy.linalg

    d = np.diag(D)
    n = B.shape[0]
    w = np.sqrt(d / d.sum())  # whitened image of the constant, unit norm
    Bw = B / np.sqrt(np.outer(d, d))
    v = w.copy()
    v[0] += np.copysign(1.0, w[0])
    H = np.eye(n) - 2.0 * np.outer(v, v) / (v @ v)
    V = H[:, 1:]  # orthonormal basis of the complement of w
    vals, Z = scipy.linalg.eigh(V.T @ Bw @ V)
    theta_ref = (V @ Z) / np.sqrt(d)[:, None]  # D-orthonormal, constant-free

    # compare in ascending signed order: presentation order is ambiguous
    # when a +-lambda pair ties in magnitude to the last ulp
    assert dec.m == n - 1, "pencil comparison needs the full nontrivial set"
    ours_order = np.argsort(dec.eigenvalues)
    ref_order = np.argsort(vals)
    vals = vals[ref_order]
    vecs = theta_ref[:, ref_order]
    our_vals = dec.eigenvalues[ours_order]
    assert np.max(np.abs(vals - our_vals)) < tol_vals

    scale = np.sqrt(dec.theta[:, 0] @ D @ dec.theta[:, 0])
    theta = (dec.theta / scale)[:, ours_order]
    start = 0
    while start < dec.m:
        stop = start + 1
        while stop < dec.m and abs(vals[stop] - vals[start]) < 1e-9:
            stop += 1
        ours, ref = theta[:, start:stop], vecs[:, start:stop]
        if stop - start == 1:
            a, b = ours[:, 0], ref[:, 0]
            sign = np.sign(a @ D @ b)
            assert np.max(np.abs(a - sign * b)) < tol_vecs
        else:
            P1 = ours @ ours.T @ D
            P2 = ref @ ref.T @ D
            assert np.max(np.abs(P1 - P2)) < tol_vecs
        start = stop
