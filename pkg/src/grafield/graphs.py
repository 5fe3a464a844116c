"""Weighted undirected graphs and their empirical probability measures.

A graph is stored as a symmetric nonnegative weight matrix ``A`` together
with the degree vector ``d`` (row sums) and the total edge mass
``N = sum(A)``.  For a simple unit-weight graph ``N = 2|E|``.  Self-loop
weight is counted once in the loop vertex's degree and once in ``N``, so
``N == sum(d)`` always holds exactly.

Two empirical probability measures drive everything downstream: the vertex
mass function ``p(j) = d_j / N`` and the joint network mass function
``P(j, k) = A(j, k) / N``.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sparse

from .errors import GraphValidationError, IsolatedVertexError

DENSE_VERTEX_LIMIT = 5000


def _freeze(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class Graph:
    """Validated weighted undirected graph.

    Attributes
    ----------
    n : int
        Number of vertices.
    A : ndarray or sparse matrix
        Symmetric nonnegative weight matrix.  Dense up to
        ``DENSE_VERTEX_LIMIT`` vertices, CSR beyond that.
    d : ndarray
        Degrees ``d_i = sum_j A(i, j)``.
    N : float
        Total mass ``sum(A) == sum(d)``.
    labels : tuple
        Original vertex labels in internal index order.
    """

    n: int
    A: object
    d: np.ndarray
    N: float
    labels: tuple = field(default=())

    def __post_init__(self):
        if not self.labels:
            object.__setattr__(self, "labels", tuple(range(1, self.n + 1)))
        object.__setattr__(self, "_index", {v: i for i, v in enumerate(self.labels)})

    def index_of(self, label):
        try:
            return self._index[label]
        except KeyError:
            raise GraphValidationError(f"unknown vertex label {label!r}") from None

    def adjacency_dense(self) -> np.ndarray:
        if sparse.issparse(self.A):
            return self.A.toarray()
        return np.asarray(self.A)

    @property
    def is_sparse(self) -> bool:
        return sparse.issparse(self.A)


@dataclass(frozen=True)
class VertexPMF:
    """Discrete probability measure on the vertices.

    ``F`` is the length ``n + 1`` cumulative vector with ``F[0] = 0`` and
    ``F[j] = sum_{x <= j} p(x)``; the quantile is the left-continuous step
    inverse of ``F``.
    """

    p: np.ndarray
    F: np.ndarray
    tag: str

    @property
    def n(self) -> int:
        return self.p.shape[0]

    def quantile(self, u):
        """Left-continuous step quantile, returning 0-based vertex indices.

        For ``u`` in ``(F[j], F[j+1]]`` the result is ``j``.  ``u`` must lie
        in ``(0, 1]``.
        """
        u = np.asarray(u, dtype=float)
        if np.any(u <= 0) or np.any(u > 1):
            raise ValueError("quantile argument must lie in (0, 1]")
        return np.searchsorted(self.F[1:], u, side="left")


@dataclass(frozen=True)
class NetworkPMF:
    """Symmetric joint probability measure on vertex pairs."""

    P: np.ndarray
    tag: str

    @property
    def n(self) -> int:
        return self.P.shape[0]


def make_vertex_pmf(p: np.ndarray, tag: str) -> VertexPMF:
    """Wrap a probability vector, validating normalization."""
    p = np.asarray(p, dtype=float)
    if p.ndim != 1:
        raise GraphValidationError("probability vector must be 1-D")
    if np.any(p < 0):
        raise GraphValidationError("negative probability mass")
    total = p.sum()
    if abs(total - 1.0) > 1e-12 * max(1.0, abs(total)):
        raise GraphValidationError(f"probabilities sum to {total!r}, expected 1")
    F = np.concatenate([[0.0], np.cumsum(p)])
    return VertexPMF(p=_freeze(p), F=_freeze(F), tag=tag)


def load_graph(edges, labels=None) -> Graph:
    """Build a validated :class:`Graph` from an iterable of edges.

    Parameters
    ----------
    edges : iterable of (u, v) or (u, v, weight)
        Undirected edges; missing weights default to 1.  Duplicate edges
        (either orientation) have their weights summed.
    labels : sequence, optional
        Explicit vertex universe.  Vertices not mentioned by any edge can
        only enter through this argument; they end up isolated.

    Raises
    ------
    GraphValidationError
        On an empty edge list, a negative or non-finite weight, or a
        self-inconsistent labels argument.
    """
    triples = []
    for e in edges:
        if len(e) == 2:
            u, v, w = e[0], e[1], 1.0
        elif len(e) == 3:
            u, v, w = e
        else:
            raise GraphValidationError(f"edge {e!r} is not (u, v[, w])")
        w = float(w)
        if not np.isfinite(w):
            raise GraphValidationError(f"non-finite weight on edge ({u}, {v})")
        if w < 0:
            raise GraphValidationError(f"negative weight {w} on edge ({u}, {v})")
        triples.append((u, v, w))
    if not triples:
        raise GraphValidationError("empty edge list")

    if labels is None:
        seen = {}
        for u, v, _ in triples:
            for x in (u, v):
                if x not in seen:
                    seen[x] = None
        ordered = list(seen)
        # purely integer vertex ids sort numerically, anything else keeps
        # first-seen order
        if all(isinstance(x, (int, np.integer)) for x in ordered):
            ordered = sorted(ordered)
        labels = ordered
    else:
        labels = list(labels)
        mentioned = {x for u, v, _ in triples for x in (u, v)}
        missing = mentioned - set(labels)
        if missing:
            raise GraphValidationError(f"edges mention vertices not in labels: {sorted(map(str, missing))[:5]}")
    index = {v: i for i, v in enumerate(labels)}
    n = len(labels)

    use_sparse = n > DENSE_VERTEX_LIMIT
    if use_sparse:
        rows, cols, vals = [], [], []
        for u, v, w in triples:
            i, j = index[u], index[v]
            if i == j:
                rows.append(i), cols.append(j), vals.append(w)
            else:
                rows.extend((i, j)), cols.extend((j, i)), vals.extend((w, w))
        A = sparse.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
        A.sum_duplicates()
        d = np.asarray(A.sum(axis=1)).ravel()
    else:
        A = np.zeros((n, n))
        for u, v, w in triples:
            i, j = index[u], index[v]
            A[i, j] += w
            if i != j:
                A[j, i] += w
        d = A.sum(axis=1)
        _freeze(A)
    N = float(d.sum())
    return Graph(n=n, A=A, d=_freeze(d), N=N, labels=tuple(labels))


def from_adjacency(A, labels=None) -> Graph:
    """Build a Graph from a symmetric nonnegative matrix."""
    if sparse.issparse(A):
        dense = A.toarray() if A.shape[0] <= DENSE_VERTEX_LIMIT else None
    else:
        dense = np.array(A, dtype=float)
    M = dense if dense is not None else A
    n = M.shape[0]
    if M.shape != (n, n):
        raise GraphValidationError("adjacency matrix must be square")
    if dense is not None:
        if np.any(dense < 0):
            raise GraphValidationError("negative weight in adjacency matrix")
        if not np.allclose(dense, dense.T, rtol=0, atol=1e-12):
            raise GraphValidationError("adjacency matrix must be symmetric")
        d = dense.sum(axis=1)
        _freeze(dense)
        A_store = dense
    else:
        if (A != A.T).nnz:
            raise GraphValidationError("adjacency matrix must be symmetric")
        if A.min() < 0:
            raise GraphValidationError("negative weight in adjacency matrix")
        A_store = A.tocsr()
        d = np.asarray(A_store.sum(axis=1)).ravel()
    N = float(d.sum())
    if N == 0:
        raise GraphValidationError("graph has no edge mass")
    labels = tuple(labels) if labels is not None else tuple(range(1, n + 1))
    return Graph(n=n, A=A_store, d=_freeze(d), N=N, labels=labels)


def vertex_pmf_mle(g: Graph) -> VertexPMF:
    """Plug-in vertex probabilities ``p(j) = d_j / N``.

    Raises :class:`IsolatedVertexError` if any degree is zero; isolated
    vertices are legal inputs only to the smoothed estimators.
    """
    zero = np.flatnonzero(g.d == 0)
    if zero.size:
        raise IsolatedVertexError([g.labels[i] for i in zero])
    return make_vertex_pmf(g.d / g.N, tag="MLE")


def network_pmf_mle(g: Graph) -> NetworkPMF:
    """Plug-in joint probabilities ``P = A / N``."""
    if g.N <= 0:
        raise GraphValidationError("total edge mass is zero")
    P = g.adjacency_dense() / g.N
    return NetworkPMF(P=_freeze(P), tag="MLE")


# ---------------------------------------------------------------------------
# file formats


def read_edge_list(path_or_buffer) -> Graph:
    """Read a whitespace-separated ``u v [w]`` edge list.

    Weight defaults to 1.0 and lines starting with ``#`` are ignored.
    """
    if hasattr(path_or_buffer, "read"):
        lines = path_or_buffer.read().splitlines()
    else:
        with open(path_or_buffer) as fh:
            lines = fh.read().splitlines()
    edges = []
    for ln, raw in enumerate(lines, 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) not in (2, 3):
            raise GraphValidationError(f"line {ln}: expected 'u v [w]', got {raw!r}")
        u, v = _coerce_label(parts[0]), _coerce_label(parts[1])
        w = float(parts[2]) if len(parts) == 3 else 1.0
        edges.append((u, v, w))
    return load_graph(edges)


def _coerce_label(token: str):
    try:
        return int(token)
    except ValueError:
        return token


def read_matrix_market(path) -> Graph:
    """Read a symmetric Matrix Market coordinate file."""
    import scipy.io

    M = scipy.io.mmread(path)
    if sparse.issparse(M):
        M = M.tocsr()
        asym = abs(M - M.T)
        if asym.nnz and asym.max() > 1e-12:
            raise GraphValidationError("Matrix Market input is not symmetric")
    return from_adjacency(M)


def read_graph(path) -> Graph:
    """Dispatch on extension: ``.mtx`` is Matrix Market, all else edge list."""
    if str(path).endswith(".mtx"):
        return read_matrix_market(path)
    return read_edge_list(path)


def read_labels(path, g: Graph) -> np.ndarray:
    """Read a ``vertex,label`` CSV aligned against the graph's labels."""
    import csv as _csv

    with open(path, newline="") as fh:
        rows = [r for r in _csv.reader(fh) if r and not r[0].startswith("#")]
    if rows and rows[0][0].strip().lower() in ("vertex", "node", "id"):
        rows = rows[1:]
    mapping = {}
    for r in rows:
        if len(r) < 2:
            raise GraphValidationError(f"label row {r!r} is not 'vertex,label'")
        mapping[_coerce_label(r[0].strip())] = r[1].strip()
    out = []
    for v in g.labels:
        if v not in mapping:
            raise GraphValidationError(f"no ground-truth label for vertex {v!r}")
        out.append(mapping[v])
    return np.asarray(out)


def write_edge_list(g: Graph, path) -> None:
    """Write the upper triangle (and loops) as ``u v w`` lines."""
    A = g.A.tocoo() if g.is_sparse else None
    buf = io.StringIO()
    if A is None:
        dense = g.adjacency_dense()
        ii, jj = np.nonzero(np.triu(dense))
        for i, j in zip(ii, jj):
            buf.write(f"{g.labels[i]} {g.labels[j]} {dense[i, j]:.12g}\n")
    else:
        for i, j, w in zip(A.row, A.col, A.data):
            if i <= j:
                buf.write(f"{g.labels[i]} {g.labels[j]} {w:.12g}\n")
    with open(path, "w") as fh:
        fh.write(buf.getvalue())
