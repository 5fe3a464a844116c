"""Spectral pipeline: quantile-grid bases, transform matrices, eigenmaps.

One pipeline produces every operator family.  A piecewise-constant basis
is laid on the vertex quantile grid of a probability measure ``b``; the
transform-coefficient matrix of the centered field in that basis is

    M[j, k] = P(j, k) / sqrt(b_j b_k) - sqrt(b_j b_k)        (block pulse)
    M[j, k] = P(j, k) - b_j b_k,   S = diag(b)               (characteristic)

and the generalized symmetric eigenproblem ``M theta = lambda S theta``
yields the Karhunen-Loeve vertex basis ``phi_k(j) = amplitude_j *
theta_{jk}``.  Plugging the raw measures in gives the normalized
Laplacian / modularity / random-walk spectra; plugging smoothed measures
in gives the Type-I and Type-II regularized variants; smoothing the
transition kernel row-wise gives the teleporting random walk.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sparse
import scipy.sparse.linalg as splinalg

from .errors import GraphValidationError, IsolatedVertexError, NumericalError
from .graphs import Graph, NetworkPMF, VertexPMF, _freeze, network_pmf_mle, vertex_pmf_mle
from .smoothing import as_tau_policy, smooth_network_pmf, smooth_transition, smooth_vertex_pmf

DENSE_SOLVER_LIMIT = 2000

BLOCK_PULSE = "block-pulse"
CHARACTERISTIC = "characteristic"
REGULARIZED_BLOCK_PULSE = "regularized-block-pulse"

OPERATOR_KINDS = ("laplacian", "centered", "modularity", "rw", "reg1", "reg2", "pagerank")


@dataclass(frozen=True)
class BasisFamily:
    """Orthogonal piecewise-constant functions on the vertex quantile grid.

    ``grid`` holds the breakpoints ``0 = u_0 < u_1 < ... < u_n = 1`` with
    ``u_j`` the cumulative probability through vertex ``j``; block ``j``
    has height ``amplitudes[j]`` on ``(u_{j-1}, u_j]``.  Block-pulse
    amplitudes ``b_j^{-1/2}`` make the family orthonormal; characteristic
    amplitudes are all one, giving ``<eta_j, eta_j> = b_j``.
    """

    family: str
    grid: np.ndarray
    amplitudes: np.ndarray
    pmf: np.ndarray
    tag: str
    tau: float | None = None

    @property
    def n(self) -> int:
        return self.pmf.shape[0]

    def evaluate(self, u) -> np.ndarray:
        """Evaluate all blocks at points of (0, 1]; returns (len(u), n)."""
        u = np.atleast_1d(np.asarray(u, dtype=float))
        if np.any(u <= 0) or np.any(u > 1):
            raise ValueError("basis functions live on (0, 1]")
        cell = np.searchsorted(self.grid[1:], u, side="left")
        out = np.zeros((u.size, self.n))
        out[np.arange(u.size), cell] = self.amplitudes[cell]
        return out


def build_basis(p: VertexPMF, family: str = BLOCK_PULSE, tau: float | None = None) -> BasisFamily:
    """Construct a basis family on the quantile grid of ``p``.

    For the regularized family pass the already-smoothed measure (from
    :func:`grafield.smoothing.smooth_vertex_pmf`) together with the tau it
    was built with; the amplitudes are then ``p_tau^{-1/2}`` and the grid
    follows the smoothed measure, which is what keeps the Gram matrix the
    identity.
    """
    if family not in (BLOCK_PULSE, CHARACTERISTIC, REGULARIZED_BLOCK_PULSE):
        raise ValueError(f"unknown basis family {family!r}")
    if family == CHARACTERISTIC:
        amplitudes = np.ones(p.n)
    else:
        if np.any(p.p <= 0):
            raise GraphValidationError(
                "block-pulse amplitudes divide by p(j); zero-mass vertex present "
                "(smooth the measure first)"
            )
        amplitudes = 1.0 / np.sqrt(p.p)
    if family == REGULARIZED_BLOCK_PULSE and (tau is None or tau < 0):
        raise ValueError("regularized family needs the tau the measure was smoothed with")
    return BasisFamily(
        family=family,
        grid=p.F,
        amplitudes=_freeze(amplitudes),
        pmf=p.p,
        tag=p.tag,
        tau=tau,
    )


@dataclass(frozen=True)
class GMatrix:
    """Transform-coefficient matrix of the centered field in a basis.

    ``M`` is symmetric; ``S`` is the Gram matrix of the basis (identity
    for the block-pulse families, ``diag(b)`` for the characteristic one).
    Large sparse graphs keep ``M`` in the factored form
    ``c1 * W A W + c2 * a a^T - w w^T`` and materialize on demand.
    """

    basis: BasisFamily
    s_diag: np.ndarray
    _dense: np.ndarray | None = None
    _factored: tuple | None = None

    @property
    def n(self) -> int:
        return self.basis.n

    @property
    def M(self) -> np.ndarray:
        if self._dense is not None:
            return self._dense
        A, c1, c2, b = self._factored
        W = 1.0 / np.sqrt(b)
        M = c1 * (A.multiply(np.outer(W, W))).toarray()
        if c2:
            M += c2 * np.outer(W, W)
        M -= np.outer(np.sqrt(b), np.sqrt(b))
        return M

    @property
    def S(self) -> np.ndarray:
        return np.diag(self.s_diag)

    def whitened_dense(self) -> np.ndarray:
        """The matrix ``S^{-1/2} M S^{-1/2}``, materialized."""
        if self._dense is None:
            return self.M  # factored form is already whitened (S = I)
        if np.all(self.s_diag == 1.0):
            return self._dense
        w = 1.0 / np.sqrt(self.s_diag)
        return self._dense * np.outer(w, w)

    def whitened_operator(self):
        """Matrix-free form of ``S^{-1/2} M S^{-1/2}`` for iterative solves."""
        if self._factored is None:
            return self.whitened_dense()
        A, c1, c2, b = self._factored
        rb = np.sqrt(b)
        wv = 1.0 / rb

        def matvec(v):
            out = c1 * (wv * (A @ (wv * v)))
            if c2:
                out += c2 * wv * (wv @ v)
            out -= rb * (rb @ v)
            return out

        return splinalg.LinearOperator((self.n, self.n), matvec=matvec, dtype=float)


def g_matrix(P: NetworkPMF, p: VertexPMF, basis: BasisFamily) -> GMatrix:
    """Assemble the transform matrix of the centered field.

    ``p`` must be the measure the basis was built from; ``P`` is whatever
    joint estimate is being transformed (raw for the empirical and Type-I
    routes, smoothed for Type-II).
    """
    if basis.n != p.n or P.n != p.n:
        raise GraphValidationError("basis, joint, and marginal sizes disagree")
    if not np.array_equal(basis.pmf, p.p):
        raise GraphValidationError("basis was built from a different vertex measure")
    b = basis.pmf
    if basis.family == CHARACTERISTIC:
        M = P.P - np.outer(b, b)
        s = b.copy()
    else:
        rb = np.sqrt(b)
        M = P.P / np.outer(rb, rb) - np.outer(rb, rb)
        s = np.ones(p.n)
    return GMatrix(basis=basis, s_diag=_freeze(s), _dense=_freeze(M))


def g_matrix_from_graph(g: Graph, basis: BasisFamily, joint_tau: float = 0.0) -> GMatrix:
    """Factored transform matrix straight from a (possibly sparse) graph.

    Only the block-pulse families are supported on the sparse path; the
    characteristic route rescales to the same whitened operator anyway.
    """
    if basis.family == CHARACTERISTIC:
        raise ValueError("sparse assembly supports the block-pulse families only")
    Z = g.N + g.n * joint_tau
    A = g.A if g.is_sparse else sparse.csr_matrix(g.A)
    factored = (A, 1.0 / Z, joint_tau / (g.n * Z), basis.pmf)
    return GMatrix(basis=basis, s_diag=_freeze(np.ones(g.n)), _factored=factored)


@dataclass(frozen=True)
class SpectralDecomposition:
    """Nontrivial eigenpairs of the transform matrix plus the vertex basis.

    ``eigenvalues`` are signed and ordered by decreasing magnitude; the
    flat direction (the constant function, eigenvalue pinned at zero by
    centering) is excluded, so index 0 is the leading nontrivial pair.
    ``theta`` holds the basis coefficients and ``phi`` the vertex-domain
    values ``phi_k(j) = amplitudes[j] * theta[j, k]``; the columns of
    ``phi`` are orthonormal in the inner product weighted by the basis
    measure, and the entry of largest magnitude in each column is
    positive.
    """

    eigenvalues: np.ndarray
    theta: np.ndarray
    phi: np.ndarray
    basis: BasisFamily

    @property
    def n(self) -> int:
        return self.phi.shape[0]

    @property
    def m(self) -> int:
        return self.phi.shape[1]


def _fix_signs(phi: np.ndarray, theta: np.ndarray | None = None) -> None:
    # deterministic orientation: the largest-magnitude entry is positive
    for k in range(phi.shape[1]):
        i = int(np.argmax(np.abs(phi[:, k])))
        if phi[i, k] < 0:
            phi[:, k] *= -1.0
            if theta is not None:
                theta[:, k] *= -1.0


def solve_spectrum(gm: GMatrix, m: int | None = None) -> SpectralDecomposition:
    """Solve ``M theta = lambda S theta`` and keep the top nontrivial pairs.

    ``m`` defaults to the full nontrivial count ``n - 1`` and is clamped
    there with a warning when larger.  Dense symmetric solve up to
    ``DENSE_SOLVER_LIMIT`` vertices, implicitly restarted Lanczos above.
    Ordering is by decreasing magnitude with ties broken toward the
    positive eigenvalue; signs follow the largest-magnitude convention.
    """
    n = gm.n
    if m is None:
        m = n - 1
    if m > n - 1:
        warnings.warn(
            f"requested {m} pairs but only {n - 1} nontrivial ones exist; clamping",
            RuntimeWarning,
            stacklevel=2,
        )
        m = n - 1
    if m < 1:
        raise ValueError("need at least one eigenpair")
    w0 = np.sqrt(gm.basis.pmf)
    w0 = w0 / np.linalg.norm(w0)

    if n <= DENSE_SOLVER_LIMIT:
        vals, vecs = scipy.linalg.eigh(gm.whitened_dense())
        ov = vecs.T @ w0
        trivial = int(np.argmax(np.abs(ov)))
        # when the flat direction is degenerate with a structural zero the
        # solver returns an arbitrary basis of the eigenspace; rotate within
        # the cluster so one column carries the flat direction exactly
        cluster = np.flatnonzero(np.abs(vals - vals[trivial]) < 1e-9)
        if cluster.size > 1:
            c = ov[cluster]
            norm_c = np.linalg.norm(c)
            if norm_c > 1e-12:
                v = c.copy()
                v[0] += np.copysign(norm_c, c[0] if c[0] != 0 else 1.0)
                H = np.eye(c.size) - 2.0 * np.outer(v, v) / (v @ v)
                vecs[:, cluster] = vecs[:, cluster] @ H
                trivial = int(cluster[0])
        keep = np.delete(np.arange(n), trivial)
        vals, vecs = vals[keep], vecs[:, keep]
    else:
        op = gm.whitened_operator()
        k = min(m + 2, n - 2)
        v0 = np.ones(n) + 1e-3 * np.arange(n)  # fixed start for reproducibility
        ncv = min(n - 1, max(4 * k + 1, 40))  # clustered spectra need room
        try:
            vals, vecs = splinalg.eigsh(op, k=k, which="LM", v0=v0, tol=1e-10, ncv=ncv)
        except splinalg.ArpackNoConvergence as exc:
            raise NumericalError(f"iterative eigensolver failed to converge: {exc}") from exc
        # the flat direction sits at eigenvalue ~0 and is normally invisible
        # to a largest-magnitude solve, but guard against it anyway
        keep = np.abs(w0 @ vecs) < 0.9
        vals, vecs = vals[keep], vecs[:, keep]

    order = np.lexsort((-vals, -np.abs(vals)))[:m]
    vals, vecs = vals[order], vecs[:, order]
    if vals.size < m:
        raise NumericalError(f"solver returned {vals.size} usable pairs, wanted {m}")

    if gm.basis.family == CHARACTERISTIC:
        theta = vecs / np.sqrt(gm.s_diag)[:, None]
    else:
        theta = vecs.copy()
    phi = theta * gm.basis.amplitudes[:, None]
    _fix_signs(phi, theta)
    return SpectralDecomposition(
        eigenvalues=_freeze(vals.copy()),
        theta=_freeze(theta),
        phi=_freeze(phi),
        basis=gm.basis,
    )


# ---------------------------------------------------------------------------
# shift-operator catalogue


@dataclass(frozen=True)
class ShiftOperator:
    """A named n-by-n spectral matrix from the standard catalogue."""

    kind: str
    matrix: np.ndarray
    tau: float | None = None
    alpha: float | None = None


def shift_operator(g: Graph, kind: str, tau: float | None = None, alpha: float | None = None) -> ShiftOperator:
    """Materialize one of the classical spectral matrices.

    ``laplacian`` is ``D^{-1/2} A D^{-1/2}``; ``centered`` subtracts the
    rank-one flat term ``sqrt(p) sqrt(p)^T``; ``modularity`` is
    ``A - d d^T / N``; ``rw`` is ``D^{-1} A``; ``reg1`` and ``reg2`` use
    the inflated degrees ``d + tau`` (Type-II also inflates the weights by
    ``tau/n``); ``pagerank`` mixes the random walk with the uniform
    teleport at weight ``alpha``.
    """
    if kind not in OPERATOR_KINDS:
        raise ValueError(f"unknown operator kind {kind!r}; choose from {OPERATOR_KINDS}")
    A = g.adjacency_dense()
    d, N, n = g.d, g.N, g.n

    def need_positive_degrees():
        zero = np.flatnonzero(d == 0)
        if zero.size:
            raise IsolatedVertexError([g.labels[i] for i in zero])

    if kind in ("laplacian", "centered"):
        need_positive_degrees()
        rd = np.sqrt(d)
        L = A / np.outer(rd, rd)
        if kind == "centered":
            L = L - np.outer(rd, rd) / N
        return ShiftOperator(kind=kind, matrix=_freeze(L))
    if kind == "modularity":
        return ShiftOperator(kind=kind, matrix=_freeze(A - np.outer(d, d) / N))
    if kind == "rw":
        need_positive_degrees()
        return ShiftOperator(kind=kind, matrix=_freeze(A / d[:, None]))
    if kind in ("reg1", "reg2"):
        t = 0.0 if tau is None else as_tau_policy(tau).resolve(g)
        if t < 0:
            raise ValueError("tau must be nonnegative")
        if t == 0:
            need_positive_degrees()
        rdt = np.sqrt(d + t)
        base = A if kind == "reg1" else A + t / n
        return ShiftOperator(kind=kind, matrix=_freeze(base / np.outer(rdt, rdt)), tau=t)
    a = 0.85 if alpha is None else float(alpha)
    T = smooth_transition(g, alpha=a).T
    return ShiftOperator(kind="pagerank", matrix=T, alpha=a)


# ---------------------------------------------------------------------------
# unified route


def kl_decomposition(g: Graph, operator: str = "laplacian", tau=0.5, m: int | None = None) -> SpectralDecomposition:
    """Run the full pipeline for one operator family.

    ``laplacian``, ``centered`` and ``rw`` share the empirical block-pulse
    route (their nontrivial spectra coincide); ``modularity`` uses the
    characteristic basis; ``reg1`` smooths the marginals only and ``reg2``
    both measures.  ``tau`` may be a number, policy name, or TauPolicy and
    is ignored by the unsmoothed routes.
    """
    if operator == "pagerank":
        raise ValueError("use pagerank_spectrum for the teleporting kernel")
    if operator not in OPERATOR_KINDS:
        raise ValueError(f"unknown operator kind {operator!r}")
    if operator in ("reg1", "reg2"):
        t = as_tau_policy(tau).resolve(g)
        p = smooth_vertex_pmf(g, t)
        basis = build_basis(p, REGULARIZED_BLOCK_PULSE, tau=t)
        if g.is_sparse:
            gm = g_matrix_from_graph(g, basis, joint_tau=t if operator == "reg2" else 0.0)
        else:
            P = smooth_network_pmf(g, t) if operator == "reg2" else network_pmf_mle(g)
            gm = g_matrix(P, p, basis)
    else:
        p = vertex_pmf_mle(g)
        family = CHARACTERISTIC if operator == "modularity" else BLOCK_PULSE
        if g.is_sparse:
            basis = build_basis(p, BLOCK_PULSE)
            gm = g_matrix_from_graph(g, basis)
        else:
            basis = build_basis(p, family)
            gm = g_matrix(network_pmf_mle(g), p, basis)
    return solve_spectrum(gm, m=m)


def pagerank_spectrum(g: Graph, alpha: float = 0.85, m: int | None = None):
    """Nontrivial eigenpairs of the teleporting random-walk kernel.

    The uniform teleport scales every nontrivial eigenvalue by
    ``1 - alpha`` and shifts each right eigenvector by a constant, so both
    follow in closed form from the empirical decomposition:

        lambda'_k = (1 - alpha) lambda_k
        x_k = phi_k - alpha * mean(phi_k) / ((1-alpha)(1-lambda_k) + alpha)

    Returns ``(eigenvalues, vectors)`` with the same ordering and sign
    conventions as :func:`solve_spectrum`.  The vectors are eigenvectors
    of the nonsymmetric kernel and are not orthonormal in any weighted
    inner product, which is why this route does not return a
    :class:`SpectralDecomposition`.
    """
    if not 0 <= alpha <= 1:
        raise ValueError("alpha must lie in [0, 1]")
    dec = kl_decomposition(g, operator="laplacian", m=m)
    lam = dec.eigenvalues
    shift = -alpha * dec.phi.mean(axis=0) / ((1 - alpha) * (1 - lam) + alpha)
    vecs = dec.phi + shift[None, :]
    vals = (1 - alpha) * lam
    _fix_signs(vecs)
    return vals, vecs


# ---------------------------------------------------------------------------
# graph Fourier transform and diffusion geometry


def gft(y, dec: SpectralDecomposition, p: VertexPMF | None = None, weighted: bool = True) -> np.ndarray:
    """Coefficients of a vertex signal in the Karhunen-Loeve basis.

    By default the expansion uses the measure-weighted inner product
    ``<y, phi_k> = sum_x y(x) phi_k(x) p(x)`` so that Parseval holds:
    with the full nontrivial basis,
    ``sum_k  yhat_k^2 + (sum_x y(x) p(x))^2 = sum_x y(x)^2 p(x)``.
    Set ``weighted=False`` for the plain unweighted sum.
    """
    y = np.asarray(y, dtype=float)
    if y.shape != (dec.n,):
        raise ValueError(f"signal length {y.shape} does not match n={dec.n}")
    w = dec.basis.pmf if p is None else p.p
    if weighted:
        return dec.phi.T @ (y * w)
    return dec.phi.T @ y


def _check_diffusion_inputs(dec: SpectralDecomposition, t) -> None:
    if dec.basis.family not in (BLOCK_PULSE,):
        raise ValueError("diffusion coordinates need the empirical block-pulse route")
    if not dec.basis.tag.startswith("MLE"):
        raise ValueError("diffusion coordinates need plug-in (unsmoothed) measures")
    if t < 0 or int(t) != t:
        raise ValueError("diffusion time must be a nonnegative integer")
    if t >= 8 and dec.eigenvalues.size and np.min(dec.eigenvalues) < -1 + 1e-9:
        warnings.warn(
            "eigenvalue -1 present (bipartite structure): the walk has no "
            "stationary limit and long-time diffusion coordinates oscillate",
            RuntimeWarning,
            stacklevel=3,
        )


def diffusion_coords(dec: SpectralDecomposition, t: int, k: int | None = None) -> np.ndarray:
    """Diffusion-map embedding: row ``x`` is ``(lambda_j^t phi_j(x))_j``.

    Eigenvalue signs are kept, so coordinates along negative directions
    alternate with ``t``.  At ``t = 0`` the embedding is the Karhunen-
    Loeve basis itself.
    """
    k = dec.m if k is None else k
    if not 1 <= k <= dec.m:
        raise ValueError(f"k must lie in 1..{dec.m}")
    _check_diffusion_inputs(dec, t)
    scale = dec.eigenvalues[:k] ** t
    return dec.phi[:, :k] * scale[None, :]


def diffusion_distance(dec: SpectralDecomposition, x: int, y: int, t: int) -> float:
    """Euclidean distance between two vertices in diffusion coordinates.

    ``x`` and ``y`` are 0-based vertex indices.  The squared distance is
    ``sum_j lambda_j^{2t} (phi_j(x) - phi_j(y))^2`` over all retained
    pairs; it is symmetric and zero when the coordinate rows coincide.
    """
    for v in (x, y):
        if not 0 <= v < dec.n:
            raise ValueError(f"vertex index {v} out of range 0..{dec.n - 1}")
    _check_diffusion_inputs(dec, t)
    diff = dec.phi[x, :] - dec.phi[y, :]
    return float(np.sqrt(np.sum(dec.eigenvalues ** (2 * t) * diff * diff)))
