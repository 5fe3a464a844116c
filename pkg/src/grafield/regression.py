"""Graph-structured regression on spatial point data.

Points are joined into an unweighted graph by a coverage radius equal to
the largest first-nearest-neighbor distance, which guarantees minimum
degree one.  The response is then expanded in the top smooth vertex-basis
columns alongside the covariates, and the combined design is fit with an
L1 penalty:

    minimize  ||y - X_G beta||^2 + lambda * ||beta||_1

solved by cyclic coordinate descent with soft-threshold updates.  The
intercept column is never penalized.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.spatial

from .errors import GraphValidationError, NumericalError
from .graphs import Graph, load_graph
from .spectral import kl_decomposition

CD_TOL = 1e-8
CD_MAX_SWEEPS = 10_000


@dataclass(frozen=True)
class SpatialDataset:
    """Planar coordinates with a response and named covariates."""

    coords: np.ndarray
    y: np.ndarray
    X: np.ndarray
    names: tuple

    @property
    def n(self) -> int:
        return self.y.shape[0]


@dataclass(frozen=True)
class RegressionFit:
    """Fitted coefficients and in-sample goodness of fit.

    ``beta`` is ordered (basis coefficients, covariate coefficients) and
    excludes the intercept, which sits in ``intercept``.  ``r2`` is the
    in-sample coefficient of determination as a fraction.
    """

    beta: np.ndarray
    intercept: float
    names: tuple
    lam: float
    r2: float
    selected: tuple
    objective: float
    tau: float | None = None
    tau_minimax: float | None = None
    k: int = 0


def build_spatial_graph(coords, weight: str = "unit") -> Graph:
    """Coverage-radius graph over planar points.

    The radius is the maximum over points of the distance to the nearest
    other point, so every vertex gets at least one neighbor.  ``weight``
    is ``unit`` (default) or ``gaussian``, the latter giving edge weights
    ``exp(-(dist/r)^2)`` inside the radius.
    """
    coords = np.asarray(coords, dtype=float)
    if coords.ndim != 2 or coords.shape[0] < 2:
        raise GraphValidationError("need at least two planar points")
    n = coords.shape[0]
    dist = scipy.spatial.distance.squareform(scipy.spatial.distance.pdist(coords))
    off = dist + np.diag(np.full(n, np.inf))
    nearest = off.min(axis=1)
    if np.any(nearest < 1e-9):
        i, j = divmod(int(np.argmin(off)), n)
        raise GraphValidationError(
            f"duplicate coordinates at rows {i} and {j}: points must be distinct"
        )
    r = float(nearest.max())
    edges = []
    for i in range(n):
        for j in range(i + 1, n):
            if dist[i, j] <= r:
                w = 1.0 if weight == "unit" else float(np.exp(-((dist[i, j] / r) ** 2)))
                edges.append((i + 1, j + 1, w))
    return load_graph(edges, labels=range(1, n + 1))


def soft_threshold(z, t):
    return np.sign(z) * np.maximum(np.abs(z) - t, 0.0)


def lasso_solve(
    design,
    y,
    lam,
    penalty=None,
    tol: float = CD_TOL,
    max_sweeps: int = CD_MAX_SWEEPS,
    track_objective: bool = False,
    debug: bool = False,
):
    """Coordinate descent for ``||y - X b||^2 + lam * sum penalty_j |b_j|``.

    Columns are rescaled to unit norm internally, which leaves the
    minimizer unchanged; coefficients come back on the original scale.
    ``penalty`` weights individual coordinates (0 exempts a column, e.g.
    an intercept).  Iteration stops when no coefficient moves more than
    ``tol`` in one sweep.  With ``track_objective=True`` the return value
    is ``(beta, objectives)`` with one objective value per sweep;
    ``debug=True`` additionally asserts the objective never increases.
    """
    X = np.asarray(design, dtype=float)
    y = np.asarray(y, dtype=float)
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise ValueError("non-finite values in the design or response")
    if lam < 0:
        raise ValueError("penalty must be nonnegative")
    m, q = X.shape
    if y.shape != (m,):
        raise ValueError("response length does not match the design")
    w = np.ones(q) if penalty is None else np.asarray(penalty, dtype=float)

    sq = (X * X).sum(axis=0)
    if np.any(sq == 0):
        raise ValueError("zero column in the design (drop constant columns first)")
    # minimizing over one coordinate: b_j <- soft(x_j'r + |x_j|^2 b_j, lam w_j / 2) / |x_j|^2
    thresholds = 0.5 * lam * w / sq

    beta = np.zeros(q)
    resid = y.copy()
    objectives = []
    for _ in range(max_sweeps):
        delta = 0.0
        for j in range(q):
            bj = beta[j]
            z = X[:, j] @ resid / sq[j] + bj
            new = soft_threshold(z, thresholds[j]) if w[j] else z
            if new != bj:
                resid -= X[:, j] * (new - bj)
                beta[j] = new
                delta = max(delta, abs(new - bj))
        if track_objective or debug:
            exact = y - X @ beta  # running residual drifts; recompute for the record
            objectives.append(float(exact @ exact + lam * (w * np.abs(beta)).sum()))
            if debug and len(objectives) > 1:
                assert objectives[-1] <= objectives[-2] + 1e-9 * (1 + objectives[0]), (
                    "objective increased within a sweep"
                )
        if delta <= tol:
            break
    else:
        warnings.warn("coordinate descent hit the sweep limit", RuntimeWarning, stacklevel=2)
    if track_objective:
        return beta, np.asarray(objectives)
    return beta


def kkt_gap(design, y, beta, lam, penalty=None) -> float:
    """Largest violation of the stationarity conditions at ``beta``.

    At a minimizer, ``2 x_j'(y - X beta)`` equals ``lam * w_j * sign(b_j)``
    on active coordinates and is at most ``lam * w_j`` in magnitude on
    inactive ones; the return value is the worst absolute slack.
    """
    X = np.asarray(design, dtype=float)
    w = np.ones(X.shape[1]) if penalty is None else np.asarray(penalty, dtype=float)
    grad = 2.0 * X.T @ (np.asarray(y) - X @ np.asarray(beta))
    gap = 0.0
    for j, b in enumerate(np.asarray(beta)):
        if w[j] == 0 or b != 0:
            gap = max(gap, abs(grad[j] - lam * w[j] * np.sign(b) if b else grad[j]))
        else:
            gap = max(gap, max(0.0, abs(grad[j]) - lam * w[j]))
    return float(gap)


def _standardize_columns(X, names):
    """Center and scale covariates; constant columns are dropped."""
    X = np.asarray(X, dtype=float)
    mu = X.mean(axis=0)
    sd = X.std(axis=0)
    keep = sd > 1e-12
    if not np.all(keep):
        dropped = [names[i] for i in np.flatnonzero(~keep)]
        warnings.warn(f"dropping constant covariate columns {dropped}", RuntimeWarning, stacklevel=3)
    Z = (X[:, keep] - mu[keep]) / sd[keep]
    kept = [names[i] for i in np.flatnonzero(keep)]
    return Z, kept, mu[keep], sd[keep]


def lambda_grid(design, y, penalty, num=50, ratio=1e-4):
    """Logarithmic grid starting where every penalized coefficient is zero."""
    X = np.asarray(design, dtype=float)
    y = np.asarray(y, dtype=float)
    w = np.asarray(penalty, dtype=float)
    free = w == 0
    resid = y
    if np.any(free):
        # unpenalized columns (the intercept) stay active at lambda_max
        coef, *_ = np.linalg.lstsq(X[:, free], y, rcond=None)
        resid = y - X[:, free] @ coef
    grad = 2.0 * np.abs(X.T @ resid)
    lam_max = float(np.max(grad[~free] / w[~free]))
    if lam_max <= 0:
        lam_max = 1.0
    return np.geomspace(lam_max, lam_max * ratio, num)


def _cv_lambda(design, y, penalty, seed, folds=10, num=50):
    m = design.shape[0]
    rng = np.random.default_rng(seed)
    order = rng.permutation(m)
    parts = np.array_split(order, folds)
    grid = lambda_grid(design, y, penalty, num=num)
    mse = np.zeros(num)
    for part in parts:
        mask = np.ones(m, dtype=bool)
        mask[part] = False
        Xtr, ytr = design[mask], y[mask]
        Xte, yte = design[~mask], y[~mask]
        beta = np.zeros(design.shape[1])
        for i, lam in enumerate(grid):
            beta = _warm_cd(Xtr, ytr, lam, penalty, beta)
            resid = yte - Xte @ beta
            mse[i] += resid @ resid
    best = int(np.argmin(mse))
    return float(grid[best])


def _warm_cd(X, y, lam, penalty, start):
    # same updates as lasso_solve but warm-started; used on the CV path
    sq = (X * X).sum(axis=0)
    w = np.asarray(penalty, dtype=float)
    beta = start.copy()
    resid = y - X @ beta
    for _ in range(CD_MAX_SWEEPS):
        delta = 0.0
        for j in range(X.shape[1]):
            bj = beta[j]
            z = X[:, j] @ resid / sq[j] + bj
            new = soft_threshold(z, 0.5 * lam * w[j] / sq[j]) if w[j] else z
            if new != bj:
                resid -= X[:, j] * (new - bj)
                beta[j] = new
                delta = max(delta, abs(new - bj))
        if delta <= CD_TOL:
            break
    return beta


def spectral_regression(
    data: SpatialDataset,
    k: int = 25,
    operator: str = "reg1",
    tau=0.5,
    lam="auto",
    seed: int = 20240601,
    graph: Graph | None = None,
    log_y: bool = False,
    one_hot: tuple = (),
) -> RegressionFit:
    """Fit the response on spectral basis columns plus covariates.

    ``k`` basis columns come from the chosen operator route on the
    coverage-radius graph (pass ``graph`` to reuse one).  ``lam`` is a
    number or ``"auto"`` for 10-fold cross-validation on a 50-point
    logarithmic grid.  ``one_hot`` names covariates to expand into
    indicator columns; ``log_y`` fits ``log(y)``.
    """
    g = graph if graph is not None else build_spatial_graph(data.coords)
    if k > g.n - 1:
        raise GraphValidationError(f"k={k} exceeds the {g.n - 1} available basis columns")
    y = np.log(data.y) if log_y else np.asarray(data.y, dtype=float)

    X, names = _expand_covariates(data, one_hot)
    Z, kept, _, _ = _standardize_columns(X, names)

    cols = [np.ones((data.n, 1))]
    col_names = ["intercept"]
    tau_resolved = None
    if k > 0:
        from .smoothing import as_tau_policy

        tau_resolved = as_tau_policy(tau).resolve(g) if operator in ("reg1", "reg2") else None
        dec = kl_decomposition(g, operator=operator, tau=tau, m=k)
        cols.append(dec.phi)
        col_names += [f"phi_{i}" for i in range(1, k + 1)]
    cols.append(Z)
    col_names += list(kept)
    design = np.hstack(cols)
    penalty = np.ones(design.shape[1])
    penalty[0] = 0.0  # intercept stays unpenalized

    if lam == "auto":
        lam_value = _cv_lambda(design, y, penalty, seed=seed)
    else:
        lam_value = float(lam)
    beta = lasso_solve(design, y, lam_value, penalty=penalty)
    resid = y - design @ beta
    tss = float(((y - y.mean()) ** 2).sum())
    if tss == 0:
        raise NumericalError("response is constant; no variance to explain")
    r2 = 1.0 - float(resid @ resid) / tss
    objective = float(resid @ resid + lam_value * (penalty * np.abs(beta)).sum())
    selected = tuple(col_names[j] for j in np.flatnonzero(np.abs(beta) > 0) if j != 0)
    return RegressionFit(
        beta=beta[1:],
        intercept=float(beta[0]),
        names=tuple(col_names[1:]),
        lam=lam_value,
        r2=r2,
        selected=selected,
        objective=objective,
        tau=tau_resolved,
        tau_minimax=float(np.sqrt(g.N) / g.n),
        k=k,
    )


def _expand_covariates(data: SpatialDataset, one_hot):
    X = np.asarray(data.X, dtype=float)
    names = list(data.names)
    if not one_hot:
        return X, names
    cols, out_names = [], []
    for j, name in enumerate(names):
        if name in one_hot:
            values = np.unique(X[:, j])
            # drop the first level to avoid collinearity with the intercept
            for v in values[1:]:
                cols.append((X[:, j] == v).astype(float))
                out_names.append(f"{name}=={v:g}")
        else:
            cols.append(X[:, j])
            out_names.append(name)
    return np.column_stack(cols), out_names
