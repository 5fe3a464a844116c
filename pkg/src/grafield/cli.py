"""Command-line frontend.

Every subcommand stages its artifacts in memory and writes them only
after the whole run has succeeded (each file atomically, temp + rename),
so a failing run leaves nothing half-written.  The resolved configuration
and library version are echoed into ``meta.json``, and unless
``--no-plots`` is given a figure is rendered next to the delimited
output.  Exit codes: 0 success, 2 validation error, 3 data or IO error,
4 numerical failure.
"""

from __future__ import annotations

import argparse
import io
import json
import os
import sys
import tempfile
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .errors import DataError, GraphValidationError, NumericalError
from . import clustering, datasets, field, graphs, regression, smoothing, spectral

DEFAULT_SEED = 20240601

EXIT_VALIDATION = 2
EXIT_DATA = 3
EXIT_NUMERICAL = 4


def _json_value(x):
    if isinstance(x, (bool, str)):
        return x
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return float(x)
    return str(x)


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.12g}"
    return str(x)


class Artifacts:
    """Staged run outputs, flushed together once the command succeeds."""

    def __init__(self, out_dir):
        self.out = Path(out_dir)
        self.items: dict[str, object] = {}

    def add_table(self, stem, header, rows, fmt):
        if fmt == "json":
            records = [dict(zip(header, (_json_value(x) for x in r))) for r in rows]
            self.items[f"{stem}.json"] = json.dumps(records, indent=2, sort_keys=True) + "\n"
        else:
            lines = [",".join(header)]
            lines += [",".join(_fmt(x) for x in r) for r in rows]
            self.items[f"{stem}.csv"] = "\n".join(lines) + "\n"

    def add_json(self, stem, obj):
        self.items[f"{stem}.json"] = json.dumps(obj, indent=2, sort_keys=True, default=str) + "\n"

    def add_figure(self, name, render, *args, **kwargs):
        buf = io.BytesIO()
        render(*args, path=buf, **kwargs)
        self.items[name] = buf.getvalue()

    def flush(self):
        self.out.mkdir(parents=True, exist_ok=True)
        for name, payload in self.items.items():
            path = self.out / name
            mode = "wb" if isinstance(payload, bytes) else "w"
            fd, tmp = tempfile.mkstemp(dir=self.out, prefix=f".{name}.")
            try:
                with os.fdopen(fd, mode) as fh:
                    fh.write(payload)
                os.replace(tmp, path)
            except BaseException:
                if os.path.exists(tmp):
                    os.unlink(tmp)
                raise


def _add_meta(art: Artifacts, args: argparse.Namespace) -> None:
    config = {k: v for k, v in sorted(vars(args).items()) if k != "func" and v is not None}
    art.add_json(
        "meta",
        {
            "command": args.command,
            "config": config,
            "version": __version__,
            "timestamp": datetime.now(timezone.utc).isoformat(),
        },
    )


def _load_graph(args) -> graphs.Graph:
    return graphs.read_graph(args.graph)


def _tau(args):
    """The --tau flag is a number or a policy name (minimax, stein, ...)."""
    t = args.tau
    if t is None:
        return 0.5
    if isinstance(t, (int, float)):
        return float(t)
    try:
        return float(t)
    except ValueError:
        return smoothing.as_tau_policy(t)


# ---------------------------------------------------------------------------
# subcommands


def cmd_grafield(args) -> None:
    g = _load_graph(args)
    p = graphs.vertex_pmf_mle(g)
    C = field.empirical_grafield(graphs.network_pmf_mle(g), p)
    art = Artifacts(args.out)
    header = ["vertex"] + [str(v) for v in g.labels]
    rows = [[g.labels[i]] + list(C.C[i]) for i in range(g.n)]
    art.add_table("grafield", header, rows, args.format)
    art.add_json("entropy", {"entropy": field.graph_entropy(C)})
    if not args.no_plots:
        from . import plotting

        art.add_figure("grafield.png", plotting.save_field_heatmap, C.C, g.labels)
    _add_meta(art, args)
    art.flush()


_ESTIMATORS = ("mle", "laplace", "kt", "perks", "minimax", "stein", "good-turing")


def cmd_smooth(args) -> None:
    g = _load_graph(args)
    if args.tau is not None:
        pmf = smoothing.smooth_vertex_pmf(g, float(args.tau))
    elif args.estimator == "mle":
        pmf = graphs.vertex_pmf_mle(g)
    elif args.estimator == "good-turing":
        pmf = smoothing.good_turing_pmf(g)
    else:
        pmf = smoothing.smooth_vertex_pmf(g, smoothing.TauPolicy(kind=args.estimator))
    art = Artifacts(args.out)
    rows = [[g.labels[i], pmf.p[i]] for i in range(g.n)]
    art.add_table("pmf", ["vertex", "p"], rows, args.format)
    if not args.no_plots:
        from . import plotting

        art.add_figure("pmf.png", plotting.save_pmf, pmf.p, g.labels, title=f"vertex pmf [{pmf.tag}]")
    _add_meta(art, args)
    art.flush()


def _decomposition(g, args, m):
    if args.operator == "pagerank":
        return spectral.pagerank_spectrum(g, alpha=args.alpha, m=m)
    dec = spectral.kl_decomposition(g, operator=args.operator, tau=_tau(args), m=m)
    return dec.eigenvalues, dec.phi


def cmd_spectrum(args) -> None:
    g = _load_graph(args)
    m = min(args.top, g.n - 1)
    vals, phi = _decomposition(g, args, m)
    art = Artifacts(args.out)
    art.add_table("eigenvalues", ["k", "eigenvalue"],
                  [[k + 1, v] for k, v in enumerate(vals)], args.format)
    header = ["vertex"] + [f"phi_{k + 1}" for k in range(phi.shape[1])]
    rows = [[g.labels[i]] + list(phi[i]) for i in range(g.n)]
    art.add_table("basis", header, rows, args.format)
    if not args.no_plots:
        from . import plotting

        art.add_figure("spectrum.png", plotting.save_spectrum, vals)
    _add_meta(art, args)
    art.flush()


def cmd_embed(args) -> None:
    g = _load_graph(args)
    k = min(args.k, g.n - 1)
    if args.mode == "diffusion":
        dec = spectral.kl_decomposition(g, operator="laplacian", m=k)
        coords = spectral.diffusion_coords(dec, t=args.t, k=k)
    else:
        _, coords = _decomposition(g, args, k)
    art = Artifacts(args.out)
    header = ["vertex"] + [f"dim_{j + 1}" for j in range(coords.shape[1])]
    rows = [[g.labels[i]] + list(coords[i]) for i in range(g.n)]
    art.add_table("embedding", header, rows, args.format)
    if not args.no_plots:
        from . import plotting

        art.add_figure("embedding.png", plotting.save_embedding, coords)
    _add_meta(art, args)
    art.flush()


def cmd_cluster(args) -> None:
    g = _load_graph(args)
    result = clustering.spectral_cluster(
        g,
        k=args.k,
        operator=args.operator,
        tau=_tau(args),
        seed=args.seed,
        restarts=args.restarts,
        alpha=args.alpha,
        row_normalize=args.row_normalize,
    )
    art = Artifacts(args.out)
    rows = [[g.labels[i], int(result.labels[i])] for i in range(g.n)]
    art.add_table("labels", ["vertex", "cluster"], rows, args.format)

    m_gap = min(max(args.k + 4, 10), g.n - 1)
    vals, phi = _decomposition(g, args, m_gap)
    report = {
        "k": args.k,
        "wcss": result.wcss,
        "k_suggested": clustering.choose_k_spectral_gap(vals),
        "seed": result.seed,
        "restarts": result.restarts,
        "operator": args.operator,
    }
    if args.labels:
        truth = graphs.read_labels(args.labels, g)
        report["misclassification"] = clustering.misclassification(result.labels, truth)
    art.add_json("report", report)
    if not args.no_plots:
        from . import plotting

        art.add_figure(
            "clusters.png", plotting.save_embedding, phi[:, :2],
            color=[str(c) for c in result.labels],
            title=f"clusters (k={args.k}, {args.operator})",
        )
    _add_meta(art, args)
    art.flush()


def cmd_regress(args) -> None:
    data = _load_spatial(args.data, args.response, args.covariates)
    lam = "auto" if args.lam == "auto" else float(args.lam)
    g = regression.build_spatial_graph(data.coords)
    fit = regression.spectral_regression(
        data,
        k=args.k,
        operator=args.operator,
        tau=_tau(args),
        lam=lam,
        seed=args.seed,
        graph=g,
        log_y=args.log_y,
        one_hot=tuple(args.one_hot.split(",")) if args.one_hot else (),
    )
    art = Artifacts(args.out)
    art.add_json(
        "fit",
        {
            "r2": fit.r2,
            "lambda": fit.lam,
            "nonzero": len(fit.selected),
            "selected": list(fit.selected),
            "beta": {name: float(b) for name, b in zip(fit.names, fit.beta)},
            "intercept": fit.intercept,
            "k": fit.k,
            "tau": fit.tau,
            "tau_minimax": fit.tau_minimax,
            "operator": args.operator,
        },
    )
    if fit.k > 0:
        dec = spectral.kl_decomposition(g, operator=args.operator, tau=_tau(args), m=fit.k)
        header = ["vertex"] + [f"phi_{j + 1}" for j in range(fit.k)]
        rows = [[g.labels[i]] + list(dec.phi[i]) for i in range(g.n)]
        art.add_table("basis", header, rows, args.format)
    if not args.no_plots:
        from . import plotting

        y = np.log(data.y) if args.log_y else data.y
        fitted = _fitted_values(data, fit, g, args)
        art.add_figure("fit.png", plotting.save_fit, y, fitted)
    _add_meta(art, args)
    art.flush()


def _fitted_values(data, fit, g, args):
    # rebuild the design to show fitted values; cheaper than persisting it
    cols = [np.ones((data.n, 1))]
    if fit.k > 0:
        dec = spectral.kl_decomposition(g, operator=args.operator, tau=_tau(args), m=fit.k)
        cols.append(dec.phi)
    names = list(data.names)
    X = data.X
    if args.one_hot:
        X, names = regression._expand_covariates(data, tuple(args.one_hot.split(",")))
    Z, _, _, _ = regression._standardize_columns(X, names)
    cols.append(Z)
    design = np.hstack(cols)
    return design @ np.concatenate([[fit.intercept], fit.beta])


def _load_spatial(path, response, covariates):
    import csv as _csv

    with open(path, newline="") as fh:
        rows = list(_csv.DictReader(fh))
    if not rows:
        raise DataError(f"{path} is empty")
    names = [c.strip() for c in covariates.split(",")]
    try:
        coords = np.array([[float(r["x"]), float(r["y"])] for r in rows])
        y = np.array([float(r[response]) for r in rows])
        X = np.array([[float(r[c]) for c in names] for r in rows])
    except KeyError as exc:
        raise DataError(f"{path} lacks required column {exc}") from exc
    return regression.SpatialDataset(coords=coords, y=y, X=X, names=tuple(names))


def cmd_fetch(args) -> None:
    reports = []
    for name in args.names:
        reports.append(datasets.fetch_dataset(name, data_dir=args.data_dir, refresh=args.refresh))
    print(json.dumps(reports, indent=2, sort_keys=True))


# ---------------------------------------------------------------------------
# parser


def _add_common(sp, graph_arg=True):
    if graph_arg:
        sp.add_argument("--graph", required=True, help="edge list or .mtx file")
    sp.add_argument("--format", choices=("csv", "json"), default="csv")
    sp.add_argument("--seed", type=int, default=DEFAULT_SEED)
    sp.add_argument("--out", default="out", help="output directory")
    sp.add_argument("--no-plots", action="store_true", help="skip figure rendering")


def _add_operator(sp, default="laplacian"):
    sp.add_argument("--operator", choices=spectral.OPERATOR_KINDS, default=default)
    sp.add_argument("--tau", default=0.5, help="flattening constant or policy name")
    sp.add_argument("--alpha", type=float, default=0.85, help="teleport weight")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="grafield",
        description="Nonparametric spectral graph analysis: field kernel, smoothed "
        "spectral operators, clustering, and graph regression.",
    )
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("grafield", help="emit the correlation field matrix and entropy")
    _add_common(sp)
    sp.set_defaults(func=cmd_grafield)

    sp = sub.add_parser("smooth", help="emit a smoothed vertex pmf")
    _add_common(sp)
    sp.add_argument("--estimator", choices=_ESTIMATORS, default="laplace")
    sp.add_argument("--tau", default=None, help="override the estimator's tau")
    sp.set_defaults(func=cmd_smooth)

    sp = sub.add_parser("spectrum", help="emit eigenvalues and the vertex basis")
    _add_common(sp)
    _add_operator(sp)
    sp.add_argument("--top", type=int, default=10, help="number of pairs")
    sp.set_defaults(func=cmd_spectrum)

    sp = sub.add_parser("embed", help="emit spectral or diffusion coordinates")
    _add_common(sp)
    _add_operator(sp)
    sp.add_argument("--mode", choices=("kl", "diffusion"), default="kl")
    sp.add_argument("--t", type=int, default=1, help="diffusion time")
    sp.add_argument("--k", type=int, default=2, help="embedding dimension")
    sp.set_defaults(func=cmd_embed)

    sp = sub.add_parser("cluster", help="spectral community detection")
    _add_common(sp)
    _add_operator(sp, default="reg1")
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--labels", default=None, help="vertex,label ground-truth CSV")
    sp.add_argument("--restarts", type=int, default=50)
    sp.add_argument("--row-normalize", action="store_true")
    sp.set_defaults(func=cmd_cluster)

    sp = sub.add_parser("regress", help="spectral graph regression on spatial data")
    _add_common(sp, graph_arg=False)
    sp.add_argument("--data", required=True, help="CSV with x,y and model columns")
    sp.add_argument("--operator", choices=("laplacian", "reg1", "reg2"), default="reg1")
    sp.add_argument("--tau", default=0.5)
    sp.add_argument("--k", type=int, default=25)
    sp.add_argument("--lambda", dest="lam", default="auto")
    sp.add_argument("--response", default="zinc")
    sp.add_argument("--covariates", default="ffreq,dist,soil")
    sp.add_argument("--log-y", action="store_true")
    sp.add_argument("--one-hot", default="", help="comma list of covariates to expand")
    sp.set_defaults(func=cmd_regress)

    sp = sub.add_parser("fetch", help="download and convert benchmark datasets")
    sp.add_argument("names", nargs="+", choices=sorted(datasets.REGISTRY))
    sp.add_argument("--data-dir", default="data")
    sp.add_argument("--refresh", action="store_true")
    sp.set_defaults(func=cmd_fetch)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (GraphValidationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (DataError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (NumericalError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return 0


if __name__ == "__main__":
    sys.exit(main())
