"""Report figures rendered next to the delimited outputs.

Every CLI subcommand that emits a table also drops a PNG beside it.  The
Agg backend is forced so runs work headless, and PNG metadata is stripped
so identical runs produce byte-identical files.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_SAVE_OPTS = {"dpi": 150, "bbox_inches": "tight", "metadata": {"Software": None}}


def _finish(fig, path):
    # path may be a filesystem path or a writable buffer
    fig.savefig(path, format="png", **_SAVE_OPTS)
    plt.close(fig)
    return path


def save_field_heatmap(C, labels, path):
    fig, ax = plt.subplots(figsize=(5.2, 4.4))
    im = ax.imshow(C, cmap="viridis", interpolation="nearest")
    fig.colorbar(im, ax=ax, label="tie strength vs baseline")
    ticks = np.arange(len(labels))
    if len(labels) <= 30:
        ax.set_xticks(ticks, [str(v) for v in labels], rotation=90, fontsize=7)
        ax.set_yticks(ticks, [str(v) for v in labels], fontsize=7)
    ax.set_title("graph correlation field")
    return _finish(fig, path)


def save_spectrum(eigenvalues, path):
    lam = np.asarray(eigenvalues)
    k = np.arange(1, lam.size + 1)
    fig, ax = plt.subplots(figsize=(5.6, 3.6))
    ax.axhline(0.0, color="0.8", lw=0.8)
    markerline, stemlines, _ = ax.stem(k, lam)
    plt.setp(markerline, markersize=4)
    plt.setp(stemlines, linewidth=1)
    ax.set_xlabel("component k")
    ax.set_ylabel(r"$\lambda_k$")
    ax.set_title("spectrum (raw periodogram)")
    return _finish(fig, path)


def save_embedding(coords, path, color=None, title="spectral embedding"):
    coords = np.asarray(coords)
    x = coords[:, 0]
    y = coords[:, 1] if coords.shape[1] > 1 else np.zeros_like(x)
    fig, ax = plt.subplots(figsize=(5.0, 4.4))
    if color is None:
        ax.scatter(x, y, s=18, c="tab:blue", edgecolors="none")
    else:
        codes = {c: i for i, c in enumerate(dict.fromkeys(color))}
        ax.scatter(x, y, s=18, c=[codes[c] for c in color], cmap="tab10", edgecolors="none")
    ax.set_xlabel("coordinate 1")
    ax.set_ylabel("coordinate 2")
    ax.set_title(title)
    return _finish(fig, path)


def save_pmf(p, labels, path, title="vertex probability mass"):
    p = np.asarray(p)
    fig, ax = plt.subplots(figsize=(5.6, 3.4))
    ax.bar(np.arange(p.size), p, width=0.85)
    if p.size <= 30:
        ax.set_xticks(np.arange(p.size), [str(v) for v in labels], rotation=90, fontsize=7)
    ax.set_ylabel("p(vertex)")
    ax.set_title(title)
    return _finish(fig, path)


def save_fit(y, fitted, path):
    y = np.asarray(y)
    fitted = np.asarray(fitted)
    fig, ax = plt.subplots(figsize=(4.6, 4.4))
    ax.scatter(y, fitted, s=16, c="tab:blue", edgecolors="none")
    lo = min(y.min(), fitted.min())
    hi = max(y.max(), fitted.max())
    ax.plot([lo, hi], [lo, hi], color="0.6", lw=1)
    ax.set_xlabel("observed")
    ax.set_ylabel("fitted")
    ax.set_title("regression fit")
    return _finish(fig, path)
