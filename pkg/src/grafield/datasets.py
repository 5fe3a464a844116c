"""Benchmark dataset fetching and conversion.

Each dataset is pinned to one or more source URLs.  Downloads are
verified against a checksum lock file in the data directory: the first
successful fetch records the content hash (and prints it), later fetches
must match it exactly.  Converted canonical files are

    <name>.edges          whitespace edge list ``u v w``
    <name>_labels.csv     ``vertex,label`` ground truth, when the source has one
    meuse.csv             columns x,y,zinc,ffreq,dist,soil

A directory already holding the canonical files acts as a pre-seeded
cache and no download is attempted.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import urllib.request
import zipfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError

_NEWMAN = "https://websites.umich.edu/~mejn/netdata"
_NETZSCHLEUDER = "https://networks.skewed.de/net"
_RDATASETS = "https://vincentarelbundock.github.io/Rdatasets/csv"


@dataclass(frozen=True)
class DatasetSpec:
    name: str
    urls: tuple
    kind: str  # gml-zip | netz-csv-zip | csv
    note: str = ""


REGISTRY = {
    "polblogs": DatasetSpec(
        "polblogs",
        (f"{_NEWMAN}/polblogs.zip", f"{_NETZSCHLEUDER}/polblogs/files/polblogs.csv.zip"),
        "gml-zip",
        "directed blog citations; symmetrized, largest component also written separately",
    ),
    "football": DatasetSpec(
        "football", (f"{_NEWMAN}/football.zip",), "gml-zip", "conference ids in 'value'"
    ),
    "karate": DatasetSpec(
        "karate", (f"{_NEWMAN}/karate.zip",), "gml-zip", "no ground-truth attribute in the GML"
    ),
    "adjnoun": DatasetSpec(
        "adjnoun", (f"{_NEWMAN}/adjnoun.zip",), "gml-zip", "0 = adjective, 1 = noun"
    ),
    "mexican": DatasetSpec(
        "mexican",
        (f"{_NETZSCHLEUDER}/mexican_power/files/mexican_power.csv.zip",),
        "netz-csv-zip",
        "political ties; military/civilian split when the node table carries it",
    ),
    "meuse": DatasetSpec(
        "meuse",
        (f"{_RDATASETS}/sp/meuse.csv",),
        "csv",
        "zinc concentrations on the Meuse floodplain; dist column is metres",
    ),
}


def data_dir_default() -> Path:
    return Path("data")


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _lock_path(data_dir: Path) -> Path:
    return data_dir / "checksums.json"


def _read_lock(data_dir: Path) -> dict:
    path = _lock_path(data_dir)
    if path.exists():
        return json.loads(path.read_text())
    return {}


def _write_lock(data_dir: Path, lock: dict) -> None:
    _lock_path(data_dir).write_text(json.dumps(lock, indent=2, sort_keys=True) + "\n")


def canonical_files(name: str, data_dir: Path) -> list[Path]:
    if name == "meuse":
        return [data_dir / "meuse.csv"]
    return [data_dir / f"{name}.edges"]


def fetch_dataset(name: str, data_dir=None, refresh: bool = False) -> dict:
    """Fetch and convert one dataset into the data directory.

    Returns a report dict with the produced files and shape summary.
    Raises :class:`DataError` on checksum mismatch or, when offline with
    no cache, with manual download instructions.
    """
    if name not in REGISTRY:
        raise DataError(f"unknown dataset {name!r}; known: {sorted(REGISTRY)}")
    spec = REGISTRY[name]
    data_dir = Path(data_dir) if data_dir else data_dir_default()
    data_dir.mkdir(parents=True, exist_ok=True)

    existing = canonical_files(name, data_dir)
    if not refresh and all(f.exists() for f in existing):
        report = {"name": name, "source": "cache", "files": [str(f) for f in existing]}
        report.update(_summarize(name, data_dir))
        return report

    payload, url = _download(spec)
    digest = _sha256(payload)
    lock = _read_lock(data_dir)
    recorded = lock.get(name, {}).get("sha256")
    if recorded and recorded != digest:
        raise DataError(
            f"checksum mismatch for {name}: recorded {recorded}, downloaded {digest}; "
            "refusing to proceed (delete the lock entry only if the snapshot change is intended)"
        )
    if not recorded:
        lock[name] = {"url": url, "sha256": digest}
        _write_lock(data_dir, lock)

    files = _convert(spec, payload, data_dir)
    report = {"name": name, "source": url, "sha256": digest, "files": [str(f) for f in files]}
    report.update(_summarize(name, data_dir))
    return report


def _download(spec: DatasetSpec):
    errors = []
    for url in spec.urls:
        try:
            with urllib.request.urlopen(url, timeout=30) as resp:
                return resp.read(), url
        except Exception as exc:  # noqa: BLE001 - report every failure mode
            errors.append(f"{url}: {exc}")
    manual = canonical_files(spec.name, data_dir_default())
    raise DataError(
        f"could not download {spec.name} (offline or sources moved):\n  "
        + "\n  ".join(errors)
        + "\nManual steps: download one of the URLs above on a connected machine, "
        f"then either place the raw file next to this tool and rerun, or convert it "
        f"yourself to {', '.join(str(m) for m in manual)} "
        "(whitespace 'u v w' edge list / CSV as documented in the README)."
    )


# ---------------------------------------------------------------------------
# converters


def _convert(spec: DatasetSpec, payload: bytes, data_dir: Path) -> list[Path]:
    if spec.kind == "gml-zip":
        return convert_gml_zip(spec.name, payload, data_dir)
    if spec.kind == "netz-csv-zip":
        return convert_netzschleuder_zip(spec.name, payload, data_dir)
    return convert_meuse_csv(payload, data_dir)


def _aggregate_edges(pairs):
    weights: dict[tuple, float] = {}
    for u, v, w in pairs:
        if u == v:
            continue  # benchmark graphs are analyzed loop-free
        key = (u, v) if u <= v else (v, u)
        weights[key] = weights.get(key, 0.0) + w
    return [(u, v, w) for (u, v), w in sorted(weights.items())]


def convert_gml_zip(name: str, payload: bytes, data_dir: Path) -> list[Path]:
    """Unzip a GML file, symmetrize, and write canonical outputs."""
    import networkx as nx

    with zipfile.ZipFile(io.BytesIO(payload)) as zf:
        gml_names = [f for f in zf.namelist() if f.endswith(".gml")]
        if not gml_names:
            raise DataError(f"{name}: no .gml member in the archive")
        raw = zf.read(gml_names[0])
    G = nx.read_gml(io.BytesIO(raw), label="id")
    pairs = [(int(u), int(v), float(d.get("weight", d.get("value", 1.0)) or 1.0))
             for u, v, d in G.edges(data=True)]
    # symmetrization: directed reciprocal edges sum, undirected pass through
    edges = _aggregate_edges(pairs)
    files = [data_dir / f"{name}.edges"]
    _write_edges(files[0], edges)

    labels = {int(v): d.get("value") for v, d in G.nodes(data=True) if "value" in d}
    touched = sorted({x for u, v, _ in edges for x in (u, v)})
    if labels and all(v in labels for v in touched):
        files.append(_write_labels(data_dir / f"{name}_labels.csv", {v: labels[v] for v in touched}))

    if name == "polblogs":
        lcc = _largest_component(edges)
        lcc_path = data_dir / "polblogs_lcc.edges"
        _write_edges(lcc_path, lcc)
        files.append(lcc_path)
    return files


def convert_netzschleuder_zip(name: str, payload: bytes, data_dir: Path) -> list[Path]:
    """Convert a nodes.csv/edges.csv archive."""
    with zipfile.ZipFile(io.BytesIO(payload)) as zf:
        members = {Path(m).name: m for m in zf.namelist()}
        if "edges.csv" not in members:
            raise DataError(f"{name}: archive lacks edges.csv")
        edge_rows = list(csv.reader(io.TextIOWrapper(zf.open(members["edges.csv"]))))
        node_rows = []
        if "nodes.csv" in members:
            node_rows = list(csv.reader(io.TextIOWrapper(zf.open(members["nodes.csv"]))))
    pairs = []
    for r in edge_rows[1:]:
        if len(r) < 2 or not r[0].strip():
            continue
        w = float(r[2]) if len(r) > 2 and _is_number(r[2]) else 1.0
        pairs.append((int(r[0]), int(r[1]), w))
    edges = _aggregate_edges(pairs)
    files = [data_dir / f"{name}.edges"]
    _write_edges(files[0], edges)

    if node_rows:
        nh, *nrows = node_rows
        label_col = None
        for cand in ("value", "group", "class", "type", "military"):
            if cand in [c.strip().lower().lstrip("# ") for c in nh]:
                label_col = [c.strip().lower().lstrip("# ") for c in nh].index(cand)
                break
        if label_col is not None:
            mapping = {int(r[0]): r[label_col] for r in nrows if r and r[0].strip()}
            touched = sorted({x for u, v, _ in edges for x in (u, v)})
            if all(v in mapping for v in touched):
                files.append(
                    _write_labels(data_dir / f"{name}_labels.csv", {v: mapping[v] for v in touched})
                )
    return files


def convert_meuse_csv(payload: bytes, data_dir: Path) -> list[Path]:
    """Select the modeling columns from the raw table.

    The distance column is expected in metres (``dist.m`` in the common
    CSV export); a bare ``dist`` column is used as a fallback.
    """
    rows = list(csv.reader(io.StringIO(payload.decode("utf-8"))))
    header = [h.strip().strip('"') for h in rows[0]]
    idx = {h: i for i, h in enumerate(header)}
    dist_col = "dist.m" if "dist.m" in idx else "dist"
    needed = ["x", "y", "zinc", "ffreq", dist_col, "soil"]
    missing = [c for c in needed if c not in idx]
    if missing:
        raise DataError(f"meuse table lacks columns {missing}; has {header}")
    out = data_dir / "meuse.csv"
    with open(out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "y", "zinc", "ffreq", "dist", "soil"])
        for r in rows[1:]:
            if not r or not r[idx["x"]].strip():
                continue
            w.writerow([r[idx[c]].strip().strip('"') for c in needed])
    return [out]


def _is_number(token: str) -> bool:
    try:
        float(token)
        return True
    except ValueError:
        return False


def _largest_component(edges):
    import scipy.sparse as sparse
    import scipy.sparse.csgraph as csgraph

    nodes = sorted({x for u, v, _ in edges for x in (u, v)})
    index = {v: i for i, v in enumerate(nodes)}
    n = len(nodes)
    rows = [index[u] for u, v, _ in edges] + [index[v] for u, v, _ in edges]
    cols = [index[v] for u, v, _ in edges] + [index[u] for u, v, _ in edges]
    A = sparse.coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
    ncomp, comp = csgraph.connected_components(A.tocsr(), directed=False)
    counts = np.bincount(comp)
    biggest = int(np.argmax(counts))
    keep = {nodes[i] for i in range(n) if comp[i] == biggest}
    return [(u, v, w) for u, v, w in edges if u in keep and v in keep]


def _write_edges(path: Path, edges) -> Path:
    with open(path, "w") as fh:
        fh.write("# u v w\n")
        for u, v, w in edges:
            fh.write(f"{u} {v} {w:.10g}\n")
    return path


def _write_labels(path: Path, mapping: dict) -> Path:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["vertex", "label"])
        for v in sorted(mapping):
            w.writerow([v, mapping[v]])
    return path


def _summarize(name: str, data_dir: Path) -> dict:
    if name == "meuse":
        with open(data_dir / "meuse.csv") as fh:
            n = sum(1 for _ in fh) - 1
        return {"rows": n}
    from .graphs import read_edge_list

    g = read_edge_list(data_dir / f"{name}.edges")
    nnz = int((g.A > 0).nnz) if g.is_sparse else int((g.adjacency_dense() > 0).sum())
    return {"vertices": g.n, "edges": nnz // 2}


def load_meuse(data_dir=None):
    """Load the canonical meuse.csv into a SpatialDataset."""
    from .regression import SpatialDataset

    data_dir = Path(data_dir) if data_dir else data_dir_default()
    path = data_dir / "meuse.csv"
    if not path.exists():
        raise DataError(f"{path} missing; run the fetch command first")
    rows = list(csv.DictReader(open(path)))
    coords = np.array([[float(r["x"]), float(r["y"])] for r in rows])
    y = np.array([float(r["zinc"]) for r in rows])
    X = np.array([[float(r["ffreq"]), float(r["dist"]), float(r["soil"])] for r in rows])
    return SpatialDataset(coords=coords, y=y, X=X, names=("ffreq", "dist", "soil"))
