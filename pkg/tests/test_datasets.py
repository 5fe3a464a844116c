import io
import json
import zipfile

import numpy as np
import pytest

import grafield as gf
from grafield import datasets


GML_DIRECTED = """graph [
  directed 1
  node [ id 1 value 0 label "a" ]
  node [ id 2 value 0 label "b" ]
  node [ id 3 value 1 label "c" ]
  node [ id 4 value 1 label "d" ]
  node [ id 5 value 1 label "e" ]
  edge [ source 1 target 2 ]
  edge [ source 2 target 1 ]
  edge [ source 2 target 3 ]
  edge [ source 3 target 3 ]
  edge [ source 4 target 5 ]
]
"""


def _zip_bytes(name, content):
    buf = io.BytesIO()
    with zipfile.ZipFile(buf, "w") as zf:
        zf.writestr(name, content)
    return buf.getvalue()


def test_registry_names():
    assert set(datasets.REGISTRY) == {"polblogs", "football", "karate", "mexican", "adjnoun", "meuse"}


def test_fetch_unknown_dataset(tmp_path):
    with pytest.raises(gf.DataError):
        datasets.fetch_dataset("nope", data_dir=tmp_path)


def test_gml_conversion_symmetrizes_and_labels(tmp_path):
    files = datasets.convert_gml_zip("sample", _zip_bytes("sample.gml", GML_DIRECTED), tmp_path)
    g = gf.read_edge_list(tmp_path / "sample.edges")
    A = g.adjacency_dense()
    # reciprocal 1<->2 edges sum to weight 2; the self loop is dropped
    assert A[g.index_of(1), g.index_of(2)] == 2.0
    assert np.all(np.diag(A) == 0)
    labels = gf.read_labels(tmp_path / "sample_labels.csv", g)
    assert labels.tolist() == ["0", "0", "1", "1", "1"]
    assert any(str(f).endswith("sample_labels.csv") for f in files)


def test_polblogs_conversion_extracts_largest_component(tmp_path):
    datasets.convert_gml_zip("polblogs", _zip_bytes("polblogs.gml", GML_DIRECTED), tmp_path)
    lcc = gf.read_edge_list(tmp_path / "polblogs_lcc.edges")
    assert lcc.labels == (1, 2, 3)  # the 4-5 pair is the smaller component


def test_netzschleuder_conversion(tmp_path):
    buf = io.BytesIO()
    with zipfile.ZipFile(buf, "w") as zf:
        zf.writestr("edges.csv", "# source, target\n0,1\n1,2\n2,0\n")
        zf.writestr("nodes.csv", "# index, name, group\n0,alpha,m\n1,beta,c\n2,gamma,m\n")
    files = datasets.convert_netzschleuder_zip("mexican", buf.getvalue(), tmp_path)
    g = gf.read_edge_list(tmp_path / "mexican.edges")
    assert g.n == 3 and g.N == 6.0
    labels = gf.read_labels(tmp_path / "mexican_labels.csv", g)
    assert labels.tolist() == ["m", "c", "m"]
    assert len(files) == 2


def test_meuse_conversion_prefers_metric_distance(tmp_path):
    raw = (
        '"","x","y","zinc","ffreq","dist","dist.m","soil"\n'
        '"1",181072,333611,1022,1,0.0013,50,1\n'
        '"2",181025,333558,1141,1,0.0122,30,1\n'
    )
    datasets.convert_meuse_csv(raw.encode(), tmp_path)
    data = datasets.load_meuse(tmp_path)
    assert data.n == 2
    assert data.X[0].tolist() == [1.0, 50.0, 1.0]
    assert data.names == ("ffreq", "dist", "soil")


def test_meuse_conversion_missing_columns(tmp_path):
    with pytest.raises(gf.DataError):
        datasets.convert_meuse_csv(b"x,y\n1,2\n", tmp_path)


def test_checksum_lock_trips_on_changed_payload(tmp_path, monkeypatch):
    payload_a = _zip_bytes("karate.gml", GML_DIRECTED)
    payload_b = _zip_bytes("karate.gml", GML_DIRECTED.replace("value 0", "value 9"))

    monkeypatch.setattr(datasets, "_download", lambda spec: (payload_a, "pinned://karate"))
    report = datasets.fetch_dataset("karate", data_dir=tmp_path)
    assert report["source"] == "pinned://karate"
    lock = json.loads((tmp_path / "checksums.json").read_text())
    assert lock["karate"]["sha256"] == datasets._sha256(payload_a)

    monkeypatch.setattr(datasets, "_download", lambda spec: (payload_b, "pinned://karate"))
    with pytest.raises(gf.DataError, match="checksum mismatch"):
        datasets.fetch_dataset("karate", data_dir=tmp_path, refresh=True)


def test_cache_short_circuits_download(tmp_path, monkeypatch):
    def boom(spec):
        raise AssertionError("download attempted despite cache")

    (tmp_path / "karate.edges").write_text("1 2 1\n2 3 1\n")
    monkeypatch.setattr(datasets, "_download", boom)
    report = datasets.fetch_dataset("karate", data_dir=tmp_path)
    assert report["source"] == "cache"
    assert report["vertices"] == 3


def test_offline_error_lists_manual_steps(tmp_path, monkeypatch):
    spec = datasets.DatasetSpec("football", ("http://127.0.0.1:9/unreachable.zip",), "gml-zip")
    monkeypatch.setitem(datasets.REGISTRY, "football", spec)
    with pytest.raises(gf.DataError, match="Manual steps"):
        datasets.fetch_dataset("football", data_dir=tmp_path)
