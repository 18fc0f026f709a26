import json
import math

import numpy as np
import pytest

from sweepout import report as rep
from sweepout.constants import assemble_constants
from sweepout.errors import InvalidArgument
from sweepout.pipeline import assemble_upper_bound
from sweepout.surface import flat_torus, geodesic_ball


def test_normalize_rounds_and_converts():
    d = rep.normalize({"a": 1 / 3, "b": np.float32(0.5), "c": np.arange(3), "d": (math.inf, -math.inf, math.nan),
                       "e": np.bool_(True), 1: None})
    assert d == {"a": 0.333333333333, "b": 0.5, "c": [0, 1, 2], "d": ["Infinity", "-Infinity", "NaN"],
                 "e": True, "1": None}
    with pytest.raises(TypeError):
        rep.normalize({"x": object()})


def test_dumps_is_sorted_and_strict():
    text = rep.dumps({"b": 1.0, "a": [math.inf]})
    assert text.index('"a"') < text.index('"b"')
    assert json.loads(text) == {"a": ["Infinity"], "b": 1.0}


def test_region_ids():
    s = flat_torus(6)
    a = geodesic_ball(s, 0, 0.2)
    ids = rep.region_ids(s.n_faces, [a])
    assert set(ids.tolist()) == {0, 1}
    assert (ids[a.mask] == 0).all()
    with pytest.raises(InvalidArgument):
        rep.region_ids(s.n_faces, [a, a])


def test_ply_roundtrip(tmp_path):
    s = flat_torus(8)
    a = geodesic_ball(s, 0, 0.2)
    b = s.whole() - a
    ids = rep.export_colored_mesh(s, [a, b], tmp_path / "m.ply")
    nf, back = rep.read_ply_regions(tmp_path / "m.ply")
    assert nf == s.n_faces and np.array_equal(ids, back)


@pytest.fixture(scope="module")
def small_report():
    s = flat_torus(30)
    b = assemble_constants(mode="empirical", surface=s, n_centers=4, n_radii=4)
    return assemble_upper_bound(s, 20, b), s


def test_bound_report_schema(small_report, tmp_path):
    report, s = small_report
    d = rep.export_report(report, tmp_path / "r.json", s)
    back = rep.load_report(tmp_path / "r.json")
    assert back == d
    assert back["addend_names"] == ["thick_boundary", "split_boundary", "thin_boundary", "k_max_width"]
    assert back["total"] == pytest.approx(sum(back["addends"]), rel=1e-11)
    assert back["schema_version"] == rep.SCHEMA_VERSION
    assert back["surface"]["faces"] == s.n_faces
    assert {"name", "lhs", "rhs", "relation", "pass", "slack"} <= set(back["certificates"][0])


def test_export_errors(tmp_path):
    with pytest.raises(InvalidArgument):
        rep.export_json({}, tmp_path / "missing" / "x.json")
