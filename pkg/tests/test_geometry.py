import json

import numpy as np
import pytest

from sixwire import geometry as g
from sixwire.fields import OperatingPoint, find_rf_null


def test_default_layout_shape(layout):
    assert len(layout.electrodes) == 19
    assert layout.names.count("T") == 1
    assert {"V1", "V2", "V3", "V4", "V5", "V6", "RF"} <= set(layout.names)
    assert [e.name for e in layout.by_role("rf")] == ["RF"]


def test_default_layout_heights(layout):
    null = find_rf_null(OperatingPoint(layout))
    assert null[1] == pytest.approx(150e-6, rel=1e-6)
    assert abs(null[0]) < 1e-12
    x_ctrl = g.control_inner_edge(layout)
    assert np.hypot(x_ctrl, null[1]) == pytest.approx(274e-6, rel=1e-6)


def test_json_round_trip(layout, tmp_path):
    path = tmp_path / "lay.json"
    path.write_text(layout.to_json())
    back = g.load_layout(path)
    assert back.names == layout.names
    for a, b in zip(back.electrodes, layout.electrodes):
        np.testing.assert_allclose(a.array, b.array, atol=1e-12)
    assert back.pairs == layout.pairs


def test_scaled(layout):
    big = layout.scaled(2.0)
    np.testing.assert_allclose(big["V1"].array, 2 * layout["V1"].array)


def _doc(layout):
    return json.loads(layout.to_json())


def test_malformed_json(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    with pytest.raises(g.LayoutError):
        g.load_layout(p)


def test_missing_key(layout):
    doc = _doc(layout)
    del doc["pairs"]
    with pytest.raises(g.LayoutError):
        g.layout_from_dict(doc)


def test_overlap_rejected(layout):
    doc = _doc(layout)
    v1 = next(e for e in doc["electrodes"] if e["name"] == "V1")
    v1["rects"][0][2] += 20.0  # push V1 into V2
    with pytest.raises(g.LayoutError):
        g.layout_from_dict(doc)


def test_broken_mirror_rejected(layout):
    doc = _doc(layout)
    v3 = next(e for e in doc["electrodes"] if e["name"] == "V3")
    v3["rects"][0][0] -= 1.0
    with pytest.raises(g.LayoutError, match="mirror"):
        g.layout_from_dict(doc)


def test_tickle_electrode_required(layout):
    doc = _doc(layout)
    for e in doc["electrodes"]:
        if e["name"] == "T":
            e["name"] = "GL+3"
    doc["pairs"] = [[("GL+3" if n == "T" else n) for n in p] for p in doc["pairs"]]
    with pytest.raises(g.LayoutError):
        g.layout_from_dict(doc)


def test_duplicate_names(layout):
    doc = _doc(layout)
    doc["electrodes"].append(dict(doc["electrodes"][0]))
    with pytest.raises(g.LayoutError):
        g.layout_from_dict(doc)


def test_degenerate_rectangle():
    with pytest.raises(g.LayoutError):
        g.Electrode("X", "ground", [(0.0, 0.0, 0.0, 1e-6)])


def test_zero_rail_width_rejected():
    with pytest.raises(g.LayoutError):
        g.reconstruct_six_wire(90e-6, 0.0)


def test_reconstruction_is_mirror_symmetric():
    lay = g.reconstruct_six_wire(90e-6, 110e-6)
    for a, b in lay.pairs:
        assert lay[a].mirrored() == {g._key(r) for r in lay[b].rects}
