import csv
import io
import json
import math

import pytest

from perclab.labs import (LABS, ExperimentManifest, LabReport, Row, default_manifest, judge, run_lab)

SEED = 99


def manifest(**kw):
    base = {"experiment": "sharpness", "graphs": ["torus:8x8"], "trials": 20, "base_seed": SEED}
    base.update(kw)
    return ExperimentManifest.from_dict(base)


def test_manifest_rejects_unknown_fields():
    with pytest.raises(ValueError, match="unknown manifest fields"):
        ExperimentManifest.from_dict({"experiment": "sharpness", "graphs": ["cycle:6"], "trials": 1,
                                      "base_seed": 0, "p_values": [0.5], "colour": "red"})


@pytest.mark.parametrize("kw, msg", [
    ({"trials": 0, "p_values": [0.5]}, "trials"),
    ({"graphs": [], "p_values": [0.5]}, "no graphs"),
    ({"p_values": []}, "nonempty p_values"),
    ({"experiment": "gradual", "deltas": [1.5]}, "delta"),
    ({"experiment": "sharp-density", "alphas": [0.0], "deltas": [0.2]}, "alpha"),
])
def test_manifest_validation(kw, msg):
    with pytest.raises(ValueError, match=msg):
        manifest(**kw)


def test_bad_graph_in_manifest():
    with pytest.raises(ValueError):
        manifest(graphs=["cycle:2"], p_values=[0.5])


@pytest.mark.parametrize("name", sorted(LABS))
def test_default_manifests_load(name):
    m = default_manifest(name)
    assert m.experiment == name


def test_judge_three_way():
    assert judge(1.0, 2.0, 0.1)[0] == "pass"
    assert judge(2.0, 1.0, 0.1)[0] == "fail"
    assert judge(1.0, 1.1, 0.1)[0] == "inconclusive"
    assert judge(1.2, 1.0, 0.1) == ("inconclusive", pytest.approx(-0.2))


def _report(verdicts, frac=0.2):
    rows = [Row("t", {}, 0, 0, 0, v) for v in verdicts]
    return LabReport("x", rows, [], {"base_seed": 1}, max_inconclusive_fraction=frac)


def test_report_aggregation_and_exit_codes():
    assert _report(["pass"] * 4).exit_code == 0
    assert _report(["pass", "fail", "inconclusive"]).verdict == "fail"
    assert _report(["pass"] * 4 + ["inconclusive"]).verdict == "pass"
    r = _report(["pass"] * 3 + ["inconclusive"])
    assert r.verdict == "inconclusive" and r.exit_code == 2
    assert _report(["pass", "fail"]).exit_code == 1
    assert _report(["reported", "reported"]).verdict == "pass"
    assert _report(["pass", "inconclusive"], frac=0.5).verdict == "pass"


def test_report_write(tmp_path):
    r = _report(["pass", "reported"])
    r.rows[0].lhs = math.inf
    r.series = [{"a": 1, "b": 2.5}, {"a": 2, "c": "z"}]
    paths = r.write(tmp_path)
    assert [p.name for p in paths] == ["report.json", "report.csv", "series.csv"]
    data = json.loads((tmp_path / "report.json").read_text())
    assert data["rows"][0]["lhs"] == "inf"
    rows = list(csv.reader(io.StringIO((tmp_path / "report.csv").read_text())))
    assert rows[0] == ["tag", "inputs", "lhs", "rhs", "margin", "verdict", "note"]
    assert len(rows) == 3
    assert (tmp_path / "series.csv").read_text().splitlines()[0] == "a,b,c"


def test_sharpness_lab_small():
    m = manifest(graphs=["torus:8x8", "torus:16x16"], p_values=[0.3, 1.0],
                 params={"subcritical": [0.3], "supercritical": [1.0]},
                 tolerances={"log_factor": 10.0})
    r = run_lab("sharpness", m)
    tags = [row.tag for row in r.rows]
    assert tags == ["sharpness/log_scale", "sharpness/density_span", "sharpness/density_floor"]
    assert r.verdict == "pass"
    full = [s for s in r.series if s["p"] == 1.0]
    assert all(s["median_density"] == 1.0 for s in full)


def test_threshold_lab_small():
    m = manifest(experiment="threshold", graphs=["cycle:16", "torus:8x8"], trials=200,
                 params={"windows": {"cycle:16": [0.5, 1.0], "torus:8x8": [0.0, 0.01]},
                         "trend": {"graphs": ["cycle:16", "torus:8x8"], "limit": 0.5, "slack": 1.0}})
    r = run_lab("threshold", m)
    verdicts = {row.inputs.get("graph"): row.verdict for row in r.rows if row.tag == "threshold/window"}
    assert verdicts == {"cycle:16": "pass", "torus:8x8": "fail"}
    assert r.rows[-1].tag == "threshold/trend" and r.rows[-1].verdict == "pass"
    assert r.exit_code == 1


def test_inequality_lab_small():
    checks = [
        {"check": "variance_bound", "p": 0.5, "n": 5, "trials": 200},
        {"check": "ghost_comparison", "p": [0.5, 1.0], "h": 0.05, "m": 10, "trials": 200},
        {"check": "two_arm_decay", "graph": "torus:16x16", "p": 0.5, "n": [2], "trials": 100, "min_count": 10**6},
        {"check": "harris_two_point", "p": 0.5, "n": 5, "r": 2, "trials": 200},
    ]
    r = run_lab("inequalities", manifest(experiment="inequalities", params={"checks": checks}))
    tags = [row.tag for row in r.rows]
    assert tags == ["variance_bound", "ghost_comparison", "ghost_comparison", "two_arm_decay", "harris_two_point"]
    assert r.rows[2].verdict == "reported"
    assert r.rows[3].verdict == "inconclusive" and "noise floor" in r.rows[3].note
    assert all(row.verdict != "fail" for row in r.rows)
    with pytest.raises(ValueError, match="unknown check"):
        run_lab("inequalities", manifest(experiment="inequalities", params={"checks": [{"check": "x", "p": 0.5}]}))


def test_gradual_lab_small():
    m = manifest(experiment="gradual", graphs=["torus:8x8"], deltas=[0.05, 1.0],
                 params={"median_max": {"torus:8x8@0.05": 1.0}, "median_min": {"torus:8x8@0.05": 2.0}})
    r = run_lab("gradual", m)
    by_tag = {row.tag: row for row in r.rows}
    assert by_tag["gradual/full_sweep"].verdict == "pass"
    assert by_tag["gradual/full_sweep"].lhs == 1 - 1 / 64
    assert by_tag["gradual/median_max"].verdict == "pass"
    assert by_tag["gradual/median_min"].verdict == "fail"


def test_sharp_density_small_deltas_are_reported():
    m = manifest(experiment="sharp-density", graphs=["torus:8x8", "torus:16x16"], trials=100,
                 alphas=[0.5], deltas=[0.1, 0.25, 0.5, 0.9],
                 params={"window_family": ["torus:8x8", "torus:16x16"]})
    r = run_lab("sharp-density", m)
    ratios = [row for row in r.rows if row.tag == "sharp_density/ratio"]
    # delta above one half is outside the grid; two graphs times three deltas remain
    assert len(ratios) == 6
    assert all(row.verdict == "reported" for row in ratios if row.inputs["delta"] < 0.25)
    assert all(row.lhs >= 1 for row in ratios)
    assert any(row.tag == "sharp_density/window_shrinks" for row in r.rows)


def test_geometry_lab_small():
    m = manifest(experiment="geometry", graphs=["cycle:40", "torus:6x6"], trials=1,
                 params={"timar_instances": 3, "expect": {"cycle:40": {"class": "stretched"}}})
    r = run_lab("geometry", m)
    assert r.verdict == "pass"
    cls = [row for row in r.rows if row.tag == "geometry/class"]
    assert cls[0].verdict == "pass" and cls[1].verdict == "reported"


def test_lab_deterministic_across_workers():
    m = manifest(graphs=["torus:8x8"], p_values=[0.5], trials=40)
    a, b = run_lab("sharpness", m, 1), run_lab("sharpness", m, 4)
    assert a.series == b.series
    da, db = a.to_dict(), b.to_dict()
    da["provenance"].pop("wall_time")
    db["provenance"].pop("wall_time")
    assert da == db


def test_run_lab_unknown():
    with pytest.raises(KeyError):
        run_lab("nope", manifest(p_values=[0.5]))
