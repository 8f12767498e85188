import json
import math
import xml.etree.ElementTree as ET

import jsonschema
import pytest
from hypothesis import given, settings, strategies as st

from lipgraph.chain import LipClass
from lipgraph.montecarlo import ScalingRecord, TrialBatch, run_trials, scaling_study, summarize
from lipgraph.report import (SCALING_HEADER, TRIALS_HEADER, FigureSpec, fmt_ratio, fmt_real,
                             read_comment_csv, read_scaling_json, render_figure, scaling_schema,
                             write_scaling_csv, write_scaling_json, write_trials_csv)

SVG = "{http://www.w3.org/2000/svg}"
SQRT2 = math.sqrt(2)
META = {"generator_id": "g", "master_seed": 42, "T": 5, "L": 1.0, "tool_version": "0.1.0"}


def batch(n, values, L=1.0):
    return TrialBatch(n=n, cls=LipClass(L), trials=len(values), master_seed=0, values=tuple(values))


def test_trials_csv_single_point():
    assert write_trials_csv(batch(1, [1])) == f"{TRIALS_HEADER}\n1,1,0,1,1\n".encode()


def test_trials_csv_ratio_arithmetic():
    assert write_trials_csv(batch(4, [2])).endswith(b"4,1,0,2,1\n")


def test_trials_csv_comments_and_L_format():
    data = write_trials_csv(batch(9, [2, 3], L=0.5), {"master_seed": 7, "invocation": ["a", "b"]})
    assert data.decode().splitlines() == ["# master_seed=7", "# invocation=a b", TRIALS_HEADER,
                                          "9,0.5,0,2,0.6666666666667", "9,0.5,1,3,1"]


def test_trials_csv_round_trip():
    b = run_trials(500, 1, 40, 3)
    comments, rows = read_comment_csv(write_trials_csv(b, {"k": "v"}))
    assert comments == {"k": "v"}
    assert len(rows) == 40
    for t, row in enumerate(rows):
        N, n = int(row["N"]), int(row["n"])
        assert int(row["trial"]) == t and N == b.values[t] and float(row["L"]) == 1.0
        expected = N / math.sqrt(n)
        assert abs(float(row["ratio"]) - expected) <= 1e-12 * expected


@settings(max_examples=300, deadline=None)
@given(st.floats(min_value=1e-6, max_value=1e6))
def test_ratio_format_fidelity(x):
    assert abs(float(fmt_ratio(x)) - x) <= 1e-12 * x


def test_fmt_real():
    assert fmt_real(1.0) == "1" and fmt_real(0.1) == "0.1" and fmt_real(2.5) == "2.5"
    assert float(fmt_real(1 / 3)) == 1 / 3


def test_writers_are_deterministic():
    b = run_trials(200, 2, 6, 8)
    recs = [summarize(b)]
    assert write_trials_csv(b) == write_trials_csv(b)
    assert write_scaling_csv(recs) == write_scaling_csv(recs)
    assert write_scaling_json(recs, META) == write_scaling_json(recs, META)


def test_scaling_json_empty():
    doc = json.loads(write_scaling_json([], META))
    assert doc == {"metadata": META, "records": []}
    jsonschema.validate(doc, scaling_schema())


def test_scaling_json_single_record():
    (rec,) = scaling_study([1], 1, 5, 0)
    doc = json.loads(write_scaling_json([rec], META))
    assert doc["records"][0]["ratio_median"] == 1.0
    assert doc["records"][0]["median_N"] == 1


def test_scaling_json_key_order_and_schema():
    recs = scaling_study([10, 100, 1000], 1.5, 7, 2)
    meta = dict(reversed(list({**META, "L": 1.5, "T": 7, "timestamp": "t", "invocation": ["x"]}.items())))
    data = write_scaling_json(recs, meta)
    doc = json.loads(data)
    assert list(doc) == ["metadata", "records"]
    assert list(doc["metadata"])[:5] == ["generator_id", "master_seed", "T", "L", "tool_version"]
    assert list(doc["records"][0]) == SCALING_HEADER.split(",")
    jsonschema.validate(doc, scaling_schema())
    _, back = read_scaling_json(data)
    assert back == recs


def test_scaling_json_requires_metadata():
    with pytest.raises(ValueError):
        write_scaling_json([], {"master_seed": 1})


def test_schema_rejects_broken_documents():
    schema = scaling_schema()
    good = json.loads(write_scaling_json(scaling_study([5], 1, 3, 0), META))
    bad = json.loads(json.dumps(good))
    del bad["records"][0]["median_N"]
    with pytest.raises(jsonschema.ValidationError):
        jsonschema.validate(bad, schema)
    bad = json.loads(json.dumps(good))
    bad["metadata"]["T"] = 0
    with pytest.raises(jsonschema.ValidationError):
        jsonschema.validate(bad, schema)
    jsonschema.validate(good, schema)


def test_scaling_csv_fidelity():
    recs = scaling_study([30, 300], 1, 9, 4)
    _, rows = read_comment_csv(write_scaling_csv(recs))
    for rec, row in zip(recs, rows):
        assert int(row["n"]) == rec.n and int(row["trials"]) == rec.trials
        assert float(row["median_N"]) == rec.median_N and float(row["mean_N"]) == rec.mean_N
        for key in ("ratio_median", "ratio_mean", "median_over_sqrt2n", "stderr_mean"):
            stored = getattr(rec, key)
            assert abs(float(row[key]) - stored) <= 1e-12 * abs(stored)


# --- figure -------------------------------------------------------------------

def parse(svg: bytes):
    return ET.fromstring(svg)


def by_class(root, tag, cls):
    return [e for e in root.iter(SVG + tag) if e.get("class") == cls]


def test_figure_single_point():
    spec = FigureSpec(series=[("L = 1", [(100, 1.30)])], reference_lines=[("√2 ≈ 1.41421", SQRT2)])
    root = parse(render_figure(spec))
    assert len(by_class(root, "circle", "marker")) == 1
    (ref,) = by_class(root, "line", "reference")
    assert ref.get("stroke-dasharray")
    assert ref.get("y1") == ref.get("y2")
    labels = [e.text for e in by_class(root, "text", "reference-label")]
    assert labels == ["√2 ≈ 1.41421"]
    assert len(by_class(root, "polyline", "series")) == 1


def test_figure_deterministic():
    spec = FigureSpec(series=[("a", [(10, 1.0), (100, 1.2)])], reference_lines=[("r", 1.5)])
    assert render_figure(spec) == render_figure(spec)


def test_figure_one_polyline_per_series():
    spec = FigureSpec(series=[("a", [(10, 1.0), (100, 1.2)]), ("b", [(10, 1.9), (1000, 2.0)]),
                              ("c", [(50, 0.5)])])
    root = parse(render_figure(spec))
    assert len(by_class(root, "polyline", "series")) == 3
    assert len(by_class(root, "circle", "marker")) == 5


def test_figure_log_axis_ticks():
    spec = FigureSpec(series=[("a", [(100, 1.0), (10**5, 1.4)])])
    text = render_figure(spec).decode()
    assert ">100<" in text and ">1000<" in text and ">10⁵<" in text and "log scale" in text
    linear = render_figure(FigureSpec(series=spec.series, log_x=False)).decode()
    assert "log scale" not in linear


def test_figure_y_pixels_follow_values():
    spec = FigureSpec(series=[("a", [(100, 1.30), (1000, 1.50)])], reference_lines=[("r", SQRT2)])
    root = parse(render_figure(spec))
    lo, hi = [float(c.get("cy")) for c in by_class(root, "circle", "marker")]
    ref_y = float(by_class(root, "line", "reference")[0].get("y1"))
    assert hi < ref_y < lo  # SVG y grows downward


@pytest.mark.parametrize("spec", [
    FigureSpec(series=[]),
    FigureSpec(series=[("empty", [])]),
    FigureSpec(series=[("a", [(0, 1.0)])]),
    FigureSpec(series=[("a", [(10, math.nan)])]),
    FigureSpec(series=[("a", [(10, 1.0)])], reference_lines=[("r", math.inf)]),
    FigureSpec(series=[("a", [(10, 1.0)])], y_range=(2.0, 1.0)),
])
def test_figure_argument_errors(spec):
    with pytest.raises(ValueError):
        render_figure(spec)


def test_figure_escapes_labels():
    spec = FigureSpec(series=[("<L & 1>", [(10, 1.0)])])
    root = parse(render_figure(spec))
    assert any(e.text == "<L & 1>" for e in root.iter(SVG + "text"))


def test_figure_full_study_last_point_above_sqrt2():
    # pilot-derived (seed 42): the L=1 ratio approaches sqrt(2) from above
    recs = scaling_study([100, 1000, 10**4], 1, 50, 42, workers=4)
    spec = FigureSpec(series=[("L = 1", [(r.n, r.ratio_median) for r in recs])],
                      reference_lines=[("√2", SQRT2)])
    root = parse(render_figure(spec))
    last = by_class(root, "circle", "marker")[-1]
    ref_y = float(by_class(root, "line", "reference")[0].get("y1"))
    assert float(last.get("cy")) < ref_y
