"""Stable CSV/JSON serialisation of experiment output and the SVG convergence figure.

Every writer returns bytes and is a pure function of its arguments.
Coordinates and stored values use the shortest round-trip decimal; derived
ratios use 13 significant digits, which keeps parsed values within 1e-12
relative error of the stored doubles.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from importlib import resources
from typing import Mapping, Optional, Sequence
from xml.sax.saxutils import escape

from .montecarlo import SCALING_FIELDS, ScalingRecord, TrialBatch

TRIALS_HEADER = "n,L,trial,N,ratio"
SCALING_HEADER = ",".join(SCALING_FIELDS)
RATIO_DIGITS = 13

# Figure styling lives here and only here.
STYLE = {
    "width": 720,
    "height": 480,
    "margin_left": 70,
    "margin_right": 170,
    "margin_top": 30,
    "margin_bottom": 55,
    "font_family": "Helvetica, Arial, sans-serif",
    "font_size": 12,
    "tick_length": 5,
    "marker_radius": 3.5,
    "line_width": 1.8,
    "reference_dash": "6 4",
    "reference_color": "#555555",
    "palette": ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"),
}


def fmt_real(x: float) -> str:
    """Shortest round-trip decimal, with integral values written without '.0'."""
    s = repr(float(x))
    return s[:-2] if s.endswith(".0") else s


def fmt_ratio(x: float) -> str:
    return format(float(x), f".{RATIO_DIGITS}g")


def _comment_block(comments: Optional[Mapping[str, object]]) -> str:
    if not comments:
        return ""
    lines = []
    for key, value in comments.items():
        if isinstance(value, (list, tuple)):
            value = " ".join(str(v) for v in value)
        lines.append(f"# {key}={value}\n")
    return "".join(lines)


def write_trials_csv(batch: TrialBatch, comments: Optional[Mapping[str, object]] = None) -> bytes:
    root_n = math.sqrt(batch.n)
    L = fmt_real(batch.L)
    rows = [f"{batch.n},{L},{t},{N},{fmt_ratio(N / root_n)}\n" for t, N in enumerate(batch.values)]
    return (_comment_block(comments) + TRIALS_HEADER + "\n" + "".join(rows)).encode("utf-8")


def write_scaling_csv(records: Sequence[ScalingRecord],
                      comments: Optional[Mapping[str, object]] = None) -> bytes:
    rows = []
    for r in records:
        rows.append(",".join([
            str(r.n), fmt_real(r.L), str(r.trials), fmt_real(r.median_N), fmt_real(r.mean_N),
            fmt_ratio(r.ratio_median), fmt_ratio(r.ratio_mean),
            fmt_ratio(r.median_over_sqrt2n), fmt_ratio(r.stderr_mean),
        ]) + "\n")
    return (_comment_block(comments) + SCALING_HEADER + "\n" + "".join(rows)).encode("utf-8")


def read_comment_csv(data: bytes) -> tuple[dict, list[dict]]:
    """Inverse of the CSV writers: returns (comments, rows as str dicts)."""
    comments, body = {}, []
    for line in data.decode("utf-8").splitlines():
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition("=")
            comments[key] = value
        elif line:
            body.append(line)
    if not body:
        return comments, []
    header = body[0].split(",")
    return comments, [dict(zip(header, row.split(","))) for row in body[1:]]


_META_ORDER = ("generator_id", "master_seed", "T", "L", "tool_version")


def write_scaling_json(records: Sequence[ScalingRecord], metadata: Mapping[str, object]) -> bytes:
    missing = [k for k in _META_ORDER if k not in metadata]
    if missing:
        raise ValueError(f"metadata is missing {missing}")
    meta = {k: metadata[k] for k in _META_ORDER}
    meta.update((k, v) for k, v in metadata.items() if k not in meta)
    doc = {"metadata": meta, "records": [asdict(r) for r in records]}
    return (json.dumps(doc, indent=2, ensure_ascii=False) + "\n").encode("utf-8")


def scaling_schema() -> dict:
    return json.loads(resources.files(__package__).joinpath("scaling.schema.json").read_text("utf-8"))


def read_scaling_json(data: bytes) -> tuple[dict, list[ScalingRecord]]:
    doc = json.loads(data)
    if not isinstance(doc, dict) or "records" not in doc or "metadata" not in doc:
        raise ValueError("not a scaling study document")
    return doc["metadata"], [ScalingRecord(**rec) for rec in doc["records"]]


@dataclass(frozen=True)
class FigureSpec:
    series: Sequence[tuple[str, Sequence[tuple[float, float]]]]
    reference_lines: Sequence[tuple[str, float]] = ()
    log_x: bool = True
    y_range: Optional[tuple[float, float]] = None
    x_label: str = "n"
    y_label: str = "N_n / sqrt(n)"
    title: str = field(default="")

    def validate(self):
        if not self.series:
            raise ValueError("figure needs at least one series")
        for label, pts in self.series:
            if not pts:
                raise ValueError(f"series {label!r} is empty")
            for n, r in pts:
                if not (n > 0 and math.isfinite(n)):
                    raise ValueError(f"series {label!r}: n must be positive, got {n!r}")
                if not math.isfinite(r):
                    raise ValueError(f"series {label!r}: non-finite value {r!r}")
        for label, c in self.reference_lines:
            if not math.isfinite(c):
                raise ValueError(f"reference line {label!r} is not finite")
        if self.y_range is not None:
            lo, hi = self.y_range
            if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
                raise ValueError(f"bad y_range {self.y_range!r}")


def _nice_step(span: float, target: int = 6) -> float:
    raw = span / target
    mag = 10 ** math.floor(math.log10(raw))
    for m in (1, 2, 2.5, 5, 10):
        if m * mag >= raw:
            return m * mag
    return 10 * mag


def _linear_ticks(lo: float, hi: float) -> list[float]:
    step = _nice_step(hi - lo)
    first = math.ceil(lo / step - 1e-9)
    ticks = []
    k = first
    while k * step <= hi + 1e-9 * step:
        ticks.append(round(k * step, 12))
        k += 1
    return ticks


_SUPERSCRIPT = str.maketrans("-0123456789", "⁻⁰¹²³⁴⁵⁶⁷⁸⁹")


def _px(v: float) -> str:
    return f"{v:.2f}"


class _Frame:
    """Maps data coordinates to pixels inside the plotting area."""

    def __init__(self, spec: FigureSpec):
        s = STYLE
        self.left = s["margin_left"]
        self.right = s["width"] - s["margin_right"]
        self.top = s["margin_top"]
        self.bottom = s["height"] - s["margin_bottom"]
        self.log_x = spec.log_x

        xs = [n for _, pts in spec.series for n, _ in pts]
        tx = [self._tx(n) for n in xs]
        lo, hi = min(tx), max(tx)
        pad = 0.05 * (hi - lo) if hi > lo else (0.5 if self.log_x else max(abs(lo) * 0.1, 1.0))
        self.x0, self.x1 = lo - pad, hi + pad

        if spec.y_range is not None:
            self.y0, self.y1 = spec.y_range
        else:
            ys = [r for _, pts in spec.series for _, r in pts] + [c for _, c in spec.reference_lines]
            lo, hi = min(ys), max(ys)
            pad = 0.08 * (hi - lo) if hi > lo else max(abs(lo) * 0.1, 0.1)
            step = _nice_step(hi - lo + 2 * pad)
            self.y0 = math.floor((lo - pad) / step) * step
            self.y1 = math.ceil((hi + pad) / step) * step

    def _tx(self, n: float) -> float:
        return math.log10(n) if self.log_x else n

    def x(self, n: float) -> float:
        return self.left + (self._tx(n) - self.x0) / (self.x1 - self.x0) * (self.right - self.left)

    def y(self, r: float) -> float:
        return self.bottom - (r - self.y0) / (self.y1 - self.y0) * (self.bottom - self.top)

    def x_ticks(self) -> list[tuple[float, str]]:
        if self.log_x:
            ticks = []
            for k in range(math.ceil(self.x0 - 1e-9), math.floor(self.x1 + 1e-9) + 1):
                label = fmt_real(10.0 ** k) if -3 <= k <= 3 else "10" + str(k).translate(_SUPERSCRIPT)
                ticks.append((10.0 ** k, label))
            return ticks
        return [(t, f"{t:g}") for t in _linear_ticks(self.x0, self.x1)]

    def y_ticks(self) -> list[tuple[float, str]]:
        return [(t, f"{t:g}") for t in _linear_ticks(self.y0, self.y1)]


def render_figure(spec: FigureSpec) -> bytes:
    spec.validate()
    s = STYLE
    f = _Frame(spec)
    font = f'font-family="{s["font_family"]}" font-size="{s["font_size"]}"'
    out = [
        '<?xml version="1.0" encoding="UTF-8" standalone="no"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{s["width"]}" '
        f'height="{s["height"]}" viewBox="0 0 {s["width"]} {s["height"]}">',
        f'<rect x="0" y="0" width="{s["width"]}" height="{s["height"]}" fill="white"/>',
    ]
    if spec.title:
        out.append(f'<text x="{_px((f.left + f.right) / 2)}" y="{_px(f.top - 10)}" '
                   f'text-anchor="middle" {font}>{escape(spec.title)}</text>')

    out.append('<g class="axes" stroke="black" stroke-width="1">')
    out.append(f'<line x1="{_px(f.left)}" y1="{_px(f.bottom)}" x2="{_px(f.right)}" y2="{_px(f.bottom)}"/>')
    out.append(f'<line x1="{_px(f.left)}" y1="{_px(f.bottom)}" x2="{_px(f.left)}" y2="{_px(f.top)}"/>')
    tl = s["tick_length"]
    for n, _ in f.x_ticks():
        px = f.x(n)
        out.append(f'<line x1="{_px(px)}" y1="{_px(f.bottom)}" x2="{_px(px)}" y2="{_px(f.bottom + tl)}"/>')
    for r, _ in f.y_ticks():
        py = f.y(r)
        out.append(f'<line x1="{_px(f.left - tl)}" y1="{_px(py)}" x2="{_px(f.left)}" y2="{_px(py)}"/>')
    out.append("</g>")

    out.append(f'<g class="tick-labels" {font}>')
    for n, label in f.x_ticks():
        out.append(f'<text x="{_px(f.x(n))}" y="{_px(f.bottom + tl + 14)}" '
                   f'text-anchor="middle">{escape(label)}</text>')
    for r, label in f.y_ticks():
        out.append(f'<text x="{_px(f.left - tl - 4)}" y="{_px(f.y(r) + 4)}" '
                   f'text-anchor="end">{escape(label)}</text>')
    out.append("</g>")
    x_axis = spec.x_label + (" (log scale)" if spec.log_x else "")
    out.append(f'<text class="axis-label" x="{_px((f.left + f.right) / 2)}" '
               f'y="{_px(s["height"] - 12)}" text-anchor="middle" {font}>{escape(x_axis)}</text>')
    ymid = (f.top + f.bottom) / 2
    out.append(f'<text class="axis-label" x="18" y="{_px(ymid)}" text-anchor="middle" '
               f'transform="rotate(-90 18 {_px(ymid)})" {font}>{escape(spec.y_label)}</text>')

    for label, c in spec.reference_lines:
        py = f.y(c)
        out.append(f'<line class="reference" x1="{_px(f.left)}" y1="{_px(py)}" x2="{_px(f.right)}" '
                   f'y2="{_px(py)}" stroke="{s["reference_color"]}" stroke-width="1" '
                   f'stroke-dasharray="{s["reference_dash"]}"/>')
        out.append(f'<text class="reference-label" x="{_px(f.right + 6)}" y="{_px(py + 4)}" '
                   f'fill="{s["reference_color"]}" {font}>{escape(label)}</text>')

    legend_y = f.top + 10
    for k, (label, pts) in enumerate(spec.series):
        color = s["palette"][k % len(s["palette"])]
        coords = [(f.x(n), f.y(r)) for n, r in sorted(pts)]
        joined = " ".join(f"{_px(a)},{_px(b)}" for a, b in coords)
        out.append(f'<polyline class="series" points="{joined}" fill="none" stroke="{color}" '
                   f'stroke-width="{s["line_width"]}"/>')
        for a, b in coords:
            out.append(f'<circle class="marker" cx="{_px(a)}" cy="{_px(b)}" '
                       f'r="{s["marker_radius"]}" fill="{color}"/>')
        ly = legend_y + 40 + 18 * k
        out.append(f'<rect class="legend" x="{_px(f.right + 6)}" y="{_px(ly - 9)}" width="10" '
                   f'height="10" fill="{color}"/>')
        out.append(f'<text class="legend" x="{_px(f.right + 22)}" y="{_px(ly)}" {font}>'
                   f'{escape(label)}</text>')

    out.append("</svg>")
    return ("\n".join(out) + "\n").encode("utf-8")
