"""CSV, JSON, SVG and run-manifest writers used by the command line."""

from __future__ import annotations

import hashlib
import io
import json
import math
import platform
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import __version__

FLOAT_FMT = "{:.12g}"
_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


def fmt(x) -> str:
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return ""
    return FLOAT_FMT.format(float(x))


def write_csv(path, header, rows) -> None:
    """UTF-8, comma separated, LF line endings, 12 significant digits."""
    buf = io.StringIO(newline="")
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(fmt(v) for v in row) + "\n")
    Path(path).write_bytes(buf.getvalue().encode("utf-8"))


def jsonable(obj):
    """Recursively convert numpy scalars/arrays and NaN/inf into JSON-safe values."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if hasattr(obj, "tolist"):
        return jsonable(obj.tolist())
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    return obj


def dumps(obj) -> str:
    return json.dumps(jsonable(obj), indent=2) + "\n"


def write_json(path, obj) -> None:
    Path(path).write_bytes(dumps(obj).encode("utf-8"))


def sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


@dataclass
class RunManifest:
    command: str
    parameters: dict
    seed: int
    version: str = __version__
    python: str = field(default_factory=platform.python_version)
    duration_s: float = 0.0
    outputs: dict = field(default_factory=dict)

    def record_outputs(self, paths) -> None:
        self.outputs = {str(p): sha256(p) for p in paths if p is not None and Path(p).exists()}

    def write(self, path) -> None:
        write_json(path, asdict(self))


def manifest_path(out) -> Path:
    out = Path(out)
    return out.with_name(out.name + ".manifest.json")


def write_svg(path, x, series: dict, title: str = "", xlabel: str = "", ylabel: str = "",
              width: int = 640, height: int = 400) -> None:
    """Minimal SVG 1.1 line plot: frame, axis labels, one polyline per series, legend."""
    left, right, top, bottom = 60, 150, 30, 50
    pw, ph = width - left - right, height - top - bottom
    xs = [float(v) for v in x]
    ys = [float(v) for s in series.values() for v in s if v is not None and math.isfinite(v)]
    xmin, xmax = min(xs), max(xs)
    ymin, ymax = (min(ys), max(ys)) if ys else (0.0, 1.0)
    if ymax - ymin < 1e-12:
        ymin, ymax = ymin - 0.5, ymax + 0.5
    pad = 0.05 * (ymax - ymin)
    ymin, ymax = ymin - pad, ymax + pad
    xspan = (xmax - xmin) or 1.0

    def px(v):
        return left + (v - xmin) / xspan * pw

    def py(v):
        return top + (ymax - v) / (ymax - ymin) * ph

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}">',
        f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
        f'<text x="{left + pw / 2:.1f}" y="{top - 10}" text-anchor="middle" font-size="14">{title}</text>',
        f'<text x="{left + pw / 2:.1f}" y="{height - 12}" text-anchor="middle" font-size="12">{xlabel}</text>',
        f'<text x="15" y="{top + ph / 2:.1f}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 15 {top + ph / 2:.1f})">{ylabel}</text>',
    ]
    for i in range(5):
        xv = xmin + i * xspan / 4
        yv = ymin + i * (ymax - ymin) / 4
        out.append(f'<text x="{px(xv):.1f}" y="{top + ph + 16}" text-anchor="middle" '
                   f'font-size="10">{xv:.3g}</text>')
        out.append(f'<text x="{left - 5}" y="{py(yv) + 3:.1f}" text-anchor="end" '
                   f'font-size="10">{yv:.4g}</text>')
    for k, (name, ys_) in enumerate(series.items()):
        color = _COLORS[k % len(_COLORS)]
        pts = " ".join(
            f"{px(xv):.2f},{py(float(yv)):.2f}"
            for xv, yv in zip(xs, ys_)
            if yv is not None and math.isfinite(float(yv))
        )
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        ly = top + 15 + 18 * k
        out.append(f'<line x1="{left + pw + 10}" y1="{ly}" x2="{left + pw + 30}" y2="{ly}" '
                   f'stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{left + pw + 35}" y="{ly + 4}" font-size="11">{name}</text>')
    out.append("</svg>")
    Path(path).write_bytes(("\n".join(out) + "\n").encode("utf-8"))
