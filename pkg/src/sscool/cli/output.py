"""CSV emission with provenance and minimal SVG line plots."""
from __future__ import annotations

import datetime as _dt
from pathlib import Path

import numpy as np

from .. import __version__

GENERATED_PREFIX = "# generated:"


def fmt(x) -> str:
    """17 significant digits, scientific notation (lossless for doubles)."""
    return f"{float(x):.16e}"


def provenance_lines(params: dict, extra: dict | None = None) -> list:
    items = " ".join(f"{k}={v}" for k, v in params.items())
    lines = [f"# params: {items}", f"# version: sscool {__version__}"]
    for key, value in (extra or {}).items():
        lines.append(f"# {key}: {value}")
    lines.append(f"{GENERATED_PREFIX} {_dt.datetime.now(_dt.timezone.utc).isoformat()}")
    return lines


def write_csv(path: Path, header: str, rows, params: dict, extra: dict | None = None) -> Path:
    lines = provenance_lines(params, extra)
    lines.append(header)
    for row in rows:
        lines.append(",".join(fmt(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")
    return Path(path)


def read_csv(path: Path):
    """Return (header fields, float array), skipping comment lines."""
    lines = [l for l in Path(path).read_text().splitlines() if l and not l.startswith("#")]
    header = lines[0].split(",")
    data = np.array([[float(x) for x in l.split(",")] for l in lines[1:]])
    return header, data.reshape(-1, len(header))


def _ticks(lo, hi, count=5):
    if hi <= lo:
        hi = lo + 1.0
    return np.linspace(lo, hi, count)


def write_svg(path: Path, series, xlabel: str = "", ylabel: str = "",
              logy: bool = False, width: int = 640, height: int = 420) -> Path:
    """Undecorated polylines with axis ticks.

    ``series`` holds ``(label, x, y, dashed)`` tuples; non-finite points are
    dropped, and so are non-positive ones when ``logy`` is set.
    """
    margin = 60
    cleaned = []
    for label, x, y, dashed in series:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        ok = np.isfinite(x) & np.isfinite(y)
        if logy:
            ok &= y > 0
        if ok.sum() >= 1:
            cleaned.append((label, x[ok], np.log10(y[ok]) if logy else y[ok], dashed))
    all_x = np.concatenate([c[1] for c in cleaned]) if cleaned else np.array([0.0, 1.0])
    all_y = np.concatenate([c[2] for c in cleaned]) if cleaned else np.array([0.0, 1.0])
    x0, x1 = float(all_x.min()), float(all_x.max())
    y0, y1 = float(all_y.min()), float(all_y.max())
    if x1 <= x0:
        x1 = x0 + 1.0
    if y1 <= y0:
        y1 = y0 + 1.0

    def sx(v):
        return margin + (v - x0) / (x1 - x0) * (width - 2 * margin)

    def sy(v):
        return height - margin - (v - y0) / (y1 - y0) * (height - 2 * margin)

    shades = ["#000000", "#555555", "#999999", "#cc3333", "#3366cc", "#339933"]
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
           f'<rect width="{width}" height="{height}" fill="white"/>',
           f'<line x1="{margin}" y1="{height - margin}" x2="{width - margin}" y2="{height - margin}" stroke="black"/>',
           f'<line x1="{margin}" y1="{margin}" x2="{margin}" y2="{height - margin}" stroke="black"/>']
    for v in _ticks(x0, x1):
        out.append(f'<line x1="{sx(v):.2f}" y1="{height - margin}" x2="{sx(v):.2f}" '
                   f'y2="{height - margin + 5}" stroke="black"/>')
        out.append(f'<text x="{sx(v):.2f}" y="{height - margin + 18}" font-size="11" '
                   f'text-anchor="middle">{v:.3g}</text>')
    for v in _ticks(y0, y1):
        text = f"1e{v:.2g}" if logy else f"{v:.3g}"
        out.append(f'<line x1="{margin - 5}" y1="{sy(v):.2f}" x2="{margin}" y2="{sy(v):.2f}" stroke="black"/>')
        out.append(f'<text x="{margin - 8}" y="{sy(v) + 4:.2f}" font-size="11" '
                   f'text-anchor="end">{text}</text>')
    for i, (label, x, y, dashed) in enumerate(cleaned):
        pts = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in zip(x, y))
        dash = ' stroke-dasharray="6,4"' if dashed else ""
        colour = shades[i % len(shades)]
        out.append(f'<polyline fill="none" stroke="{colour}" stroke-width="1.5"{dash} '
                   f'points="{pts}"><title>{label}</title></polyline>')
        out.append(f'<text x="{width - margin + 4}" y="{margin + 14 * i}" font-size="10" '
                   f'fill="{colour}">{label}</text>')
    out.append(f'<text x="{width / 2}" y="{height - 15}" font-size="12" text-anchor="middle">{xlabel}</text>')
    out.append(f'<text x="15" y="{height / 2}" font-size="12" text-anchor="middle" '
               f'transform="rotate(-90 15 {height / 2})">{ylabel}</text>')
    out.append("</svg>")
    Path(path).write_text("\n".join(out) + "\n")
    return Path(path)
