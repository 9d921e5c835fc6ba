"""CSV and SVG writers.  Output is byte-stable for identical inputs."""

from __future__ import annotations

import math
from collections import defaultdict
from pathlib import Path
from typing import Sequence
from xml.sax.saxutils import escape

from dbsim.core import derive_counts
from dbsim.registration import EfficiencyPoint
from dbsim.sweep import Table1Comparison

CSV_HEADER = "n_t,n_tr,mu,b_l,n_0,n_bin,n_dist,n_p_mean,n_p_stderr,de,trials,seed"
TABLE1_HEADER = (
    "n_t,n_tr,n_0,n_bin,n_dist,n_p,de,"
    "published_n_0,published_n_bin,published_n_dist,published_n_p,published_de,n_p_rel_dev,de_rel_dev"
)

COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b")


def _write(path: Path | str, text: str) -> None:
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        fh.write(text)


def _hz(rate: float) -> str:
    return str(int(round(rate)))


def csv_text(points: Sequence[EfficiencyPoint]) -> str:
    if not points:
        raise ValueError("no points to write")
    lines = [CSV_HEADER]
    for p in points:
        c, d = p.config, derive_counts(p.config)
        lines.append(
            ",".join(
                [
                    _hz(c.n_t), _hz(c.n_tr), repr(float(c.mu)), str(c.b_l),
                    str(d.n_0), str(d.n_bin), str(d.n_dist),
                    repr(p.n_p_mean), repr(p.n_p_std_error), repr(p.de),
                    str(p.trials), str(p.seed),
                ]
            )
        )
    return "\n".join(lines) + "\n"


def emit_csv(points: Sequence[EfficiencyPoint], destination: Path | str) -> None:
    _write(destination, csv_text(points))


def table1_csv_text(rows: Sequence[Table1Comparison]) -> str:
    lines = [TABLE1_HEADER]
    for row in rows:
        p, ref = row.point, row.published
        d = derive_counts(p.config)
        lines.append(
            ",".join(
                [
                    _hz(p.config.n_t), _hz(p.config.n_tr), str(d.n_0), str(d.n_bin), str(d.n_dist),
                    repr(p.n_p_mean), repr(p.de),
                    str(ref.n_0), str(ref.n_bin), str(ref.n_dist), str(ref.n_p), repr(ref.de),
                    repr(row.n_p_rel_dev), repr((p.de - ref.de) / ref.de),
                ]
            )
        )
    return "\n".join(lines) + "\n"


def format_table1(rows: Sequence[Table1Comparison]) -> str:
    head = (
        f"{'(N_T, N_TR) MHz':>16} {'n_0':>8} {'n_bin':>8} {'n_dist':>8} "
        f"{'n_p sim':>10} {'n_p pub':>8} {'dev':>7} {'DE sim':>7} {'DE pub':>7} {'dDE':>7}"
    )
    out = [head, "-" * len(head)]
    for row in rows:
        p, ref = row.point, row.published
        d = derive_counts(p.config)
        label = f"({p.config.n_t / 1e6:g}, {p.config.n_tr / 1e6:g})"
        out.append(
            f"{label:>16} {d.n_0:>8} {d.n_bin:>8} {d.n_dist:>8} "
            f"{p.n_p_mean:>10.0f} {ref.n_p:>8} {row.n_p_rel_dev:>+7.2%} "
            f"{p.de:>7.3f} {ref.de:>7.3f} {row.de_abs_dev:>+7.3f}"
        )
    return "\n".join(out)


def svg_text(points: Sequence[EfficiencyPoint], title: str = "Detection efficiency vs pulse rate") -> str:
    """Line chart of DE against n_t (log axis), one series per n_tr."""
    if not points:
        raise ValueError("no points to plot")
    width, height = 720, 480
    left, right, top, bottom = 80, 170, 50, 70
    pw, ph = width - left - right, height - top - bottom

    series: dict[float, list[EfficiencyPoint]] = defaultdict(list)
    for p in points:
        series[float(p.config.n_tr)].append(p)

    xs = [math.log10(p.config.n_t) for p in points]
    ys = [p.de for p in points]
    x_lo, x_hi = math.floor(min(xs)), math.ceil(max(xs))
    if x_hi == x_lo:
        x_hi += 1
    y_lo = math.floor(min(ys) * 50) / 50
    y_hi = math.ceil(max(ys) * 50) / 50
    if y_hi - y_lo < 0.02:
        y_lo, y_hi = y_lo - 0.01, y_hi + 0.01

    def px(x: float) -> float:
        return left + (x - x_lo) / (x_hi - x_lo) * pw

    def py(y: float) -> float:
        return top + (y_hi - y) / (y_hi - y_lo) * ph

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<text x="{left + pw / 2:.1f}" y="28" text-anchor="middle" font-size="15">{escape(title)}</text>',
        f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for decade in range(x_lo, x_hi + 1):
        x = px(decade)
        out.append(f'<line x1="{x:.2f}" y1="{top}" x2="{x:.2f}" y2="{top + ph}" stroke="#dddddd"/>')
        out.append(f'<text x="{x:.2f}" y="{top + ph + 18}" text-anchor="middle">{10.0 ** decade / 1e6:g}</text>')
    n_yticks = 5
    for k in range(n_yticks + 1):
        y = y_lo + (y_hi - y_lo) * k / n_yticks
        out.append(f'<line x1="{left}" y1="{py(y):.2f}" x2="{left + pw}" y2="{py(y):.2f}" stroke="#dddddd"/>')
        out.append(f'<text x="{left - 8}" y="{py(y) + 4:.2f}" text-anchor="end">{y:.3f}</text>')
    out.append(
        f'<text x="{left + pw / 2:.1f}" y="{height - 20}" text-anchor="middle">'
        "light-pulse arriving rate N_T (MHz, log scale)</text>"
    )
    out.append(
        f'<text x="20" y="{top + ph / 2:.1f}" text-anchor="middle" '
        f'transform="rotate(-90 20 {top + ph / 2:.1f})">detection efficiency DE</text>'
    )

    for k, n_tr in enumerate(sorted(series)):
        color = COLORS[k % len(COLORS)]
        pts = sorted(series[n_tr], key=lambda p: p.config.n_t)
        coords = " ".join(f"{px(math.log10(p.config.n_t)):.2f},{py(p.de):.2f}" for p in pts)
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="2" points="{coords}"/>')
        for p in pts:
            out.append(
                f'<circle cx="{px(math.log10(p.config.n_t)):.2f}" cy="{py(p.de):.2f}" r="4" fill="{color}"/>'
            )
        ly = top + 20 + 22 * k
        out.append(f'<line x1="{left + pw + 15}" y1="{ly}" x2="{left + pw + 40}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{left + pw + 46}" y="{ly + 4}">N_TR = {n_tr / 1e6:g} MHz</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def emit_svg(points: Sequence[EfficiencyPoint], destination: Path | str) -> None:
    _write(destination, svg_text(points))
