"""Artifact writers: series CSV, check reports, seed manifest, SVG plots.

Every writer goes through a temp file and an atomic rename, so a crash can
not leave a partially-written artifact.  Reals are formatted with repr, so
CSV values round-trip to the exact double that was computed.
"""

from __future__ import annotations

import json
import math
import os
import tempfile

from .disorder_mc import DecayResult, EstimateSeries
from .theorems import CheckReport

SERIES_HEADER = "quantity,h,n,mean,stderr,samples"
SEED_SCHEME = "philox: key = (master_seed, sample_index), counter from 0"


def atomic_write_text(path: str, text: str):
    directory = os.path.dirname(os.path.abspath(path)) or "."
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    finally:
        if os.path.exists(tmp):
            os.unlink(tmp)


def _real(x: float) -> str:
    return repr(float(x))


def write_series_csv(path: str, series: list[EstimateSeries]):
    lines = [SERIES_HEADER]
    for s in series:
        lines.append(f"{s.quantity},{_real(s.h)},{s.n},{_real(s.mean)},"
                     f"{_real(s.stderr)},{s.samples}")
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_series_csv(path: str) -> list[EstimateSeries]:
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0] != SERIES_HEADER:
        raise ValueError(f"{path}: not a series file (bad header)")
    out = []
    for line in lines[1:]:
        q, h, n, mean, stderr, samples = line.split(",")
        out.append(EstimateSeries(q, float(h), int(n), float(mean),
                                  float(stderr), int(samples)))
    return out


def write_report_json(path: str, reports: list[CheckReport]):
    payload = {
        "checks": [r.to_dict() for r in reports],
        "passed": all(r.passed is not False for r in reports),
        "counts": {
            "pass": sum(1 for r in reports if r.passed is True),
            "fail": sum(1 for r in reports if r.passed is False),
            "skip": sum(1 for r in reports if r.passed is None),
        },
    }
    atomic_write_text(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def write_seeds_json(path: str, master_seed: int, samples: int):
    payload = {"master_seed": int(master_seed),
               "samples": int(samples),
               "scheme": SEED_SCHEME,
               "scheme_version": 1}
    atomic_write_text(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def write_decay_csv(path: str, decays: list[DecayResult]):
    """Companion table for the two-replica profile: one row per (h, j)."""
    lines = ["h,j,log_mean_a,rel_stderr"]
    for d in decays:
        for j in range(1, d.window + 1):
            lines.append(f"{_real(d.h)},{j},{_real(d.log_mean_a[j])},"
                         f"{_real(d.rel_stderr_a[j])}")
    atomic_write_text(path, "\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# SVG line plots: fixed canvas, no external renderer.

_W, _H = 640, 420
_ML, _MR, _MT, _MB = 64, 16, 36, 48
_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
            "#8c564b", "#17becf", "#7f7f7f")


def _ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    if not (math.isfinite(lo) and math.isfinite(hi)) or hi <= lo:
        return [lo]
    raw = (hi - lo) / count
    mag = 10.0 ** math.floor(math.log10(raw))
    step = min((s for s in (1.0, 2.0, 2.5, 5.0, 10.0)), key=lambda s: abs(s * mag - raw)) * mag
    first = math.ceil(lo / step) * step
    out = []
    t = first
    while t <= hi + 1e-9 * step:
        out.append(0.0 if abs(t) < 1e-12 * step else t)
        t += step
    return out


def _fmt_tick(v: float) -> str:
    if v == 0.0:
        return "0"
    if abs(v) >= 1e4 or abs(v) < 1e-3:
        return f"{v:.1e}"
    return f"{v:.6g}"


def svg_line_plot(path: str, title: str, x_label: str, y_label: str,
                  curves: list[tuple[str, list[float], list[float]]]):
    """Curves are (label, xs, ys); non-finite points are dropped."""
    pts = []
    for _, xs, ys in curves:
        pts.extend((x, y) for x, y in zip(xs, ys)
                   if math.isfinite(x) and math.isfinite(y))
    if not pts:
        raise ValueError(f"{path}: nothing to plot")
    x_lo = min(p[0] for p in pts); x_hi = max(p[0] for p in pts)
    y_lo = min(p[1] for p in pts); y_hi = max(p[1] for p in pts)
    if x_hi == x_lo:
        x_lo, x_hi = x_lo - 0.5, x_hi + 0.5
    if y_hi == y_lo:
        y_lo, y_hi = y_lo - 0.5, y_hi + 0.5
    pad = 0.04 * (y_hi - y_lo)
    y_lo, y_hi = y_lo - pad, y_hi + pad

    def sx(x):
        return _ML + (x - x_lo) / (x_hi - x_lo) * (_W - _ML - _MR)

    def sy(y):
        return _H - _MB - (y - y_lo) / (y_hi - y_lo) * (_H - _MT - _MB)

    e = []
    e.append(f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {_W} {_H}" '
             f'font-family="sans-serif" font-size="12">')
    e.append(f'<rect width="{_W}" height="{_H}" fill="white"/>')
    e.append(f'<text x="{_W / 2:.0f}" y="20" text-anchor="middle" '
             f'font-size="14">{title}</text>')
    # axes
    e.append(f'<line x1="{_ML}" y1="{_H - _MB}" x2="{_W - _MR}" y2="{_H - _MB}" '
             f'stroke="black"/>')
    e.append(f'<line x1="{_ML}" y1="{_MT}" x2="{_ML}" y2="{_H - _MB}" '
             f'stroke="black"/>')
    for t in _ticks(x_lo, x_hi):
        x = sx(t)
        e.append(f'<line x1="{x:.1f}" y1="{_H - _MB}" x2="{x:.1f}" '
                 f'y2="{_H - _MB + 4}" stroke="black"/>')
        e.append(f'<text x="{x:.1f}" y="{_H - _MB + 18}" '
                 f'text-anchor="middle">{_fmt_tick(t)}</text>')
    for t in _ticks(y_lo, y_hi):
        y = sy(t)
        e.append(f'<line x1="{_ML - 4}" y1="{y:.1f}" x2="{_ML}" y2="{y:.1f}" '
                 f'stroke="black"/>')
        e.append(f'<text x="{_ML - 8}" y="{y + 4:.1f}" '
                 f'text-anchor="end">{_fmt_tick(t)}</text>')
    e.append(f'<text x="{(_ML + _W - _MR) / 2:.0f}" y="{_H - 10}" '
             f'text-anchor="middle">{x_label}</text>')
    e.append(f'<text x="16" y="{(_MT + _H - _MB) / 2:.0f}" text-anchor="middle" '
             f'transform="rotate(-90 16 {(_MT + _H - _MB) / 2:.0f})">'
             f'{y_label}</text>')
    for k, (label, xs, ys) in enumerate(curves):
        color = _PALETTE[k % len(_PALETTE)]
        coords = [(sx(x), sy(y)) for x, y in zip(xs, ys)
                  if math.isfinite(x) and math.isfinite(y)]
        if not coords:
            continue
        path_d = " ".join(f"{x:.1f},{y:.1f}" for x, y in coords)
        e.append(f'<polyline points="{path_d}" fill="none" stroke="{color}" '
                 f'stroke-width="1.5"/>')
        for x, y in coords:
            e.append(f'<circle cx="{x:.1f}" cy="{y:.1f}" r="2.2" '
                     f'fill="{color}"/>')
        ly = _MT + 14 * (k + 1)
        e.append(f'<line x1="{_W - _MR - 120}" y1="{ly - 4}" '
                 f'x2="{_W - _MR - 96}" y2="{ly - 4}" stroke="{color}" '
                 f'stroke-width="2"/>')
        e.append(f'<text x="{_W - _MR - 90}" y="{ly}">{label}</text>')
    e.append("</svg>")
    atomic_write_text(path, "\n".join(e) + "\n")


def plot_series(out_dir: str, series: list[EstimateSeries]) -> list[str]:
    """Standard diagnostic plots from whatever quantities are present."""
    os.makedirs(os.path.join(out_dir, "plots"), exist_ok=True)
    written = []
    by_q = {}
    for s in series:
        by_q.setdefault(s.quantity, []).append(s)

    f_rows = by_q.get("f", [])
    if f_rows:
        by_n = {}
        for s in f_rows:
            by_n.setdefault(s.n, []).append(s)
        curves = []
        for n in sorted(by_n):
            rows = sorted(by_n[n], key=lambda s: s.h)
            curves.append((f"n={n}", [s.h for s in rows],
                           [s.mean for s in rows]))
        if any(len(xs) > 1 for _, xs, _ in curves):
            p = os.path.join(out_dir, "plots", "f_vs_h.svg")
            svg_line_plot(p, "quenched free energy", "h", "f", curves)
            written.append(p)

    mu_rows = sorted(by_q.get("mu", []), key=lambda s: s.h)
    if len(mu_rows) > 1:
        p = os.path.join(out_dir, "plots", "mu_vs_h.svg")
        svg_line_plot(p, "alternative free energy", "h", "mu",
                      [("mu", [s.h for s in mu_rows],
                        [s.mean for s in mu_rows])])
        written.append(p)

    for q, fname, title in (("w", "w_vs_n.svg", "centering variance density"),
                            ("v", "v_vs_n.svg", "thermal variance density")):
        rows = by_q.get(q, [])
        by_h = {}
        for s in rows:
            by_h.setdefault(s.h, []).append(s)
        curves = [(f"h={h:g}", [s.n for s in sorted(g, key=lambda s: s.n)],
                   [s.mean for s in sorted(g, key=lambda s: s.n)])
                  for h, g in sorted(by_h.items())]
        if any(len(xs) > 1 for _, xs, _ in curves):
            p = os.path.join(out_dir, "plots", fname)
            svg_line_plot(p, title, "n", q, curves)
            written.append(p)
    return written


def plot_decay(out_dir: str, decays: list[DecayResult]) -> list[str]:
    curves = [(f"h={d.h:g}", list(range(1, d.window + 1)),
               [d.log_mean_a[j] for j in range(1, d.window + 1)])
              for d in decays]
    os.makedirs(os.path.join(out_dir, "plots"), exist_ok=True)
    p = os.path.join(out_dir, "plots", "avoidance_vs_j.svg")
    svg_line_plot(p, "two-replica avoidance", "j", "log a_j", curves)
    return [p]


def plot_report(out_dir: str, report_path: str) -> list[str]:
    """KS-vs-n diagnostic from a written report, when C2 ran."""
    with open(report_path, "r", encoding="utf-8") as fh:
        payload = json.load(fh)
    for check in payload.get("checks", []):
        if check.get("check_id") != "C2":
            continue
        ns = check.get("parameters", {}).get("n_values", [])
        means = [check.get("metrics", {}).get(f"ks_mean_n{n}") for n in ns]
        pairs = [(n, v) for n, v in zip(ns, means)
                 if isinstance(v, (int, float))]
        if len(pairs) > 1:
            os.makedirs(os.path.join(out_dir, "plots"), exist_ok=True)
            p = os.path.join(out_dir, "plots", "ks_vs_n.svg")
            svg_line_plot(p, "contact-law normality", "n", "KS distance",
                          [("KS", [x for x, _ in pairs],
                            [y for _, y in pairs])])
            return [p]
    return []
