"""CSV/JSON/SVG writers for solver results.

All numeric CSV fields use 17 significant digits so files round-trip and are
byte-identical across runs of the same configuration.
"""

import csv
import json
from pathlib import Path

import numpy as np

from . import __version__
from .fitting import eval_model

FLOAT_FMT = "%.17g"


def _fmt(value):
    if value is None or (isinstance(value, float) and np.isnan(value)):
        return ""
    if isinstance(value, (float, np.floating)):
        return FLOAT_FMT % value
    return str(value)


def write_csv(path, header, rows):
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
    return path


def read_csv(path):
    with Path(path).open(newline="") as fh:
        return list(csv.DictReader(fh))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def write_json(path, data):
    path = Path(path)
    path.write_text(json.dumps(_jsonable(data), indent=2, sort_keys=True) + "\n")
    return path


# -- spectrum / tables ---------------------------------------------------------


def write_eigenvalues(path, spectrum):
    rows = [
        (n, float(lam), parity, float(res))
        for n, (lam, parity, res) in enumerate(zip(spectrum.lambdas, spectrum.parities, spectrum.residuals))
    ]
    return write_csv(path, ["n", "lambda", "parity", "residual"], rows)


def write_eigenfunctions(path, spectrum, xmax=None):
    x = spectrum.positions
    mask = np.ones_like(x, dtype=bool) if xmax is None else np.abs(x) <= xmax
    header = ["x"] + [f"phi{n}" for n in range(spectrum.n_eig)]
    rows = (
        (float(xi), *(float(v) for v in vals)) for xi, vals in zip(x[mask], spectrum.vectors[mask])
    )
    return write_csv(path, header, rows)


def write_table1(path, comparison):
    rows = [(m, *map(float, vals)) for m, *vals in comparison.table1_rows()]
    return write_csv(path, ["m", "lambda_2m", "lambda_2m+1", "qc_2m", "qc_2m+1"], rows)


def write_table1_long(path, comparison):
    rows = [(r.n, r.numeric, r.qc, r.delta) for r in comparison.rows]
    return write_csv(path, ["n", "lambda", "qc", "delta"], rows)


def format_table1(comparison):
    """Fixed-width text table: 5 decimals for lattice values, 4 for quasi-classical ones."""
    lines = [
        f"{'m':>3}  {'lambda_2m':>10}  {'lambda_2m+1':>11}  {'qc_2m':>8}  {'qc_2m+1':>8}",
    ]
    for m, l0, l1, q0, q1 in comparison.table1_rows():
        lines.append(f"{m:>3}  {l0:>10.5f}  {l1:>11.5f}  {q0:>8.4f}  {q1:>8.4f}")
    return "\n".join(lines)


def write_fits(path, fits):
    rows = []
    for f in fits:
        p = list(map(float, f.params)) + [None] * (4 - len(f.params))
        rows.append((f.n, *p, f.rms_residual, f.max_abs_residual, float(f.window[1])))
    return write_csv(path, ["n", "a", "b", "c", "d", "rms", "max_abs", "window"], rows)


# -- SVG -------------------------------------------------------------------------

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf")
_W, _H, _M = 640, 420, 56


def _ticks(lo, hi, count=5):
    raw = (hi - lo) / count
    mag = 10 ** np.floor(np.log10(raw))
    step = min((s * mag for s in (1, 2, 5, 10) if s * mag >= raw), default=raw)
    start = np.ceil(lo / step) * step
    return [start + i * step for i in range(int(np.floor((hi - start) / step + 1e-9)) + 1)]


def svg_plot(title, curves, markers=(), xlabel="x", ylabel="phi_n(x)"):
    """Render line `curves` and cross `markers` as a standalone SVG string.

    ``curves`` and ``markers`` are sequences of ``(label, x, y)``.
    """
    xs = np.concatenate([np.asarray(c[1]) for c in curves])
    ys = np.concatenate([np.asarray(c[2]) for c in curves] + [np.asarray(m[2]) for m in markers])
    x0, x1 = float(xs.min()), float(xs.max())
    y0, y1 = float(ys.min()), float(ys.max())
    pad = 0.05 * (y1 - y0 or 1.0)
    y0, y1 = y0 - pad, y1 + pad

    def px(x):
        return _M + (np.asarray(x) - x0) / (x1 - x0) * (_W - 2 * _M)

    def py(y):
        return _H - _M - (np.asarray(y) - y0) / (y1 - y0) * (_H - 2 * _M)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" viewBox="0 0 {_W} {_H}">',
        f"<!-- bilinosc {__version__} -->",
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_W / 2:.1f}" y="24" text-anchor="middle" font-family="sans-serif" font-size="15">{title}</text>',
        f'<rect x="{_M}" y="{_M}" width="{_W - 2 * _M}" height="{_H - 2 * _M}" fill="none" stroke="black"/>',
    ]
    for t in _ticks(x0, x1):
        X = float(px(t))
        out.append(f'<line x1="{X:.2f}" y1="{_H - _M}" x2="{X:.2f}" y2="{_H - _M + 5}" stroke="black"/>')
        out.append(
            f'<text x="{X:.2f}" y="{_H - _M + 18}" text-anchor="middle" font-family="sans-serif" font-size="11">{t:g}</text>'
        )
    for t in _ticks(y0, y1):
        Y = float(py(t))
        out.append(f'<line x1="{_M - 5}" y1="{Y:.2f}" x2="{_M}" y2="{Y:.2f}" stroke="black"/>')
        out.append(
            f'<text x="{_M - 8}" y="{Y + 4:.2f}" text-anchor="end" font-family="sans-serif" font-size="11">{t:.3g}</text>'
        )
    if y0 < 0 < y1:
        Y = float(py(0.0))
        out.append(f'<line x1="{_M}" y1="{Y:.2f}" x2="{_W - _M}" y2="{Y:.2f}" stroke="#bbbbbb" stroke-dasharray="4 3"/>')
    out.append(f'<text x="{_W / 2:.1f}" y="{_H - 12}" text-anchor="middle" font-family="sans-serif" font-size="13">{xlabel}</text>')
    out.append(
        f'<text x="16" y="{_H / 2:.1f}" text-anchor="middle" font-family="sans-serif" font-size="13" '
        f'transform="rotate(-90 16 {_H / 2:.1f})">{ylabel}</text>'
    )
    for i, (label, x, y) in enumerate(curves):
        pts = " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(px(x), py(y)))
        color = _COLORS[i % len(_COLORS)]
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.6" points="{pts}"/>')
        ly = _M + 16 + 16 * i
        out.append(f'<line x1="{_W - _M - 92}" y1="{ly - 4}" x2="{_W - _M - 72}" y2="{ly - 4}" stroke="{color}" stroke-width="2"/>')
        out.append(f'<text x="{_W - _M - 66}" y="{ly}" font-family="sans-serif" font-size="12">{label}</text>')
    for label, x, y in markers:
        for a, b in zip(px(x), py(y)):
            out.append(
                f'<path d="M{a - 3:.2f},{b - 3:.2f} L{a + 3:.2f},{b + 3:.2f} M{a - 3:.2f},{b + 3:.2f} L{a + 3:.2f},{b - 3:.2f}" stroke="black" stroke-width="1"/>'
            )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _plot_window(spectrum, xmax, max_points=1200):
    x = spectrum.positions
    idx = np.flatnonzero(np.abs(x) <= xmax)
    stride = max(1, int(np.ceil(idx.size / max_points)))
    # keep x = 0 on the sampled grid
    c = spectrum.config.center
    idx = idx[(idx - c) % stride == 0]
    return idx


def write_parity_figure(out_dir, spectrum, parity, xmax=10.0):
    levels = [n for n, p in enumerate(spectrum.parities) if p == parity][:4]
    stem = f"fig_{parity}"
    if not levels:
        return []
    idx = _plot_window(spectrum, xmax)
    x = spectrum.positions[idx]
    curves = [(f"n={n}", x, spectrum.vectors[idx, n]) for n in levels]
    title = f"{'Symmetric' if parity == 'even' else 'Antisymmetric'} eigenfunctions"
    svg = Path(out_dir) / f"{stem}.svg"
    svg.write_text(svg_plot(title, curves))
    csv_path = write_csv(
        Path(out_dir) / f"{stem}.csv",
        ["x"] + [f"phi{n}" for n in levels],
        ((float(xi), *(float(spectrum.vectors[i, n]) for n in levels)) for i, xi in zip(idx, x)),
    )
    return [svg, csv_path]


def write_fit_figure(out_dir, spectrum, fits, xmax=10.0, marker_step=0.5):
    idx = _plot_window(spectrum, xmax)
    x = spectrum.positions[idx]
    curves = [(f"n={f.n}", x, spectrum.vectors[idx, f.n]) for f in fits]
    xm = np.arange(-np.floor(xmax / marker_step), np.floor(xmax / marker_step) + 1) * marker_step
    markers = [(f"fit n={f.n}", xm, eval_model(f.n, f.params, xm)) for f in fits]
    svg = Path(out_dir) / "fig_fits.svg"
    svg.write_text(svg_plot("Eigenfunctions (lines) and closed-form fits (crosses)", curves, markers))
    header = ["x"] + [f"phi{f.n}" for f in fits] + [f"model{f.n}" for f in fits]
    rows = []
    for i, xi in zip(idx, x):
        rows.append(
            (float(xi), *(float(spectrum.vectors[i, f.n]) for f in fits), *(float(eval_model(f.n, f.params, xi)) for f in fits))
        )
    csv_path = write_csv(Path(out_dir) / "fig_fits.csv", header, rows)
    return [svg, csv_path]
