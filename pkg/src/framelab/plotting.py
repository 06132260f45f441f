"""Plot-ready data from a finished run: gnuplot ``.dat`` files plus plain SVG charts.

Which charts are produced follows the run's ``diagnostics`` list:
``phase`` (alpha-chi trace), ``frames`` (frame tangent against time) and
``bkm``/``chip`` (accumulated integrals against time).
"""
from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .cli import MANIFEST, UsageError, fmt, sha256

PLOT_DIR = "plots"
WIDTH, HEIGHT, PAD = 640, 420, 50
COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd")


def _read_csv(path: Path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def write_dat(path: Path, header, columns) -> None:
    lines = ["# " + " ".join(header)]
    for row in zip(*columns):
        lines.append(" ".join(fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def svg_chart(series, title: str, xlabel: str, ylabel: str) -> str:
    """Line chart of ``series = [(label, xs, ys), ...]`` as an SVG document."""
    finite = [(lab, np.asarray(x, float), np.asarray(y, float)) for lab, x, y in series]
    xs = np.concatenate([x[np.isfinite(y)] for _, x, y in finite] or [np.zeros(1)])
    ys = np.concatenate([y[np.isfinite(y)] for _, _, y in finite] or [np.zeros(1)])
    x0, x1 = float(xs.min()), float(xs.max())
    y0, y1 = float(ys.min()), float(ys.max())
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y0, y1 = y0 - 0.5, y1 + 0.5

    def px(x):
        return PAD + (x - x0) / (x1 - x0) * (WIDTH - 2 * PAD)

    def py(y):
        return HEIGHT - PAD - (y - y0) / (y1 - y0) * (HEIGHT - 2 * PAD)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect x="{PAD}" y="{PAD}" width="{WIDTH - 2 * PAD}" height="{HEIGHT - 2 * PAD}" fill="none" stroke="#888"/>',
        f'<text x="{WIDTH / 2}" y="{PAD / 2}" text-anchor="middle">{title}</text>',
        f'<text x="{WIDTH / 2}" y="{HEIGHT - 10}" text-anchor="middle">{xlabel}</text>',
        f'<text x="15" y="{HEIGHT / 2}" transform="rotate(-90 15 {HEIGHT / 2})" text-anchor="middle">{ylabel}</text>',
        f'<text x="{PAD}" y="{HEIGHT - PAD + 15}">{x0:.4g}</text>',
        f'<text x="{WIDTH - PAD}" y="{HEIGHT - PAD + 15}" text-anchor="end">{x1:.4g}</text>',
        f'<text x="{PAD - 5}" y="{HEIGHT - PAD}" text-anchor="end">{y0:.4g}</text>',
        f'<text x="{PAD - 5}" y="{PAD + 10}" text-anchor="end">{y1:.4g}</text>',
    ]
    for i, (label, x, y) in enumerate(finite):
        ok = np.isfinite(y)
        pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(x[ok], y[ok]))
        color = COLORS[i % len(COLORS)]
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{pts}"/>')
        out.append(f'<text x="{WIDTH - PAD - 5}" y="{PAD + 15 * (i + 1)}" text-anchor="end" fill="{color}">{label}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _phase(run_dir: Path, plots: Path):
    header, rows = _read_csv(run_dir / "phase.csv")
    a = np.array(rows, dtype=float)
    write_dat(plots / "phase.dat", ["alpha", "chi", "t"], [a[:, 1], a[:, 2], a[:, 0]])
    (plots / "phase.svg").write_text(svg_chart([("trajectory", a[:, 1], a[:, 2])], "phase plane", "alpha", "chi"))
    return ["phase.dat", "phase.svg"]


def _frames(run_dir: Path, plots: Path):
    header, rows = _read_csv(run_dir / "trajectories.csv")
    if not rows:
        return []
    first = [r for r in rows if r[0] == rows[0][0] and r[1] == rows[0][1]]
    a = np.array([r[2:] for r in first], dtype=float)
    t, w = a[:, 0], a[:, 4:7]
    write_dat(plots / "frames.dat", ["t", "w_hat_x", "w_hat_y", "w_hat_z", "w_mag"], [t, w[:, 0], w[:, 1], w[:, 2], a[:, -1]])
    chart = svg_chart([(f"w_hat_{c}", t, w[:, i]) for i, c in enumerate("xyz")], "frame tangent", "t", "component")
    (plots / "frames.svg").write_text(chart)
    return ["frames.dat", "frames.svg"]


def _integrals(run_dir: Path, plots: Path):
    header, rows = _read_csv(run_dir / "diagnostics.csv")
    a = np.array(rows, dtype=float).reshape(-1, len(header))
    col = {h: a[:, i] for i, h in enumerate(header)}
    names = ["bkm_integral", "cf_integral", "chip_integral"]
    write_dat(plots / "integrals.dat", ["t"] + names, [col["t"]] + [col[n] for n in names])
    series = [(n, col["t"], col[n]) for n in names if np.isfinite(col[n]).any()]
    (plots / "integrals.svg").write_text(svg_chart(series, "accumulated monitors", "t", "integral"))
    return ["integrals.dat", "integrals.svg"]


def emit_plotdata(run_dir) -> list[str]:
    """Write plot files under ``run_dir/plots`` and register them in the manifest."""
    run_dir = Path(run_dir)
    mpath = run_dir / MANIFEST
    if not mpath.exists():
        raise UsageError(f"{run_dir}: no {MANIFEST}; not a completed run directory")
    manifest = json.loads(mpath.read_text())
    outputs = manifest.get("outputs", {})
    for name in outputs:
        if not (run_dir / name).exists():
            raise UsageError(f"{run_dir}: declared output {name} is missing")
    mons = set(manifest.get("config", {}).get("diagnostics", []))
    jobs = []
    if "phase" in mons and "phase.csv" in outputs:
        jobs.append(_phase)
    if "frames" in mons and "trajectories.csv" in outputs:
        jobs.append(_frames)
    if mons & {"bkm", "chip"} and "diagnostics.csv" in outputs:
        jobs.append(_integrals)
    written = []
    if jobs:
        plots = run_dir / PLOT_DIR
        plots.mkdir(exist_ok=True)
        for job in jobs:
            written += [f"{PLOT_DIR}/{f}" for f in job(run_dir, plots)]
    manifest["plots"] = {f: sha256(run_dir / f) for f in written}
    mpath.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return written
