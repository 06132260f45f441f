"""Command-line scenario runner.

    framelab run CONFIG.json [--out DIR] [--strict]
    framelab plot RUN_DIR
    framelab catalog

Exit status: 0 on success (physics terminations are data), 1 when ``--strict``
finds a non-completed trajectory, 2 on bad input.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__, flows, framedyn, mhd
from .errors import FrameLabError
from .eulerfields import diagnostics as diag
from .eulerfields import frames, grid, lines, sampling, solver

SCHEMA_VERSION = 1
MANIFEST = "manifest.json"
SCENARIOS = {
    "flow_frames": "quaternion frames along paths of an analytic catalog flow (section 'flow')",
    "phase_plane": "(alpha, chi) phase plane with constant forcing (section 'phase')",
    "euler_spectral": "pseudo-spectral Euler run with monitors and optional frame seeds (section 'field')",
    "mhd_frames": "Elsasser dual frames on a prescribed MHD field (section 'mhd')",
}
INITIAL_DOCS = {
    "taylor_green_3d": "u = A (sin x cos y cos z, -cos x sin y cos z, 0); amplitude A",
    "abc": "steady Beltrami field; A, B, C",
    "taylor_green_2d": "steady u = A (sin x cos y, -cos x sin y, 0); amplitude A",
}
MONITORS = ("bkm", "chip", "dhy", "frames", "phase")
TRAJ_COLUMNS = (
    "seed", "frame", "t", "x", "y", "z",
    "w_hat_x", "w_hat_y", "w_hat_z", "chi_hat_x", "chi_hat_y", "chi_hat_z",
    "alpha", "chi", "w_mag",
)  # fmt: skip
PHASE_COLUMNS = ("t", "alpha", "chi")

_vec3 = {"type": "array", "items": {"type": "number"}, "minItems": 3, "maxItems": 3}
_catalog_entry = lambda kinds: {  # noqa: E731
    "type": "object",
    "required": ["kind"],
    "additionalProperties": False,
    "properties": {"kind": {"enum": sorted(kinds)}, "params": {"type": "object"}},
}

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["scenario", "dt", "t_end"],
    "additionalProperties": False,
    "properties": {
        "scenario": {"enum": sorted(SCENARIOS)},
        "flow": _catalog_entry(flows.CATALOG),
        "mhd": _catalog_entry(mhd.MHD_CATALOG),
        "field": {
            "type": "object",
            "required": ["initial"],
            "additionalProperties": False,
            "properties": {
                "initial": {"enum": sorted(grid.INITIAL_CONDITIONS)},
                "params": {"type": "object"},
                "sampler": {"enum": list(sampling.METHODS)},
            },
        },
        "phase": {
            "type": "object",
            "required": ["alpha_p", "C_p", "start"],
            "additionalProperties": False,
            "properties": {
                "alpha_p": {"type": "number"},
                "C_p": {"type": "number"},
                "start": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
            },
        },
        "seeds": {"type": "array", "items": _vec3},
        "random_seeds": {
            "type": "object",
            "required": ["count"],
            "additionalProperties": False,
            "properties": {"count": {"type": "integer", "minimum": 1}, "low": _vec3, "high": _vec3},
        },
        "dt": {"type": "number", "exclusiveMinimum": 0},
        "t_end": {"type": "number", "exclusiveMinimum": 0},
        "grid": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "n": {"enum": list(grid.SUPPORTED_N)},
                "L": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "diagnostics": {"type": "array", "items": {"enum": list(MONITORS)}, "uniqueItems": True},
        "diag_every": {"type": "integer", "minimum": 1},
        "line": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "ds": {"type": "number", "exclusiveMinimum": 0},
                "max_len": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "output_dir": {"type": "string"},
        "rng_seed": {"type": "integer"},
    },
    "allOf": [
        {"if": {"properties": {"scenario": {"const": s}}}, "then": {"required": [key]}}
        for s, key in (("flow_frames", "flow"), ("phase_plane", "phase"), ("euler_spectral", "field"), ("mhd_frames", "mhd"))
    ],
}

DEFAULTS = {
    "seeds": [],
    "grid": {"n": 32, "L": 2 * math.pi},
    "diagnostics": [],
    "diag_every": 10,
    "line": {"ds": 0.05, "max_len": 2.0},
    "output_dir": "framelab_run",
    "rng_seed": 0,
}


class UsageError(Exception):
    """Bad input; reported with exit status 2."""


# ---------------------------------------------------------------------------
# Config
# ---------------------------------------------------------------------------


def _line_of(text: str, path) -> int | None:
    """Best-effort line number of the last key in ``path`` within the JSON text."""
    keys = [p for p in path if isinstance(p, str)]
    if not keys:
        return None
    needle = json.dumps(keys[-1]) + ":"
    pos = text.replace('" :', '":').find(needle)
    return text.count("\n", 0, pos) + 1 if pos >= 0 else None


def load_config(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise UsageError(f"{path}: cannot read config: {exc.strerror}") from None
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from None
    validator = jsonschema.Draft202012Validator(CONFIG_SCHEMA)
    errors = sorted(validator.iter_errors(cfg), key=lambda e: list(map(str, e.absolute_path)))
    if errors:
        msgs = []
        for e in errors:
            where = "$" + "".join(f"[{p}]" if isinstance(p, int) else f".{p}" for p in e.absolute_path)
            line = _line_of(text, e.absolute_path)
            prefix = f"{path}:{line}" if line else str(path)
            msgs.append(f"{prefix}: {where}: {e.message}")
        raise UsageError("\n".join(msgs))
    return normalize(cfg)


def normalize(cfg: dict) -> dict:
    out = json.loads(json.dumps(cfg))
    for key, value in DEFAULTS.items():
        if isinstance(value, dict):
            out[key] = {**value, **out.get(key, {})}
        else:
            out.setdefault(key, value)
    for section in ("flow", "mhd", "field"):
        if section in out:
            out[section].setdefault("params", {})
    if "field" in out:
        out["field"].setdefault("sampler", "tricubic")
    if out["scenario"] == "phase_plane" and not cfg.get("diagnostics"):
        out["diagnostics"] = ["phase"] if "diagnostics" not in cfg else []
    return out


def seed_points(cfg: dict) -> np.ndarray:
    pts = [list(map(float, s)) for s in cfg["seeds"]]
    rs = cfg.get("random_seeds")
    if rs:
        rng = np.random.default_rng(cfg["rng_seed"])
        L = cfg["grid"]["L"]
        low = np.asarray(rs.get("low", [0.0, 0.0, 0.0]))
        high = np.asarray(rs.get("high", [L, L, L]))
        pts.extend(rng.uniform(low, high, size=(rs["count"], 3)).tolist())
    return np.array(pts, dtype=float).reshape(-1, 3)


def n_steps(cfg: dict) -> int:
    n = int(round(cfg["t_end"] / cfg["dt"]))
    if n < 1:
        raise UsageError("t_end must be at least one step dt")
    return n


def thread_count() -> int:
    raw = os.environ.get("FRAMELAB_THREADS", "0")
    try:
        n = int(raw)
    except ValueError:
        raise UsageError(f"FRAMELAB_THREADS must be an integer, got {raw!r}") from None
    return n if n > 0 else (os.cpu_count() or 1)


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------


def fmt(x) -> str:
    return diag.format_float(float(x))


def write_rows(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([v if isinstance(v, str) else fmt(v) for v in r])


def sha256(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def traj_rows(seed: int, frame: str, times, pos, w_hat, chi_hat, alpha, chi, w_mag):
    chi_mag = np.linalg.norm(np.atleast_2d(chi), axis=-1) if np.ndim(chi) > 1 else np.abs(chi)
    for k in range(len(times)):
        yield (
            str(seed), frame, times[k], *pos[k], *w_hat[k], *chi_hat[k], alpha[k], chi_mag[k], w_mag[k],
        )  # fmt: skip


# ---------------------------------------------------------------------------
# Scenarios
# ---------------------------------------------------------------------------


def _box_samples(flow, n, L, t):
    x = np.moveaxis(grid.Wavenumbers(n, L).grid(), 0, -1).reshape(-1, 3)
    return x, flow.velocity(x, t), flow.vorticity(x, t)


def _flow_monitors(cfg, flow, seeds, series, t):
    mons = cfg["diagnostics"]
    n, L = cfg["grid"]["n"], cfg["grid"]["L"]
    if "bkm" in mons or "chip" in mons:
        x, u, w = _box_samples(flow, n, L, t)
        if "bkm" in mons:
            series.record(
                t,
                energy=0.5 * float(np.mean(np.sum(u * u, axis=1))),
                enstrophy=0.5 * float(np.mean(np.sum(w * w, axis=1))),
                max_vorticity=float(np.linalg.norm(w, axis=1).max()),
                u_sup=float(np.linalg.norm(u, axis=1).max()),
            )
        if "chip" in mons and flow.has_pressure:
            ff = frames.frame_fields_from_arrays(w, flow.strain(x, t), flow.pressure_hessian(x, t), time=t)
            diag.chip_monitor(series, ff, t=t)
    if "dhy" in mons and len(seeds):
        _dhy(cfg, flow, seeds[0], series, t)


def _dhy(cfg, source, x0, series, t):
    try:
        line = lines.trace_vortex_line(source, x0, cfg["line"]["ds"], cfg["line"]["max_len"], t=t)
    except FrameLabError:
        return
    diag.dhy_record(series, t, lines.dhy_diagnostics(source, line, t))


def run_flow_frames(cfg, seeds, out: Path, workers: int):
    flow = flows.make_flow(cfg["flow"]["kind"], **cfg["flow"]["params"])
    dt, steps = cfg["dt"], n_steps(cfg)

    def job(x0):
        try:
            return frames.lagrangian_frame_run(flow, [x0], dt, steps)[0]
        except FrameLabError as exc:
            return str(exc)

    with ThreadPoolExecutor(max_workers=workers) as pool:
        runs = list(pool.map(job, seeds))
    statuses, rows = {}, []
    for i, r in enumerate(runs):
        if isinstance(r, str):
            statuses[f"seed{i}"] = f"rejected: {r}"
            continue
        statuses[f"seed{i}"] = r.status
        rows.extend(traj_rows(i, "omega", r.times, r.positions, r.w_hat, r.chi_hat, r.alpha, r.chi, r.w_mag))
    write_rows(out / "trajectories.csv", TRAJ_COLUMNS, rows)
    files = ["trajectories.csv"]
    if set(cfg["diagnostics"]) & {"bkm", "chip", "dhy"}:
        series = diag.DiagnosticSeries()
        every = cfg["diag_every"]
        for k in range(0, steps + 1):
            if k % every == 0 or k == steps:
                _flow_monitors(cfg, flow, seeds, series, k * dt)
        series.to_csv(out / "diagnostics.csv")
        files.append("diagnostics.csv")
    return files, statuses, {}


def run_phase_plane(cfg, seeds, out: Path, workers: int):
    ph = cfg["phase"]
    start = framedyn.PhasePoint(ph["start"][0], ph["start"][1], ph["alpha_p"], ph["C_p"])
    traj = framedyn.phase_integrate(start, cfg["dt"], n_steps(cfg))
    write_rows(out / "phase.csv", PHASE_COLUMNS, zip(traj.times, traj.alpha, traj.chi))
    fps = framedyn.phase_fixed_points(ph["alpha_p"], ph["C_p"])
    extra = {
        "fixed_points": [
            {
                "alpha": fp.point.alpha,
                "chi": fp.point.chi,
                "kind": fp.kind,
                "eigenvalues": [[e.real, e.imag] for e in np.asarray(fp.eigenvalues, dtype=complex)],
            }
            for fp in fps
        ],
        "alpha0_squared_solved": max((fp.point.alpha**2 for fp in fps), default=0.0),
        "alpha0_squared_alternate_sign": framedyn.fixed_point_alpha_alternate_sign(ph["alpha_p"], ph["C_p"]) ** 2,
    }
    return ["phase.csv"], {"phase": traj.status}, extra


def run_euler_spectral(cfg, seeds, out: Path, workers: int):
    fc = cfg["field"]
    n, L = cfg["grid"]["n"], cfg["grid"]["L"]
    field0 = grid.make_initial(fc["initial"], n, box=L, **fc["params"])
    dt, steps, every = cfg["dt"], n_steps(cfg), cfg["diag_every"]
    mons = set(cfg["diagnostics"])
    series = diag.DiagnosticSeries()
    e0 = grid.energy(field0)
    state = {"k": 0, "div": 0.0}

    def callback(f):
        k = state["k"]
        state["div"] = max(state["div"], grid.spectral_divergence(f))
        if mons & {"bkm", "chip", "dhy"} and (k % every == 0 or k == steps):
            if "bkm" in mons:
                diag.bkm_monitor(series, f)
            if "chip" in mons:
                diag.chip_monitor(series, frames.frame_fields(f))
            if "dhy" in mons:
                src = f.sampler(fc["sampler"])
                if len(seeds):
                    x0 = seeds[0]
                else:
                    w = np.linalg.norm(f.vorticity(), axis=0)
                    idx = np.unravel_index(int(np.argmax(w)), w.shape)
                    x0 = np.array(idx) * (f.box / f.n)
                _dhy(cfg, src, x0, series, f.time)
        state["k"] = k + 1

    files, statuses = [], {}
    if len(seeds):
        final, runs = frames.euler_frame_run(field0, seeds, dt, steps, fc["sampler"], callback=callback)
        rows = []
        for i, r in enumerate(runs):
            statuses[f"seed{i}"] = r.status
            rows.extend(traj_rows(i, "omega", r.times, r.positions, r.w_hat, r.chi_hat, r.alpha, r.chi, r.w_mag))
        write_rows(out / "trajectories.csv", TRAJ_COLUMNS, rows)
        files.append("trajectories.csv")
    else:
        final = solver.evolve(field0, dt, steps, callback)
    if len(series):
        series.to_csv(out / "diagnostics.csv")
        files.append("diagnostics.csv")
    extra = {
        "energy_relative_drift": abs(grid.energy(final) - e0) / e0 if e0 > 0 else 0.0,
        "max_spectral_divergence": state["div"],
    }
    return files, statuses, extra


def run_mhd_frames(cfg, seeds, out: Path, workers: int):
    spec = mhd.make_mhd(cfg["mhd"]["kind"], **cfg["mhd"]["params"])
    dt, steps = cfg["dt"], n_steps(cfg)
    jobs = [(i, x0, sign) for i, x0 in enumerate(seeds) for sign in (1, -1)]

    def job(item):
        i, x0, sign = item
        try:
            return mhd.mhd_frame_run(spec, x0, dt, steps, sign=sign)
        except FrameLabError as exc:
            return str(exc)

    with ThreadPoolExecutor(max_workers=workers) as pool:
        runs = list(pool.map(job, jobs))
    statuses, rows = {}, []
    for (i, _, sign), r in zip(jobs, runs):
        tag = "+" if sign > 0 else "-"
        if isinstance(r, str):
            statuses[f"seed{i}{tag}"] = f"rejected: {r}"
            continue
        statuses[f"seed{i}{tag}"] = r.status
        rows.extend(traj_rows(i, tag, r.times, r.positions, r.B_hat, r.chi_hat, r.alpha, r.chi, r.B_mag))
    write_rows(out / "trajectories.csv", TRAJ_COLUMNS, rows)
    return ["trajectories.csv"], statuses, {}


RUNNERS = {
    "flow_frames": run_flow_frames,
    "phase_plane": run_phase_plane,
    "euler_spectral": run_euler_spectral,
    "mhd_frames": run_mhd_frames,
}


def run(config_path, out_dir=None, strict: bool = False) -> int:
    cfg = load_config(config_path)
    out = Path(out_dir if out_dir is not None else cfg["output_dir"])
    out.mkdir(parents=True, exist_ok=True)
    seeds = seed_points(cfg)
    t0 = time.perf_counter()
    try:
        files, statuses, extra = RUNNERS[cfg["scenario"]](cfg, seeds, out, thread_count())
    except FrameLabError as exc:
        raise UsageError(f"{config_path}: {exc}") from None
    manifest = {
        "schema": SCHEMA_VERSION,
        "version": __version__,
        "config": cfg,
        "wall_time_s": time.perf_counter() - t0,
        "outputs": {f: sha256(out / f) for f in files},
        "statuses": statuses,
        "results": extra,
    }
    (out / MANIFEST).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    bad = {k: v for k, v in statuses.items() if v != framedyn.COMPLETED}
    if strict and bad:
        for k, v in bad.items():
            print(f"{k}: {v}", file=sys.stderr)
        return 1
    return 0


def verify_manifest(run_dir) -> list[str]:
    """Problems found when checking declared outputs against their checksums."""
    run_dir = Path(run_dir)
    manifest = json.loads((run_dir / MANIFEST).read_text())
    problems = []
    for group in ("outputs", "plots"):
        for name, digest in manifest.get(group, {}).items():
            p = run_dir / name
            if not p.exists():
                problems.append(f"missing {name}")
            elif sha256(p) != digest:
                problems.append(f"checksum mismatch for {name}")
    return problems


def catalog_text() -> str:
    out = ["scenarios:"]
    out += [f"  {k}: {v}" for k, v in SCENARIOS.items()]
    out.append("flows (section 'flow'):")
    out += [f"  {k}: {cls.doc}" for k, cls in flows.CATALOG.items()]
    out.append("initial fields (section 'field'):")
    out += [f"  {k}: {v}" for k, v in INITIAL_DOCS.items()]
    out.append("mhd fields (section 'mhd'):")
    out += [f"  {k}: {doc}" for k, (_, doc) in mhd.MHD_CATALOG.items()]
    out.append(f"monitors: {', '.join(MONITORS)}")
    return "\n".join(out)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="framelab", description="quaternion-frame Lagrangian dynamics runner")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run a scenario from a JSON config")
    r.add_argument("config")
    r.add_argument("--out", help="output directory (overrides output_dir)")
    r.add_argument("--strict", action="store_true", help="exit 1 if any trajectory did not complete")
    pl = sub.add_parser("plot", help="write gnuplot data and SVG charts for a run directory")
    pl.add_argument("run_dir")
    sub.add_parser("catalog", help="list scenarios, flows and parameters")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return run(args.config, args.out, args.strict)
        if args.command == "plot":
            from .plotting import emit_plotdata

            emit_plotdata(args.run_dir)
            return 0
        print(catalog_text())
        return 0
    except UsageError as exc:
        print(f"framelab: {exc}", file=sys.stderr)
        return 2
