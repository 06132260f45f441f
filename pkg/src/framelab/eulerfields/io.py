"""Snapshot files: a JSON header next to a flat little-endian float64 payload.

The payload holds the physical velocity as ``[component, ix, iy, iz]`` in C
order, so ``iz`` varies fastest. Node ``(ix, iy, iz)`` sits at
``(ix, iy, iz) * L / n``.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..errors import ConfigError
from .grid import GriddedVelocity

LAYOUT = "row-major z-fastest"
DTYPE = "<f8"


def save_snapshot(field: GriddedVelocity, stem) -> tuple[Path, Path]:
    stem = Path(stem)
    header = {
        "n": field.n,
        "L": field.box,
        "t": field.time,
        "layout": LAYOUT,
        "components": 3,
        "axes": ["component", "ix", "iy", "iz"],
        "dtype": DTYPE,
    }
    hpath = stem.with_suffix(".json")
    bpath = stem.with_suffix(".bin")
    hpath.write_text(json.dumps(header, indent=2) + "\n")
    np.ascontiguousarray(field.velocity(), dtype=DTYPE).tofile(bpath)
    return hpath, bpath


def load_snapshot(stem) -> GriddedVelocity:
    stem = Path(stem)
    header = json.loads(stem.with_suffix(".json").read_text())
    if header.get("layout") != LAYOUT:
        raise ConfigError(f"unsupported snapshot layout {header.get('layout')!r}")
    n = int(header["n"])
    u = np.fromfile(stem.with_suffix(".bin"), dtype=header.get("dtype", DTYPE))
    if u.size != 3 * n**3:
        raise ConfigError(f"snapshot payload has {u.size} values, expected {3 * n**3}")
    return GriddedVelocity.from_physical(u.reshape(3, n, n, n), float(header["L"]), float(header["t"]))
