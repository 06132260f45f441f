"""Time series of blow-up monitors.

Integrals are accumulated with the trapezoid rule over the recorded times, so
rows must arrive in increasing ``t``. Quantities a monitor did not supply stay
NaN, and an integral restarts from the last row that had its integrand.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import PreconditionError
from .frames import FrameFields
from .grid import GriddedVelocity, energy, enstrophy

COLUMNS = (
    "t",
    "energy",
    "enstrophy",
    "max_vorticity",
    "bkm_integral",
    "u_sup",
    "cf_integral",
    "chip_sup",
    "chip_integral",
    "U_omega",
    "U_n",
    "M",
    "L",
    "blowup_exponent",
    "collinearity_angle",
)

UNITS = {
    "t": "time",
    "energy": "length^2/time^2 (volume average)",
    "enstrophy": "1/time^2 (volume average)",
    "max_vorticity": "1/time",
    "bkm_integral": "dimensionless",
    "u_sup": "length/time",
    "cf_integral": "length",
    "chip_sup": "1/time^2",
    "chip_integral": "1/time",
    "U_omega": "length/time",
    "U_n": "length/time",
    "M": "1/length",
    "L": "length",
    "blowup_exponent": "dimensionless",
    "collinearity_angle": "radians",
}

# integral column -> integrand column
INTEGRALS = {"bkm_integral": "max_vorticity", "cf_integral": "u_sup", "chip_integral": "chip_sup"}

EXPONENT_WINDOW = 5


@dataclass
class DiagnosticSeries:
    records: list[dict] = field(default_factory=list)

    def __len__(self):
        return len(self.records)

    def column(self, name: str) -> np.ndarray:
        return np.array([r[name] for r in self.records], dtype=float)

    def _row(self, t: float) -> dict:
        if self.records and self.records[-1]["t"] == t:
            return self.records[-1]
        if self.records and t < self.records[-1]["t"]:
            raise PreconditionError(f"time {t} precedes the last record {self.records[-1]['t']}")
        row = {c: math.nan for c in COLUMNS}
        row["t"] = float(t)
        self.records.append(row)
        return row

    def record(self, t: float, **values) -> dict:
        """Set ``values`` on the row at ``t`` (appending it if new) and update integrals."""
        unknown = set(values) - set(COLUMNS)
        if unknown:
            raise KeyError(f"unknown diagnostic columns {sorted(unknown)}")
        row = self._row(t)
        for k, v in values.items():
            row[k] = float(v)
        for integral, integrand in INTEGRALS.items():
            if integrand in values:
                row[integral] = self._accumulate(integrand, integral)
        if "max_vorticity" in values:
            row["blowup_exponent"] = self._exponent()
        return row

    def _accumulate(self, integrand: str, integral: str) -> float:
        cur = self.records[-1]
        for prev in reversed(self.records[:-1]):
            if not math.isnan(prev[integrand]) and not math.isnan(prev[integral]):
                return prev[integral] + 0.5 * (prev[integrand] + cur[integrand]) * (cur["t"] - prev["t"])
        return 0.0

    def _exponent(self) -> float:
        """``gamma`` from a fit of ``Omega ~ (T - t)^-gamma`` over the last few rows.

        ``1 / (d ln Omega/dt) = (T - t)/gamma`` is linear in ``t`` with slope
        ``-1/gamma``. Descriptive only.
        """
        rows = [r for r in self.records if not math.isnan(r["max_vorticity"])][-EXPONENT_WINDOW:]
        if len(rows) < 3:
            return math.nan
        t = np.array([r["t"] for r in rows])
        lw = np.log(np.array([r["max_vorticity"] for r in rows]))
        rate = np.gradient(lw, t, edge_order=2)
        if np.any(rate <= 0):
            return math.nan
        slope = np.polyfit(t, 1.0 / rate, 1)[0]
        return float(-1.0 / slope) if slope < 0 else math.nan

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            write_csv(fh, self)

    def is_nondecreasing(self, name: str) -> bool:
        v = self.column(name)
        v = v[~np.isnan(v)]
        return bool(np.all(np.diff(v) >= 0))


def format_float(x: float) -> str:
    return repr(float(x)) if math.isfinite(x) else ("nan" if math.isnan(x) else ("inf" if x > 0 else "-inf"))


def write_csv(fh, series: DiagnosticSeries) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in series.records:
        w.writerow([format_float(r[c]) for c in COLUMNS])


def bkm_monitor(series: DiagnosticSeries, field: GriddedVelocity, dt: float | None = None) -> DiagnosticSeries:
    """Append ``max|omega|``, ``sup|u|``, energy, enstrophy and their integrals at ``field.time``.

    ``dt`` is only a consistency check against the spacing since the previous row.
    """
    if dt is not None and series.records:
        gap = field.time - series.records[-1]["t"]
        if gap > 0 and not math.isclose(gap, dt, rel_tol=1e-6, abs_tol=1e-12):
            raise PreconditionError(f"field time advanced by {gap}, expected dt={dt}")
    w = field.vorticity()
    u = field.velocity()
    series.record(
        field.time,
        energy=energy(field),
        enstrophy=enstrophy(field),
        max_vorticity=float(np.sqrt(np.max(np.sum(w * w, axis=0)))),
        u_sup=float(np.sqrt(np.max(np.sum(u * u, axis=0)))),
    )
    return series


def collinearity_angle(fields: FrameFields, fraction: float = 0.5) -> float:
    """Smallest angle between the lines of ``w_hat`` and ``P w_hat`` where ``|omega| >= fraction * max``."""
    if fields.empty:
        return math.nan
    mag = fields.omega_mag
    strong = fields.mask & (mag >= fraction * mag[fields.mask].max())
    pw = fields.p_omhat[strong]
    norm = np.linalg.norm(pw, axis=-1)
    ok = norm > 0
    if not ok.any():
        return math.nan
    cos = np.abs(np.sum(fields.omega_hat[strong][ok] * pw[ok], axis=-1)) / norm[ok]
    return float(np.arccos(np.clip(cos.max(), 0.0, 1.0)))


def chip_monitor(series: DiagnosticSeries, fields: FrameFields, dt: float | None = None, t: float | None = None):
    """Append ``sup|chi_p|`` over unmasked points, its integral and the collinearity angle."""
    t = fields.time if t is None else t
    if fields.empty:
        series.record(t)
        return series
    chip = np.linalg.norm(fields.chi_p[fields.mask], axis=-1)
    series.record(t, chip_sup=float(chip.max()), collinearity_angle=collinearity_angle(fields))
    return series


def dhy_record(series: DiagnosticSeries, t: float, dhy) -> DiagnosticSeries:
    """Store the vortex-line quantities of one traced line at ``t``."""
    series.record(t, U_omega=dhy.U_omega, U_n=dhy.U_n, M=dhy.M, L=dhy.L)
    return series
