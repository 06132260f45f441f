"""Vorticity-frame quantities as fields, and frame integration along particle paths.

Pointwise, with ``w_hat`` the vorticity direction:
``alpha = w_hat.S w_hat``, ``chi = w_hat x S w_hat``,
``alpha_p = w_hat.P w_hat``, ``chi_p = w_hat x P w_hat``.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .. import framedyn
from ..errors import DomainError
from ..flows import rk4_path
from .grid import GriddedVelocity

MASK_REL = 1e-10
OK = "ok"
EMPTY = "empty field"
MASKED = "masked-region entry"


@dataclass(frozen=True)
class FrameFields:
    """Point-major frame fields; masked points hold NaN.

    ``omega_hat``, ``s_omhat`` and ``p_omhat`` (``S w_hat`` and ``P w_hat``)
    are kept for identity checks and the collinearity monitor.
    """

    alpha: np.ndarray
    chi: np.ndarray
    alpha_p: np.ndarray
    chi_p: np.ndarray
    omega_mag: np.ndarray
    omega_hat: np.ndarray
    s_omhat: np.ndarray
    p_omhat: np.ndarray
    mask: np.ndarray
    status: str = OK
    time: float = 0.0

    @property
    def empty(self) -> bool:
        return self.status == EMPTY


def frame_fields_from_arrays(omega, S, P, rel_threshold: float = MASK_REL, time: float = 0.0) -> FrameFields:
    """Frame fields from point-major ``omega (..., 3)``, ``S`` and ``P (..., 3, 3)``.

    Points with ``|omega|`` at or below ``rel_threshold * max|omega|`` are masked.
    """
    omega = np.asarray(omega, dtype=float)
    mag = np.linalg.norm(omega, axis=-1)
    wmax = float(mag.max()) if mag.size else 0.0
    mask = mag > rel_threshold * wmax if wmax > 0 else np.zeros(mag.shape, dtype=bool)
    status = OK if mask.any() else EMPTY
    safe = np.where(mask, mag, 1.0)
    w_hat = np.where(mask[..., None], omega / safe[..., None], np.nan)
    sw = np.einsum("...ij,...j->...i", S, w_hat)
    pw = np.einsum("...ij,...j->...i", P, w_hat)
    return FrameFields(
        alpha=np.sum(w_hat * sw, axis=-1),
        chi=np.cross(w_hat, sw),
        alpha_p=np.sum(w_hat * pw, axis=-1),
        chi_p=np.cross(w_hat, pw),
        omega_mag=mag,
        omega_hat=w_hat,
        s_omhat=sw,
        p_omhat=pw,
        mask=mask,
        status=status,
        time=time,
    )


def _point_major(a, rank):
    a = np.asarray(a)
    for _ in range(rank):
        a = np.moveaxis(a, 0, -1)
    return a


def frame_fields(field: GriddedVelocity, rel_threshold: float = MASK_REL) -> FrameFields:
    omega = _point_major(field.vorticity(), 1)
    # (i, j, x, y, z) -> (x, y, z, i, j)
    S = np.moveaxis(field.strain(), (0, 1), (-2, -1))
    P = np.moveaxis(field.pressure_hessian(), (0, 1), (-2, -1))
    return frame_fields_from_arrays(omega, S, P, rel_threshold, field.time)


# ---------------------------------------------------------------------------
# Lagrangian frame runs
# ---------------------------------------------------------------------------


@dataclass
class FrameRun:
    """Per-seed record; row ``k`` is time ``times[k]``."""

    times: np.ndarray
    positions: np.ndarray
    w_hat: np.ndarray
    chi_hat: np.ndarray
    cross: np.ndarray
    w_mag: np.ndarray
    alpha: np.ndarray
    chi: np.ndarray
    alpha_p: np.ndarray
    chi_p: np.ndarray
    omega_sampled: np.ndarray
    status: str

    @property
    def s_omhat_mag(self):
        """``|S w_hat|``; equals ``sqrt(alpha^2 + |chi|^2)``."""
        return np.sqrt(self.alpha**2 + np.sum(self.chi**2, axis=1))

    @property
    def p_omhat_mag(self):
        return np.sqrt(self.alpha_p**2 + np.sum(self.chi_p**2, axis=1))

    def chi_p_integral(self):
        """Running trapezoid integral of ``|chi_p|`` along the path."""
        return _running_integral(np.linalg.norm(self.chi_p, axis=1), self.times)

    def strain_bound(self, factor: float = 1.0, with_initial: bool = True):
        """Upper bound on ``|S w_hat|`` along the path from ``|P w_hat|``.

        With ``A(t) = int_0^t alpha``, returns
        ``exp(-A) |S w_hat|(0) + factor * int_0^t exp(A(tau) - A(t)) |P w_hat| dtau``.
        The defaults give the bound obtained from the ``(alpha, chi)`` equations
        by Cauchy-Schwarz. ``factor=2, with_initial=False`` is the variant
        without the initial term, kept for comparison.
        """
        A = _running_integral(self.alpha, self.times)
        inner = _running_integral(np.exp(A) * self.p_omhat_mag, self.times)
        out = factor * np.exp(-A) * inner
        if with_initial:
            out = out + np.exp(-A) * self.s_omhat_mag[0]
        return out


def _running_integral(f, t):
    out = np.zeros_like(f, dtype=float)
    out[1:] = np.cumsum(0.5 * (f[1:] + f[:-1]) * np.diff(t))
    return out


@dataclass
class _Sample:
    u: np.ndarray
    omega: np.ndarray
    S: np.ndarray
    P: np.ndarray


def _sample(source, x, t):
    J = np.asarray(source.velocity_gradient(x, t))
    return _Sample(
        np.asarray(source.velocity(x, t)),
        np.asarray(source.vorticity(x, t)),
        0.5 * (J + J.T),
        np.asarray(source.pressure_hessian(x, t)),
    )


def _alpha_chi(s: _Sample) -> framedyn.AlphaChi:
    return framedyn.decompose(s.omega, s.S @ s.omega)


def _midpoint_darboux(s: _Sample) -> np.ndarray:
    q = _alpha_chi(s)
    if q.chi_mag < framedyn.CHI_TOL:
        # aligned vorticity: the frame does not turn
        return np.zeros(3)
    frame = framedyn.FrameState.from_vectors(s.omega, s.S @ s.omega)
    chi_p = np.cross(frame.w_hat, s.P @ frame.w_hat)
    return framedyn.darboux(frame, -chi_p).d


class FrameParticle:
    """One seed's position and vorticity frame, advanced a step at a time.

    Each step takes RK4 for the position, a Darboux vector from samples at the
    path midpoint, the exact rotation for the frame, and the averaged
    ``alpha`` for ``|omega|``.
    """

    def __init__(self, source, x0, t0: float, threshold: float):
        self.x = np.asarray(x0, dtype=float)
        self.t = float(t0)
        self.threshold = threshold
        self.sample = _sample(source, self.x, self.t)
        if np.linalg.norm(self.sample.omega) <= threshold:
            raise DomainError(f"seed {self.x.tolist()} lies in the masked region")
        s = self.sample
        self.frame = framedyn.FrameState.from_vectors(s.omega, s.S @ s.omega)
        self.status = framedyn.COMPLETED
        self.rows = []
        self._record()

    @property
    def active(self) -> bool:
        return self.status == framedyn.COMPLETED

    def _record(self):
        s, frame = self.sample, self.frame
        w_hat = s.omega / np.linalg.norm(s.omega)
        pw = s.P @ w_hat
        self.rows.append(
            (
                self.t,
                self.x,
                frame.w_hat,
                frame.chi_hat,
                frame.cross,
                frame.w_mag,
                float(frame.alpha_chi.alpha),
                frame.alpha_chi.chi,
                float(w_hat @ pw),
                np.cross(w_hat, pw),
                s.omega,
            )
        )

    def step(self, source, t1: float) -> None:
        """Advance to ``t1``; ``source`` must be valid on ``[t, t1]``."""
        if not self.active:
            return
        x, t, s = self.x, self.t, self.sample
        dt = t1 - t
        x1 = rk4_path(source.velocity, x, t, t1, 1)
        s1 = _sample(source, x1, t1)
        if np.linalg.norm(s1.omega) <= self.threshold:
            self.status = MASKED
            return
        x_mid = 0.5 * (x + x1) + 0.125 * dt * (s.u - s1.u)
        d = _midpoint_darboux(_sample(source, x_mid, t + 0.5 * dt))
        self.frame = framedyn.frame_step(self.frame, d, dt, _alpha_chi(s1))
        self.x, self.t, self.sample = x1, t1, s1
        self._record()

    def result(self) -> FrameRun:
        arr = [np.array(c) for c in zip(*self.rows)]
        return FrameRun(*arr, status=self.status)


def _threshold(source, seeds, t0, rel_threshold, omega_ref):
    if omega_ref is None:
        if isinstance(getattr(source, "field", None), GriddedVelocity):
            omega_ref = float(np.max(np.linalg.norm(source.field.vorticity(), axis=0)))
        else:
            omega_ref = float(np.max(np.linalg.norm(source.vorticity(seeds, t0), axis=-1)))
    return rel_threshold * omega_ref


def lagrangian_frame_run(
    source,
    seeds,
    dt: float,
    n_steps: int,
    t0: float = 0.0,
    rel_threshold: float = MASK_REL,
    omega_ref: float | None = None,
    workers: int = 1,
) -> list[FrameRun]:
    """Advect each seed and carry its vorticity frame along.

    ``source`` is anything with ``velocity``, ``velocity_gradient``,
    ``vorticity`` and ``pressure_hessian`` taking ``(x, t)``: an analytic flow,
    a :class:`FieldSampler` or an :class:`EvolvingSampler`.

    Per step: RK4 for the position, a Darboux vector from samples at the path
    midpoint, the exact rotation for the frame, and the averaged ``alpha`` for
    ``|omega|``. A particle whose ``|omega|`` drops below
    ``rel_threshold * omega_ref`` stops with status ``"masked-region entry"``.
    """
    seeds = np.atleast_2d(np.asarray(seeds, dtype=float))
    threshold = _threshold(source, seeds, t0, rel_threshold, omega_ref)

    def job(x0):
        p = FrameParticle(source, x0, t0, threshold)
        for k in range(n_steps):
            p.step(source, t0 + (k + 1) * dt)
            if not p.active:
                break
        return p.result()

    if workers <= 1 or len(seeds) == 1:
        return [job(x0) for x0 in seeds]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(job, seeds))


def euler_frame_run(
    field: GriddedVelocity,
    seeds,
    dt: float,
    n_steps: int,
    method: str = "tricubic",
    rel_threshold: float = MASK_REL,
    callback=None,
):
    """Evolve ``field`` with the spectral solver and carry frames in lockstep.

    Over each step the particles see a linear-in-time blend of the two
    snapshots bounding it. ``callback(field)`` is called on every snapshot.
    Returns ``(final_field, runs)``.
    """
    from .sampling import EvolvingSampler
    from .solver import euler_step

    seeds = np.atleast_2d(np.asarray(seeds, dtype=float))
    src = EvolvingSampler([field], method)
    threshold = _threshold(src.samplers[0], seeds, field.time, rel_threshold, None)
    particles = [FrameParticle(src, x0, field.time, threshold) for x0 in seeds]
    if callback is not None:
        callback(field)
    t0 = field.time
    for k in range(n_steps):
        new = euler_step(field, dt)
        new = new.with_spectrum(new.u_hat, t0 + (k + 1) * dt)
        src = EvolvingSampler([field, new], method)
        for p in particles:
            p.step(src, new.time)
        field = new
        if callback is not None:
            callback(field)
    return field, [p.result() for p in particles]
