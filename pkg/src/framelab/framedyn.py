"""Lagrangian quaternion-frame machinery.

Given a transported vector ``w`` with ``Dw/Dt = a`` and ``Da/Dt = b``, the pair
``(alpha, chi)`` splits ``a`` into a stretching part along ``w`` and a swing
part perpendicular to it::

    alpha = (w_hat . a) / |w|,    chi = (w_hat x a) / |w|,    a = alpha w + chi x w

The quaternion ``q_a = [alpha, chi]`` obeys the Riccati law
``Dq_a/Dt = q_b - q_a * q_a`` and the orthonormal frame
``(w_hat, chi_hat, w_hat x chi_hat)`` rotates rigidly with the Darboux vector
``d = chi_a + (c_b / |chi_a|) w_hat``, ``c_b = w_hat . (chi_hat x chi_b)``.

The last part of the module treats the planar system obtained when the
forcing ``(alpha_p, C_p)`` is frozen::

    alpha' = chi^2 - alpha^2 - alpha_p,     chi' = -2 alpha chi - C_p
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from . import quat
from .errors import DegenerateFrameError, DomainError, StepSizeError

ORTHO_TOL = 1e-10
CHI_TOL = 1e-12

ESCAPED = "finite-time escape"
COMPLETED = "completed"


@dataclass(frozen=True)
class AlphaChi:
    """Growth rate ``alpha`` and swing rate ``chi`` (units of 1/time).

    Both fields broadcast: ``alpha`` of shape ``s`` pairs with ``chi`` of
    shape ``s + (3,)``.
    """

    alpha: Union[float, np.ndarray]
    chi: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "chi", np.asarray(self.chi, dtype=float))
        alpha = np.asarray(self.alpha, dtype=float)
        object.__setattr__(self, "alpha", float(alpha) if alpha.ndim == 0 else alpha)

    @classmethod
    def from_quaternion(cls, q) -> "AlphaChi":
        q = np.asarray(q, dtype=float)
        return cls(q[..., 0], q[..., 1:])

    @classmethod
    def zero(cls) -> "AlphaChi":
        return cls(0.0, np.zeros(3))

    def as_quaternion(self) -> np.ndarray:
        return quat.quaternion(self.alpha, self.chi)

    @property
    def chi_mag(self):
        return np.sqrt(quat.dot(self.chi, self.chi))

    def __neg__(self):
        return AlphaChi(-np.asarray(self.alpha), -self.chi)


def _as_quat(q) -> np.ndarray:
    if isinstance(q, AlphaChi):
        return q.as_quaternion()
    return np.asarray(q, dtype=float)


def decompose(w, a) -> AlphaChi:
    """Split ``a`` into parts parallel and perpendicular to ``w``."""
    w = np.asarray(w, dtype=float)
    a = np.asarray(a, dtype=float)
    w2 = quat.dot(w, w)
    if np.any(w2 == 0.0):
        raise DomainError("null point: decomposition undefined")
    return AlphaChi(quat.dot(w, a) / w2, quat.cross(w, a) / w2[..., None])


def recompose(q: AlphaChi, w) -> np.ndarray:
    """Inverse of :func:`decompose`: the vector part of ``[alpha, chi] * [0, w]``."""
    return quat.vector(quat.mul(q.as_quaternion(), quat.pure(w)))


def riccati_rhs(q_a, q_b) -> AlphaChi:
    """Right-hand side ``q_b - q_a * q_a`` of the Riccati law."""
    qa = _as_quat(q_a)
    return AlphaChi.from_quaternion(_as_quat(q_b) - quat.mul(qa, qa))


@dataclass
class RiccatiTrajectory:
    times: np.ndarray
    alpha: np.ndarray
    chi: np.ndarray
    status: str = COMPLETED


def integrate_riccati(q0: AlphaChi, forcing, dt: float, n_steps: int, t0: float = 0.0) -> RiccatiTrajectory:
    """RK4 for ``dq/dt = q_b(t) - q * q``.

    ``forcing`` is either a fixed :class:`AlphaChi` (or quaternion) or a
    callable ``t -> q_b``. Stops with status ``ESCAPED`` once ``|alpha|``
    exceeds ``1/(10 dt)``.
    """
    if dt <= 0:
        raise StepSizeError("dt must be positive")
    qb_of_t: Callable = forcing if callable(forcing) else (lambda t, _q=_as_quat(forcing): _q)

    def rhs(t, q):
        return _as_quat(qb_of_t(t)) - quat.mul(q, q)

    q = _as_quat(q0).copy()
    out = [q.copy()]
    times = [t0]
    status = COMPLETED
    limit = 1.0 / (10.0 * dt)
    t = t0
    for _ in range(n_steps):
        k1 = rhs(t, q)
        k2 = rhs(t + 0.5 * dt, q + 0.5 * dt * k1)
        k3 = rhs(t + 0.5 * dt, q + 0.5 * dt * k2)
        k4 = rhs(t + dt, q + dt * k3)
        q = q + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        t += dt
        if not np.all(np.isfinite(q)) or abs(q[0]) > limit:
            status = ESCAPED
            break
        out.append(q.copy())
        times.append(t)
    out = np.array(out)
    return RiccatiTrajectory(np.array(times), out[:, 0], out[:, 1:], status)


# ---------------------------------------------------------------------------
# Quaternion frame
# ---------------------------------------------------------------------------


def _unit(v):
    v = np.asarray(v, dtype=float)
    n = np.linalg.norm(v)
    return v / n


def perpendicular_unit(v) -> np.ndarray:
    """Some unit vector perpendicular to ``v`` (deterministic choice)."""
    v = _unit(v)
    trial = np.eye(3)[int(np.argmin(np.abs(v)))]
    p = trial - np.dot(trial, v) * v
    return p / np.linalg.norm(p)


@dataclass(frozen=True)
class FrameState:
    """Orthonormal frame ``(w_hat, chi_hat, w_hat x chi_hat)`` with ``|w|`` and ``(alpha, chi)``."""

    w_hat: np.ndarray
    chi_hat: np.ndarray
    cross: np.ndarray
    w_mag: float
    alpha_chi: AlphaChi

    def __post_init__(self):
        for name in ("w_hat", "chi_hat", "cross"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        if not self.w_mag > 0:
            raise DomainError("null point: |w| must be positive")
        err = orthonormality_error(self.w_hat, self.chi_hat, self.cross)
        if err > ORTHO_TOL:
            raise DomainError(f"frame is not orthonormal (error {err:.3e})")

    @classmethod
    def from_vectors(cls, w, a, chi_hat=None) -> "FrameState":
        """Build the frame at a point from ``w`` and ``a = Dw/Dt``.

        When ``chi`` vanishes the frame's second axis is undefined; ``chi_hat``
        (or a deterministic perpendicular) is used instead.
        """
        w = np.asarray(w, dtype=float)
        q = decompose(w, a)
        w_mag = float(np.linalg.norm(w))
        w_hat = w / w_mag
        if q.chi_mag > CHI_TOL:
            c_hat = q.chi / q.chi_mag
        else:
            c_hat = perpendicular_unit(w_hat) if chi_hat is None else np.asarray(chi_hat, dtype=float)
            c_hat = c_hat - np.dot(c_hat, w_hat) * w_hat
            c_hat = c_hat / np.linalg.norm(c_hat)
        return cls(w_hat, c_hat, np.cross(w_hat, c_hat), w_mag, q)

    def with_alpha_chi(self, q: AlphaChi) -> "FrameState":
        return FrameState(self.w_hat, self.chi_hat, self.cross, self.w_mag, q)

    def matrix(self) -> np.ndarray:
        """Columns are the three frame vectors."""
        return np.column_stack([self.w_hat, self.chi_hat, self.cross])


def orthonormality_error(e1, e2, e3) -> float:
    e1, e2, e3 = (np.asarray(e, dtype=float) for e in (e1, e2, e3))
    errs = [
        abs(np.dot(e1, e2)),
        abs(np.dot(e1, e3)),
        abs(np.dot(e2, e3)),
        abs(np.dot(e1, e1) - 1.0),
        abs(np.dot(e2, e2) - 1.0),
        np.linalg.norm(e3 - np.cross(e1, e2)),
    ]
    return float(max(errs))


@dataclass(frozen=True)
class DarbouxVector:
    """Angular velocity ``d`` of the frame with its coefficient ``c_b``.

    ``d_b = -(chi_hat . chi_b)`` is the remaining coordinate of ``chi_b`` in
    the frame and drives the magnitude ``|chi|``.
    """

    d: np.ndarray
    c_b: float
    d_b: float = field(default=0.0)


def darboux(frame: FrameState, chi_b) -> DarbouxVector:
    """Darboux vector ``chi_a + (c_b/|chi_a|) w_hat`` of the frame.

    For Euler flows pass ``chi_b = -chi_p``, which turns ``c_b`` into
    ``c_p = -w_hat . (chi_hat x chi_p)``.
    """
    chi_a = frame.alpha_chi.chi
    chi_mag = float(np.linalg.norm(chi_a))
    if chi_mag < CHI_TOL:
        raise DegenerateFrameError("χ = 0: χ̂ undefined")
    chi_b = np.asarray(chi_b, dtype=float)
    c_b = float(np.dot(frame.w_hat, np.cross(frame.chi_hat, chi_b)))
    d_b = -float(np.dot(frame.chi_hat, chi_b))
    return DarbouxVector(chi_a + (c_b / chi_mag) * frame.w_hat, c_b, d_b)


def rotate_frame(vectors, d, dt):
    """Rotate vectors by the exact flow of ``x' = d x x`` over ``dt`` (constant ``d``)."""
    q = quat.exp_pure(0.5 * dt * np.asarray(d, dtype=float))
    return [quat.rotate(v, q) for v in vectors]


def gram_schmidt(e1, e2):
    e1 = _unit(e1)
    e2 = e2 - np.dot(e2, e1) * e1
    e2 = _unit(e2)
    return e1, e2, np.cross(e1, e2)


def frame_step(frame: FrameState, d, dt: float, alpha_chi_end: AlphaChi | None = None) -> FrameState:
    """Advance the frame by one step of length ``dt`` with a constant Darboux vector.

    The three vectors are rotated rigidly, then re-orthonormalised. ``|w|``
    grows by ``exp(alpha_mid dt)`` where ``alpha_mid`` averages the start and
    end growth rates. ``alpha_chi_end`` becomes the new frame's ``(alpha, chi)``.
    """
    if isinstance(d, DarbouxVector):
        d = d.d
    d = np.asarray(d, dtype=float)
    if not dt > 0:
        raise StepSizeError("dt must be positive")
    if np.linalg.norm(d) * dt >= np.pi:
        raise StepSizeError("rotation per step must stay below a half turn")
    end = frame.alpha_chi if alpha_chi_end is None else alpha_chi_end
    w_hat, chi_hat, _ = rotate_frame([frame.w_hat, frame.chi_hat, frame.cross], d, dt)
    w_hat, chi_hat, cross = gram_schmidt(w_hat, chi_hat)
    alpha_mid = 0.5 * (float(frame.alpha_chi.alpha) + float(end.alpha))
    return FrameState(w_hat, chi_hat, cross, frame.w_mag * np.exp(alpha_mid * dt), end)


def qb_span_residual(q_a, q_b, q_b_dot) -> float:
    """Distance of ``q_b_dot - q_a * q_b`` from ``span{q_b, q_a, [1, 0]}`` in R^4."""
    qa, qb, qbd = _as_quat(q_a), _as_quat(q_b), _as_quat(q_b_dot)
    r = qbd - quat.mul(qa, qb)
    basis = np.column_stack([qb, qa, quat.IDENTITY])
    coef, *_ = np.linalg.lstsq(basis, r, rcond=None)
    return float(np.linalg.norm(r - basis @ coef))


# ---------------------------------------------------------------------------
# Phase plane with frozen forcing
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PhasePoint:
    alpha: float
    chi: float
    alpha_p: float = 0.0
    C_p: float = 0.0


@dataclass(frozen=True)
class FixedPoint:
    point: PhasePoint
    kind: str
    eigenvalues: tuple[complex, complex]


def phase_rhs(alpha, chi, alpha_p, C_p):
    return chi * chi - alpha * alpha - alpha_p, -2.0 * alpha * chi - C_p


def phase_jacobian(alpha: float, chi: float) -> np.ndarray:
    return np.array([[-2.0 * alpha, 2.0 * chi], [-2.0 * chi, -2.0 * alpha]])


def _classify(alpha: float, chi: float):
    eig = (complex(-2 * alpha, 2 * chi), complex(-2 * alpha, -2 * chi))
    if alpha == 0.0:
        kind = "non-hyperbolic"
    elif chi != 0.0:
        kind = "stable spiral" if alpha > 0 else "unstable spiral"
    else:
        kind = "stable node" if alpha > 0 else "unstable node"
    return kind, eig


def fixed_point_alpha_alternate_sign(alpha_p: float, C_p: float) -> float:
    """``alpha_0`` from ``2 alpha_0^2 = alpha_p + sqrt(alpha_p^2 + C_p^2)``.

    This variant does not satisfy the fixed-point equations unless
    ``alpha_p = 0``; it is kept so callers can report the discrepancy.
    """
    return float(np.sqrt(0.5 * (alpha_p + np.hypot(alpha_p, C_p))))


def phase_fixed_points(alpha_p: float, C_p: float, tol: float = 1e-10) -> list[FixedPoint]:
    """Real fixed points of the frozen-forcing phase-plane system.

    Eliminating ``chi = -C_p / (2 alpha)`` leaves ``4 alpha^4 + 4 alpha_p alpha^2 - C_p^2 = 0``,
    so ``2 alpha_0^2 = -alpha_p + sqrt(alpha_p^2 + C_p^2)``.
    """
    alpha_p = float(alpha_p)
    C_p = float(C_p)
    pts: list[tuple[float, float]] = []
    if C_p == 0.0:
        if alpha_p == 0.0:
            pts = [(0.0, 0.0)]
        elif alpha_p > 0:
            r = np.sqrt(alpha_p)
            pts = [(0.0, r), (0.0, -r)]
        else:
            r = np.sqrt(-alpha_p)
            pts = [(r, 0.0), (-r, 0.0)]
    else:
        root = np.hypot(alpha_p, C_p)
        # cancellation-free form of (-alpha_p + root)/2
        a2 = 0.5 * C_p * C_p / (alpha_p + root) if alpha_p > 0 else 0.5 * (root - alpha_p)
        a0 = np.sqrt(a2)
        pts = [(a0, -C_p / (2 * a0)), (-a0, C_p / (2 * a0))]
    scale = max(1.0, abs(alpha_p), abs(C_p))
    out = []
    for a, c in pts:
        fa, fc = phase_rhs(a, c, alpha_p, C_p)
        if max(abs(fa), abs(fc)) > tol * scale:
            raise ArithmeticError(f"fixed point residual too large at ({a}, {c})")
        kind, eig = _classify(a, c)
        out.append(FixedPoint(PhasePoint(float(a), float(c), alpha_p, C_p), kind, eig))
    return out


@dataclass
class PhaseTrajectory:
    times: np.ndarray
    alpha: np.ndarray
    chi: np.ndarray
    status: str = COMPLETED


def phase_integrate(start: PhasePoint, dt: float, n_steps: int) -> PhaseTrajectory:
    """RK4 trajectory of the frozen-forcing phase-plane system from ``start``."""
    if not dt > 0:
        raise StepSizeError("dt must be positive")
    if dt * max(abs(start.alpha), abs(start.chi)) >= 0.1:
        raise StepSizeError("initial step too large: need dt * max(|alpha|, |chi|) < 0.1")
    ap, cp = start.alpha_p, start.C_p

    def f(y):
        return np.array(phase_rhs(y[0], y[1], ap, cp))

    y = np.array([start.alpha, start.chi], dtype=float)
    ys = [y.copy()]
    limit = 1.0 / (10.0 * dt)
    status = COMPLETED
    for _ in range(n_steps):
        k1 = f(y)
        k2 = f(y + 0.5 * dt * k1)
        k3 = f(y + 0.5 * dt * k2)
        k4 = f(y + dt * k3)
        y = y + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(y)) or abs(y[0]) > limit:
            status = ESCAPED
            break
        ys.append(y.copy())
    ys = np.array(ys)
    return PhaseTrajectory(dt * np.arange(len(ys)), ys[:, 0], ys[:, 1], status)
