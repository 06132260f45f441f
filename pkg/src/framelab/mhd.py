"""Ideal MHD in Elsasser form: dual quartets, coupled Riccati pair, dual frames.

With ``v+- = u +- B`` there are two material derivatives
``D+-/Dt = d/dt + v+- . grad``. The stretched vector is ``B`` and

    a+- = B . grad v+-,      b = -P B

with ``P`` the Hessian of the total pressure ``p_f + |B|^2/2``. The frame
``(B_hat, chi_hat+, B_hat x chi_hat+)`` is carried by ``D-/Dt`` with Darboux
vector ``D-``, and the ``-`` frame by ``D+/Dt`` with ``D+``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, ClassVar

import numpy as np

from . import framedyn, quat
from .errors import ConfigError, DegenerateFrameError
from .flows import ABCFlow, Flow, Quartet, gradient_fd, material_derivative_fd, rk4_path


@dataclass(frozen=True)
class ElsasserPair:
    v_plus: np.ndarray
    v_minus: np.ndarray

    @property
    def u(self):
        return 0.5 * (self.v_plus + self.v_minus)

    @property
    def B(self):
        return 0.5 * (self.v_plus - self.v_minus)


def elsasser(u, B) -> ElsasserPair:
    u = np.asarray(u, dtype=float)
    B = np.asarray(B, dtype=float)
    return ElsasserPair(u + B, u - B)


# ---------------------------------------------------------------------------
# Prescribed fields
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ZeroField(Flow):
    name: ClassVar[str] = "zero"

    def velocity(self, x, t=0.0):
        return np.zeros(np.shape(x))

    def velocity_gradient(self, x, t=0.0):
        return np.zeros(np.shape(x)[:-1] + (3, 3))

    def pressure_hessian(self, x, t=0.0):
        return np.zeros(np.shape(x)[:-1] + (3, 3))


@dataclass(frozen=True)
class HelicalField(Flow):
    """``B0 (sin kz, cos kz, 0)``: linear force-free, ``curl B = k B``."""

    B0: float = 1.0
    k: float = 1.0
    name: ClassVar[str] = "helical"

    def velocity(self, x, t=0.0):
        z = np.asarray(x, dtype=float)[..., 2]
        return np.stack([self.B0 * np.sin(self.k * z), self.B0 * np.cos(self.k * z), 0 * z], axis=-1)

    def velocity_gradient(self, x, t=0.0):
        z = np.asarray(x, dtype=float)[..., 2]
        J = np.zeros(z.shape + (3, 3))
        J[..., 0, 2] = self.B0 * self.k * np.cos(self.k * z)
        J[..., 1, 2] = -self.B0 * self.k * np.sin(self.k * z)
        return J


@dataclass(frozen=True)
class Scaled(Flow):
    base: Flow
    factor: float = 1.0
    name: ClassVar[str] = "scaled"

    def velocity(self, x, t=0.0):
        return self.factor * self.base.velocity(x, t)

    def velocity_gradient(self, x, t=0.0):
        return self.factor * self.base.velocity_gradient(x, t)


PressureHessian = Callable[[np.ndarray, float], np.ndarray]


@dataclass(frozen=True)
class MhdFieldSpec:
    """Prescribed ``u`` and ``B`` plus the total-pressure Hessian.

    ``pressure_hessian=None`` selects the finite-difference oracle
    ``P = -grad(D+ v- / Dt)``.
    """

    u: Flow
    B: Flow
    pressure_hessian: PressureHessian | None = None
    name: str = "custom"

    def v_plus(self, x, t=0.0):
        return self.u.velocity(x, t) + self.B.velocity(x, t)

    def v_minus(self, x, t=0.0):
        return self.u.velocity(x, t) - self.B.velocity(x, t)

    def grad_v(self, sign: int, x, t=0.0):
        return self.u.velocity_gradient(x, t) + sign * self.B.velocity_gradient(x, t)

    def total_pressure_hessian(self, x, t=0.0, h: float = 1e-3):
        if self.pressure_hessian is not None:
            return np.asarray(self.pressure_hessian(x, t))

        def dv(y, s):
            return material_derivative_fd(None, self.v_minus, y, s, h, velocity=self.v_plus)

        return -gradient_fd(dv, x, t, h)

    def flipped(self) -> "MhdFieldSpec":
        """The same flow with ``B -> -B``."""
        return MhdFieldSpec(self.u, Scaled(self.B, -1.0), self.pressure_hessian, self.name + ":flipped")


def _zero_hessian(x, t=0.0):
    return np.zeros(np.shape(x)[:-1] + (3, 3))


def force_free_helical(B0: float = 1.0, k: float = 1.0) -> MhdFieldSpec:
    """Static force-free field with ``u = 0``; ``|B|`` and the total pressure are uniform."""
    return MhdFieldSpec(ZeroField(), HelicalField(B0, k), _zero_hessian, "force_free_helical")


def alfven_abc(A: float = 1.0, B: float = 1.0, C: float = 1.0) -> MhdFieldSpec:
    """Steady ``u = B = ABC``: ``v- = 0`` and ``v+ = 2u``, uniform total pressure."""
    f = ABCFlow(A, B, C)
    return MhdFieldSpec(f, f, _zero_hessian, "alfven_abc")


def hydro_limit(A: float = 1.0, B: float = 1.0, C: float = 1.0) -> MhdFieldSpec:
    """``B = 0`` on the ABC flow; pressure Hessian from the FD oracle."""
    return MhdFieldSpec(ABCFlow(A, B, C), ZeroField(), None, "hydro_limit")


MHD_CATALOG = {
    "force_free_helical": (force_free_helical, "u = 0, B = B0 (sin kz, cos kz, 0); B0 (field units), k (1/length)"),
    "alfven_abc": (alfven_abc, "u = B = ABC flow, so v- = 0 and v+ = 2u; A, B, C"),
    "hydro_limit": (hydro_limit, "ABC flow with B = 0; pressure Hessian by finite differences"),
}


def make_mhd(kind: str, **params) -> MhdFieldSpec:
    try:
        fn = MHD_CATALOG[kind][0]
    except KeyError:
        raise ConfigError(f"unknown MHD scenario '{kind}'; choose from {sorted(MHD_CATALOG)}") from None
    try:
        return fn(**params)
    except TypeError as exc:
        raise ConfigError(f"bad parameters for MHD scenario '{kind}': {exc}") from None


# ---------------------------------------------------------------------------
# Quartets
# ---------------------------------------------------------------------------


def mhd_quartets(spec: MhdFieldSpec, x, t: float = 0.0, h: float = 1e-3) -> tuple[Quartet, Quartet]:
    """``(v+, B, a+, b)`` and ``(v-, B, a-, b)`` at ``(x, t)``."""
    x = np.asarray(x, dtype=float)
    B = spec.B.velocity(x, t)
    P = spec.total_pressure_hessian(x, t, h)
    b = -np.einsum("...ij,...j->...i", P, B)
    fd = spec.pressure_hessian is None
    out = []
    for sign in (1, -1):
        v = spec.u.velocity(x, t) + sign * B
        a = np.einsum("...ij,...j->...i", spec.grad_v(sign, x, t), B)
        out.append(Quartet(v, B, a, b, x, float(t), fd))
    return out[0], out[1]


# ---------------------------------------------------------------------------
# Coupled Riccati pair
# ---------------------------------------------------------------------------


def mhd_riccati_rhs(q_plus, q_minus, q_b):
    """Right-hand sides ``q_b - q+ * q-`` and ``q_b - q- * q+`` as quaternion arrays."""
    qp, qm, qb = (framedyn._as_quat(q) for q in (q_plus, q_minus, q_b))
    return qb - quat.mul(qp, qm), qb - quat.mul(qm, qp)


def mhd_riccati_step(q_plus, q_minus, q_b, dt: float) -> tuple[framedyn.AlphaChi, framedyn.AlphaChi]:
    """One RK4 step of the coupled pair with frozen ``q_b``."""
    qp, qm = framedyn._as_quat(q_plus), framedyn._as_quat(q_minus)

    def f(y):
        return np.concatenate(mhd_riccati_rhs(y[:4], y[4:], q_b))

    y = np.concatenate([qp, qm])
    k1 = f(y)
    k2 = f(y + 0.5 * dt * k1)
    k3 = f(y + 0.5 * dt * k2)
    k4 = f(y + dt * k3)
    y = y + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    return framedyn.AlphaChi.from_quaternion(y[:4]), framedyn.AlphaChi.from_quaternion(y[4:])


# ---------------------------------------------------------------------------
# Dual frames
# ---------------------------------------------------------------------------


def _unit_or(v, fallback):
    n = np.linalg.norm(v)
    if n > framedyn.CHI_TOL:
        return v / n
    return fallback


@dataclass(frozen=True)
class MhdFrameState:
    B_hat: np.ndarray
    B_mag: float
    chi_hat_plus: np.ndarray
    chi_hat_minus: np.ndarray
    alpha_chi_plus: framedyn.AlphaChi
    alpha_chi_minus: framedyn.AlphaChi

    def __post_init__(self):
        for c in (self.chi_hat_plus, self.chi_hat_minus):
            err = framedyn.orthonormality_error(self.B_hat, c, np.cross(self.B_hat, c))
            if err > framedyn.ORTHO_TOL:
                raise framedyn.DomainError(f"MHD frame is not orthonormal (error {err:.3e})")

    @classmethod
    def from_vectors(cls, B, a_plus, a_minus, chi_hat_plus=None, chi_hat_minus=None) -> "MhdFrameState":
        B = np.asarray(B, dtype=float)
        qp = framedyn.decompose(B, a_plus)
        qm = framedyn.decompose(B, a_minus)
        mag = float(np.linalg.norm(B))
        B_hat = B / mag

        def axis(q, given):
            fallback = framedyn.perpendicular_unit(B_hat) if given is None else np.asarray(given, dtype=float)
            c = _unit_or(q.chi, fallback)
            c = c - np.dot(c, B_hat) * B_hat
            return c / np.linalg.norm(c)

        return cls(B_hat, mag, axis(qp, chi_hat_plus), axis(qm, chi_hat_minus), qp, qm)

    def frame(self, sign: int) -> framedyn.FrameState:
        """The frame ``(B_hat, chi_hat[sign], ...)`` with the ``(alpha, chi)`` of its carrier ``-sign``."""
        c = self.chi_hat_plus if sign > 0 else self.chi_hat_minus
        q = self.alpha_chi_minus if sign > 0 else self.alpha_chi_plus
        return framedyn.FrameState(self.B_hat, c, np.cross(self.B_hat, c), self.B_mag, q)


@dataclass(frozen=True)
class ElsasserDarboux:
    """``minus`` carries the ``+`` frame, ``plus`` the ``-`` frame."""

    minus: framedyn.DarbouxVector
    plus: framedyn.DarbouxVector

    def __iter__(self):
        return iter((self.minus, self.plus))


def _elsasser_darboux(B_hat, chi_hat_own, chi_other, alpha_own, chi_pB):
    """``chi - (c/|chi|) B_hat`` with ``c = B_hat.[chi_hat_own x (chi_pB + alpha_own chi)]``."""
    mag = float(np.linalg.norm(chi_other))
    if mag < framedyn.CHI_TOL:
        raise DegenerateFrameError("χ = 0: χ̂ undefined")
    c = float(np.dot(B_hat, np.cross(chi_hat_own, chi_pB + alpha_own * chi_other)))
    return framedyn.DarbouxVector(chi_other - (c / mag) * B_hat, c, float(np.dot(chi_hat_own, chi_pB)))


def mhd_darboux(state: MhdFrameState, chi_pB) -> ElsasserDarboux:
    """Both Elsasser Darboux vectors; ``chi_pB = B_hat x P B_hat``."""
    chi_pB = np.asarray(chi_pB, dtype=float)
    ap, am = state.alpha_chi_plus, state.alpha_chi_minus
    d_minus = _elsasser_darboux(state.B_hat, state.chi_hat_plus, am.chi, float(ap.alpha), chi_pB)
    d_plus = _elsasser_darboux(state.B_hat, state.chi_hat_minus, ap.chi, float(am.alpha), chi_pB)
    return ElsasserDarboux(d_minus, d_plus)


def chi_pB(B, P) -> np.ndarray:
    B_hat = np.asarray(B, dtype=float) / np.linalg.norm(B)
    return np.cross(B_hat, np.asarray(P) @ B_hat)


def _state_at(spec, x, t, h, chi_hat_plus=None, chi_hat_minus=None):
    qp, qm = mhd_quartets(spec, x, t, h)
    state = MhdFrameState.from_vectors(qp.w, qp.a, qm.a, chi_hat_plus, chi_hat_minus)
    P = spec.total_pressure_hessian(x, t, h)
    return state, chi_pB(qp.w, P)


def _carrier_darboux(state, cpb, sign):
    """Darboux vector for the ``sign`` frame, zero when its ``chi`` vanishes."""
    own = state.chi_hat_plus if sign > 0 else state.chi_hat_minus
    q_own = state.alpha_chi_plus if sign > 0 else state.alpha_chi_minus
    q_other = state.alpha_chi_minus if sign > 0 else state.alpha_chi_plus
    if q_other.chi_mag < framedyn.CHI_TOL:
        return np.zeros(3)
    return _elsasser_darboux(state.B_hat, own, q_other.chi, float(q_own.alpha), cpb).d


@dataclass
class MhdFrameRun:
    times: np.ndarray
    positions: np.ndarray
    B_hat: np.ndarray
    chi_hat: np.ndarray
    cross: np.ndarray
    B_mag: np.ndarray
    alpha: np.ndarray
    chi: np.ndarray
    B_sampled: np.ndarray
    sign: int
    status: str = framedyn.COMPLETED


def mhd_frame_run(
    spec: MhdFieldSpec,
    x0,
    dt: float,
    n_steps: int,
    sign: int = 1,
    t0: float = 0.0,
    h: float = 1e-3,
    carrier: int | None = None,
) -> MhdFrameRun:
    """Carry the ``sign`` frame along the ``-sign`` characteristic.

    ``carrier`` overrides which Elsasser velocity moves the particle; it exists
    so tests can show that the other characteristic does not transport the frame.
    """
    if sign not in (1, -1):
        raise ConfigError("sign must be +1 or -1")
    carrier = -sign if carrier is None else carrier
    vel = spec.v_plus if carrier > 0 else spec.v_minus
    x = np.asarray(x0, dtype=float)
    t = t0
    state, _ = _state_at(spec, x, t, h)
    frame = state.frame(sign)
    def row():
        q = frame.alpha_chi
        return (t, x, frame.w_hat, frame.chi_hat, frame.cross, frame.w_mag, float(q.alpha), q.chi, spec.B.velocity(x, t))

    rows = [row()]
    for k in range(n_steps):
        t1 = t0 + (k + 1) * dt
        x1 = rk4_path(vel, x, t, t1, 1)
        x_mid = 0.5 * (x + x1) + 0.125 * dt * (vel(x, t) - vel(x1, t1))
        own_hat = frame.chi_hat
        mid, cpb = _state_at(
            spec, x_mid, t + 0.5 * dt, h, *((own_hat, None) if sign > 0 else (None, own_hat))
        )
        d = _carrier_darboux(mid, cpb, sign)
        end, _ = _state_at(spec, x1, t1, h)
        frame = framedyn.frame_step(frame, d, dt, end.frame(sign).alpha_chi)
        x, t = x1, t1
        rows.append(row())
    cols = [np.array(c) for c in zip(*rows)]
    return MhdFrameRun(*cols, sign=sign)
