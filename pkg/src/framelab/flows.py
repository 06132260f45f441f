"""Analytic flow catalog, particle paths and finite-difference Lagrangian oracles.

Each flow provides the velocity ``u``, its gradient ``J[i, j] = du_i/dx_j``,
the vorticity and, where known in closed form, the pressure and its Hessian.
Positions broadcast: ``x`` may have any leading shape with a trailing axis of 3.

``quartet_at`` assembles ``(u, w, a, b) = (u, omega, omega . grad u, -P omega)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, ClassVar

import numpy as np

from .errors import ConfigError, PreconditionError

Field = Callable[[np.ndarray, float], np.ndarray]


def _xyz(x):
    x = np.asarray(x, dtype=float)
    return x[..., 0], x[..., 1], x[..., 2]


def _mat(rows):
    """Stack a nested 3x3 list of broadcastable arrays into shape (..., 3, 3)."""
    shape = np.broadcast_shapes(*(np.shape(c) for row in rows for c in row))
    return np.stack(
        [np.stack([np.broadcast_to(c, shape) for c in row], axis=-1) for row in rows], axis=-2
    ).astype(float)


def vorticity_from_gradient(J):
    return np.stack(
        [J[..., 2, 1] - J[..., 1, 2], J[..., 0, 2] - J[..., 2, 0], J[..., 1, 0] - J[..., 0, 1]], axis=-1
    )


def strain_from_gradient(J):
    return 0.5 * (J + np.swapaxes(J, -1, -2))


class Flow:
    """Base class for catalog flows. Subclasses are frozen dataclasses."""

    name: ClassVar[str] = ""
    doc: ClassVar[str] = ""
    has_pressure: ClassVar[bool] = True

    def velocity(self, x, t=0.0):
        raise NotImplementedError

    def velocity_gradient(self, x, t=0.0):
        raise NotImplementedError

    def velocity_dt(self, x, t=0.0):
        """Partial time derivative of the velocity (zero for steady flows)."""
        return np.zeros(np.broadcast_shapes(np.shape(x)))

    def vorticity(self, x, t=0.0):
        return vorticity_from_gradient(self.velocity_gradient(x, t))

    def vorticity_gradient(self, x, t=0.0):
        """``G[..., i, j] = d omega_i / d x_j``; central differences unless overridden."""
        return gradient_fd(self.vorticity, x, t, 1e-5)

    def strain(self, x, t=0.0):
        return strain_from_gradient(self.velocity_gradient(x, t))

    def acceleration(self, x, t=0.0):
        """Du/Dt = du/dt + (grad u) u."""
        J = self.velocity_gradient(x, t)
        u = self.velocity(x, t)
        return self.velocity_dt(x, t) + np.einsum("...ij,...j->...i", J, u)

    def pressure(self, x, t=0.0):
        raise NotImplementedError(f"{self.name}: no closed-form pressure")

    def pressure_gradient(self, x, t=0.0):
        return -self.acceleration(x, t)

    def pressure_hessian(self, x, t=0.0):
        raise NotImplementedError(f"{self.name}: no closed-form pressure Hessian")

    def stretching(self, x, t=0.0):
        """``a = omega . grad u``."""
        J = self.velocity_gradient(x, t)
        return np.einsum("...ij,...j->...i", J, vorticity_from_gradient(J))

    def params(self) -> dict:
        return {k: (list(v) if isinstance(v, tuple) else v) for k, v in self.__dict__.items()}


@dataclass(frozen=True)
class RigidRotation(Flow):
    omega0: tuple[float, float, float] = (0.0, 0.0, 1.0)

    name: ClassVar[str] = "rigid_rotation"
    doc: ClassVar[str] = "u = Omega0 x x; omega0: angular velocity 3-vector (1/time)"

    def __post_init__(self):
        object.__setattr__(self, "omega0", tuple(float(c) for c in self.omega0))

    def velocity(self, x, t=0.0):
        return np.cross(np.asarray(self.omega0), np.asarray(x, dtype=float))

    def velocity_gradient(self, x, t=0.0):
        wx, wy, wz = self.omega0
        K = np.array([[0.0, -wz, wy], [wz, 0.0, -wx], [-wy, wx, 0.0]])
        return np.broadcast_to(K, np.shape(x)[:-1] + (3, 3)).copy()

    def vorticity_gradient(self, x, t=0.0):
        return np.zeros(np.shape(x)[:-1] + (3, 3))

    def pressure(self, x, t=0.0):
        v = self.velocity(x, t)
        return 0.5 * np.sum(v * v, axis=-1)

    def pressure_hessian(self, x, t=0.0):
        o = np.asarray(self.omega0)
        P = np.dot(o, o) * np.eye(3) - np.outer(o, o)
        return np.broadcast_to(P, np.shape(x)[:-1] + (3, 3)).copy()


@dataclass(frozen=True)
class ABCFlow(Flow):
    A: float = 1.0
    B: float = 1.0
    C: float = 1.0

    name: ClassVar[str] = "abc"
    doc: ClassVar[str] = "Arnold-Beltrami-Childress flow with omega = u; A, B, C (length/time)"

    def __post_init__(self):
        if self.A == 0 and self.B == 0 and self.C == 0:
            raise ConfigError("abc flow needs at least one of A, B, C nonzero")

    def velocity(self, x, t=0.0):
        X, Y, Z = _xyz(x)
        A, B, C = self.A, self.B, self.C
        return np.stack(
            [A * np.sin(Z) + C * np.cos(Y), B * np.sin(X) + A * np.cos(Z), C * np.sin(Y) + B * np.cos(X)],
            axis=-1,
        )

    def velocity_gradient(self, x, t=0.0):
        X, Y, Z = _xyz(x)
        A, B, C = self.A, self.B, self.C
        zero = np.zeros_like(X)
        return _mat(
            [
                [zero, -C * np.sin(Y), A * np.cos(Z)],
                [B * np.cos(X), zero, -A * np.sin(Z)],
                [-B * np.sin(X), C * np.cos(Y), zero],
            ]
        )

    def vorticity(self, x, t=0.0):
        return self.velocity(x, t)

    def vorticity_gradient(self, x, t=0.0):
        return self.velocity_gradient(x, t)

    def pressure(self, x, t=0.0):
        # zero-mean gauge over the 2*pi box
        u = self.velocity(x, t)
        return 0.5 * (self.A**2 + self.B**2 + self.C**2) - 0.5 * np.sum(u * u, axis=-1)

    def pressure_hessian(self, x, t=0.0):
        X, Y, Z = _xyz(x)
        A, B, C = self.A, self.B, self.C
        u = self.velocity(x, t)
        J = self.velocity_gradient(x, t)
        # second derivatives of each velocity component are diagonal
        hx = np.stack([np.zeros_like(X), -C * np.cos(Y), -A * np.sin(Z)], axis=-1)
        hy = np.stack([-B * np.sin(X), np.zeros_like(X), -A * np.cos(Z)], axis=-1)
        hz = np.stack([-B * np.cos(X), -C * np.sin(Y), np.zeros_like(X)], axis=-1)
        diag = u[..., 0:1] * hx + u[..., 1:2] * hy + u[..., 2:3] * hz
        JtJ = np.einsum("...ki,...kj->...ij", J, J)
        return -(JtJ + diag[..., :, None] * np.eye(3))


@dataclass(frozen=True)
class TaylorGreen2D(Flow):
    amplitude: float = 1.0

    name: ClassVar[str] = "taylor_green_2d"
    doc: ClassVar[str] = "steady u = A (sin x cos y, -cos x sin y, 0); amplitude A (length/time)"

    def velocity(self, x, t=0.0):
        X, Y, _ = _xyz(x)
        A = self.amplitude
        return np.stack([A * np.sin(X) * np.cos(Y), -A * np.cos(X) * np.sin(Y), np.zeros_like(X)], axis=-1)

    def velocity_gradient(self, x, t=0.0):
        X, Y, _ = _xyz(x)
        A = self.amplitude
        zero = np.zeros_like(X)
        return _mat(
            [
                [A * np.cos(X) * np.cos(Y), -A * np.sin(X) * np.sin(Y), zero],
                [A * np.sin(X) * np.sin(Y), -A * np.cos(X) * np.cos(Y), zero],
                [zero, zero, zero],
            ]
        )

    def vorticity_gradient(self, x, t=0.0):
        X, Y, _ = _xyz(x)
        A = self.amplitude
        zero = np.zeros_like(X)
        return _mat(
            [[zero, zero, zero], [zero, zero, zero], [2 * A * np.cos(X) * np.sin(Y), 2 * A * np.sin(X) * np.cos(Y), zero]]
        )

    def pressure(self, x, t=0.0):
        X, Y, _ = _xyz(x)
        return 0.25 * self.amplitude**2 * (np.cos(2 * X) + np.cos(2 * Y))

    def pressure_hessian(self, x, t=0.0):
        X, Y, _ = _xyz(x)
        a2 = self.amplitude**2
        zero = np.zeros_like(X)
        return _mat([[-a2 * np.cos(2 * X), zero, zero], [zero, -a2 * np.cos(2 * Y), zero], [zero, zero, zero]])


@dataclass(frozen=True)
class ColumnarVortex(Flow):
    """Axisymmetric vortex column stretched by the strain ``(-gamma x/2, -gamma y/2, gamma z)``.

    The swirl carries a Gaussian vorticity core of circulation ``circulation``
    whose radius shrinks as ``core_radius * exp(-gamma t / 2)``; with that
    shrinkage the field is an exact inviscid Euler solution.
    """

    gamma: float = 1.0
    circulation: float = 1.0
    core_radius: float = 1.0

    name: ClassVar[str] = "columnar_vortex"
    doc: ClassVar[str] = (
        "stretched Gaussian vortex column; gamma: axial strain rate (1/time), "
        "circulation (length^2/time), core_radius at t=0 (length)"
    )
    has_pressure: ClassVar[bool] = False

    def __post_init__(self):
        if not self.core_radius > 0:
            raise ConfigError("core_radius must be positive")

    def _delta2(self, t):
        return self.core_radius**2 * np.exp(-self.gamma * t)

    def _swirl(self, x, t):
        """g = u_theta / r and g'(r)/r, both regular on the axis."""
        X, Y, _ = _xyz(x)
        d2 = self._delta2(t)
        s = (X * X + Y * Y) / d2
        small = s < 1e-4
        ss = np.where(small, 1.0, s)
        h = np.where(small, 1.0 - s / 2 + s * s / 6, -np.expm1(-ss) / ss)
        hp = np.where(small, -0.5 + s / 3 - s * s / 8, (np.exp(-ss) * (1 + ss) - 1.0) / (ss * ss))
        k = self.circulation / (2 * np.pi * d2)
        return k * h, 2 * k * hp / d2, s

    def velocity(self, x, t=0.0):
        X, Y, Z = _xyz(x)
        g, _, _ = self._swirl(x, t)
        gm = self.gamma
        return np.stack([-0.5 * gm * X - g * Y, -0.5 * gm * Y + g * X, gm * Z], axis=-1)

    def velocity_gradient(self, x, t=0.0):
        X, Y, _ = _xyz(x)
        g, gpr, _ = self._swirl(x, t)
        gm = self.gamma
        zero = np.zeros_like(X)
        return _mat(
            [
                [-0.5 * gm - gpr * X * Y, -g - gpr * Y * Y, zero],
                [g + gpr * X * X, -0.5 * gm + gpr * X * Y, zero],
                [zero, zero, gm + zero],
            ]
        )

    def velocity_dt(self, x, t=0.0):
        X, Y, _ = _xyz(x)
        _, _, s = self._swirl(x, t)
        dg = self.gamma * self.circulation * np.exp(-s) / (2 * np.pi * self._delta2(t))
        return np.stack([-dg * Y, dg * X, np.zeros_like(X)], axis=-1)

    def vorticity(self, x, t=0.0):
        X, _, _ = _xyz(x)
        _, _, s = self._swirl(x, t)
        wz = self.circulation * np.exp(-s) / (np.pi * self._delta2(t))
        zero = np.zeros_like(X)
        return np.stack([zero, zero, wz], axis=-1)

    def vorticity_gradient(self, x, t=0.0):
        X, Y, _ = _xyz(x)
        wz = self.vorticity(x, t)[..., 2]
        c = -2.0 * wz / self._delta2(t)
        zero = np.zeros_like(X)
        return _mat([[zero, zero, zero], [zero, zero, zero], [c * X, c * Y, zero]])

    def pressure_hessian(self, x, t=0.0, h=1e-4):
        """``P = -grad(Du/Dt)`` by central differences of the analytic acceleration."""
        return -gradient_fd(self.acceleration, x, t, h)


CATALOG: dict[str, type[Flow]] = {
    cls.name: cls for cls in (RigidRotation, ColumnarVortex, ABCFlow, TaylorGreen2D)
}


def make_flow(kind: str, **params) -> Flow:
    try:
        cls = CATALOG[kind]
    except KeyError:
        raise ConfigError(f"unknown flow '{kind}'; choose from {sorted(CATALOG)}") from None
    try:
        return cls(**params)
    except TypeError as exc:
        raise ConfigError(f"bad parameters for flow '{kind}': {exc}") from None


# ---------------------------------------------------------------------------
# Quartets and trajectories
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Quartet:
    """``(u, w, a, b)`` at ``position`` and ``time``; ``b_from_fd`` flags an FD-derived ``b``."""

    u: np.ndarray
    w: np.ndarray
    a: np.ndarray
    b: np.ndarray
    position: np.ndarray
    time: float
    b_from_fd: bool = False


def quartet_at(flow: Flow, x, t: float = 0.0, h: float = 1e-3) -> Quartet:
    x = np.asarray(x, dtype=float)
    u = flow.velocity(x, t)
    w = flow.vorticity(x, t)
    a = flow.stretching(x, t)
    if flow.has_pressure:
        b = -np.einsum("...ij,...j->...i", flow.pressure_hessian(x, t), w)
        from_fd = False
    else:
        b = material_derivative_fd(flow, flow.stretching, x, t, h)
        from_fd = True
    return Quartet(u, w, a, b, x, float(t), from_fd)


def rk4_path(velocity: Field, x, t: float, T: float, n_sub: int) -> np.ndarray:
    """Integrate ``dX/dt = velocity(X, t)`` from ``t`` to ``T`` in ``n_sub`` RK4 steps."""
    x = np.asarray(x, dtype=float)
    dt = (T - t) / n_sub
    for i in range(n_sub):
        tt = t + i * dt
        k1 = velocity(x, tt)
        k2 = velocity(x + 0.5 * dt * k1, tt + 0.5 * dt)
        k3 = velocity(x + 0.5 * dt * k2, tt + 0.5 * dt)
        k4 = velocity(x + dt * k3, tt + dt)
        x = x + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    return x


def material_derivative_fd(flow, f: Field, x, t: float, h: float, velocity: Field | None = None):
    """Central difference of ``f`` along the particle path through ``(x, t)``.

    The path is integrated by RK4 with step ``h/4``. ``velocity`` overrides the
    transporting velocity (used for the two Elsasser characteristics).
    """
    if not h > 0:
        raise PreconditionError("h must be positive")
    vel = velocity if velocity is not None else flow.velocity
    xp = rk4_path(vel, x, t, t + h, 4)
    xm = rk4_path(vel, x, t, t - h, 4)
    return (np.asarray(f(xp, t + h)) - np.asarray(f(xm, t - h))) / (2 * h)


def gradient_fd(f: Field, x, t: float, h: float) -> np.ndarray:
    """``G[..., i, j] = d f_i / d x_j`` by central differences with spacing ``h``."""
    x = np.asarray(x, dtype=float)
    cols = []
    for j in range(3):
        e = np.zeros(3)
        e[j] = h
        cols.append((np.asarray(f(x + e, t)) - np.asarray(f(x - e, t))) / (2 * h))
    return np.stack(cols, axis=-1)


def directional_fd(f: Field, w: Field, h: float) -> Field:
    """The field ``(x, t) -> w(x, t) . grad f(x, t)`` with a central-difference gradient."""

    def g(x, t):
        return np.einsum("...ij,...j->...i", gradient_fd(f, x, t, h), np.asarray(w(x, t)))

    return g


def ertel_sides(flow: Flow, mu: Field, x, t: float, h: float, w: Field | None = None):
    """Both sides of ``D(w . grad mu)/Dt = w . grad(D mu / Dt)`` by finite differences."""
    w = flow.vorticity if w is None else w
    lhs = material_derivative_fd(flow, directional_fd(mu, w, h), x, t, h)

    def dmu(y, s):
        return material_derivative_fd(flow, mu, y, s, h)

    rhs = directional_fd(dmu, w, h)(np.asarray(x, dtype=float), t)
    return lhs, rhs


def ertel_residual(flow: Flow, mu: Field, x, t: float, h: float, w: Field | None = None) -> float:
    lhs, rhs = ertel_sides(flow, mu, x, t, h, w)
    return float(np.linalg.norm(lhs - rhs))


@dataclass
class Trajectory:
    times: np.ndarray
    positions: np.ndarray
    quartets: list[Quartet] = field(default_factory=list)
    step: float = 0.0


def advance_trajectory(flow: Flow, x0, t0: float, dt: float, n: int, with_quartets: bool = True) -> Trajectory:
    if not dt > 0:
        raise PreconditionError("dt must be positive")
    x = np.asarray(x0, dtype=float)
    times = [t0]
    pos = [x]
    quartets = [quartet_at(flow, x, t0)] if with_quartets else []
    t = t0
    for _ in range(n):
        x = rk4_path(flow.velocity, x, t, t + dt, 1)
        t = t0 + len(times) * dt
        times.append(t)
        pos.append(x)
        if with_quartets:
            quartets.append(quartet_at(flow, x, t))
    return Trajectory(np.array(times), np.array(pos), quartets, dt)
