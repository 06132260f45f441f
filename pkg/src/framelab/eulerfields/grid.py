"""Periodic velocity fields on an ``n^3`` grid and their spectral derivatives.

Physical arrays are laid out ``[component, ix, iy, iz]`` with ``iz`` fastest
(C order). Spectral coefficients are ``numpy.fft.rfftn`` over the last three
axes, so a vector field has spectral shape ``(3, n, n, n//2 + 1)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from ..errors import ConfigError

AXES = (-3, -2, -1)
SUPPORTED_N = (8, 16, 32, 64, 128)


def fft3(a):
    return np.fft.rfftn(a, axes=AXES)


def ifft3(a_hat, n):
    return np.fft.irfftn(a_hat, s=(n, n, n), axes=AXES)


@dataclass(frozen=True)
class Wavenumbers:
    """Angular wavenumbers broadcastable against a spectral array ``(n, n, n//2+1)``."""

    n: int
    box: float

    @cached_property
    def index(self):
        m = np.fft.fftfreq(self.n, 1.0 / self.n)
        mz = np.fft.rfftfreq(self.n, 1.0 / self.n)
        return m[:, None, None], m[None, :, None], mz[None, None, :]

    @cached_property
    def k(self):
        scale = 2 * np.pi / self.box
        return tuple(scale * c for c in self.index)

    @cached_property
    def k2(self):
        kx, ky, kz = self.k
        return kx * kx + ky * ky + kz * kz

    @cached_property
    def inv_k2(self):
        k2 = self.k2
        with np.errstate(divide="ignore"):
            out = np.where(k2 > 0, 1.0 / np.where(k2 > 0, k2, 1.0), 0.0)
        return out

    @cached_property
    def dealias(self):
        """True on retained modes: every integer index at most ``n/3`` in magnitude."""
        cut = self.n / 3.0
        ix, iy, iz = self.index
        return (np.abs(ix) <= cut) & (np.abs(iy) <= cut) & (np.abs(iz) <= cut)

    def grid(self):
        """Physical node coordinates ``(3, n, n, n)``."""
        x = np.arange(self.n) * (self.box / self.n)
        return np.stack(np.meshgrid(x, x, x, indexing="ij"))


def leray(v_hat, wn: Wavenumbers):
    """Remove the gradient part: ``v - k (k.v)/|k|^2``."""
    kx, ky, kz = wn.k
    kv = (kx * v_hat[0] + ky * v_hat[1] + kz * v_hat[2]) * wn.inv_k2
    return np.stack([v_hat[0] - kx * kv, v_hat[1] - ky * kv, v_hat[2] - kz * kv])


@dataclass(frozen=True, eq=False)
class GriddedVelocity:
    """Solenoidal, dealiased periodic velocity with its spectral coefficients.

    Build instances with :meth:`from_physical`, which projects and truncates.
    """

    n: int
    box: float
    u_hat: np.ndarray
    time: float = 0.0
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if self.n not in SUPPORTED_N:
            raise ConfigError(f"grid size n must be one of {SUPPORTED_N}, got {self.n}")
        if not self.box > 0:
            raise ConfigError("box period must be positive")
        shape = (3, self.n, self.n, self.n // 2 + 1)
        if self.u_hat.shape != shape:
            raise ConfigError(f"u_hat must have shape {shape}, got {self.u_hat.shape}")

    @classmethod
    def from_physical(cls, u, box: float = 2 * np.pi, time: float = 0.0, project: bool = True) -> "GriddedVelocity":
        u = np.asarray(u, dtype=float)
        n = u.shape[-1]
        wn = Wavenumbers(n, box)
        u_hat = fft3(u) * wn.dealias
        if project:
            u_hat = leray(u_hat, wn)
        return cls(n, float(box), u_hat, float(time))

    def with_spectrum(self, u_hat, time: float) -> "GriddedVelocity":
        return GriddedVelocity(self.n, self.box, u_hat, float(time))

    @property
    def wavenumbers(self) -> Wavenumbers:
        return Wavenumbers(self.n, self.box)

    def _memo(self, key, fn):
        if key not in self._cache:
            self._cache[key] = fn()
        return self._cache[key]

    def velocity(self):
        return self._memo("u", lambda: ifft3(self.u_hat, self.n))

    def gradient_hat(self):
        """Spectral ``J[i, j] = d u_i / d x_j``, shape ``(3, 3, n, n, n//2+1)``."""
        kx, ky, kz = self.wavenumbers.k
        return self._memo(
            "J_hat", lambda: np.stack([np.stack([1j * k * self.u_hat[i] for k in (kx, ky, kz)]) for i in range(3)])
        )

    def velocity_gradient(self):
        return self._memo("J", lambda: ifft3(self.gradient_hat(), self.n))

    def vorticity_hat(self):
        return curl_hat(self.u_hat, self.wavenumbers)

    def vorticity(self):
        return self._memo("w", lambda: ifft3(self.vorticity_hat(), self.n))

    def strain(self):
        J = self.velocity_gradient()
        return 0.5 * (J + np.swapaxes(J, 0, 1))

    def pressure(self):
        return self._pressure()[0]

    def pressure_hessian(self):
        return self._pressure()[1]

    def pressure_hat(self):
        return self._pressure()[2]

    def _pressure(self):
        return self._memo("p", lambda: solve_pressure(self))

    def sampler(self, method: str = "tricubic"):
        from .sampling import FieldSampler

        return FieldSampler(self, method)


def curl_hat(v_hat, wn: Wavenumbers):
    kx, ky, kz = wn.k
    return 1j * np.stack(
        [ky * v_hat[2] - kz * v_hat[1], kz * v_hat[0] - kx * v_hat[2], kx * v_hat[1] - ky * v_hat[0]]
    )


def curl(field: GriddedVelocity):
    return field.vorticity()


def strain(field: GriddedVelocity):
    return field.strain()


def solve_pressure(field: GriddedVelocity):
    """Zero-mean pressure from ``lap p = -u_{i,k} u_{k,i}`` and its Hessian.

    The source is the grid product of the gradients, kept at every resolved
    mode, so ``trace P`` equals it pointwise.
    """
    J = field.velocity_gradient()
    source = -np.einsum("ik...,ki...->...", J, J)
    wn = field.wavenumbers
    p_hat = -fft3(source) * wn.inv_k2
    k = wn.k
    P_hat = np.stack([np.stack([-k[i] * k[j] * p_hat for j in range(3)]) for i in range(3)])
    return ifft3(p_hat, field.n), ifft3(P_hat, field.n), p_hat


def pressure_hessian(field: GriddedVelocity):
    """``(p, P)`` with ``P[i, j] = d^2 p / dx_i dx_j``."""
    return field.pressure(), field.pressure_hessian()


def spectral_divergence(field: GriddedVelocity) -> float:
    """``max |k_hat . u_hat(k)|`` over nonzero modes, relative to the largest coefficient.

    Normalising by the global maximum keeps modes that only hold round-off from
    dominating the measure.
    """
    kx, ky, kz = field.wavenumbers.k
    k = np.sqrt(field.wavenumbers.k2)
    u = field.u_hat
    div = np.abs(kx * u[0] + ky * u[1] + kz * u[2])
    div = np.where(k > 0, div / np.where(k > 0, k, 1.0), 0.0)
    scale = np.max(np.sqrt(np.sum(np.abs(u) ** 2, axis=0)))
    return float(div.max() / scale) if scale > 0 else 0.0


def physical_divergence(field: GriddedVelocity) -> np.ndarray:
    J = field.velocity_gradient()
    return J[0, 0] + J[1, 1] + J[2, 2]


def energy(field: GriddedVelocity) -> float:
    """Volume-averaged kinetic energy ``<|u|^2>/2``."""
    u = field.velocity()
    return 0.5 * float(np.mean(np.sum(u * u, axis=0)))


def enstrophy(field: GriddedVelocity) -> float:
    """Volume-averaged ``<|omega|^2>/2``."""
    w = field.vorticity()
    return 0.5 * float(np.mean(np.sum(w * w, axis=0)))


# ---------------------------------------------------------------------------
# Initial data
# ---------------------------------------------------------------------------


def _nodes(n, box):
    return Wavenumbers(n, box).grid()


def taylor_green_3d(n: int, amplitude: float = 1.0, box: float = 2 * np.pi) -> GriddedVelocity:
    """``u = A (sin x cos y cos z, -cos x sin y cos z, 0)`` in ``2 pi / box`` scaled coordinates."""
    X, Y, Z = _nodes(n, box) * (2 * np.pi / box)
    A = amplitude
    u = np.stack([A * np.sin(X) * np.cos(Y) * np.cos(Z), -A * np.cos(X) * np.sin(Y) * np.cos(Z), 0 * X])
    return GriddedVelocity.from_physical(u, box)


def from_flow(flow, n: int, box: float = 2 * np.pi, time: float = 0.0) -> GriddedVelocity:
    """Sample a ``2 pi``-periodic analytic flow at the nodes, stretched to period ``box``."""
    x = np.moveaxis(_nodes(n, box), 0, -1) * (2 * np.pi / box)
    u = np.moveaxis(flow.velocity(x, time), -1, 0)
    return GriddedVelocity.from_physical(u, box, time)


def abc_field(n: int, A: float = 1.0, B: float = 1.0, C: float = 1.0, box: float = 2 * np.pi) -> GriddedVelocity:
    from ..flows import ABCFlow

    return from_flow(ABCFlow(A, B, C), n, box)


def taylor_green_2d(n: int, amplitude: float = 1.0, box: float = 2 * np.pi) -> GriddedVelocity:
    from ..flows import TaylorGreen2D

    return from_flow(TaylorGreen2D(amplitude), n, box)


INITIAL_CONDITIONS = {
    "taylor_green_3d": taylor_green_3d,
    "abc": abc_field,
    "taylor_green_2d": taylor_green_2d,
}


def make_initial(kind: str, n: int, box: float = 2 * np.pi, **params) -> GriddedVelocity:
    try:
        fn = INITIAL_CONDITIONS[kind]
    except KeyError:
        raise ConfigError(f"unknown initial field '{kind}'; choose from {sorted(INITIAL_CONDITIONS)}") from None
    try:
        return fn(n, box=box, **params)
    except TypeError as exc:
        raise ConfigError(f"bad parameters for initial field '{kind}': {exc}") from None
