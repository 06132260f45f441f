"""Vortex-line tracing and the line-based geometric quantities.

Lines are integrated in arc length, ``dx/ds = w_hat(x)``, with RK4. At each
node the curvature and ``div w_hat`` are computed from the pointwise vorticity
gradient ``G = grad omega``:

    d w_hat/ds = (G w_hat - w_hat (w_hat.G w_hat)) / |omega|
    div w_hat  = (tr G - w_hat.G w_hat) / |omega|

so the identity ``div w_hat = -d ln|omega|/ds`` can be tested against a
difference quotient along the line.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DomainError, PreconditionError

SEED_MIN = 1e-8
KAPPA_MIN = 1e-8


@dataclass(frozen=True)
class VortexLine:
    nodes: np.ndarray
    arc_s: np.ndarray
    omega_mag: np.ndarray
    tangent: np.ndarray
    curvature: np.ndarray
    div_omhat: np.ndarray
    dtangent_ds: np.ndarray
    stopped: str = "max_len"

    @property
    def length(self) -> float:
        return float(self.arc_s[-1])


def _unit_tangent(source, x, t):
    w = np.asarray(source.vorticity(x, t))
    return w / np.linalg.norm(w)


def _node_geometry(source, x, t):
    w = np.asarray(source.vorticity(x, t))
    mag = float(np.linalg.norm(w))
    that = w / mag
    G = np.asarray(source.vorticity_gradient(x, t))
    gt = G @ that
    along = float(that @ gt)
    dT = (gt - that * along) / mag
    div = (float(np.trace(G)) - along) / mag
    return mag, that, dT, div


def trace_vortex_line(
    source, x0, ds: float, max_len: float, t: float = 0.0, threshold: float = SEED_MIN
) -> VortexLine:
    """Trace the vortex line through ``x0`` forward for ``max_len`` in steps of ``ds``.

    Tracing stops early where ``|omega|`` falls below ``threshold``.
    """
    if not ds > 0 or not max_len > 0:
        raise PreconditionError("ds and max_len must be positive")
    x = np.asarray(x0, dtype=float)
    if np.linalg.norm(source.vorticity(x, t)) < threshold:
        raise DomainError("seed vorticity below threshold: no vortex line")
    n_steps = int(round(max_len / ds))
    geo = [_node_geometry(source, x, t)]
    nodes = [x]
    stopped = "max_len"
    f = lambda y: _unit_tangent(source, y, t)  # noqa: E731
    for _ in range(n_steps):
        k1 = f(x)
        k2 = f(x + 0.5 * ds * k1)
        k3 = f(x + 0.5 * ds * k2)
        k4 = f(x + ds * k3)
        x_new = x + ds / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        if np.linalg.norm(source.vorticity(x_new, t)) < threshold:
            stopped = "weak vorticity"
            break
        x = x_new
        nodes.append(x)
        geo.append(_node_geometry(source, x, t))
    mag, that, dT, div = (np.array(c) for c in zip(*geo))
    return VortexLine(
        nodes=np.array(nodes),
        arc_s=ds * np.arange(len(nodes)),
        omega_mag=mag,
        tangent=that,
        curvature=np.linalg.norm(dT, axis=1),
        div_omhat=div,
        dtangent_ds=dT,
        stopped=stopped,
    )


def log_omega_slope(line: VortexLine) -> np.ndarray:
    """Central difference of ``ln|omega|`` in ``s`` on interior nodes."""
    lw = np.log(line.omega_mag)
    ds = np.diff(line.arc_s)
    return (lw[2:] - lw[:-2]) / (ds[1:] + ds[:-1])


def solenoidal_residual(line: VortexLine) -> np.ndarray:
    """``div w_hat + d ln|omega|/ds`` on interior nodes; zero for a solenoidal field."""
    return line.div_omhat[1:-1] + log_omega_slope(line)


def ratio_bound_check(line: VortexLine) -> bool:
    """Two-sided bound ``exp(-I) <= |omega(x)|/|omega(y)| <= exp(I)``, ``I = int |div w_hat| ds``.

    Checked for the seed against every node, with the trapezoid integral
    allowed its own remainder estimate.
    """
    s = line.arc_s
    a = np.abs(line.div_omhat)
    I = np.concatenate([[0.0], np.cumsum(0.5 * (a[1:] + a[:-1]) * np.diff(s))])
    if len(s) > 2:
        h = float(np.max(np.diff(s)))
        second = np.abs(np.diff(a, 2)).max() / h**2
        slack = second * h**2 * s / 12.0 + 1e-12
    else:
        slack = np.full_like(s, 1e-12)
    log_ratio = np.abs(np.log(line.omega_mag / line.omega_mag[0]))
    return bool(np.all(log_ratio <= I + slack))


@dataclass(frozen=True)
class DhyQuantities:
    U_omega: float
    U_n: float
    M: float
    L: float
    normal_defined: bool


def dhy_diagnostics(source, line: VortexLine, t: float = 0.0) -> DhyQuantities:
    """Velocity variation along the line, normal velocity, ``max(|div w_hat|, kappa)`` and length."""
    u = np.asarray(source.velocity(line.nodes, t))
    u_par = np.sum(u * line.tangent, axis=1)
    U_omega = float(u_par.max() - u_par.min())
    curved = line.curvature >= KAPPA_MIN
    if curved.any():
        n_hat = line.dtangent_ds[curved] / line.curvature[curved][:, None]
        U_n = float(np.abs(np.sum(u[curved] * n_hat, axis=1)).max())
    else:
        U_n = 0.0
    M = float(max(np.abs(line.div_omhat).max(), line.curvature.max()))
    return DhyQuantities(U_omega, U_n, M, line.length, bool(curved.any()))


def richardson_order(errors, ratio: float = 2.0) -> float:
    """Least-squares slope of ``log error`` against ``log step`` for steps shrinking by ``ratio``."""
    e = np.log(np.asarray(errors, dtype=float))
    h = -np.arange(len(e)) * np.log(ratio)
    return float(np.polyfit(h, e, 1)[0])
