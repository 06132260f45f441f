"""Quaternion algebra on plain numpy arrays.

A quaternion ``[s, v]`` is stored as a float array whose last axis has length 4,
``(s, v1, v2, v3)``. Every function broadcasts over leading axes, so a stack of
quaternions of shape ``(n, 4)`` is handled in one call.

The product is

    [p1, q1] * [p2, q2] = [p1 p2 - q1.q2,  p1 q2 + p2 q1 + q1 x q2]

which is Hamilton's rule written with the dot and cross products.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, PreconditionError

UNIT_TOL = 1e-9
_SERIES_CUTOFF = 1e-4

IDENTITY = np.array([1.0, 0.0, 0.0, 0.0])


def cross(a, b):
    """Cross product over the last axis (faster than np.cross for small stacks)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return np.stack(
        [
            a[..., 1] * b[..., 2] - a[..., 2] * b[..., 1],
            a[..., 2] * b[..., 0] - a[..., 0] * b[..., 2],
            a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0],
        ],
        axis=-1,
    )


def dot(a, b):
    return np.sum(np.asarray(a, dtype=float) * np.asarray(b, dtype=float), axis=-1)


def quaternion(s, v) -> np.ndarray:
    """Assemble ``[s, v]`` from a scalar part and a 3-vector part."""
    s = np.asarray(s, dtype=float)
    v = np.asarray(v, dtype=float)
    s, _ = np.broadcast_arrays(s, v[..., 0])
    return np.concatenate([s[..., None], v], axis=-1)


def pure(v) -> np.ndarray:
    """Pure quaternion ``[0, v]``."""
    v = np.asarray(v, dtype=float)
    return quaternion(np.zeros(v.shape[:-1]), v)


def scalar(q) -> np.ndarray:
    return np.asarray(q, dtype=float)[..., 0]


def vector(q) -> np.ndarray:
    return np.asarray(q, dtype=float)[..., 1:]


def mul(q1, q2) -> np.ndarray:
    q1 = np.asarray(q1, dtype=float)
    q2 = np.asarray(q2, dtype=float)
    p1, v1 = q1[..., 0], q1[..., 1:]
    p2, v2 = q2[..., 0], q2[..., 1:]
    s = p1 * p2 - dot(v1, v2)
    v = p1[..., None] * v2 + p2[..., None] * v1 + cross(v1, v2)
    return quaternion(s, v)


def conjugate(q) -> np.ndarray:
    q = np.array(q, dtype=float)
    q[..., 1:] *= -1.0
    return q


def norm2(q) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    return np.sum(q * q, axis=-1)


def norm(q) -> np.ndarray:
    return np.sqrt(norm2(q))


def inverse(q) -> np.ndarray:
    n2 = norm2(q)
    if np.any(n2 == 0.0):
        raise DomainError("zero quaternion has no inverse")
    return conjugate(q) / n2[..., None]


def normalize(q) -> np.ndarray:
    n = norm(q)
    if np.any(n == 0.0):
        raise DomainError("cannot normalise the zero quaternion")
    return np.asarray(q, dtype=float) / n[..., None]


def _require_unit(q, what="quaternion"):
    if np.any(np.abs(norm2(q) - 1.0) > UNIT_TOL):
        raise PreconditionError(f"{what} must have unit norm (tolerance {UNIT_TOL:g})")


@dataclass(frozen=True)
class RotationSpec:
    """Rotation by ``angle`` radians about the unit vector ``axis``."""

    angle: float
    axis: tuple[float, float, float]

    def __post_init__(self):
        axis = np.asarray(self.axis, dtype=float)
        if axis.shape != (3,):
            raise PreconditionError("rotation axis must be a 3-vector")
        if abs(np.linalg.norm(axis) - 1.0) > UNIT_TOL:
            raise PreconditionError("rotation axis must have unit length")
        object.__setattr__(self, "axis", tuple(float(c) for c in axis))


def from_angle_axis(angle, axis=None) -> np.ndarray:
    """Unit quaternion ``[cos(angle/2), axis sin(angle/2)]``.

    Accepts either a :class:`RotationSpec` or ``(angle, axis)``. Only the
    ``+cos`` branch of the double cover is returned; ``-q`` encodes the same
    rotation.
    """
    if isinstance(angle, RotationSpec):
        spec = angle
    else:
        spec = RotationSpec(float(angle), tuple(np.asarray(axis, dtype=float)))
    half = 0.5 * spec.angle
    return quaternion(np.cos(half), np.sin(half) * np.asarray(spec.axis))


def rotate(r, q_hat) -> np.ndarray:
    """Vector part of ``q * [0, r] * q^*`` for a unit quaternion ``q``.

    Evaluated with the expanded form ``(p^2 - |q|^2) r + 2p (q x r) + 2q (q.r)``.
    """
    q_hat = np.asarray(q_hat, dtype=float)
    _require_unit(q_hat)
    r = np.asarray(r, dtype=float)
    p = q_hat[..., 0:1]
    v = q_hat[..., 1:]
    return (p * p - dot(v, v)[..., None]) * r + 2.0 * p * cross(v, r) + 2.0 * v * dot(v, r)[..., None]


def rotation_matrix(q_hat) -> np.ndarray:
    """3x3 matrix of the rotation encoded by a unit quaternion."""
    return np.stack([rotate(e, q_hat) for e in np.eye(3)], axis=-1)


def angular_velocity(q_hat, q_dot) -> np.ndarray:
    """Angular velocity ``2(-p' q + p q' - q' x q)`` of a moving unit quaternion.

    This is twice the vector part of ``q_dot * q_hat^*``; the scalar part of
    that product must vanish, which is the tangency condition checked here.
    """
    q_hat = np.asarray(q_hat, dtype=float)
    q_dot = np.asarray(q_dot, dtype=float)
    _require_unit(q_hat)
    if np.any(np.abs(dot(q_hat, q_dot)) > UNIT_TOL):
        raise PreconditionError("q_dot is not tangent to the unit sphere at q_hat")
    p, v = q_hat[..., 0:1], q_hat[..., 1:]
    pd, vd = q_dot[..., 0:1], q_dot[..., 1:]
    return 2.0 * (-pd * v + p * vd - cross(vd, v))


def exp_pure(v) -> np.ndarray:
    """Exponential of the pure quaternion ``[0, v]``: ``[cos|v|, v sin|v|/|v|]``."""
    v = np.asarray(v, dtype=float)
    theta = np.sqrt(dot(v, v))
    small = theta < _SERIES_CUTOFF
    safe = np.where(small, 1.0, theta)
    sinc = np.where(small, 1.0 - theta * theta / 6.0, np.sin(safe) / safe)
    return quaternion(np.cos(theta), sinc[..., None] * v)
