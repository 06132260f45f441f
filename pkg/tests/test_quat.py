import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from framelab import quat
from framelab.errors import DomainError, PreconditionError

E1, E2, E3 = np.eye(3)
S2 = math.sqrt(2.0) / 2.0

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)
vec3 = arrays(np.float64, 3, elements=finite)
quat4 = arrays(np.float64, 4, elements=finite)


def hamilton_matrix(q):
    """Left-multiplication matrix: q * r == hamilton_matrix(q) @ r (i, j, k basis)."""
    a, b, c, d = q
    return np.array([[a, -b, -c, -d], [b, a, -d, c], [c, d, a, -b], [d, -c, b, a]])


def rodrigues(theta, n):
    n = np.asarray(n, float)
    K = np.array([[0, -n[2], n[1]], [n[2], 0, -n[0]], [-n[1], n[0], 0]])
    return np.eye(3) + math.sin(theta) * K + (1 - math.cos(theta)) * K @ K


def unit(q):
    return q / np.linalg.norm(q)


# --- products ---------------------------------------------------------------


def test_identity_is_neutral():
    q = np.array([0.3, -1.2, 2.0, 0.5])
    np.testing.assert_array_equal(quat.mul(quat.IDENTITY, q), q)
    np.testing.assert_array_equal(quat.mul(q, quat.IDENTITY), q)


def test_basis_products():
    np.testing.assert_array_equal(quat.mul(quat.pure(E1), quat.pure(E2)), quat.pure(E3))
    np.testing.assert_array_equal(quat.mul(quat.pure(E1), quat.pure(E1)), [-1.0, 0, 0, 0])


def test_conjugate_product_is_norm_squared():
    p, q = 1.5, np.array([0.2, -0.7, 3.0])
    out = quat.mul(quat.quaternion(p, q), quat.quaternion(p, -q))
    np.testing.assert_allclose(out, [p * p + q @ q, 0, 0, 0], atol=1e-15)


@given(quat4, quat4)
def test_mul_matches_matrix_oracle(a, b):
    np.testing.assert_allclose(quat.mul(a, b), hamilton_matrix(a) @ b, rtol=1e-12, atol=1e-12)


@given(vec3, vec3)
def test_pure_product_formula(w1, w2):
    out = quat.mul(quat.pure(w1), quat.pure(w2))
    assert out[0] == -(w1[0] * w2[0] + w1[1] * w2[1] + w1[2] * w2[2])
    np.testing.assert_array_equal(out[1:], quat.cross(w1, w2))


def test_mul_is_not_commutative():
    a, b = quat.pure(E1), quat.pure(E2)
    np.testing.assert_array_equal(quat.mul(b, a), -quat.mul(a, b))


def test_mul_broadcasts_over_stacks(rng):
    a = rng.normal(size=(5, 4))
    b = rng.normal(size=(5, 4))
    stacked = quat.mul(a, b)
    for i in range(5):
        np.testing.assert_allclose(stacked[i], quat.mul(a[i], b[i]), rtol=0, atol=0)


# --- conjugate, inverse, norm -------------------------------------------------


def test_conjugate_flips_vector():
    np.testing.assert_array_equal(quat.conjugate([2.0, 1, 0, 0]), [2.0, -1, 0, 0])


def test_inverse_examples():
    np.testing.assert_array_equal(quat.inverse(quat.IDENTITY), quat.IDENTITY)
    q = quat.pure(E1)
    inv = quat.inverse(q)
    np.testing.assert_allclose(inv, quat.pure(-E1), atol=1e-15)
    np.testing.assert_allclose(quat.mul(q, inv), quat.IDENTITY, atol=1e-15)


def test_inverse_of_zero_is_domain_error():
    with pytest.raises(DomainError, match="zero quaternion has no inverse"):
        quat.inverse(np.zeros(4))


@given(quat4)
def test_inverse_property(q):
    n = np.linalg.norm(q)
    if n < 1e-3:
        return
    np.testing.assert_allclose(quat.mul(q, quat.inverse(q)), quat.IDENTITY, atol=1e-12)
    np.testing.assert_allclose(quat.mul(quat.inverse(q), q), quat.IDENTITY, atol=1e-12)


@given(quat4, quat4)
def test_norm_is_multiplicative(a, b):
    # the squares inside norm() underflow for products below ~1e-150
    assume(np.linalg.norm(a) * np.linalg.norm(b) > 1e-150)
    lhs = quat.norm(quat.mul(a, b))
    rhs = quat.norm(a) * quat.norm(b)
    assert abs(lhs - rhs) <= 1e-12 * max(rhs, 1e-300) + 1e-300


@given(quat4, quat4, quat4)
def test_associativity(a, b, c):
    left = quat.mul(quat.mul(a, b), c)
    right = quat.mul(a, quat.mul(b, c))
    scale = np.linalg.norm(a) * np.linalg.norm(b) * np.linalg.norm(c)
    assert np.max(np.abs(left - right)) <= 1e-12 * max(scale, 1.0)


# --- rotations --------------------------------------------------------------


@pytest.mark.parametrize(
    "angle,axis,expected",
    [
        (0.0, E3, [1.0, 0, 0, 0]),
        (math.pi, E1, [0.0, 1, 0, 0]),
        (math.pi / 2, E3, [S2, 0, 0, S2]),
    ],
)
def test_from_angle_axis_examples(angle, axis, expected):
    np.testing.assert_allclose(quat.from_angle_axis(angle, axis), expected, atol=1e-15)


def test_from_angle_axis_accepts_spec():
    spec = quat.RotationSpec(math.pi / 2, (0.0, 0.0, 1.0))
    np.testing.assert_allclose(quat.from_angle_axis(spec), [S2, 0, 0, S2], atol=1e-15)


def test_non_unit_axis_rejected():
    with pytest.raises(PreconditionError):
        quat.from_angle_axis(1.0, [1.0, 1.0, 0.0])
    with pytest.raises(PreconditionError):
        quat.RotationSpec(1.0, (0.0, 0.0, 2.0))


def test_rotate_examples():
    r = np.array([0.3, -2.0, 1.1])
    np.testing.assert_array_equal(quat.rotate(r, quat.IDENTITY), r)
    np.testing.assert_allclose(quat.rotate(E1, quat.from_angle_axis(math.pi / 2, E3)), E2, atol=1e-15)


def test_rotate_requires_unit():
    with pytest.raises(PreconditionError):
        quat.rotate(E1, [2.0, 0, 0, 0])


@settings(max_examples=200)
@given(finite, vec3, vec3)
def test_rotate_matches_rodrigues(theta, axis, r):
    if np.linalg.norm(axis) < 1e-3:
        return
    n = axis / np.linalg.norm(axis)
    q = quat.from_angle_axis(theta, n)
    np.testing.assert_allclose(quat.rotate(r, q), rodrigues(theta, n) @ r, atol=1e-12 * (1 + np.linalg.norm(r)))


@given(quat4, vec3)
def test_rotation_isometry_and_double_cover(q, r):
    if np.linalg.norm(q) < 1e-3:
        return
    q = unit(q)
    out = quat.rotate(r, q)
    assert abs(np.linalg.norm(out) - np.linalg.norm(r)) <= 1e-12 * max(np.linalg.norm(r), 1.0)
    np.testing.assert_allclose(quat.rotate(r, -q), out, atol=1e-12 * max(np.linalg.norm(r), 1.0))


def test_rotate_perpendicular_formula():
    theta, n = 0.7, E3
    r = np.array([1.0, 2.0, 0.0])
    expected = r * math.cos(theta) + np.cross(n, r) * math.sin(theta)
    np.testing.assert_allclose(quat.rotate(r, quat.from_angle_axis(theta, n)), expected, atol=1e-15)


def test_rotation_matrix_is_orthogonal(rng):
    q = unit(rng.normal(size=4))
    R = quat.rotation_matrix(q)
    np.testing.assert_allclose(R @ R.T, np.eye(3), atol=1e-14)
    assert abs(np.linalg.det(R) - 1.0) < 1e-14


# --- angular velocity -------------------------------------------------------


def test_angular_velocity_at_identity():
    omega = np.array([0.4, -1.0, 2.5])
    np.testing.assert_allclose(quat.angular_velocity(quat.IDENTITY, quat.pure(0.5 * omega)), omega, atol=1e-15)


@pytest.mark.parametrize("t", [0.0, 0.3, 2.0, 7.5])
def test_angular_velocity_of_steady_spin(t):
    Om = 1.7
    q = np.array([math.cos(Om * t / 2), 0, 0, math.sin(Om * t / 2)])
    qd = 0.5 * Om * np.array([-math.sin(Om * t / 2), 0, 0, math.cos(Om * t / 2)])
    np.testing.assert_allclose(quat.angular_velocity(q, qd), [0, 0, Om], atol=1e-14)


@given(quat4, vec3)
def test_angular_velocity_two_evaluations(q, w):
    if np.linalg.norm(q) < 1e-3:
        return
    q = unit(q)
    q_dot = 0.5 * quat.mul(quat.pure(w), q)  # tangent by construction
    via_product = 2.0 * quat.vector(quat.mul(q_dot, quat.conjugate(q)))
    np.testing.assert_allclose(quat.angular_velocity(q, q_dot), via_product, atol=1e-12 * (1 + np.linalg.norm(w)))
    np.testing.assert_allclose(via_product, w, atol=1e-12 * (1 + np.linalg.norm(w)))


def test_angular_velocity_rejects_non_tangent():
    with pytest.raises(PreconditionError):
        quat.angular_velocity(quat.IDENTITY, [1.0, 0, 0, 0])


# --- exponential ------------------------------------------------------------


def test_exp_pure_examples():
    np.testing.assert_array_equal(quat.exp_pure(np.zeros(3)), quat.IDENTITY)
    np.testing.assert_allclose(quat.exp_pure(math.pi / 2 * E3), [0, 0, 0, 1], atol=1e-15)


def test_exp_pure_rotates_by_twice_its_length():
    # [cos|v|, v_hat sin|v|] is a rotation by 2|v|: a quarter-turn for |v| = pi/4.
    q = quat.exp_pure(math.pi / 4 * E3)
    np.testing.assert_allclose(quat.rotate(E1, q), rodrigues(math.pi / 2, E3) @ E1, atol=1e-15)
    np.testing.assert_allclose(quat.rotate(E1, q), E2, atol=1e-15)


def test_exp_pure_half_angle_gives_eighth_turn():
    q = quat.exp_pure(math.pi / 8 * E3)
    np.testing.assert_allclose(quat.rotate(E1, q), [S2, S2, 0], atol=1e-15)


def test_exp_pure_series_branch_is_continuous():
    for s in (1e-6, 5e-5, 9.99e-5, 1.0001e-4, 2e-4):
        v = s * np.array([0.6, 0.0, 0.8])
        exact = np.concatenate([[math.cos(s)], v * (math.sin(s) / s)])
        np.testing.assert_allclose(quat.exp_pure(v), exact, rtol=0, atol=1e-16)


@given(arrays(np.float64, 3, elements=st.floats(-1.8, 1.8)))
def test_exp_pure_unit_norm(v):
    assert abs(quat.norm(quat.exp_pure(v)) - 1.0) <= 1e-14
