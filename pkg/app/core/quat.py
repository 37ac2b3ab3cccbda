"""Quaternion algebra on S³ and maps to SO(3).

Quaternions are scalar-first numpy arrays ``[w, x, y, z]`` with the Hamilton
product. Signs are never canonicalized: ``q`` and ``-q`` are distinct values
that map to the same rotation.
"""

import math
from typing import Union

import numpy as np
from numpy.typing import ArrayLike, NDArray

from app.utils.exceptions import InvalidArgumentError

IDENTITY = np.array([1.0, 0.0, 0.0, 0.0])

_ZERO_NORM = 1e-12


def _finite(x: NDArray, what: str) -> NDArray:
    if not np.all(np.isfinite(x)):
        raise InvalidArgumentError(f"{what} must be finite, got {x}")
    return x


def normalize(q: ArrayLike) -> NDArray:
    """Scale a 4-vector to unit norm."""
    q = _finite(np.asarray(q, dtype=float), "quaternion")
    n = math.sqrt(q @ q)
    if n < _ZERO_NORM:
        raise InvalidArgumentError("Cannot normalize a zero quaternion")
    return q / n


def as_quaternion(values: ArrayLike) -> NDArray:
    """Validate a user-supplied 4-vector and return it as a unit quaternion."""
    q = np.asarray(values, dtype=float)
    if q.shape != (4,):
        raise InvalidArgumentError(f"Quaternion needs 4 components, got shape {q.shape}")
    return normalize(q)


def cross(a: NDArray, b: NDArray) -> NDArray:
    """3-vector cross product."""
    return np.array([
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ])


def skew(v: ArrayLike) -> NDArray:
    """Skew-symmetric matrix [v]× with [v]× u = v × u."""
    v = np.asarray(v, dtype=float)
    return np.array([
        [0.0, -v[2], v[1]],
        [v[2], 0.0, -v[0]],
        [-v[1], v[0], 0.0],
    ])


def vee(m: ArrayLike) -> NDArray:
    """Inverse of :func:`skew` applied to the skew part of ``m``."""
    m = np.asarray(m, dtype=float)
    return 0.5 * np.array([m[2, 1] - m[1, 2], m[0, 2] - m[2, 0], m[1, 0] - m[0, 1]])


def _product(p: NDArray, q: NDArray) -> NDArray:
    pw, px, py, pz = p
    qw, qx, qy, qz = q
    return np.array([
        pw * qw - px * qx - py * qy - pz * qz,
        pw * qx + qw * px + py * qz - pz * qy,
        pw * qy + qw * py + pz * qx - px * qz,
        pw * qz + qw * pz + px * qy - py * qx,
    ])


def qmul(p: ArrayLike, q: ArrayLike) -> NDArray:
    """Hamilton product p ⊗ q, renormalized."""
    p = _finite(np.asarray(p, dtype=float), "left operand")
    q = _finite(np.asarray(q, dtype=float), "right operand")
    return normalize(_product(p, q))


def conjugate(q: ArrayLike) -> NDArray:
    """Quaternion conjugate (w, -v)."""
    q = np.asarray(q, dtype=float)
    return np.array([q[0], -q[1], -q[2], -q[3]])


def error_quaternion(q_d: ArrayLike, q: ArrayLike) -> NDArray:
    """Attitude error q_e = q_d* ⊗ q."""
    return qmul(conjugate(q_d), q)


def sgn_plus(x: float) -> float:
    """Sign with sgn_plus(0) = 1."""
    return 1.0 if x >= 0.0 else -1.0


def sgn(x: float) -> float:
    """Standard sign with sgn(0) = 0."""
    if x > 0.0:
        return 1.0
    if x < 0.0:
        return -1.0
    return 0.0


def quat_deriv(q: ArrayLike, omega: ArrayLike) -> NDArray:
    """Attitude kinematics q̇ = ½ q ⊗ (0, ω) with ω in the body frame."""
    q = np.asarray(q, dtype=float)
    omega = np.asarray(omega, dtype=float)
    return 0.5 * _product(q, np.array([0.0, omega[0], omega[1], omega[2]]))


def error_quaternion_rate(q_e: ArrayLike, omega_e: ArrayLike) -> NDArray:
    """Error kinematics ½ (-q⃗_eᵀω_e, q_e°ω_e + q⃗_e × ω_e)."""
    q_e = np.asarray(q_e, dtype=float)
    omega_e = np.asarray(omega_e, dtype=float)
    vec = q_e[1:]
    w_dot = -0.5 * (vec @ omega_e)
    v_dot = 0.5 * (q_e[0] * omega_e + cross(vec, omega_e))
    return np.array([w_dot, v_dot[0], v_dot[1], v_dot[2]])


def error_quaternion_dot(q_e: ArrayLike, omega: ArrayLike, omega_d: ArrayLike) -> NDArray:
    """Exact q̇_e = ½[q_e ⊗ (0, ω) − (0, ω_d) ⊗ q_e] for q_e = q_d* ⊗ q.

    Agrees with :func:`error_quaternion_rate` when ω_d = 0.
    """
    q_e = np.asarray(q_e, dtype=float)
    omega = np.asarray(omega, dtype=float)
    omega_d = np.asarray(omega_d, dtype=float)
    vec = q_e[1:]
    w_dot = -0.5 * (vec @ (omega - omega_d))
    v_dot = 0.5 * (q_e[0] * (omega - omega_d) + cross(vec, omega + omega_d))
    return np.array([w_dot, v_dot[0], v_dot[1], v_dot[2]])


def to_rotation(q: ArrayLike) -> NDArray:
    """Rotation matrix of a unit quaternion; q and -q give the same matrix."""
    w, x, y, z = np.asarray(q, dtype=float)
    return np.array([
        [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - z * w), 2.0 * (x * z + y * w)],
        [2.0 * (x * y + z * w), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - x * w)],
        [2.0 * (x * z - y * w), 2.0 * (y * z + x * w), 1.0 - 2.0 * (x * x + y * y)],
    ])


def from_axis_angle(axis: ArrayLike, angle: float) -> NDArray:
    """Unit quaternion (cos(φ/2), sin(φ/2) n̂) for a rotation of ``angle`` about ``axis``."""
    axis = _finite(np.asarray(axis, dtype=float), "axis")
    n = math.sqrt(axis @ axis)
    if n < _ZERO_NORM:
        raise InvalidArgumentError("Rotation axis must be non-zero")
    half = 0.5 * float(angle)
    return normalize(np.concatenate(([math.cos(half)], math.sin(half) * axis / n)))


def rotation_angle(q: ArrayLike) -> Union[float, NDArray]:
    """Geodesic rotation angle 2·acos(|q°|) in [0, π]; rows of an (n, 4) array map to n angles."""
    w = np.abs(np.asarray(q, dtype=float)[..., 0])
    angle = 2.0 * np.arccos(np.minimum(1.0, w))
    return float(angle) if angle.ndim == 0 else angle
