"""Sliding variables on S³ and SO(3).

Every surface has the form s = ω + σ(q, t). :func:`evaluate_surface` returns s
together with the analytic rate σ̇, which is all a sliding controller needs:
the reference acceleration is ω̇_r = −σ̇.
"""

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray

from app.core.quat import (
    cross,
    error_quaternion,
    error_quaternion_dot,
    error_quaternion_rate,
    quat_deriv,
    sgn,
    sgn_plus,
    skew,
    to_rotation,
    vee,
)
from app.utils.exceptions import ConfigError, SingularityError

SurfaceKind = Literal["proposed", "legacy-lo", "standard-sgn", "unsigned", "so3"]
SURFACE_KINDS = ("proposed", "legacy-lo", "standard-sgn", "unsigned", "so3")

LO_SINGULARITY = 1e-6


@dataclass(frozen=True)
class SlidingConfig:
    """Sliding-surface slope λ (1/s)."""

    lam: float

    def __post_init__(self):
        if not (math.isfinite(self.lam) and self.lam > 0.0):
            raise ConfigError(f"lambda must be positive, got {self.lam}")


@dataclass(frozen=True, eq=False)
class SlidingValue:
    s: NDArray
    branch: float


@dataclass(frozen=True, eq=False)
class DesiredSample:
    """Desired attitude with its first two derivatives.

    ``q_d_dot`` and ``q_d_ddot`` are the analytic quaternion derivatives and
    must agree with ½ q_d ⊗ (0, ω_d).
    """

    q_d: NDArray
    omega_d: NDArray
    omega_d_dot: NDArray
    q_d_dot: NDArray
    q_d_ddot: NDArray

    @classmethod
    def hold(cls, q_d: ArrayLike) -> "DesiredSample":
        zero3 = np.zeros(3)
        zero4 = np.zeros(4)
        return cls(np.asarray(q_d, dtype=float), zero3, zero3, zero4, zero4)


@dataclass(frozen=True, eq=False)
class SurfaceEval:
    """Sliding variable s, its feedforward rate σ̇ and the error diagnostics."""

    s: NDArray
    sigma_rate: NDArray
    branch: float
    q_e: NDArray
    q_e_dot: NDArray

    @property
    def omega_r_dot(self) -> NDArray:
        return -self.sigma_rate


# ── Sliding variables ──────────────────────────────────────────────────────

def s_proposed(q_e: ArrayLike, omega_e: ArrayLike, cfg: SlidingConfig) -> SlidingValue:
    """s = ω_e + λ·sgn₊(q_e°)·q⃗_e."""
    q_e = np.asarray(q_e, dtype=float)
    branch = sgn_plus(q_e[0])
    return SlidingValue(s=np.asarray(omega_e, dtype=float) + cfg.lam * branch * q_e[1:], branch=branch)


def omega_r(q_e: ArrayLike, omega_d: ArrayLike, cfg: SlidingConfig) -> NDArray:
    """Reference rate with s_proposed = ω − ω_r."""
    q_e = np.asarray(q_e, dtype=float)
    return np.asarray(omega_d, dtype=float) - cfg.lam * sgn_plus(q_e[0]) * q_e[1:]


def s_standard_sgn(q_e: ArrayLike, omega_e: ArrayLike, cfg: SlidingConfig) -> NDArray:
    """Same as :func:`s_proposed` with sgn(0) = 0."""
    q_e = np.asarray(q_e, dtype=float)
    return np.asarray(omega_e, dtype=float) + cfg.lam * sgn(q_e[0]) * q_e[1:]


def s_unsigned(q_e: ArrayLike, omega_e: ArrayLike, cfg: SlidingConfig) -> NDArray:
    """s = ω_e + λ·q⃗_e, no branch selection."""
    q_e = np.asarray(q_e, dtype=float)
    return np.asarray(omega_e, dtype=float) + cfg.lam * q_e[1:]


def lo_matrix(q: ArrayLike) -> NDArray:
    """T(q) = q°I + [q⃗]×."""
    q = np.asarray(q, dtype=float)
    return q[0] * np.eye(3) + skew(q[1:])


def _lo_feedforward(q: NDArray, q_d_dot_vec: NDArray) -> NDArray:
    """2·T(q)⁻¹·q̇⃗_d, which vanishes for a constant desired attitude."""
    if not np.any(q_d_dot_vec):
        return np.zeros(3)
    if abs(q[0]) <= LO_SINGULARITY:
        raise SingularityError(
            f"T(q) is not invertible at scalar part {q[0]:.3g}"
        )
    return 2.0 * np.linalg.solve(lo_matrix(q), q_d_dot_vec)


def s_legacy_lo(
    q: ArrayLike,
    q_d: ArrayLike,
    q_d_dot_vec: ArrayLike,
    omega: ArrayLike,
    cfg: SlidingConfig,
) -> NDArray:
    """s′ = ω − 2T(q)⁻¹q̇⃗_d + λ(q⃗ − q⃗_d)."""
    q = np.asarray(q, dtype=float)
    q_d = np.asarray(q_d, dtype=float)
    omega_tilde = np.asarray(omega, dtype=float) - _lo_feedforward(q, np.asarray(q_d_dot_vec, dtype=float))
    return omega_tilde + cfg.lam * (q[1:] - q_d[1:])


def skew_part_vee(r: ArrayLike) -> NDArray:
    """(𝒫(R))∨ with 𝒫(A) = ½(A − Aᵀ)."""
    return vee(r)


def s_so3(r_e: ArrayLike, omega_e_body: ArrayLike, cfg: SlidingConfig) -> NDArray:
    """s_R = ω̆_e + λ(𝒫(R_e))∨; the caller supplies ω̆_e = ω − R_eᵀω_d."""
    return np.asarray(omega_e_body, dtype=float) + cfg.lam * skew_part_vee(r_e)


def so3_lyapunov_value(r_e: ArrayLike) -> float:
    """V_R = tr(I − R_e) = 3 − tr(R_e)."""
    return 3.0 - float(np.trace(np.asarray(r_e, dtype=float)))


def so3_lyapunov_rate(r_e: ArrayLike, omega_e_body: ArrayLike) -> float:
    """V̇_R = −tr(Ṙ_e) with Ṙ_e = R_e[ω̆_e]×."""
    r_e = np.asarray(r_e, dtype=float)
    return -float(np.trace(r_e @ skew(omega_e_body)))


# ── Decay-law diagnostics ──────────────────────────────────────────────────

def on_manifold_error_rate(q_e: ArrayLike, cfg: SlidingConfig) -> NDArray:
    """q̇_e along the kinematic closed loop ω_e = −λ·sgn₊(q_e°)·q⃗_e."""
    q_e = np.asarray(q_e, dtype=float)
    omega_e = -cfg.lam * sgn_plus(q_e[0]) * q_e[1:]
    return error_quaternion_rate(q_e, omega_e)


def decay_residual(q_e: ArrayLike, cfg: SlidingConfig) -> float:
    """d/dt‖q⃗_e‖² + λ|q_e°|‖q⃗_e‖² on the manifold s = 0; zero analytically."""
    q_e = np.asarray(q_e, dtype=float)
    rate = on_manifold_error_rate(q_e, cfg)
    vec = q_e[1:]
    return float(2.0 * (vec @ rate[1:]) + cfg.lam * abs(q_e[0]) * (vec @ vec))


# ── Generic surface evaluation ─────────────────────────────────────────────

def evaluate_surface(
    kind: SurfaceKind,
    q: NDArray,
    omega: NDArray,
    desired: DesiredSample,
    cfg: SlidingConfig,
) -> SurfaceEval:
    """Evaluate s = ω + σ(q, t) and σ̇ for the chosen surface."""
    lam = cfg.lam
    q_e = error_quaternion(desired.q_d, q)
    q_e_dot = error_quaternion_dot(q_e, omega, desired.omega_d)
    branch = sgn_plus(q_e[0])

    if kind in ("proposed", "standard-sgn", "unsigned"):
        if kind == "proposed":
            gain = lam * branch
        elif kind == "standard-sgn":
            gain = lam * sgn(q_e[0])
        else:
            gain = lam
        s = omega - desired.omega_d + gain * q_e[1:]
        sigma_rate = -desired.omega_d_dot + gain * q_e_dot[1:]

    elif kind == "legacy-lo":
        s = s_legacy_lo(q, desired.q_d, desired.q_d_dot[1:], omega, cfg)
        q_dot = quat_deriv(q, omega)
        sigma_rate = lam * (q_dot[1:] - desired.q_d_dot[1:])
        v = desired.q_d_dot[1:]
        if np.any(v) or np.any(desired.q_d_ddot[1:]):
            if abs(q[0]) <= LO_SINGULARITY:
                raise SingularityError(f"T(q) is not invertible at scalar part {q[0]:.3g}")
            t_mat = lo_matrix(q)
            t_dot = q_dot[0] * np.eye(3) + skew(q_dot[1:])
            t_inv_v = np.linalg.solve(t_mat, v)
            sigma_rate = sigma_rate - 2.0 * np.linalg.solve(
                t_mat, desired.q_d_ddot[1:] - t_dot @ t_inv_v
            )

    elif kind == "so3":
        r_e = to_rotation(desired.q_d).T @ to_rotation(q)
        rel = r_e.T @ desired.omega_d
        omega_body = omega - rel
        s = s_so3(r_e, omega_body, cfg)
        rel_rate = r_e.T @ desired.omega_d_dot - cross(omega_body, rel)
        sigma_rate = -rel_rate + 0.5 * lam * ((np.trace(r_e) * np.eye(3) - r_e.T) @ omega_body)

    else:
        raise ConfigError(f"Unknown sliding kind: {kind}")

    return SurfaceEval(s=s, sigma_rate=sigma_rate, branch=branch, q_e=q_e, q_e_dot=q_e_dot)
