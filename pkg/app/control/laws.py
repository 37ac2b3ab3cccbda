"""Torque laws built on a sliding surface, plus the Wie quaternion PD baseline.

All sliding laws share the nominal-model cancellation

    ω × Ĵω − f̂ − Ĵσ̇

where s = ω + σ(q, t). For the proposed surface −Ĵσ̇ expands to
Ĵω̇_d − λĴ·sgn₊(q_e°)·q̇⃗_e.
"""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from numpy.typing import ArrayLike, NDArray

from app.core.dynamics import NominalDynamics, NominalInertia, RigidBodyState
from app.core.quat import cross, sgn, skew
from app.core.sliding import (
    DesiredSample,
    SlidingConfig,
    SurfaceEval,
    SurfaceKind,
    evaluate_surface,
)
from app.utils.exceptions import ConfigError

_ZERO3 = np.zeros(3)


def _positive3(values: ArrayLike, what: str) -> NDArray:
    arr = np.asarray(values, dtype=float).reshape(-1)
    if arr.shape == (1,):
        arr = np.repeat(arr, 3)
    if arr.shape != (3,) or not np.all(np.isfinite(arr)) or np.any(arr <= 0.0):
        raise ConfigError(f"{what} must be three positive numbers, got {values}")
    return arr


@dataclass(frozen=True, eq=False)
class GainConfig:
    """Per-axis feedback gains.

    K drives the sliding laws, Φ is the boundary-layer thickness, η the robust
    margin, and Kp/Kd the baseline PD gains.
    """

    K: NDArray = field(default_factory=lambda: np.full(3, 5.0))
    Phi: NDArray = field(default_factory=lambda: np.full(3, 0.1))
    eta: NDArray = field(default_factory=lambda: np.full(3, 0.1))
    Kp: NDArray = field(default_factory=lambda: np.full(3, 5.0))
    Kd: NDArray = field(default_factory=lambda: np.full(3, 5.0))

    def __post_init__(self):
        for name in ("K", "Phi", "eta", "Kp", "Kd"):
            object.__setattr__(self, name, _positive3(getattr(self, name), f"gains.{name}"))

    def with_K(self, K: ArrayLike) -> "GainConfig":
        return GainConfig(K=K, Phi=self.Phi, eta=self.eta, Kp=self.Kp, Kd=self.Kd)


@dataclass(frozen=True, eq=False)
class TorqueCommand:
    """Body torque M_b with the diagnostics of the step that produced it."""

    torque: NDArray
    s: NDArray = field(default_factory=lambda: _ZERO3)
    branch: float = 1.0
    saturated: NDArray = field(default_factory=lambda: np.zeros(3, dtype=bool))
    gain_deficit: bool = False


@dataclass(frozen=True, eq=False)
class AdaptiveCommand(TorqueCommand):
    regressor: Optional[NDArray] = None
    surface: Optional[SurfaceEval] = None


def saturate(x: ArrayLike) -> NDArray:
    """Elementwise clamp to [-1, 1]."""
    return np.clip(x, -1.0, 1.0)


def s_delta(s: ArrayLike, phi: ArrayLike) -> NDArray:
    """Distance of s outside the boundary layer, s − Φ∘sat(s/Φ)."""
    s = np.asarray(s, dtype=float)
    phi = np.asarray(phi, dtype=float)
    return s - phi * saturate(s / phi)


def _cancellation(
    omega: NDArray,
    q: NDArray,
    sigma_rate: NDArray,
    inertia: NominalInertia,
    dyn: Optional[NominalDynamics],
) -> NDArray:
    j_hat = inertia.nominal
    out = cross(omega, j_hat @ omega) - j_hat @ sigma_rate
    if dyn is not None:
        out = out - dyn.f_nom(q, omega)
    return out


# ── Sliding laws ───────────────────────────────────────────────────────────

def pd_torque(
    state: RigidBodyState,
    desired: DesiredSample,
    inertia: NominalInertia,
    dyn: Optional[NominalDynamics],
    cfg: SlidingConfig,
    gains: GainConfig,
    surface: SurfaceKind = "proposed",
) -> TorqueCommand:
    """Nonlinear PD law M_b = ω × Ĵω − f̂ − Ĵσ̇ − K∘s."""
    ev = evaluate_surface(surface, state.q, state.omega, desired, cfg)
    torque = _cancellation(state.omega, state.q, ev.sigma_rate, inertia, dyn) - gains.K * ev.s
    return TorqueCommand(torque=torque, s=ev.s, branch=ev.branch)


def robust_gain(
    state: RigidBodyState,
    desired: DesiredSample,
    inertia_bound: ArrayLike,
    f_bound: ArrayLike,
    d_bound: ArrayLike,
    eta: ArrayLike,
    cfg: SlidingConfig,
    q_e_dot: Optional[NDArray] = None,
) -> NDArray:
    """Smallest per-axis gain for which the boundary layer is attractive.

    k = |[ω]×|·𝒥·|ω| + 𝒥(|ω̇_d| + λ|q̇⃗_e|) + ℱ + D + η, all absolute values
    elementwise. ``q_e_dot`` defaults to the error-quaternion rate at ``state``.
    """
    bound = np.asarray(inertia_bound, dtype=float)
    omega = state.omega
    if q_e_dot is None:
        q_e_dot = evaluate_surface("proposed", state.q, omega, desired, cfg).q_e_dot
    gyro = np.abs(skew(omega)) @ bound @ np.abs(omega)
    accel = bound @ (np.abs(desired.omega_d_dot) + cfg.lam * np.abs(q_e_dot[1:]))
    return gyro + accel + np.asarray(f_bound, dtype=float) + np.asarray(d_bound, dtype=float) + np.asarray(eta, dtype=float)


def auto_size_gain(
    inertia_bound: ArrayLike,
    damping_bound: ArrayLike,
    d_bound: ArrayLike,
    eta: ArrayLike,
    cfg: SlidingConfig,
    omega_envelope: float,
    omega_d_dot_max: float = 0.0,
) -> NDArray:
    """Constant K covering every state with |ω_i| ≤ ``omega_envelope``.

    Uses |[ω]×| ≤ ω̄(𝟙𝟙ᵀ − I), |q̇⃗_e,i| ≤ (√3/2)ω̄ and ℱ ≤ c̄ω̄.
    """
    bound = np.asarray(inertia_bound, dtype=float)
    w = float(omega_envelope)
    ones = np.ones(3)
    off_diag = np.ones((3, 3)) - np.eye(3)
    gyro = w * w * (off_diag @ bound @ ones)
    accel = (bound @ ones) * (omega_d_dot_max + cfg.lam * 0.5 * math.sqrt(3.0) * w)
    return (
        gyro
        + accel
        + np.asarray(damping_bound, dtype=float) * w
        + np.asarray(d_bound, dtype=float)
        + np.asarray(eta, dtype=float)
    )


def robust_torque(
    state: RigidBodyState,
    desired: DesiredSample,
    inertia: NominalInertia,
    dyn: Optional[NominalDynamics],
    cfg: SlidingConfig,
    gains: GainConfig,
    surface: SurfaceKind = "proposed",
    d_bound: Optional[ArrayLike] = None,
) -> TorqueCommand:
    """Boundary-layer law M_b = ω × Ĵω − f̂ − Ĵσ̇ − K∘sat(s/Φ).

    With ``d_bound`` given, the command is flagged when K falls below
    :func:`robust_gain` at this state.
    """
    ev = evaluate_surface(surface, state.q, state.omega, desired, cfg)
    ratio = ev.s / gains.Phi
    torque = _cancellation(state.omega, state.q, ev.sigma_rate, inertia, dyn) - gains.K * saturate(ratio)

    deficit = False
    if d_bound is not None:
        f_bound = _ZERO3 if dyn is None else dyn.f_bound(state.q, state.omega)
        needed = robust_gain(
            state, desired, inertia.bound, f_bound, d_bound, gains.eta, cfg, q_e_dot=ev.q_e_dot
        )
        deficit = bool(np.any(gains.K < needed))

    return TorqueCommand(
        torque=torque,
        s=ev.s,
        branch=ev.branch,
        saturated=np.abs(ratio) >= 1.0,
        gain_deficit=deficit,
    )


# ── Regressor ──────────────────────────────────────────────────────────────

def inertia_map(v: ArrayLike) -> NDArray:
    """3×6 matrix L(v) with J(a)·v = L(v)·a for a = (J11, J22, J33, J12, J13, J23)."""
    v0, v1, v2 = np.asarray(v, dtype=float)
    return np.array([
        [v0, 0.0, 0.0, v1, v2, 0.0],
        [0.0, v1, 0.0, v0, 0.0, v2],
        [0.0, 0.0, v2, 0.0, v0, v1],
    ])


def regressor(omega: ArrayLike, omega_r_dot: ArrayLike) -> NDArray:
    """6×3 regressor Y with Yᵀa = J(a)ω̇_r + ω × J(a)ω."""
    omega = np.asarray(omega, dtype=float)
    y_t = inertia_map(omega_r_dot) + skew(omega) @ inertia_map(omega)
    return y_t.T


def adaptive_torque(
    state: RigidBodyState,
    desired: DesiredSample,
    a_hat: ArrayLike,
    cfg: SlidingConfig,
    gains: GainConfig,
    surface: SurfaceKind = "proposed",
    dyn: Optional[NominalDynamics] = None,
    boundary_layer: bool = False,
) -> AdaptiveCommand:
    """Certainty-equivalence law M_b = Yᵀâ − f̂ − K∘s.

    With ``boundary_layer`` the feedback is K∘sat(s/Φ) instead of K∘s.
    """
    ev = evaluate_surface(surface, state.q, state.omega, desired, cfg)
    y = regressor(state.omega, ev.omega_r_dot)
    torque = y.T @ np.asarray(a_hat, dtype=float)
    if dyn is not None:
        torque = torque - dyn.f_nom(state.q, state.omega)
    saturated = np.zeros(3, dtype=bool)
    if boundary_layer:
        ratio = ev.s / gains.Phi
        torque = torque - gains.K * saturate(ratio)
        saturated = np.abs(ratio) >= 1.0
    else:
        torque = torque - gains.K * ev.s
    return AdaptiveCommand(
        torque=torque, s=ev.s, branch=ev.branch, saturated=saturated, regressor=y, surface=ev
    )


# ── Baseline ───────────────────────────────────────────────────────────────

def baseline_wie_pd(state: RigidBodyState, q_e: ArrayLike, gains: GainConfig) -> TorqueCommand:
    """M_b = −sgn(q_e°)·K_p∘q⃗_e − K_d∘ω."""
    q_e = np.asarray(q_e, dtype=float)
    torque = -sgn(q_e[0]) * gains.Kp * q_e[1:] - gains.Kd * state.omega
    return TorqueCommand(torque=torque, s=np.zeros(3), branch=1.0 if q_e[0] >= 0.0 else -1.0)
