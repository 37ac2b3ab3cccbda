"""Rigid-body attitude plant, its uncertainty models and a fixed-step RK4 integrator.

The plant always evaluates the true inertia, unknown dynamics and disturbance.
Controllers are handed :class:`NominalInertia` / :class:`NominalDynamics` views
that carry only the nominal model and its bounds.
"""

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional, Tuple

import numpy as np
from numpy.typing import ArrayLike, NDArray

from app.core.quat import cross, normalize, quat_deriv
from app.utils.exceptions import ConfigError, DivergenceError
from app.utils.logger import app_logger

VectorField = Callable[[float, NDArray], NDArray]

DISTURBANCE_RATE_HZ = 100.0

_PARAM_INDEX = ((0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2))


@lru_cache(maxsize=64)
def _random_sample(seed: int, interval: int, bound: Tuple[float, float, float]) -> Tuple[float, ...]:
    rng = np.random.default_rng([seed, interval])
    return tuple(rng.uniform(-np.asarray(bound), np.asarray(bound)))


def _vec3(values: ArrayLike, what: str) -> NDArray:
    arr = np.asarray(values, dtype=float).reshape(-1)
    if arr.shape == (1,):
        arr = np.repeat(arr, 3)
    if arr.shape != (3,) or not np.all(np.isfinite(arr)):
        raise ConfigError(f"{what} must be a finite 3-vector, got {values}")
    return arr


def _mat3(values: ArrayLike, what: str) -> NDArray:
    """Accept a 3×3 matrix, a 9-list or a 3-list diagonal."""
    arr = np.asarray(values, dtype=float)
    if arr.size == 3:
        arr = np.diag(arr.reshape(-1))
    elif arr.size == 9:
        arr = arr.reshape(3, 3)
    else:
        raise ConfigError(f"{what} needs 3 (diagonal) or 9 entries, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise ConfigError(f"{what} must be finite")
    return arr


def params_to_matrix(a: ArrayLike) -> NDArray:
    """Symmetric inertia matrix from (J11, J22, J33, J12, J13, J23)."""
    a = np.asarray(a, dtype=float)
    return np.array([
        [a[0], a[3], a[4]],
        [a[3], a[1], a[5]],
        [a[4], a[5], a[2]],
    ])


def matrix_to_params(m: ArrayLike) -> NDArray:
    """Inverse of :func:`params_to_matrix` (upper triangle is read)."""
    m = np.asarray(m, dtype=float)
    return np.array([m[i, j] for i, j in _PARAM_INDEX])


# ── State ──────────────────────────────────────────────────────────────────

@dataclass(frozen=True, eq=False)
class RigidBodyState:
    """Attitude quaternion and body rate."""

    q: NDArray
    omega: NDArray

    def pack(self, extras: Optional[NDArray] = None) -> NDArray:
        parts = [self.q, self.omega]
        if extras is not None and len(extras):
            parts.append(np.asarray(extras, dtype=float))
        return np.concatenate(parts)

    @classmethod
    def unpack(cls, x: NDArray) -> Tuple["RigidBodyState", NDArray]:
        return cls(q=x[:4], omega=x[4:7]), x[7:]


# ── Inertia ────────────────────────────────────────────────────────────────

@dataclass(frozen=True, eq=False)
class NominalInertia:
    """What a controller may know about the inertia: Ĵ and the bound 𝒥."""

    nominal: NDArray
    bound: NDArray


@dataclass(frozen=True, eq=False)
class InertiaModel:
    """True inertia, nominal inertia and the elementwise uncertainty bound."""

    true: NDArray
    nominal: NDArray
    bound: NDArray
    eig_lo: float = field(init=False)
    eig_hi: float = field(init=False)

    def __post_init__(self):
        for name in ("true", "nominal"):
            m = getattr(self, name)
            if not np.allclose(m, m.T, atol=1e-12):
                raise ConfigError(f"{name} inertia must be symmetric")
            if np.linalg.eigvalsh(m)[0] <= 0.0:
                raise ConfigError(f"{name} inertia must be positive-definite")
        if np.any(self.bound < 0.0):
            raise ConfigError("Inertia bound must be elementwise non-negative")
        if np.any(np.abs(self.true - self.nominal) > self.bound + 1e-12):
            raise ConfigError("True inertia lies outside the stated uncertainty bound")
        eig = np.linalg.eigvalsh(self.true)
        object.__setattr__(self, "eig_lo", float(eig[0]))
        object.__setattr__(self, "eig_hi", float(eig[-1]))
        object.__setattr__(self, "_true_inv", np.linalg.inv(self.true))

    @classmethod
    def build(
        cls,
        nominal: ArrayLike,
        offset: Optional[ArrayLike] = None,
        bound: Optional[ArrayLike] = None,
    ) -> "InertiaModel":
        """J_true = Ĵ + offset; the bound defaults to |offset|."""
        j_nom = _mat3(nominal, "inertia.nominal")
        j_off = np.zeros((3, 3)) if offset is None else _mat3(offset, "inertia.offset")
        j_bound = np.abs(j_off) if bound is None else _mat3(bound, "inertia.bound")
        return cls(true=j_nom + j_off, nominal=j_nom, bound=j_bound)

    @classmethod
    def exact(cls, inertia: ArrayLike) -> "InertiaModel":
        j = _mat3(inertia, "inertia")
        return cls(true=j, nominal=j.copy(), bound=np.zeros((3, 3)))

    @property
    def true_inv(self) -> NDArray:
        return self._true_inv

    @property
    def true_params(self) -> NDArray:
        return matrix_to_params(self.true)

    def nominal_view(self) -> NominalInertia:
        return NominalInertia(nominal=self.nominal.copy(), bound=self.bound.copy())


# ── Disturbance ────────────────────────────────────────────────────────────

@dataclass(frozen=True, eq=False)
class DisturbanceModel:
    """External torque d(t) with elementwise bound D.

    ``constant`` returns ``value``; ``sinusoid`` returns ``value·sin(frequency·t)``
    (frequency in rad/s); ``random`` is piecewise constant at 100 Hz and uniform
    in [-D, D], the value of interval n drawn from ``default_rng([seed, n])``.
    """

    kind: str = "constant"
    value: NDArray = field(default_factory=lambda: np.zeros(3))
    bound: Optional[NDArray] = None
    frequency: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("constant", "sinusoid", "random"):
            raise ConfigError(f"Unknown disturbance kind: {self.kind}")
        value = _vec3(self.value, "disturbance.value")
        bound = np.abs(value) if self.bound is None else _vec3(self.bound, "disturbance.bound")
        if np.any(bound < 0.0):
            raise ConfigError("Disturbance bound must be non-negative")
        if self.kind != "random" and np.any(np.abs(value) > bound + 1e-12):
            raise ConfigError("Disturbance amplitude exceeds its bound")
        object.__setattr__(self, "value", value)
        object.__setattr__(self, "bound", bound)

    def __call__(self, t: float) -> NDArray:
        if self.kind == "constant":
            return self.value
        if self.kind == "sinusoid":
            return self.value * math.sin(self.frequency * t)
        interval = max(int(math.floor(t * DISTURBANCE_RATE_HZ + 1e-9)), 0)
        return np.array(_random_sample(self.seed, interval, tuple(self.bound)))


# ── Unknown dynamics ───────────────────────────────────────────────────────

@dataclass(frozen=True, eq=False)
class NominalDynamics:
    """Controller view of f: the nominal model f̂ and the bound ℱ."""

    damping_nominal: NDArray
    damping_bound: NDArray

    def f_nom(self, q: NDArray, omega: NDArray) -> NDArray:
        return -self.damping_nominal * omega

    def f_bound(self, q: NDArray, omega: NDArray) -> NDArray:
        return self.damping_bound * np.abs(omega)


@dataclass(frozen=True, eq=False)
class UnknownDynamics:
    """Viscous body-rate damping f = -c∘ω; ``none`` is the zero model."""

    kind: str = "none"
    damping_true: NDArray = field(default_factory=lambda: np.zeros(3))
    damping_nominal: NDArray = field(default_factory=lambda: np.zeros(3))
    damping_bound: Optional[NDArray] = None

    def __post_init__(self):
        if self.kind not in ("none", "viscous"):
            raise ConfigError(f"Unknown dynamics kind: {self.kind}")
        zero = np.zeros(3)
        c_true = zero if self.kind == "none" else _vec3(self.damping_true, "dynamics.c_true")
        c_nom = zero if self.kind == "none" else _vec3(self.damping_nominal, "dynamics.c_nom")
        if self.kind == "none" or self.damping_bound is None:
            c_bound = np.abs(c_true - c_nom)
        else:
            c_bound = _vec3(self.damping_bound, "dynamics.c_bound")
        if np.any(np.abs(c_true - c_nom) > c_bound + 1e-12):
            raise ConfigError("True damping lies outside the stated bound")
        object.__setattr__(self, "damping_true", c_true)
        object.__setattr__(self, "damping_nominal", c_nom)
        object.__setattr__(self, "damping_bound", c_bound)

    def f_true(self, q: NDArray, omega: NDArray) -> NDArray:
        return -self.damping_true * omega

    def nominal_view(self) -> NominalDynamics:
        return NominalDynamics(
            damping_nominal=self.damping_nominal.copy(),
            damping_bound=self.damping_bound.copy(),
        )


# ── Plant ──────────────────────────────────────────────────────────────────

def angular_accel(
    state: RigidBodyState,
    torque: NDArray,
    inertia: InertiaModel,
    dyn: UnknownDynamics,
    dist: DisturbanceModel,
    t: float,
) -> NDArray:
    """ω̇ = J⁻¹(−ω × Jω + f(q, ω) + M_b + d(t)) with the true model."""
    omega = state.omega
    rhs = -cross(omega, inertia.true @ omega) + dyn.f_true(state.q, omega) + torque + dist(t)
    return inertia.true_inv @ rhs


def free_body_field(inertia: InertiaModel) -> VectorField:
    """Torque-free rigid body, used by integrator checks."""
    no_dyn = UnknownDynamics()
    no_dist = DisturbanceModel()
    zero = np.zeros(3)

    def field_fn(t: float, x: NDArray) -> NDArray:
        state, _ = RigidBodyState.unpack(x)
        return np.concatenate((
            quat_deriv(state.q, state.omega),
            angular_accel(state, zero, inertia, no_dyn, no_dist, t),
        ))

    return field_fn


def rk4_step(field_fn: VectorField, t: float, x: NDArray, dt: float) -> NDArray:
    """One classical RK4 step over the stacked (q, ω, extras) vector.

    The quaternion block ``x[:4]`` is renormalized once after the step.
    """
    if dt <= 0.0:
        raise ValueError(f"Step size must be positive, got {dt}")

    def stage(tau: float, y: NDArray) -> NDArray:
        dy = field_fn(tau, y)
        if not np.all(np.isfinite(dy)):
            app_logger.error(f"Non-finite derivative at t={tau:.6g}")
            raise DivergenceError("Non-finite derivative in RK4 stage", t=tau, state=y)
        return dy

    half = 0.5 * dt
    k1 = stage(t, x)
    k2 = stage(t + half, x + half * k1)
    k3 = stage(t + half, x + half * k2)
    k4 = stage(t + dt, x + dt * k3)
    x_next = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if not np.all(np.isfinite(x_next)):
        raise DivergenceError("Non-finite state after RK4 step", t=t + dt, state=x)
    x_next[:4] = normalize(x_next[:4])
    return x_next
