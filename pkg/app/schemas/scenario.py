"""Scenario input schemas.

Every section forbids unknown keys so a misspelt setting in a scenario file is
reported instead of silently ignored. Vector fields accept a single number,
which is broadcast to every axis. NaN and infinite values are rejected.
"""

import math
from typing import Annotated, List, Literal, Optional

from pydantic import BaseModel, BeforeValidator, ConfigDict, Field, model_validator

from app.config import settings

ControllerKind = Literal["pd", "robust", "adaptive", "adaptive-robust", "baseline", "kinematic"]
SlidingKind = Literal["proposed", "legacy-lo", "standard-sgn", "unsigned", "so3"]


def _broadcast(n: int):
    def convert(value):
        if isinstance(value, (int, float, str)) and not isinstance(value, bool):
            return [value] * n
        return value
    return convert


FiniteFloat = Annotated[float, Field(allow_inf_nan=False)]

Vec3 = Annotated[List[FiniteFloat], BeforeValidator(_broadcast(3)), Field(min_length=3, max_length=3)]
Vec4 = Annotated[List[FiniteFloat], Field(min_length=4, max_length=4)]
Vec6 = Annotated[List[FiniteFloat], BeforeValidator(_broadcast(6)), Field(min_length=6, max_length=6)]
Mask6 = Annotated[List[bool], BeforeValidator(_broadcast(6)), Field(min_length=6, max_length=6)]
Matrix3 = Annotated[List[FiniteFloat], BeforeValidator(_broadcast(3)), Field(min_length=3, max_length=9)]


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", allow_inf_nan=False)


class InitialState(_Section):
    """Initial attitude and body rate."""

    q: Vec4 = Field(default=[1.0, 0.0, 0.0, 0.0], description="Initial quaternion [w, x, y, z]")
    omega: Vec3 = Field(default=[0.0, 0.0, 0.0], description="Initial body rate (rad/s)")


class TrajectorySettings(_Section):
    """Desired attitude profile."""

    kind: Literal["constant", "slew", "sinusoid"] = Field(default="constant", description="Profile type")
    q_d: Vec4 = Field(default=[1.0, 0.0, 0.0, 0.0], description="Desired (initial) attitude")
    rate: Vec3 = Field(default=[0.0, 0.0, 0.0], description="Constant slew body rate (rad/s)")
    axis: Vec3 = Field(default=[0.0, 0.0, 1.0], description="Body axis of the sinusoidal profile")
    amplitude: float = Field(default=0.0, ge=0, description="Peak rate of the sinusoid (rad/s)")
    frequency: float = Field(default=1.0, gt=0, description="Sinusoid frequency (rad/s)")


class SlidingSettings(_Section):
    kind: SlidingKind = Field(default="proposed", description="Sliding variable")
    lam: float = Field(default=2.0, gt=0, description="Surface slope λ (1/s)")


class GainSettings(_Section):
    """Feedback gains; ``auto_size`` replaces K by the offline robust sizing."""

    K: Vec3 = Field(default=[5.0, 5.0, 5.0], description="Sliding feedback gains")
    Phi: Vec3 = Field(default=[0.1, 0.1, 0.1], description="Boundary-layer thickness (rad/s)")
    eta: Vec3 = Field(default=[0.1, 0.1, 0.1], description="Robust margin")
    Kp: Vec3 = Field(default=[5.0, 5.0, 5.0], description="Baseline proportional gains")
    Kd: Vec3 = Field(default=[5.0, 5.0, 5.0], description="Baseline derivative gains")
    auto_size: bool = Field(default=False, description="Size K from the state envelope")
    omega_envelope: Optional[float] = Field(
        default=None,
        gt=0,
        description="Body-rate envelope for auto sizing; derived from s(0) when omitted",
    )


class InertiaSettings(_Section):
    """Nominal inertia Ĵ, true offset J − Ĵ and its elementwise bound 𝒥.

    Matrices are written as 3 diagonal entries or 9 row-major entries.
    """

    nominal: Matrix3 = Field(default=[10.0, 10.0, 10.0], description="Nominal inertia Ĵ (kg·m²)")
    offset: Optional[Matrix3] = Field(default=None, description="True minus nominal inertia")
    bound: Optional[Matrix3] = Field(default=None, description="Elementwise uncertainty bound 𝒥")
    random_offset: bool = Field(
        default=False,
        description="Draw a diagonal offset uniformly within the bound from the scenario seed",
    )


class DisturbanceSettings(_Section):
    kind: Literal["constant", "sinusoid", "random"] = Field(default="constant", description="Disturbance type")
    value: Vec3 = Field(default=[0.0, 0.0, 0.0], description="Constant value or sinusoid amplitude (N·m)")
    bound: Optional[Vec3] = Field(default=None, description="Elementwise bound D (N·m)")
    frequency: float = Field(default=1.0, gt=0, description="Sinusoid frequency (rad/s)")


class DynamicsSettings(_Section):
    """Unknown dynamics f = −c∘ω with nominal ĉ and bound c̄."""

    kind: Literal["none", "viscous"] = Field(default="none", description="Unknown-dynamics model")
    c_true: Vec3 = Field(default=[0.0, 0.0, 0.0], description="True damping coefficients")
    c_nom: Vec3 = Field(default=[0.0, 0.0, 0.0], description="Nominal damping coefficients")
    c_bound: Optional[Vec3] = Field(default=None, description="Bound on |c − ĉ|")


class AdaptationSettings(_Section):
    potential: Literal["logdet", "quadratic"] = Field(default="logdet", description="Bregman potential")
    weight: float = Field(default=1.0, gt=0, description="Adaptation weight γ")
    gamma_diag: Vec6 = Field(default=[1.0] * 6, description="Quadratic-potential gain diagonal")
    mask: Mask6 = Field(default=[True] * 6, description="Parameters that are adapted")
    initial: Optional[Vec6] = Field(default=None, description="Initial estimate; defaults to Ĵ")


class EventSettings(_Section):
    sign_flip_time: Optional[float] = Field(
        default=None,
        ge=0,
        description="Time at which the attitude representation q is replaced by −q",
    )


class ScenarioConfig(_Section):
    """A complete closed-loop simulation setup."""

    name: str = Field(default="custom", description="Scenario name")
    description: str = Field(default="", description="Free-form description")
    controller: ControllerKind = Field(default="pd", description="Controller kind")
    initial: InitialState = Field(default_factory=InitialState)
    trajectory: TrajectorySettings = Field(default_factory=TrajectorySettings)
    sliding: SlidingSettings = Field(default_factory=SlidingSettings)
    gains: GainSettings = Field(default_factory=GainSettings)
    inertia: InertiaSettings = Field(default_factory=InertiaSettings)
    disturbance: DisturbanceSettings = Field(default_factory=DisturbanceSettings)
    dynamics: DynamicsSettings = Field(default_factory=DynamicsSettings)
    adaptation: AdaptationSettings = Field(default_factory=AdaptationSettings)
    events: EventSettings = Field(default_factory=EventSettings)
    dt: float = Field(default=settings.sim_dt, gt=0, description="Integration step (s)")
    duration: float = Field(default=settings.sim_duration, gt=0, description="Run length (s)")
    seed: int = Field(default=settings.default_seed, ge=0, description="Random seed")
    settling_threshold: float = Field(
        default=settings.settling_threshold,
        gt=0,
        description="Error-norm threshold for the settling time",
    )
    switch_gate: float = Field(
        default=settings.switch_gate,
        gt=0,
        description="Error norm below which branch changes are ignored",
    )
    max_log_rows: int = Field(default=settings.max_log_rows, ge=2, description="Row cap for the run log")

    @model_validator(mode="after")
    def check_step_count(self) -> "ScenarioConfig":
        steps = self.duration / self.dt
        if steps > settings.max_steps:
            raise ValueError(f"duration/dt = {steps:.3g} exceeds {settings.max_steps} steps")
        if abs(steps - round(steps)) > 1e-6 * max(1.0, steps):
            raise ValueError("duration must be an integer multiple of dt")
        for name in ("q", "q_d"):
            vec = self.initial.q if name == "q" else self.trajectory.q_d
            if math.sqrt(sum(v * v for v in vec)) < 1e-12:
                raise ValueError(f"{name} must be non-zero")
        return self

    @property
    def steps(self) -> int:
        return int(round(self.duration / self.dt))
