"""Result schemas: run logs, metrics and the verification report."""

from typing import List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from app.schemas.scenario import ScenarioConfig


class RunLog(BaseModel):
    """Decimated time series of one closed-loop run.

    Array fields have one row per logged sample and the final sample is always
    logged; ``a_hat`` is present only for adaptive runs.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True)

    scenario: ScenarioConfig = Field(..., description="Scenario that produced the log")
    decimation: int = Field(..., ge=1, description="Integration steps per logged row")
    t: np.ndarray = Field(..., description="Time (s)")
    q: np.ndarray = Field(..., description="Attitude quaternion")
    q_d: np.ndarray = Field(..., description="Desired attitude")
    omega: np.ndarray = Field(..., description="Body rate (rad/s)")
    omega_d: np.ndarray = Field(..., description="Desired body rate (rad/s)")
    q_e: np.ndarray = Field(..., description="Error quaternion")
    s: np.ndarray = Field(..., description="Sliding variable")
    branch: np.ndarray = Field(..., description="sgn₊ of the error scalar part")
    torque: np.ndarray = Field(..., description="Commanded body torque (N·m)")
    a_hat: Optional[np.ndarray] = Field(None, description="Parameter estimate (adaptive runs)")
    traveled: Optional[np.ndarray] = Field(
        None, description="Cumulative ∫‖ω − ω_d‖dt at integrator resolution (rad)"
    )
    gain_deficit_steps: int = Field(default=0, description="Integration steps with K below the robust gain")

    @property
    def rows(self) -> int:
        return int(self.t.shape[0])

    @property
    def is_adaptive(self) -> bool:
        return self.a_hat is not None

    @classmethod
    def empty(cls, scenario: ScenarioConfig, adaptive: bool = False) -> "RunLog":
        def blank(width: int) -> np.ndarray:
            return np.zeros((0, width))

        return cls(
            scenario=scenario,
            decimation=1,
            t=np.zeros(0),
            q=blank(4),
            q_d=blank(4),
            omega=blank(3),
            omega_d=blank(3),
            q_e=blank(4),
            s=blank(3),
            branch=np.zeros(0),
            torque=blank(3),
            a_hat=blank(6) if adaptive else None,
        )


class Metrics(BaseModel):
    """Summary of a run. Times that never occur are reported as +inf."""

    name: str = Field(..., description="Scenario name")
    controller: str = Field(..., description="Controller kind")
    sliding: str = Field(..., description="Sliding variable kind")
    settling_time: float = Field(..., description="First time after which the error stays below threshold (s)")
    steady_state_max_s: float = Field(..., description="Max |s_i| over the final 20% of the run")
    peak_effort: float = Field(..., description="Peak ‖M_b‖₂ (N·m)")
    integral_effort: float = Field(..., description="∫‖M_b‖₂ dt (N·m·s)")
    unwinding_ratio: float = Field(..., description="Traveled rotation over closed geodesic distance")
    manifold_switches: int = Field(..., description="Branch changes outside the converged region")
    boundary_layer_hit_time: float = Field(..., description="First time with |s_i| ≤ Φ_i on every axis (s)")
    boundary_layer_exits: int = Field(..., description="Samples outside the boundary layer after the hit")
    s_delta_peak: float = Field(..., description="Peak ‖s − Φ∘sat(s/Φ)‖∞")
    s_delta_final: float = Field(..., description="Final ‖s − Φ∘sat(s/Φ)‖∞")
    final_error: float = Field(..., description="Final ‖q⃗_e‖")
    min_estimate_eig: float = Field(..., description="Min eigenvalue of the estimated inertia (nan if not adaptive)")
    gain_deficit_steps: int = Field(..., description="Steps with K below the robust gain")


class VerifyCheck(BaseModel):
    name: str = Field(..., description="Check name")
    passed: bool = Field(..., description="Whether the residual is within threshold")
    max_residual: float = Field(..., description="Worst residual observed")
    threshold: float = Field(..., description="Pass threshold")
    samples: int = Field(..., description="Number of evaluated samples")
    detail: str = Field(default="", description="Extra information")


class VerifyReport(BaseModel):
    passed: bool = Field(..., description="True when every check passed")
    checks: List[VerifyCheck] = Field(..., description="Individual check results")
