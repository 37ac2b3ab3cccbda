"""Desired attitude trajectories with analytic derivatives."""

import math
from typing import Tuple

import numpy as np
from numpy.typing import ArrayLike, NDArray

from app.core.quat import as_quaternion, from_axis_angle, qmul, quat_deriv
from app.core.sliding import DesiredSample
from app.schemas.scenario import TrajectorySettings
from app.utils.exceptions import ConfigError

_ZERO3 = np.zeros(3)


class Trajectory:
    """Constant attitude."""

    kind = "constant"

    def __init__(self, q_d: ArrayLike):
        self.q_d0 = as_quaternion(q_d)

    def attitude(self, t: float) -> NDArray:
        return self.q_d0

    def rates(self, t: float) -> Tuple[NDArray, NDArray]:
        """(ω_d, ω̇_d) at ``t``."""
        return _ZERO3, _ZERO3

    def sample(self, t: float) -> DesiredSample:
        q_d = self.attitude(t)
        omega_d, omega_d_dot = self.rates(t)
        q_d_dot = quat_deriv(q_d, omega_d)
        q_d_ddot = quat_deriv(q_d_dot, omega_d) + quat_deriv(q_d, omega_d_dot)
        return DesiredSample(
            q_d=q_d,
            omega_d=omega_d,
            omega_d_dot=omega_d_dot,
            q_d_dot=q_d_dot,
            q_d_ddot=q_d_ddot,
        )

    def rate_bounds(self) -> Tuple[float, float]:
        """(max |ω_d,i|, max |ω̇_d,i|) over all time."""
        return 0.0, 0.0


class SlewTrajectory(Trajectory):
    """Constant body-rate slew q_d(t) = q_d0 ⊗ exp(½ω_d t)."""

    kind = "slew"

    def __init__(self, q_d: ArrayLike, rate: ArrayLike):
        super().__init__(q_d)
        self.rate = np.asarray(rate, dtype=float)
        self.speed = float(np.linalg.norm(self.rate))

    def attitude(self, t: float) -> NDArray:
        if self.speed == 0.0:
            return self.q_d0
        return qmul(self.q_d0, from_axis_angle(self.rate, self.speed * t))

    def rates(self, t: float) -> Tuple[NDArray, NDArray]:
        return self.rate, _ZERO3

    def rate_bounds(self) -> Tuple[float, float]:
        return float(np.max(np.abs(self.rate))), 0.0


class SinusoidTrajectory(Trajectory):
    """Rotation about a fixed body axis n̂ with ω_d = n̂·A·sin(wt).

    The rotation angle is A(1 − cos wt)/w.
    """

    kind = "sinusoid"

    def __init__(self, q_d: ArrayLike, axis: ArrayLike, amplitude: float, frequency: float):
        super().__init__(q_d)
        axis = np.asarray(axis, dtype=float)
        norm = float(np.linalg.norm(axis))
        if norm == 0.0:
            raise ConfigError("Sinusoid axis must be non-zero")
        self.axis = axis / norm
        self.amplitude = float(amplitude)
        self.frequency = float(frequency)

    def attitude(self, t: float) -> NDArray:
        angle = self.amplitude * (1.0 - math.cos(self.frequency * t)) / self.frequency
        return qmul(self.q_d0, from_axis_angle(self.axis, angle))

    def rates(self, t: float) -> Tuple[NDArray, NDArray]:
        wt = self.frequency * t
        omega_d = self.axis * (self.amplitude * math.sin(wt))
        omega_d_dot = self.axis * (self.amplitude * self.frequency * math.cos(wt))
        return omega_d, omega_d_dot

    def rate_bounds(self) -> Tuple[float, float]:
        peak = float(np.max(np.abs(self.axis))) * self.amplitude
        return peak, peak * self.frequency


def build_trajectory(traj: TrajectorySettings) -> Trajectory:
    if traj.kind == "constant":
        return Trajectory(traj.q_d)
    if traj.kind == "slew":
        return SlewTrajectory(traj.q_d, traj.rate)
    if traj.kind == "sinusoid":
        return SinusoidTrajectory(traj.q_d, traj.axis, traj.amplitude, traj.frequency)
    raise ConfigError(f"Unknown trajectory kind: {traj.kind}")
