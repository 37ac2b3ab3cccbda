"""Closed-loop controllers driven by the simulation loop.

A controller turns (t, state, desired sample, auxiliary state) into a
:class:`TorqueCommand`. Controllers that carry internal state (the adaptive
laws) also report its time derivative so the runner can integrate it inside
the same RK4 stages as the plant.
"""

from typing import Optional

import numpy as np
from numpy.typing import ArrayLike, NDArray

from app.control.adapt import PsiFunction, adapt_step_deriv
from app.control.laws import (
    GainConfig,
    TorqueCommand,
    adaptive_torque,
    baseline_wie_pd,
    pd_torque,
    robust_torque,
)
from app.core.dynamics import NominalDynamics, NominalInertia, RigidBodyState
from app.core.quat import error_quaternion
from app.core.sliding import DesiredSample, SlidingConfig, SurfaceKind, evaluate_surface

_EMPTY = np.zeros(0)


class Controller:
    """Base interface; stateless controllers keep ``n_extras = 0``."""

    name = "controller"
    n_extras = 0
    kinematic = False

    def initial_extras(self) -> NDArray:
        return _EMPTY

    def command(
        self, t: float, state: RigidBodyState, desired: DesiredSample, extras: NDArray
    ) -> TorqueCommand:
        raise NotImplementedError

    def extras_rate(
        self,
        t: float,
        state: RigidBodyState,
        desired: DesiredSample,
        extras: NDArray,
        cmd: TorqueCommand,
    ) -> NDArray:
        return _EMPTY


class PDController(Controller):
    name = "pd"

    def __init__(
        self,
        inertia: NominalInertia,
        dyn: Optional[NominalDynamics],
        cfg: SlidingConfig,
        gains: GainConfig,
        surface: SurfaceKind = "proposed",
    ):
        self.inertia = inertia
        self.dyn = dyn
        self.cfg = cfg
        self.gains = gains
        self.surface = surface

    def command(self, t, state, desired, extras):
        return pd_torque(state, desired, self.inertia, self.dyn, self.cfg, self.gains, self.surface)


class RobustController(PDController):
    """Boundary-layer law with a constant K; flags states where K is too small."""

    name = "robust"

    def __init__(self, inertia, dyn, cfg, gains, surface="proposed", d_bound: Optional[ArrayLike] = None):
        super().__init__(inertia, dyn, cfg, gains, surface)
        self.d_bound = None if d_bound is None else np.asarray(d_bound, dtype=float)

    def command(self, t, state, desired, extras):
        return robust_torque(
            state, desired, self.inertia, self.dyn, self.cfg, self.gains, self.surface, self.d_bound
        )


class AdaptiveController(Controller):
    """Regressor feedforward with a Bregman-adapted parameter estimate."""

    name = "adaptive"
    n_extras = 6

    def __init__(
        self,
        a_initial: ArrayLike,
        psi: PsiFunction,
        cfg: SlidingConfig,
        gains: GainConfig,
        surface: SurfaceKind = "proposed",
        dyn: Optional[NominalDynamics] = None,
        mask: Optional[ArrayLike] = None,
        boundary_layer: bool = False,
    ):
        self.a_initial = np.asarray(a_initial, dtype=float)
        self.psi = psi
        self.cfg = cfg
        self.gains = gains
        self.surface = surface
        self.dyn = dyn
        self.mask = None if mask is None else np.asarray(mask, dtype=bool)
        self.boundary_layer = boundary_layer
        if boundary_layer:
            self.name = "adaptive-robust"

    def initial_extras(self) -> NDArray:
        return self.a_initial.copy()

    def command(self, t, state, desired, extras):
        return adaptive_torque(
            state, desired, extras, self.cfg, self.gains, self.surface, self.dyn, self.boundary_layer
        )

    def extras_rate(self, t, state, desired, extras, cmd):
        return adapt_step_deriv(extras, cmd.regressor, cmd.s, self.psi, self.mask)


class BaselineController(Controller):
    """Quaternion PD with standard sign selection."""

    name = "baseline"

    def __init__(
        self,
        gains: GainConfig,
        cfg: Optional[SlidingConfig] = None,
        surface: SurfaceKind = "proposed",
    ):
        self.gains = gains
        self.cfg = cfg
        self.surface = surface

    def command(self, t, state, desired, extras):
        cmd = baseline_wie_pd(state, error_quaternion(desired.q_d, state.q), self.gains)
        if self.cfg is None:
            return cmd
        ev = evaluate_surface(self.surface, state.q, state.omega, desired, self.cfg)
        return TorqueCommand(torque=cmd.torque, s=ev.s, branch=ev.branch)


class KinematicController(Controller):
    """Holds the body rate on the sliding manifold: ω ≡ ω_r = −σ(q, t)."""

    name = "kinematic"
    kinematic = True

    def __init__(self, cfg: SlidingConfig, surface: SurfaceKind = "proposed"):
        self.cfg = cfg
        self.surface = surface

    def reference_rate(self, q: NDArray, desired: DesiredSample) -> NDArray:
        return -evaluate_surface(self.surface, q, np.zeros(3), desired, self.cfg).s

    def command(self, t, state, desired, extras):
        ev = evaluate_surface(self.surface, state.q, state.omega, desired, self.cfg)
        return TorqueCommand(torque=np.zeros(3), s=ev.s, branch=ev.branch)
