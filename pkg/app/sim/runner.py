"""Closed-loop execution of a scenario."""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from numpy.typing import NDArray

from app.config import settings
from app.control.adapt import PsiFunction, in_domain
from app.control.controllers import (
    AdaptiveController,
    BaselineController,
    Controller,
    KinematicController,
    PDController,
    RobustController,
)
from app.control.laws import GainConfig, auto_size_gain
from app.core.dynamics import (
    DisturbanceModel,
    InertiaModel,
    RigidBodyState,
    UnknownDynamics,
    angular_accel,
    matrix_to_params,
    rk4_step,
)
from app.core.quat import as_quaternion, error_quaternion, quat_deriv
from app.core.sliding import SlidingConfig, evaluate_surface
from app.schemas.results import RunLog
from app.schemas.scenario import ScenarioConfig
from app.sim.trajectory import Trajectory, build_trajectory
from app.utils.exceptions import (
    ConfigError,
    DivergenceError,
    DomainError,
    EstimateInvalidError,
)
from app.utils.logger import app_logger

_FLIP_TOL = 1e-12


def decimation_for(steps: int, max_rows: int) -> int:
    """Logging stride that keeps the log within ``max_rows`` rows.

    The final step is logged even when it falls off the stride.
    """
    return max(1, math.ceil(steps / (max_rows - 1)))


def logged_rows(steps: int, dec: int) -> int:
    return steps // dec + 1 + (1 if steps % dec else 0)



@dataclass
class SimulationModels:
    """Everything a run needs, built once from a :class:`ScenarioConfig`."""

    inertia: InertiaModel
    dynamics: UnknownDynamics
    disturbance: DisturbanceModel
    trajectory: Trajectory
    sliding: SlidingConfig
    gains: GainConfig
    controller: Controller
    psi: Optional[PsiFunction] = None


def build_inertia(sc: ScenarioConfig) -> InertiaModel:
    inertia_cfg = sc.inertia
    offset = inertia_cfg.offset
    if inertia_cfg.random_offset:
        if inertia_cfg.bound is None:
            raise ConfigError("inertia.random_offset needs inertia.bound")
        bound = InertiaModel.build(inertia_cfg.nominal, bound=inertia_cfg.bound).bound
        rng = np.random.default_rng(sc.seed)
        offset = rng.uniform(-np.diag(bound), np.diag(bound))
    return InertiaModel.build(inertia_cfg.nominal, offset, inertia_cfg.bound)


def _auto_gain(
    sc: ScenarioConfig,
    inertia: InertiaModel,
    dyn: UnknownDynamics,
    dist: DisturbanceModel,
    trajectory: Trajectory,
    cfg: SlidingConfig,
    gains: GainConfig,
) -> GainConfig:
    rate_max, accel_max = trajectory.rate_bounds()
    envelope = sc.gains.omega_envelope
    if envelope is None:
        q0 = as_quaternion(sc.initial.q)
        s0 = evaluate_surface(
            sc.sliding.kind, q0, np.asarray(sc.initial.omega, dtype=float), trajectory.sample(0.0), cfg
        ).s
        envelope = float(np.max(np.abs(s0))) + cfg.lam + rate_max
    k = auto_size_gain(
        inertia.bound, dyn.damping_bound, dist.bound, gains.eta, cfg, envelope, accel_max
    )
    app_logger.info(f"Auto-sized robust gains K={np.round(k, 4).tolist()} (envelope {envelope:.4g} rad/s)")
    return gains.with_K(k)


def build_models(sc: ScenarioConfig) -> SimulationModels:
    """Instantiate the plant, trajectory and controller of a scenario."""
    inertia = build_inertia(sc)
    dyn = UnknownDynamics(
        kind=sc.dynamics.kind,
        damping_true=sc.dynamics.c_true,
        damping_nominal=sc.dynamics.c_nom,
        damping_bound=sc.dynamics.c_bound,
    )
    dist = DisturbanceModel(
        kind=sc.disturbance.kind,
        value=sc.disturbance.value,
        bound=sc.disturbance.bound,
        frequency=sc.disturbance.frequency,
        seed=sc.seed,
    )
    trajectory = build_trajectory(sc.trajectory)
    cfg = SlidingConfig(lam=sc.sliding.lam)
    g = sc.gains
    gains = GainConfig(K=g.K, Phi=g.Phi, eta=g.eta, Kp=g.Kp, Kd=g.Kd)
    surface = sc.sliding.kind
    kind = sc.controller

    if g.auto_size and kind in ("robust", "adaptive-robust"):
        gains = _auto_gain(sc, inertia, dyn, dist, trajectory, cfg, gains)

    psi = None
    nominal_dyn = dyn.nominal_view() if dyn.kind != "none" else None
    if kind == "pd":
        controller: Controller = PDController(inertia.nominal_view(), nominal_dyn, cfg, gains, surface)
    elif kind == "robust":
        controller = RobustController(
            inertia.nominal_view(), nominal_dyn, cfg, gains, surface, d_bound=dist.bound
        )
    elif kind in ("adaptive", "adaptive-robust"):
        adapt_cfg = sc.adaptation
        psi = PsiFunction(kind=adapt_cfg.potential, weight=adapt_cfg.weight, gamma_diag=adapt_cfg.gamma_diag)
        a0 = np.asarray(adapt_cfg.initial, dtype=float) if adapt_cfg.initial is not None else matrix_to_params(inertia.nominal)
        if not in_domain(psi, a0):
            raise ConfigError("Initial parameter estimate is outside the potential's domain")
        controller = AdaptiveController(
            a0,
            psi,
            cfg,
            gains,
            surface,
            dyn=nominal_dyn,
            mask=adapt_cfg.mask,
            boundary_layer=(kind == "adaptive-robust"),
        )
    elif kind == "baseline":
        controller = BaselineController(gains, cfg, surface)
    elif kind == "kinematic":
        controller = KinematicController(cfg, surface)
    else:
        raise ConfigError(f"Unknown controller kind: {kind}")

    return SimulationModels(inertia, dyn, dist, trajectory, cfg, gains, controller, psi)


class ScenarioRunner:
    """Integrates one scenario; owns its state exclusively."""

    def __init__(self, scenario: ScenarioConfig, models: Optional[SimulationModels] = None):
        self.scenario = scenario
        self.models = models or build_models(scenario)

    # ── vector field ───────────────────────────────────────────────────────

    def field(self, t: float, x: NDArray) -> NDArray:
        m = self.models
        state, extras = RigidBodyState.unpack(x)
        desired = m.trajectory.sample(t)
        ctrl = m.controller
        if ctrl.kinematic:
            omega_r = ctrl.reference_rate(state.q, desired)
            return np.concatenate((quat_deriv(state.q, omega_r), np.zeros(3)))
        cmd = ctrl.command(t, state, desired, extras)
        accel = angular_accel(state, cmd.torque, m.inertia, m.dynamics, m.disturbance, t)
        parts = [quat_deriv(state.q, state.omega), accel]
        if ctrl.n_extras:
            parts.append(ctrl.extras_rate(t, state, desired, extras, cmd))
        return np.concatenate(parts)

    def advance(self, t: float, x: NDArray, dt: float, depth: int = 0) -> NDArray:
        """One step, halving dt when a log-det estimate leaves its domain."""
        psi = self.models.psi
        try:
            x_next = rk4_step(self.field, t, x, dt)
            if psi is not None and psi.kind == "logdet" and not in_domain(psi, x_next[7:]):
                raise DomainError("Parameter estimate left the positive-definite cone")
            return x_next
        except DomainError as e:
            if psi is None:
                raise
            if depth >= settings.logdet_retry_limit:
                app_logger.error(f"Estimate invalid at t={t:.6g} after {depth} step halvings")
                raise EstimateInvalidError(f"{e} (t={t:.6g}, dt={dt:.3g})")
            half = 0.5 * dt
            app_logger.warning(f"Estimate left its domain at t={t:.6g}; retrying with dt={half:.3g}")
            x_mid = self.advance(t, x, half, depth + 1)
            return self.advance(t + half, x_mid, half, depth + 1)

    # ── main loop ──────────────────────────────────────────────────────────

    def run(self) -> RunLog:
        sc = self.scenario
        m = self.models
        ctrl = m.controller
        steps = sc.steps
        dt = sc.dt
        dec = decimation_for(steps, sc.max_log_rows)
        rows = logged_rows(steps, dec)
        adaptive = ctrl.n_extras > 0
        check_deficit = isinstance(ctrl, RobustController)

        app_logger.info(
            f"Running scenario '{sc.name}': controller={ctrl.name}, sliding={sc.sliding.kind}, "
            f"dt={dt:g}, duration={sc.duration:g}, steps={steps}, rows={rows}"
        )

        log = {
            "t": np.empty(rows),
            "q": np.empty((rows, 4)),
            "q_d": np.empty((rows, 4)),
            "omega": np.empty((rows, 3)),
            "omega_d": np.empty((rows, 3)),
            "q_e": np.empty((rows, 4)),
            "s": np.empty((rows, 3)),
            "branch": np.empty(rows),
            "torque": np.empty((rows, 3)),
        }
        a_log = np.empty((rows, ctrl.n_extras)) if adaptive else None
        traveled_log = np.empty(rows)

        state0 = RigidBodyState(
            q=as_quaternion(sc.initial.q), omega=np.asarray(sc.initial.omega, dtype=float)
        )
        x = state0.pack(ctrl.initial_extras())
        flip_time = sc.events.sign_flip_time
        deficit_steps = 0
        row = 0
        traveled = 0.0
        prev_rate: Optional[float] = None

        for k in range(steps + 1):
            t = k * dt
            if flip_time is not None and t >= flip_time - _FLIP_TOL:
                x[:4] = -x[:4]
                flip_time = None
                app_logger.info(f"Attitude representation flipped at t={t:.6g}")

            desired = m.trajectory.sample(t)
            state, extras = RigidBodyState.unpack(x)
            if ctrl.kinematic:
                x[4:7] = ctrl.reference_rate(state.q, desired)
                state, extras = RigidBodyState.unpack(x)

            rate = float(np.linalg.norm(state.omega - desired.omega_d))
            if prev_rate is not None:
                traveled += 0.5 * dt * (prev_rate + rate)
            prev_rate = rate

            logged = k % dec == 0 or k == steps
            if logged or check_deficit:
                cmd = ctrl.command(t, state, desired, extras)
                if check_deficit and k < steps and cmd.gain_deficit:
                    if deficit_steps == 0:
                        app_logger.warning(f"Robust gain deficit first detected at t={t:.6g}")
                    deficit_steps += 1
                if logged:
                    log["t"][row] = t
                    log["q"][row] = state.q
                    log["q_d"][row] = desired.q_d
                    log["omega"][row] = state.omega
                    log["omega_d"][row] = desired.omega_d
                    log["q_e"][row] = error_quaternion(desired.q_d, state.q)
                    log["s"][row] = cmd.s
                    log["branch"][row] = cmd.branch
                    log["torque"][row] = cmd.torque
                    traveled_log[row] = traveled
                    if a_log is not None:
                        a_log[row] = extras
                    row += 1

            if k == steps:
                break
            try:
                x = self.advance(t, x, dt)
            except DivergenceError as e:
                app_logger.error(f"Divergence in scenario '{sc.name}' at step {k}")
                raise DivergenceError(e.args[0], t=e.t, step=k, state=e.state) from e

        app_logger.info(f"Scenario '{sc.name}' finished ({row} rows logged)")
        return RunLog(
            scenario=sc,
            decimation=dec,
            a_hat=a_log,
            traveled=traveled_log,
            gain_deficit_steps=deficit_steps,
            **log,
        )


def run_scenario(scenario: ScenarioConfig) -> RunLog:
    """Simulate ``scenario`` and return its decimated log."""
    return ScenarioRunner(scenario).run()
