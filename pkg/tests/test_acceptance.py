"""End-to-end closed-loop properties of the controllers."""

import numpy as np
import pytest

from app.control.adapt import lyapunov_value, min_eigenvalue
from app.core.sliding import SlidingConfig, decay_residual
from app.sim.metrics import compute_metrics, max_torque_jump
from app.sim.runner import build_models, run_scenario
from app.sim.scenarios import builtin_scenario
from app.sim.verify import verify

POINTING_DT = 0.005
INERTIA_DT = 0.002


def _flip_run(kind):
    sc = builtin_scenario("pointing-flip", name=f"flip-{kind}", duration=20.0, dt=POINTING_DT, sliding={"kind": kind})
    log = run_scenario(sc)
    return log, compute_metrics(log)


@pytest.fixture(scope="module")
def flip_runs():
    return {kind: _flip_run(kind) for kind in ("proposed", "unsigned", "legacy-lo", "standard-sgn")}


def _inertia(controller, **overrides):
    fixed_gain = {"auto_size": False, "K": [5.0, 5.0, 5.0]}
    if controller != "robust":
        overrides.setdefault("gains", fixed_gain)
    if controller == "adaptive":
        overrides.setdefault("adaptation", {"initial": [10.0, 10.0, 10.0, 0.0, 0.0, 0.0]})
    return builtin_scenario(
        "uncertain-inertia", name=f"inertia-{controller}", controller=controller,
        dt=INERTIA_DT, max_log_rows=10_001, **overrides,
    )


@pytest.fixture(scope="module")
def inertia_runs():
    runs = {}
    for controller in ("pd", "robust", "adaptive"):
        sc = _inertia(controller)
        log = run_scenario(sc)
        runs[controller] = (sc, log, compute_metrics(log))
    return runs


def test_on_manifold_decay_law():
    """On s = 0 the error decays by −λ|q_e°|‖q⃗_e‖² from 100 random starts."""
    cfg = SlidingConfig(lam=2.0)
    rng = np.random.default_rng(2024)
    for k in range(100):
        q0 = rng.normal(size=4)
        sc = builtin_scenario(
            "pointing", name=f"kinematic-{k}", controller="kinematic",
            initial={"q": q0.tolist()}, trajectory={"q_d": [1.0, 0.0, 0.0, 0.0]},
            duration=2.0, dt=0.02,
        )
        log = run_scenario(sc)
        assert max(abs(decay_residual(q_e, cfg)) for q_e in log.q_e) < 1e-10

        norms = np.linalg.norm(log.q_e[:, 1:], axis=1)
        active = norms[:-1] > 1e-8
        assert np.all(np.diff(norms)[active] < 0.0)

        sq = norms ** 2
        numeric = (sq[2:] - sq[:-2]) / (2.0 * sc.dt)
        law = -cfg.lam * np.abs(log.q_e[1:-1, 0]) * sq[1:-1]
        assert np.allclose(numeric, law, rtol=1e-2, atol=1e-6)

        if k < 10:
            assert compute_metrics(log).unwinding_ratio <= 1.05


def test_pd_ultimate_bound():
    """With a constant disturbance |s_i| settles below 1.2·D_i/k_i = 0.048."""
    sc = builtin_scenario("pointing", duration=20.0, dt=POINTING_DT)
    log = run_scenario(sc)
    window = (log.t >= 16.0) & (log.t <= 20.0)
    assert np.abs(log.s[window]).max() <= 0.048


def test_no_unwinding_with_sign_selection(flip_runs):
    """The proposed variable never switches manifold across a representation slip."""
    _, proposed = flip_runs["proposed"]
    assert proposed.manifold_switches == 0
    assert proposed.unwinding_ratio <= 1.2

    for kind in ("unsigned", "legacy-lo"):
        _, m = flip_runs[kind]
        assert m.manifold_switches >= 1, kind
        assert m.unwinding_ratio >= 1.5, kind


def test_standard_sign_stalls_on_equator(flip_runs):
    """With sgn(0) = 0 the pointing start is a spurious equilibrium of the feedback."""
    log, _ = flip_runs["standard-sgn"]
    assert np.abs(log.s[0]).max() < 1e-12
    assert np.abs(log.torque[0]).max() < 1e-12


def test_proposed_converges_faster_than_lo(flip_runs):
    """The proposed PD settles before the attitude-difference variant."""
    _, proposed = flip_runs["proposed"]
    _, lo = flip_runs["legacy-lo"]
    assert proposed.settling_time < lo.settling_time


def test_robust_boundary_layer_attractive():
    """Over 20 seeded inertia draws s enters the layer within 5 s and stays."""
    for seed in range(20):
        sc = builtin_scenario(
            "uncertain-inertia", name=f"robust-draw-{seed}", seed=seed, duration=10.0, dt=0.005,
            inertia={"random_offset": True},
        )
        models = build_models(sc)
        assert np.all(np.abs(models.inertia.true - models.inertia.nominal) <= models.inertia.bound + 1e-12)
        m = compute_metrics(run_scenario(sc))
        assert m.boundary_layer_hit_time <= 5.0, seed
        assert m.boundary_layer_exits == 0, seed


def test_adaptive_convergence_and_lyapunov(inertia_runs):
    """s → 0, the estimate stays PD and V never increases."""
    sc, log, metrics = inertia_runs["adaptive"]
    assert log.decimation == 1
    assert np.linalg.norm(log.s[-1]) < 1e-3
    assert min(min_eigenvalue(a) for a in log.a_hat) > 0.0
    assert metrics.min_estimate_eig > 0.0

    models = build_models(sc)
    a_true = models.inertia.true_params
    v = np.array([
        lyapunov_value(s, models.inertia.true, a_true, a_hat, models.psi)
        for s, a_hat in zip(log.s, log.a_hat)
    ])
    assert np.diff(v).max() <= 1e-8


def test_uncertain_inertia_orderings(inertia_runs):
    """Robust settles first, then adaptive, then PD; robust spends the most effort."""
    pd = inertia_runs["pd"][2]
    robust = inertia_runs["robust"][2]
    adaptive = inertia_runs["adaptive"][2]
    assert robust.settling_time < adaptive.settling_time < pd.settling_time
    assert robust.peak_effort > adaptive.peak_effort


def _slip_jump(controller, dt, **overrides):
    sc = builtin_scenario(
        "pointing", controller=controller, duration=2.0, dt=dt, max_log_rows=5_000,
        events={"sign_flip_time": 1.0}, **overrides,
    )
    log = run_scenario(sc)
    assert log.decimation == 1
    return max_torque_jump(log, 0.9, 1.1)


@pytest.mark.parametrize("controller,gains", [("pd", {}), ("robust", {"K": [50.0, 50.0, 50.0]})])
def test_torque_continuous_across_slip(controller, gains):
    """Sign-selecting laws keep the torque jump O(dt) across a representation slip."""
    coarse = _slip_jump(controller, 1e-3, gains=gains)
    fine = _slip_jump(controller, 5e-4, gains=gains)
    assert 1.6 <= coarse / fine <= 2.4


def test_baseline_jump_does_not_shrink():
    """The quaternion PD baseline jumps by O(1) at the equator crossing for any dt."""
    jumps = []
    for dt in (1e-3, 5e-4):
        sc = builtin_scenario("equator-crossing", dt=dt, max_log_rows=5_000)
        log = run_scenario(sc)
        assert np.any(log.q_e[:, 0] < 0.0) and np.any(log.q_e[:, 0] > 0.0)
        jumps.append(max_torque_jump(log))
    assert min(jumps) > 1.0
    assert jumps[0] / jumps[1] < 1.2


def test_oracle_suite():
    """Every oracle check passes within its stated tolerance."""
    report = verify(seed=0)
    checks = {c.name: c for c in report.checks}
    assert report.passed
    assert checks["quaternion_composition"].max_residual < 1e-12
    assert checks["logdet_hessian"].max_residual < 1e-6
    assert checks["regressor_identity"].max_residual < 1e-12
    assert 8.0 <= checks["rk4_order"].max_residual <= 32.0
