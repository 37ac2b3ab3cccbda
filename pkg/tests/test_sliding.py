"""Tests for the sliding variables."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from app.core.quat import IDENTITY, error_quaternion, from_axis_angle, normalize, qmul, to_rotation
from app.core.sliding import (
    SURFACE_KINDS,
    DesiredSample,
    SlidingConfig,
    decay_residual,
    evaluate_surface,
    omega_r,
    on_manifold_error_rate,
    s_legacy_lo,
    s_proposed,
    s_so3,
    s_standard_sgn,
    s_unsigned,
    skew_part_vee,
    so3_lyapunov_rate,
    so3_lyapunov_value,
)
from app.schemas.scenario import TrajectorySettings
from app.sim.scenarios import builtin_scenario, list_scenarios
from app.sim.trajectory import SinusoidTrajectory, build_trajectory
from app.utils.exceptions import ConfigError, SingularityError

CFG = SlidingConfig(lam=2.0)


def test_sliding_config_positive():
    """λ must be strictly positive."""
    with pytest.raises(ConfigError, match="lambda must be positive"):
        SlidingConfig(lam=0.0)


def test_proposed_branch_on_equator():
    """At q_e° = 0 the proposed variable picks the positive branch."""
    q_e = np.array([0.0, 1.0, 0.0, 0.0])
    value = s_proposed(q_e, np.zeros(3), CFG)
    assert value.branch == 1.0
    assert_allclose(value.s, [2.0, 0.0, 0.0])
    assert_allclose(s_standard_sgn(q_e, np.zeros(3), CFG), np.zeros(3))
    assert_allclose(s_unsigned(q_e, np.zeros(3), CFG), [2.0, 0.0, 0.0])


def test_proposed_invariant_under_sign_flip():
    """s(q_e, ω) = s(−q_e, ω) off the equator."""
    q_e = normalize([-0.4, 0.3, -0.5, 0.7])
    omega = np.array([0.2, -0.1, 0.4])
    assert_allclose(s_proposed(q_e, omega, CFG).s, s_proposed(-q_e, omega, CFG).s, atol=1e-15)
    assert not np.allclose(s_unsigned(q_e, omega, CFG), s_unsigned(-q_e, omega, CFG))


def test_omega_r_definition():
    """s_proposed = ω − ω_r."""
    q_e = normalize([0.6, 0.1, -0.7, 0.2])
    omega = np.array([0.3, 0.4, -0.2])
    omega_d = np.array([0.1, 0.0, 0.05])
    s = s_proposed(q_e, omega - omega_d, CFG).s
    assert_allclose(s, omega - omega_r(q_e, omega_d, CFG), atol=1e-15)


def test_decay_residual_vanishes():
    """On the manifold d/dt‖q⃗_e‖² = −λ|q_e°|‖q⃗_e‖² for either sign of q_e."""
    rng = np.random.default_rng(5)
    for q in rng.normal(size=(100, 4)):
        q = normalize(q)
        assert abs(decay_residual(q, CFG)) < 1e-12
        assert abs(decay_residual(-q, CFG)) < 1e-12


def test_escape_from_equator():
    """The on-manifold flow leaves q_e° = 0 toward the positive branch."""
    rate = on_manifold_error_rate([0.0, 0.0, 0.6, 0.8], CFG)
    assert rate[0] == pytest.approx(1.0)


def test_legacy_lo_constant_target():
    """With a constant target the Lo variable is ω + λ(q⃗ − q⃗_d), even at q° = 0."""
    q = np.array([0.0, 1.0, 0.0, 0.0])
    q_d = normalize([0.707, 0.0, -0.707, 0.0])
    omega = np.array([0.1, 0.2, 0.3])
    s = s_legacy_lo(q, q_d, np.zeros(3), omega, CFG)
    assert_allclose(s, omega + 2.0 * (q[1:] - q_d[1:]))


def test_legacy_lo_singularity():
    """Inverting T(q) at q° = 0 with a moving target raises SingularityError."""
    q = np.array([0.0, 0.0, 1.0, 0.0])
    with pytest.raises(SingularityError, match="not invertible"):
        s_legacy_lo(q, IDENTITY, [0.0, 0.0, 0.1], np.zeros(3), CFG)


def test_legacy_lo_not_sign_invariant():
    """q and −q give different Lo variables."""
    q = normalize([0.5, 0.5, 0.5, 0.5])
    s_plus = s_legacy_lo(q, IDENTITY, np.zeros(3), np.zeros(3), CFG)
    s_minus = s_legacy_lo(-q, IDENTITY, np.zeros(3), np.zeros(3), CFG)
    assert not np.allclose(s_plus, s_minus)


def test_so3_bridge_to_quaternion():
    """(𝒫(R(q)))∨ = 2q°q⃗ so s_R matches the proposed variable near the target."""
    q = normalize([0.9, 0.1, -0.3, 0.2])
    assert_allclose(skew_part_vee(to_rotation(q)), 2.0 * q[0] * q[1:], atol=1e-15)
    assert_allclose(s_so3(to_rotation(q), np.zeros(3), CFG), 4.0 * q[0] * q[1:], atol=1e-15)


def test_so3_lyapunov_on_surface():
    """V̇_R = −2λ‖(𝒫(R_e))∨‖² when s_R = 0, and V_R ≥ 0."""
    q = normalize([0.3, 0.6, -0.2, 0.7])
    r_e = to_rotation(q)
    p = skew_part_vee(r_e)
    assert so3_lyapunov_rate(r_e, -2.0 * p) == pytest.approx(-4.0 * float(p @ p), abs=1e-14)
    assert so3_lyapunov_value(r_e) >= 0.0
    assert so3_lyapunov_value(np.eye(3)) == 0.0
    assert so3_lyapunov_value(r_e) == pytest.approx(4.0 * float(q[1:] @ q[1:]), abs=1e-14)


def test_evaluate_surface_unknown_kind():
    """An unknown kind is a configuration error."""
    with pytest.raises(ConfigError, match="Unknown sliding kind"):
        evaluate_surface("mystery", IDENTITY, np.zeros(3), DesiredSample.hold(IDENTITY), CFG)


def test_evaluate_surface_proposed_matches_direct():
    """Generic evaluation agrees with s_proposed for a held target."""
    q = normalize([0.2, 0.7, -0.1, 0.6])
    q_d = normalize([0.9, 0.0, 0.3, 0.1])
    omega = np.array([0.1, -0.3, 0.2])
    ev = evaluate_surface("proposed", q, omega, DesiredSample.hold(q_d), CFG)
    direct = s_proposed(error_quaternion(q_d, q), omega, CFG)
    assert_allclose(ev.s, direct.s, atol=1e-15)
    assert ev.branch == direct.branch


@pytest.mark.parametrize("kind", SURFACE_KINDS)
def test_sigma_rate_matches_finite_difference(kind):
    """σ̇ equals the time derivative of s − ω along a free motion with a moving target."""
    trajectory = SinusoidTrajectory(
        q_d=normalize([0.9, 0.1, 0.2, -0.1]), axis=[0.3, -0.5, 1.0], amplitude=0.4, frequency=0.7
    )
    q0 = normalize([0.6, 0.3, -0.4, 0.5])
    omega = np.array([0.3, -0.2, 0.5])
    t0 = 0.8
    h = 1e-6

    def sigma(t):
        q = qmul(q0, from_axis_angle(omega, np.linalg.norm(omega) * (t - t0)))
        return evaluate_surface(kind, q, omega, trajectory.sample(t), CFG).s - omega

    numeric = (sigma(t0 + h) - sigma(t0 - h)) / (2.0 * h)
    analytic = evaluate_surface(kind, q0, omega, trajectory.sample(t0), CFG).sigma_rate
    assert_allclose(analytic, numeric, atol=1e-7)


TRAJECTORY_CASES = [builtin_scenario(name).trajectory for name, _ in list_scenarios()] + [
    TrajectorySettings(kind="sinusoid", q_d=[0.9, 0.1, -0.3, 0.2], axis=[1.0, 2.0, 0.5], amplitude=0.4, frequency=1.5),
]


@pytest.mark.parametrize("profile", TRAJECTORY_CASES, ids=lambda p: p.kind)
def test_trajectory_self_consistency(profile):
    """Analytic q̇_d, q̈_d and ω̇_d match finite differences of the sampled profile."""
    trajectory = build_trajectory(profile)
    h = 1e-5
    for t in (0.0, 1.3, 4.7):
        before, now, after = trajectory.sample(t - h), trajectory.sample(t), trajectory.sample(t + h)
        assert_allclose(now.q_d_dot, (after.q_d - before.q_d) / (2.0 * h), atol=1e-8)
        assert_allclose(now.q_d_ddot, (after.q_d_dot - before.q_d_dot) / (2.0 * h), atol=1e-7)
        assert_allclose(now.omega_d_dot, (after.omega_d - before.omega_d) / (2.0 * h), atol=1e-8)
        assert abs(np.linalg.norm(now.q_d) - 1.0) < 1e-12

