"""Tests for Bregman-divergence adaptation."""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from app.control.adapt import (
    PsiFunction,
    adapt_step_deriv,
    bregman_div,
    in_domain,
    lyapunov_value,
    min_eigenvalue,
    psi_gradient,
    psi_hessian,
    psi_value,
)
from app.core.dynamics import RigidBodyState, matrix_to_params
from app.core.sliding import evaluate_surface
from app.sim.runner import ScenarioRunner
from app.sim.scenarios import builtin_scenario
from app.utils.exceptions import ConfigError, DomainError

IDENTITY_PARAMS = np.array([1.0, 1.0, 1.0, 0.0, 0.0, 0.0])
LOGDET = PsiFunction(kind="logdet")


def test_psi_function_validation():
    """Unknown kinds and non-positive weights are rejected."""
    with pytest.raises(ConfigError, match="Unknown potential"):
        PsiFunction(kind="entropy")
    with pytest.raises(ConfigError, match="weight must be positive"):
        PsiFunction(weight=0.0)
    with pytest.raises(ConfigError, match="six positive entries"):
        PsiFunction(kind="quadratic", gamma_diag=[1.0, 1.0])


def test_logdet_hessian_at_identity():
    """∇²ψ at J = I is diag(1, 1, 1, 2, 2, 2)."""
    assert_allclose(psi_hessian(LOGDET, IDENTITY_PARAMS), np.diag([1.0, 1.0, 1.0, 2.0, 2.0, 2.0]), atol=1e-15)


def test_quadratic_hessian():
    """With Γ = I the quadratic Hessian is the identity; the weight scales Γ."""
    assert_allclose(psi_hessian(PsiFunction(kind="quadratic"), np.ones(6)), np.eye(6))
    weighted = PsiFunction(kind="quadratic", weight=4.0)
    assert_allclose(psi_hessian(weighted, np.ones(6)), 0.25 * np.eye(6))


def test_logdet_weight_scales_potential():
    """ψ = −(1/γ) ln det J(a)."""
    a = matrix_to_params(np.diag([2.0, 3.0, 4.0]))
    assert psi_value(LOGDET, a) == pytest.approx(-np.log(24.0))
    assert psi_value(PsiFunction(weight=0.5), a) == pytest.approx(-2.0 * np.log(24.0))


def test_gradient_matches_finite_difference():
    """∇ψ agrees with central differences of ψ."""
    j = np.array([[5.0, 0.4, -0.3], [0.4, 4.0, 0.2], [-0.3, 0.2, 6.0]])
    a = matrix_to_params(j)
    h = 1e-6
    numeric = np.array([
        (psi_value(LOGDET, a + h * e) - psi_value(LOGDET, a - h * e)) / (2.0 * h) for e in np.eye(6)
    ])
    assert_allclose(psi_gradient(LOGDET, a), numeric, atol=1e-8)


def test_hessian_matches_finite_difference():
    """∇²ψ agrees with central differences of ∇ψ at random PD points."""
    rng = np.random.default_rng(11)
    h = 1e-5
    for _ in range(20):
        m = rng.normal(size=(3, 3))
        a = matrix_to_params(m @ m.T + 3.0 * np.eye(3))
        numeric = np.column_stack([
            (psi_gradient(LOGDET, a + h * e) - psi_gradient(LOGDET, a - h * e)) / (2.0 * h) for e in np.eye(6)
        ])
        analytic = psi_hessian(LOGDET, a)
        assert np.abs(analytic - numeric).max() / np.abs(numeric).max() < 1e-6


def test_domain_errors():
    """Non-PD parameters are outside the log-det domain."""
    bad = np.array([1.0, -1.0, 1.0, 0.0, 0.0, 0.0])
    assert not in_domain(LOGDET, bad)
    assert in_domain(PsiFunction(kind="quadratic"), bad)
    assert min_eigenvalue(bad) == pytest.approx(-1.0)
    with pytest.raises(DomainError, match="not positive-definite"):
        psi_hessian(LOGDET, bad)
    with pytest.raises(DomainError, match="not positive-definite"):
        bregman_div(LOGDET, IDENTITY_PARAMS, bad)


def test_bregman_divergence_properties():
    """dψ(x‖x) = 0 and dψ(y‖x) > 0 for y ≠ x."""
    x = matrix_to_params(np.diag([2.0, 3.0, 4.0]))
    y = matrix_to_params(np.diag([2.5, 2.0, 5.0]))
    assert bregman_div(LOGDET, x, x) == pytest.approx(0.0, abs=1e-15)
    assert bregman_div(LOGDET, y, x) > 0.0
    quad = PsiFunction(kind="quadratic")
    assert bregman_div(quad, y, x) == pytest.approx(0.5 * float((y - x) @ (y - x)))


def test_adapt_step_examples():
    """s = 0 freezes adaptation; Y·s = e₁ at J = I gives −e₁."""
    y = np.zeros((6, 3))
    y[0, 0] = 1.0
    assert_allclose(adapt_step_deriv(IDENTITY_PARAMS, y, np.zeros(3), LOGDET), np.zeros(6))
    assert_allclose(adapt_step_deriv(IDENTITY_PARAMS, y, [1.0, 0.0, 0.0], LOGDET), [-1.0, 0, 0, 0, 0, 0], atol=1e-15)


def test_adapt_step_mask():
    """Masked parameters stay fixed and the active block uses its own Hessian."""
    rng = np.random.default_rng(3)
    y = rng.normal(size=(6, 3))
    s = rng.normal(size=3)
    mask = [True, True, True, False, False, False]
    rate = adapt_step_deriv(IDENTITY_PARAMS, y, s, LOGDET, mask)
    assert_allclose(rate[3:], np.zeros(3))
    assert_allclose(rate[:3], -(y @ s)[:3], atol=1e-14)
    assert_allclose(adapt_step_deriv(IDENTITY_PARAMS, y, s, LOGDET, [False] * 6), np.zeros(6))


def test_lyapunov_rate_along_closed_loop():
    """Along the exact-model adaptive loop V̇ = −2Σk_i s_i²."""
    scenario = builtin_scenario(
        "uncertain-inertia",
        controller="adaptive",
        gains={"auto_size": False, "K": [5.0, 5.0, 5.0]},
        adaptation={"initial": [10.0, 10.0, 10.0, 0.0, 0.0, 0.0]},
    )
    runner = ScenarioRunner(scenario)
    models = runner.models
    a_true = models.inertia.true_params
    desired = models.trajectory.sample(0.0)
    x = RigidBodyState(
        q=np.array([0.6, 0.48, -0.64, 0.0]), omega=np.array([0.2, -0.1, 0.3])
    ).pack(np.array([11.0, 9.5, 12.0, 0.2, -0.1, 0.3]))

    def value(xx):
        state, a_hat = RigidBodyState.unpack(xx)
        s = evaluate_surface("proposed", state.q, state.omega, desired, models.sliding).s
        return lyapunov_value(s, models.inertia.true, a_true, a_hat, models.psi), s

    h = 1e-6
    dx = runner.field(0.0, x)
    numeric = (value(x + h * dx)[0] - value(x - h * dx)[0]) / (2.0 * h)
    _, s = value(x)
    expected = -2.0 * float(s @ (models.gains.K * s))
    assert numeric == pytest.approx(expected, rel=1e-5, abs=1e-6)
