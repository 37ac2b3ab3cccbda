"""Oracle checks of the geometric and numerical core.

Each check compares an implementation against an independent computation
(rotation-matrix composition, scipy's rotation class, finite differences,
dense matrix algebra, closed-form kinematics) over random samples.
"""

from typing import Callable, List

import numpy as np
from numpy.typing import NDArray
from scipy.spatial.transform import Rotation

from app.control.adapt import PsiFunction, psi_gradient, psi_hessian
from app.control.laws import regressor
from app.core.dynamics import InertiaModel, free_body_field, matrix_to_params, rk4_step
from app.core.quat import cross, qmul, to_rotation
from app.core.sliding import (
    SlidingConfig,
    decay_residual,
    on_manifold_error_rate,
    skew_part_vee,
    so3_lyapunov_rate,
    so3_lyapunov_value,
)
from app.schemas.results import VerifyCheck, VerifyReport
from app.utils.logger import app_logger

COMPOSITION_TOL = 1e-12
HESSIAN_TOL = 1e-6
REGRESSOR_TOL = 1e-12
DECAY_TOL = 1e-10
BRIDGE_TOL = 1e-12
LYAPUNOV_TOL = 1e-12
RK4_ORDER_RANGE = (8.0, 32.0)


def _random_quaternions(rng: np.random.Generator, n: int) -> NDArray:
    q = rng.normal(size=(n, 4))
    return q / np.linalg.norm(q, axis=1, keepdims=True)


def _random_inertia(rng: np.random.Generator) -> NDArray:
    a = rng.normal(size=(3, 3))
    return a @ a.T + 3.0 * np.eye(3)


def _scalar_last(q: NDArray) -> NDArray:
    return np.array([q[1], q[2], q[3], q[0]])


def _check(name: str, residual: float, threshold: float, samples: int, detail: str = "") -> VerifyCheck:
    passed = bool(np.isfinite(residual) and residual < threshold)
    status = "passed" if passed else "FAILED"
    log = app_logger.info if passed else app_logger.warning
    log(f"Check {name} {status}: max residual {residual:.3e} (threshold {threshold:.1e})")
    return VerifyCheck(
        name=name,
        passed=passed,
        max_residual=float(residual),
        threshold=threshold,
        samples=samples,
        detail=detail,
    )


class VerificationSuite:
    """Runs every oracle check and collects a :class:`VerifyReport`."""

    @staticmethod
    def quaternion_composition(rng: np.random.Generator, samples: int = 1000) -> VerifyCheck:
        """R(p ⊗ q) against R(p)·R(q)."""
        ps = _random_quaternions(rng, samples)
        qs = _random_quaternions(rng, samples)
        worst = max(
            float(np.abs(to_rotation(qmul(p, q)) - to_rotation(p) @ to_rotation(q)).max())
            for p, q in zip(ps, qs)
        )
        return _check("quaternion_composition", worst, COMPOSITION_TOL, samples)

    @staticmethod
    def rotation_oracle(rng: np.random.Generator, samples: int = 1000) -> VerifyCheck:
        """Quaternion product and rotation map against scipy's Rotation."""
        ps = _random_quaternions(rng, samples)
        qs = _random_quaternions(rng, samples)
        worst = 0.0
        for p, q in zip(ps, qs):
            composed = Rotation.from_quat(_scalar_last(p)) * Rotation.from_quat(_scalar_last(q))
            worst = max(worst, float(np.abs(to_rotation(qmul(p, q)) - composed.as_matrix()).max()))
        return _check("rotation_oracle", worst, COMPOSITION_TOL, samples)

    @staticmethod
    def logdet_hessian(
        rng: np.random.Generator,
        samples: int = 100,
        perturbation: float = 0.0,
    ) -> VerifyCheck:
        """Analytic log-det Hessian against central differences of the gradient.

        ``perturbation`` is added to the analytic Hessian diagonal and exists so
        that tests can confirm the check fails on a wrong Hessian.
        """
        psi = PsiFunction(kind="logdet")
        step = 1e-5
        worst = 0.0
        for _ in range(samples):
            a = matrix_to_params(_random_inertia(rng))
            analytic = psi_hessian(psi, a) + perturbation * np.eye(6)
            numeric = np.empty((6, 6))
            for j in range(6):
                e = np.zeros(6)
                e[j] = step
                numeric[:, j] = (psi_gradient(psi, a + e) - psi_gradient(psi, a - e)) / (2.0 * step)
            worst = max(worst, float(np.abs(analytic - numeric).max() / np.abs(numeric).max()))
        return _check("logdet_hessian", worst, HESSIAN_TOL, samples, "relative error")

    @staticmethod
    def regressor_identity(rng: np.random.Generator, samples: int = 1000) -> VerifyCheck:
        """Yᵀa against J(a)ω̇_r + ω × J(a)ω with dense matrices."""
        worst = 0.0
        for _ in range(samples):
            j = _random_inertia(rng)
            omega = rng.normal(size=3)
            omega_r_dot = rng.normal(size=3)
            lhs = regressor(omega, omega_r_dot).T @ matrix_to_params(j)
            rhs = j @ omega_r_dot + cross(omega, j @ omega)
            worst = max(worst, float(np.abs(lhs - rhs).max()))
        return _check("regressor_identity", worst, REGRESSOR_TOL, samples)

    @staticmethod
    def decay_law(rng: np.random.Generator, samples: int = 100, lam: float = 2.0) -> VerifyCheck:
        """On-manifold decay d/dt‖q⃗_e‖² = −λ|q_e°|‖q⃗_e‖² and escape from q_e° = 0."""
        cfg = SlidingConfig(lam=lam)
        worst = max(abs(decay_residual(q, cfg)) for q in _random_quaternions(rng, samples))
        for v in rng.normal(size=(samples, 3)):
            equator = np.concatenate(([0.0], v / np.linalg.norm(v)))
            escape = on_manifold_error_rate(equator, cfg)[0]
            worst = max(worst, abs(escape - 0.5 * lam))
        return _check("decay_law", worst, DECAY_TOL, 2 * samples)

    @staticmethod
    def so3_bridge(rng: np.random.Generator, samples: int = 1000) -> VerifyCheck:
        """(𝒫(R(q)))∨ = 2q°q⃗."""
        worst = 0.0
        for q in _random_quaternions(rng, samples):
            if q[0] < 0.0:
                q = -q
            worst = max(worst, float(np.abs(skew_part_vee(to_rotation(q)) - 2.0 * q[0] * q[1:]).max()))
        return _check("so3_bridge", worst, BRIDGE_TOL, samples)

    @staticmethod
    def so3_lyapunov(rng: np.random.Generator, samples: int = 1000, lam: float = 2.0) -> VerifyCheck:
        """V_R = 4‖q⃗‖², V̇_R = 2ω̆ᵀ(𝒫(R_e))∨, and −2λ‖(𝒫(R_e))∨‖² on s_R = 0."""
        worst = 0.0
        for q in _random_quaternions(rng, samples):
            r_e = to_rotation(q)
            p = skew_part_vee(r_e)
            worst = max(worst, abs(so3_lyapunov_value(r_e) - 4.0 * float(q[1:] @ q[1:])))
            omega = rng.normal(size=3)
            worst = max(worst, abs(so3_lyapunov_rate(r_e, omega) - 2.0 * float(omega @ p)))
            on_surface = so3_lyapunov_rate(r_e, -lam * p)
            worst = max(worst, abs(on_surface + 2.0 * lam * float(p @ p)))
        return _check("so3_lyapunov", worst, LYAPUNOV_TOL, samples)

    @staticmethod
    def rk4_order(dt: float = 0.05, duration: float = 2.0) -> VerifyCheck:
        """Error ratio between dt and dt/2 against a dt/8 reference (≈16 for RK4)."""
        field = free_body_field(InertiaModel.exact([1.0, 2.0, 3.0]))
        x0 = np.array([1.0, 0.0, 0.0, 0.0, 2.0, 1.0, -1.5])

        def integrate(h: float) -> NDArray:
            x = x0.copy()
            for k in range(int(round(duration / h))):
                x = rk4_step(field, k * h, x, h)
            return x

        reference = integrate(dt / 8.0)
        coarse = float(np.abs(integrate(dt) - reference).max())
        fine = float(np.abs(integrate(dt / 2.0) - reference).max())
        factor = coarse / fine if fine > 0.0 else float("inf")
        lo, hi = RK4_ORDER_RANGE
        passed = lo <= factor <= hi
        app_logger.info(f"Check rk4_order {'passed' if passed else 'FAILED'}: factor {factor:.3f}")
        return VerifyCheck(
            name="rk4_order",
            passed=passed,
            max_residual=factor,
            threshold=hi,
            samples=3,
            detail=f"error-ratio must lie in [{lo:g}, {hi:g}]",
        )

    @staticmethod
    def run(seed: int = 0, hessian_perturbation: float = 0.0) -> VerifyReport:
        """Run all checks with a seeded generator."""
        app_logger.info(f"Running verification suite (seed={seed})")
        rng = np.random.default_rng(seed)
        checks: List[Callable[[], VerifyCheck]] = [
            lambda: VerificationSuite.quaternion_composition(rng),
            lambda: VerificationSuite.rotation_oracle(rng),
            lambda: VerificationSuite.logdet_hessian(rng, perturbation=hessian_perturbation),
            lambda: VerificationSuite.regressor_identity(rng),
            lambda: VerificationSuite.decay_law(rng),
            lambda: VerificationSuite.so3_bridge(rng),
            lambda: VerificationSuite.so3_lyapunov(rng),
            VerificationSuite.rk4_order,
        ]
        results = [check() for check in checks]
        report = VerifyReport(passed=all(c.passed for c in results), checks=results)
        app_logger.info(
            f"Verification {'passed' if report.passed else 'FAILED'}: "
            f"{sum(c.passed for c in results)}/{len(results)} checks"
        )
        return report


def verify(seed: int = 0, hessian_perturbation: float = 0.0) -> VerifyReport:
    return VerificationSuite.run(seed=seed, hessian_perturbation=hessian_perturbation)
