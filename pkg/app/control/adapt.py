"""Bregman-divergence parameter adaptation for the six inertia parameters.

Two potentials are supported:

* ``logdet``: ψ(a) = −(1/γ)·ln det J(a), whose domain is the positive-definite
  cone, so the estimate stays a physically consistent inertia.
* ``quadratic``: ψ(a) = ½aᵀΓ⁻¹a with Γ = γ·diag(gamma_diag), the classical
  gradient law.
"""

from dataclasses import dataclass, field
from typing import Literal, Optional

import numpy as np
from numpy.typing import ArrayLike, NDArray

from app.core.dynamics import params_to_matrix
from app.utils.exceptions import ConfigError, DomainError

PsiKind = Literal["logdet", "quadratic"]
N_PARAMS = 6

_BASIS = tuple(params_to_matrix(np.eye(N_PARAMS)[k]) for k in range(N_PARAMS))


@dataclass(frozen=True, eq=False)
class PsiFunction:
    """Bregman potential with adaptation weight γ."""

    kind: PsiKind = "logdet"
    weight: float = 1.0
    gamma_diag: NDArray = field(default_factory=lambda: np.ones(N_PARAMS))

    def __post_init__(self):
        if self.kind not in ("logdet", "quadratic"):
            raise ConfigError(f"Unknown potential: {self.kind}")
        if not (np.isfinite(self.weight) and self.weight > 0.0):
            raise ConfigError(f"Adaptation weight must be positive, got {self.weight}")
        diag = np.asarray(self.gamma_diag, dtype=float).reshape(-1)
        if diag.shape != (N_PARAMS,) or np.any(diag <= 0.0):
            raise ConfigError("gamma_diag needs six positive entries")
        object.__setattr__(self, "gamma_diag", diag)

    @property
    def gamma(self) -> NDArray:
        """Γ for the quadratic potential."""
        return self.weight * np.diag(self.gamma_diag)


def _params(a: ArrayLike) -> NDArray:
    a = np.asarray(a, dtype=float).reshape(-1)
    if a.shape != (N_PARAMS,):
        raise DomainError(f"Parameter vector needs 6 entries, got {a.shape}")
    return a


def _pd_inverse(a: NDArray) -> NDArray:
    m = params_to_matrix(a)
    try:
        np.linalg.cholesky(m)
    except np.linalg.LinAlgError:
        raise DomainError(f"J(a) is not positive-definite for a = {a}")
    return np.linalg.inv(m)


def min_eigenvalue(a: ArrayLike) -> float:
    """Smallest eigenvalue of J(a)."""
    return float(np.linalg.eigvalsh(params_to_matrix(_params(a)))[0])


def in_domain(psi: PsiFunction, a: ArrayLike) -> bool:
    if psi.kind == "quadratic":
        return bool(np.all(np.isfinite(a)))
    return bool(np.all(np.isfinite(a))) and min_eigenvalue(a) > 0.0


def psi_value(psi: PsiFunction, a: ArrayLike) -> float:
    a = _params(a)
    if psi.kind == "quadratic":
        return 0.5 * float(a @ np.linalg.solve(psi.gamma, a))
    _pd_inverse(a)
    _, logdet = np.linalg.slogdet(params_to_matrix(a))
    return -logdet / psi.weight


def psi_gradient(psi: PsiFunction, a: ArrayLike) -> NDArray:
    a = _params(a)
    if psi.kind == "quadratic":
        return np.linalg.solve(psi.gamma, a)
    inv = _pd_inverse(a)
    grad = -np.array([
        inv[0, 0], inv[1, 1], inv[2, 2],
        2.0 * inv[0, 1], 2.0 * inv[0, 2], 2.0 * inv[1, 2],
    ])
    return grad / psi.weight


def psi_hessian(psi: PsiFunction, a: ArrayLike) -> NDArray:
    """∇²ψ(a); for ``logdet`` H_ij = tr(J⁻¹E_iJ⁻¹E_j)/γ."""
    a = _params(a)
    if psi.kind == "quadratic":
        return np.linalg.inv(psi.gamma)
    inv = _pd_inverse(a)
    products = [inv @ e for e in _BASIS]
    hess = np.empty((N_PARAMS, N_PARAMS))
    for i in range(N_PARAMS):
        for j in range(i, N_PARAMS):
            hess[i, j] = hess[j, i] = np.trace(products[i] @ products[j])
    return hess / psi.weight


def bregman_div(psi: PsiFunction, y: ArrayLike, x: ArrayLike) -> float:
    """dψ(y‖x) = ψ(y) − ψ(x) − (y − x)ᵀ∇ψ(x)."""
    y = _params(y)
    x = _params(x)
    return psi_value(psi, y) - psi_value(psi, x) - float((y - x) @ psi_gradient(psi, x))


def adapt_step_deriv(
    a_hat: ArrayLike,
    y: NDArray,
    s: ArrayLike,
    psi: PsiFunction,
    mask: Optional[ArrayLike] = None,
) -> NDArray:
    """ȧ̂ = −(∇²ψ(â))⁻¹·Y·s restricted to the parameters selected by ``mask``."""
    a_hat = _params(a_hat)
    drive = np.asarray(y, dtype=float) @ np.asarray(s, dtype=float)
    hess = psi_hessian(psi, a_hat)
    if mask is None:
        return -np.linalg.solve(hess, drive)
    active = np.asarray(mask, dtype=bool)
    rate = np.zeros(N_PARAMS)
    if active.any():
        rate[active] = -np.linalg.solve(hess[np.ix_(active, active)], drive[active])
    return rate


def lyapunov_value(
    s: ArrayLike,
    inertia_true: ArrayLike,
    a_true: ArrayLike,
    a_hat: ArrayLike,
    psi: PsiFunction,
) -> float:
    """V = sᵀJs + 2·dψ(a‖â) evaluated with the true inertia."""
    s = np.asarray(s, dtype=float)
    return float(s @ np.asarray(inertia_true, dtype=float) @ s) + 2.0 * bregman_div(psi, a_true, a_hat)
