"""
Mutual-information CLT package at z = -sigma2

    V        = -log det(sigma2 T) + log det(I + delta Dt) - M sigma2 delta delta_t
    B_C      = 1/2 log Delta_T - 1/2 kappa sigma2^2 eta eta_t
    Theta_G  = -log Delta
    Theta_B  = -log Delta_T + kappa sigma2^2 eta eta_t
    P_out(R) = Phi((R - (V + B_C)) / sqrt(Theta_G + Theta_B))

B_C and Theta_B share their two addends, so B_C = -Theta_B / 2 holds exactly.
"""
import logging
import math
from enum import Enum
from typing import Optional

import numpy as np
from scipy.special import erfc

from rmtbias.errors import DegenerateDeterminantError, ParameterDomainError
from rmtbias.models.config import SolverOptions
from rmtbias.models.domain import ChannelModel, DeterministicQuantities, FixedPointSolution, MIStatistics, SpectralPoint
from rmtbias.services.fixed_point import solve
from rmtbias.services.quantities import trace_functionals
from rmtbias.utils.linalg import hpd_logdet

logger = logging.getLogger(__name__)


class SpecialCase(str, Enum):
    CENTERED = "centered"
    CENTERED_IID = "centered_iid"
    NONCENTERED_CIRCULAR = "noncentered_circular"


# ============================================
# Closed forms
# ============================================

def _deterministic_mean(model: ChannelModel, sol: FixedPointSolution, sigma2: float) -> float:
    delta, delta_t = sol.delta.real, sol.delta_t.real
    Rt = 1.0 / (1.0 + delta * model.Dt)
    # T^{-1} / sigma2 = (I + delta_t D) + A Rt A^H / sigma2
    K = np.diag(1.0 + delta_t * model.D) + (model.A * Rt) @ model.A.conj().T / sigma2
    return float(
        hpd_logdet(K.astype(np.complex128))
        + np.sum(np.log1p(delta * model.Dt))
        - model.M * sigma2 * delta * delta_t
    )


def mi_clt(
    model: ChannelModel,
    sigma2: float,
    opts: Optional[SolverOptions] = None,
    quantities: Optional[DeterministicQuantities] = None,
) -> MIStatistics:
    """
    Deterministic mean, non-Gaussian mean bias and variance of C(sigma2)

    Args:
        model: 채널 모델
        sigma2: 잡음 분산 (> 0)
        opts: 고정점 solver 옵션
        quantities: z = -sigma2 에서 미리 계산된 ledger

    Raises:
        DegenerateDeterminantError: Delta <= 0, Delta_T <= 0 or Theta <= 0
    """
    point = SpectralPoint.from_sigma2(sigma2)
    sol = solve(model, point, opts)
    q = quantities or trace_functionals(model, sol)

    Delta, Delta_T = q.Delta.real, q.Delta_T.real
    if Delta <= 0:
        raise DegenerateDeterminantError(f"Delta = {Delta:.6g} <= 0 at sigma2={sigma2:g}")
    if Delta_T <= 0:
        raise DegenerateDeterminantError(f"Delta_T = {Delta_T:.6g} <= 0 at sigma2={sigma2:g}")

    log_Delta_T = math.log(Delta_T)
    kappa_term = model.moments.kappa * sigma2 * sigma2 * (q.eta * q.eta_t).real

    Theta_G = -math.log(Delta)
    Theta_B = kappa_term - log_Delta_T
    stats = MIStatistics(
        sigma2=float(sigma2),
        V=_deterministic_mean(model, sol, sigma2),
        B_C_theta=0.5 * log_Delta_T,
        B_C_kappa=-0.5 * kappa_term,
        Theta_G=Theta_G,
        Theta_B=Theta_B,
    )
    if stats.Theta <= 0:
        raise DegenerateDeterminantError(f"Theta = {stats.Theta:.6g} <= 0 at sigma2={sigma2:g}")
    if stats.Theta < Theta_G:
        logger.warning(f"sigma2={sigma2:g}: Theta={stats.Theta:.6g} below the Gaussian part {Theta_G:.6g}")
    return stats


def special_case_bias(
    model: ChannelModel,
    sigma2: float,
    case: SpecialCase,
    opts: Optional[SolverOptions] = None,
) -> float:
    """
    B_C through one of the reduced closed forms

    centered             (A = 0): 1/2 [log(1 - |v|^2 s^2 g g_t) - kappa s^2 g g_t]
    centered_iid         (A = 0, D = Dt = I): g = delta^2 / c, g_t = delta_t^2
    noncentered_circular (vartheta = 0): -1/2 kappa s^2 eta eta_t

    with s = sigma2, g = gamma, g_t = gamma_t.

    Raises:
        ParameterDomainError: the model does not satisfy the case's premise
    """
    case = SpecialCase(case)
    moments = model.moments
    if case in (SpecialCase.CENTERED, SpecialCase.CENTERED_IID) and not model.is_centered:
        raise ParameterDomainError(f"{case.value} reduction needs A = 0")
    if case is SpecialCase.CENTERED_IID and not (np.all(model.D == 1.0) and np.all(model.Dt == 1.0)):
        raise ParameterDomainError("centered_iid reduction needs D = Dt = I")
    if case is SpecialCase.NONCENTERED_CIRCULAR and moments.vartheta != 0:
        raise ParameterDomainError("noncentered_circular reduction needs vartheta = 0")

    sol = solve(model, SpectralPoint.from_sigma2(sigma2), opts)
    s2 = sigma2 * sigma2
    v2 = abs(moments.vartheta) ** 2
    if case is SpecialCase.CENTERED_IID:
        product = (sol.delta.real ** 2 / model.c) * sol.delta_t.real ** 2
        return 0.5 * (math.log(1.0 - v2 * s2 * product) - moments.kappa * s2 * product)
    q = trace_functionals(model, sol)
    if case is SpecialCase.CENTERED:
        product = (q.gamma * q.gamma_t).real
        return 0.5 * (math.log(1.0 - v2 * s2 * product) - moments.kappa * s2 * product)
    return -0.5 * moments.kappa * s2 * (q.eta * q.eta_t).real


# ============================================
# Sample MI / outage
# ============================================

def mutual_information(H: np.ndarray, sigma2: float) -> float:
    """
    log det(I + H H^H / sigma2) in nats, through the smaller Gram matrix

    Examples:
        >>> round(mutual_information(np.ones((1, 1)), 1.0), 4)
        0.6931
    """
    if sigma2 <= 0:
        raise ParameterDomainError(f"sigma2 must be > 0, got {sigma2}")
    H = np.asarray(H, dtype=np.complex128)
    N, M = H.shape
    gram = H @ H.conj().T if N <= M else H.conj().T @ H
    return max(hpd_logdet(np.eye(gram.shape[0]) + gram / sigma2), 0.0)


def standard_normal_cdf(x: float) -> float:
    """Phi(x) = 1 - Q(x) = erfc(-x / sqrt 2) / 2, accurate in both tails"""
    return float(0.5 * erfc(-x / math.sqrt(2.0)))


def outage_probability(stats: MIStatistics, R: float) -> float:
    """P(C <= R) under N(V + B_C, Theta)"""
    if stats.Theta <= 0:
        raise DegenerateDeterminantError(f"outage needs Theta > 0, got {stats.Theta:.6g}")
    if R == math.inf:
        return 1.0
    if R == -math.inf:
        return 0.0
    return standard_normal_cdf((R - stats.mean) / math.sqrt(stats.Theta))


def empirical_outage(samples: np.ndarray, R: float) -> float:
    """Fraction of MI samples at or below R"""
    samples = np.sort(np.asarray(samples, dtype=np.float64))
    if samples.size == 0:
        raise ParameterDomainError("empirical outage needs at least one sample")
    return float(np.searchsorted(samples, R, side="right") / samples.size)
