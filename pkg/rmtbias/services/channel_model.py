"""
채널 모델 서비스

엔트리 분포 모멘트(vartheta, kappa, zeta), fading severity(CV),
ULA LoS 행렬, Rician 혼합으로 ChannelModel 을 구성합니다.
"""
import logging
import math
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq
from scipy.special import ellipe, gamma, gammaln

from rmtbias.errors import ConfigurationError, ParameterDomainError
from rmtbias.models.config import EntryConfig, LosKind, ProfileSpec, ScenarioConfig
from rmtbias.models.domain import LAW_PARAMETER, ChannelModel, EntryDistribution, EntryMoments, ModulusLaw
from rmtbias.repositories.scenario_repository import load_array

logger = logging.getLogger(__name__)

# lognormal tails beyond this sigma make MC averages converge slowly
LOGNORMAL_HEAVY_TAIL_SIGMA = 1.0

# search brackets (log-space) for inverting the CV of each law
CV_PARAM_BRACKETS = {
    ModulusLaw.WEIBULL: (0.2, 60.0),
    ModulusLaw.LOGNORMAL: (1e-4, 2.5),
    ModulusLaw.NAKAGAMI: (0.5, 1e5),
}


# ============================================
# Modulus-law moments
# ============================================

def modulus_first_moment(dist: EntryDistribution) -> float:
    """
    E r for the unit-power modulus law (E r^2 = 1)

    Weibull: lambda * Gamma(1 + 1/k), lambda = 1 / sqrt(Gamma(1 + 2/k))
    Lognormal: exp(mu + sigma^2 / 2), mu = -sigma^2
    Nakagami: Gamma(m + 1/2) / (Gamma(m) sqrt(m)), Omega = 1
    """
    law, p = dist.law, dist.param
    if law is ModulusLaw.WEIBULL:
        return math.exp(gammaln(1.0 + 1.0 / p) - 0.5 * gammaln(1.0 + 2.0 / p))
    if law is ModulusLaw.LOGNORMAL:
        return math.exp(-0.5 * p * p)
    if law is ModulusLaw.NAKAGAMI:
        return math.exp(gammaln(p + 0.5) - gammaln(p)) / math.sqrt(p)
    # Rayleigh modulus of a complex Gaussian
    return math.sqrt(math.pi) / 2.0


def modulus_fourth_moment(dist: EntryDistribution) -> float:
    """E r^4 for the unit-power modulus law"""
    law, p = dist.law, dist.param
    if law is ModulusLaw.WEIBULL:
        return float(gamma(1.0 + 4.0 / p) / gamma(1.0 + 2.0 / p) ** 2)
    if law is ModulusLaw.LOGNORMAL:
        return math.exp(4.0 * p * p)
    if law is ModulusLaw.NAKAGAMI:
        return 1.0 + 1.0 / p
    return 2.0


# ============================================
# Entry moments
# ============================================

def moments_of(dist: EntryDistribution) -> EntryMoments:
    """
    Pseudo-variance and fourth cumulant of X = r (sigma_r cos phi + j sigma_i sin phi)

    Args:
        dist: entry distribution (validated on construction)

    Returns:
        EntryMoments with zeta = 0 (uniform phase kills odd moments)

    Examples:
        >>> round(moments_of(EntryDistribution(ModulusLaw.WEIBULL, 1.0, 1.6, 0.4)).kappa, 12)
        4.72
    """
    sr2, si2 = dist.sigma_r2, dist.sigma_i2
    vartheta = (sr2 - si2) / 2.0
    er4 = modulus_fourth_moment(dist)
    fourth = (3.0 / 8.0 * sr2 * sr2 + 3.0 / 8.0 * si2 * si2 + 2.0 / 8.0 * sr2 * si2) * er4
    kappa = fourth - vartheta * vartheta - 2.0
    if dist.law is ModulusLaw.LOGNORMAL and dist.param > LOGNORMAL_HEAVY_TAIL_SIGMA:
        logger.warning(
            f"lognormal sigma={dist.param:g} > {LOGNORMAL_HEAVY_TAIL_SIGMA:g}: heavy tails, "
            "Monte-Carlo averages converge slowly"
        )
    return EntryMoments(vartheta=vartheta, kappa=kappa, zeta=0j)


def cv_of(dist: EntryDistribution) -> float:
    """
    Coefficient of variation of |X|: sqrt(1 / (E|X|)^2 - 1)

    E|X| = f(vartheta) E r with f(vartheta) = (2 sigma_r / pi) E(2 vartheta / sigma_r^2),
    E(.) the complete elliptic integral of the second kind in parameter form.
    """
    sr2, si2 = dist.sigma_r2, dist.sigma_i2
    if sr2 > 0:
        m = 2.0 * dist.vartheta / sr2
        if m > 1.0:
            raise ParameterDomainError(f"2*vartheta/sigma_r2 = {m:.6g} > 1")
        phase_factor = 2.0 * math.sqrt(sr2) / math.pi * float(ellipe(m))
    else:
        # purely imaginary entries: |X| = r sigma_i |sin phi|
        phase_factor = 2.0 * math.sqrt(si2) / math.pi
    mean_abs = phase_factor * modulus_first_moment(dist)
    return math.sqrt(1.0 / (mean_abs * mean_abs) - 1.0)


def distribution_for_cv(dist: EntryDistribution, target_cv: float) -> EntryDistribution:
    """
    Same law and non-circularity weights, law parameter chosen so that cv_of = target_cv

    Raises:
        ParameterDomainError: gaussian law (no free parameter) or target out of reach
    """
    if dist.law is ModulusLaw.GAUSSIAN:
        raise ParameterDomainError("gaussian law has no parameter to sweep the CV")
    lo, hi = CV_PARAM_BRACKETS[dist.law]

    def gap(log_param: float) -> float:
        trial = EntryDistribution(dist.law, math.exp(log_param), dist.sigma_r2, dist.sigma_i2)
        return cv_of(trial) - target_cv

    g_lo, g_hi = gap(math.log(lo)), gap(math.log(hi))
    if g_lo * g_hi > 0:
        raise ParameterDomainError(
            f"CV {target_cv:g} is out of reach for the {dist.law.value} law "
            f"(range {g_lo + target_cv:.4g} .. {g_hi + target_cv:.4g})"
        )
    log_param = brentq(gap, math.log(lo), math.log(hi), xtol=1e-14, rtol=1e-13)
    return EntryDistribution(dist.law, math.exp(log_param), dist.sigma_r2, dist.sigma_i2)


# ============================================
# LoS / Rician construction
# ============================================

def ula_los(N: int, M: int, angles: Optional[Sequence[float]] = None) -> np.ndarray:
    """
    ULA steering matrix: column m is [1, e^{j a_m}, ..., e^{j (N-1) a_m}]^T

    Args:
        N: receive antennas
        M: transmit antennas
        angles: phases a_m (default 2 pi m / N)

    Returns:
        complex N x M matrix with unit-modulus entries
    """
    if N < 1 or M < 1:
        raise ParameterDomainError(f"dimensions must be positive, got N={N}, M={M}")
    if angles is None:
        angles = 2.0 * np.pi * np.arange(M) / N
    angles = np.asarray(angles, dtype=np.float64)
    if angles.shape != (M,):
        raise ParameterDomainError(f"expected {M} ULA angles, got {angles.size}")
    return np.exp(1j * np.outer(np.arange(N), angles))


def rician_model(
    los: np.ndarray,
    K: float,
    D: np.ndarray,
    Dt: np.ndarray,
    moments: EntryMoments,
    norm_cap: Optional[float] = None,
) -> ChannelModel:
    """
    Rician mixing of a LoS matrix with the scattered component.

    A = (1/sqrt(M)) sqrt(K/(K+1)) los; the scattered scale 1/(K+1) is folded
    into the receive profile only (D <- D/(K+1)), Dt is kept as given.

    Raises:
        ParameterDomainError: K < 0 or not finite
    """
    A, D = rician_mix(los, K, D)
    return ChannelModel(A=A, D=D, Dt=np.asarray(Dt, dtype=np.float64), moments=moments, norm_cap=norm_cap)


def rician_mix(los: np.ndarray, K: float, D: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """(A, D) = (sqrt(K/(K+1)) los / sqrt(M), D / (K+1))"""
    if not (K >= 0 and math.isfinite(K)):
        raise ParameterDomainError(f"Rician K must be finite and >= 0, got {K}")
    los = np.asarray(los, dtype=np.complex128)
    M = los.shape[1]
    A = math.sqrt(K / (K + 1.0)) / math.sqrt(M) * los
    return A, np.asarray(D, dtype=np.float64) / (K + 1.0)


# ============================================
# Config -> domain
# ============================================

def distribution_from_config(entry: EntryConfig) -> EntryDistribution:
    """
    EntryConfig -> EntryDistribution

    Raises:
        ConfigurationError: unknown law parameter names
        ParameterDomainError: parameter out of range, sigma_r2 + sigma_i2 != 2
    """
    expected = LAW_PARAMETER[entry.law]
    unknown = set(entry.params) - ({expected} if expected else set())
    if unknown:
        raise ConfigurationError(f"{entry.law.value} law does not take parameter(s) {sorted(unknown)}")
    param = entry.params.get(expected) if expected else None
    return EntryDistribution(entry.law, param, entry.sigma_r2, entry.sigma_i2)


def _profile(spec: ProfileSpec, size: int, name: str, base_dir) -> np.ndarray:
    if isinstance(spec, str):
        if spec == "identity":
            return np.ones(size)
        values = load_array(spec, base_dir, dtype=np.float64)
    else:
        values = np.asarray(spec, dtype=np.float64)
    if values.shape != (size,):
        raise ConfigurationError(f"{name} must have {size} entries, got shape {values.shape}")
    return values


def scenario_arrays(scenario: ScenarioConfig, base_dir=None) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    (A, D, Dt) of a scenario, Rician mixing applied

    A LoS file is taken as the final A (caller-scaled); rician_K must then be 0.
    """
    N, M = scenario.N, scenario.M
    D = _profile(scenario.D, N, "D", base_dir)
    Dt = _profile(scenario.Dt, M, "Dt", base_dir)
    los_cfg = scenario.los
    if los_cfg.kind is LosKind.FILE:
        if scenario.rician_K != 0:
            raise ConfigurationError("rician_K applies to generated LoS only; a LoS file is used as A")
        A = load_array(los_cfg.path, base_dir)
        if A.shape != (N, M):
            raise ConfigurationError(f"LoS file must hold a {N}x{M} matrix, got shape {A.shape}")
        return A, D, Dt
    if los_cfg.kind is LosKind.ZERO:
        los = np.zeros((N, M), dtype=np.complex128)
    else:
        los = ula_los(N, M, los_cfg.angles)
    A, D = rician_mix(los, scenario.rician_K, D)
    return A, D, Dt


def model_from_config(scenario: ScenarioConfig, base_dir=None) -> ChannelModel:
    """ScenarioConfig -> ChannelModel (entry moments from the configured law)"""
    dist = distribution_from_config(scenario.entry)
    A, D, Dt = scenario_arrays(scenario, base_dir)
    return ChannelModel(A=A, D=D, Dt=Dt, moments=moments_of(dist), norm_cap=scenario.norm_cap)
