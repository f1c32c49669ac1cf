"""
Monte-Carlo simulator

Trials are grouped in fixed blocks of BLOCK_SIZE; trial t always draws from
trial_stream(seed, t), each block is reduced to streaming-moment
accumulators and the blocks are merged in block order. The worker count
only changes which thread computes a block, never the result.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from scipy.special import gamma

from rmtbias.errors import ConfigurationError, ParameterDomainError, TrialFailedError
from rmtbias.models.domain import (
    ChannelModel,
    CovarianceOracleResult,
    EntryDistribution,
    EntryMoments,
    MIStatistics,
    ModulusLaw,
    MonteCarloSummary,
    ResolventEstimate,
    SpectralPoint,
)
from rmtbias.services.channel_model import moments_of
from rmtbias.services.fixed_point import PointLike, as_point, resolvent_trace_de, solve
from rmtbias.services.mi_statistics import mi_clt
from rmtbias.utils.rng import StreamTag, trial_stream
from rmtbias.utils.stats import StreamingMoments

logger = logging.getLogger(__name__)

BLOCK_SIZE = 256
ORACLE_BLOCK_SIZE = 4096
DEFAULT_ECDF_CAP = 200_000
MOMENT_MATCH_TOL = 1e-9


# ============================================
# Sampling
# ============================================

def _modulus(dist: EntryDistribution, rng: np.random.Generator, size) -> np.ndarray:
    law, p = dist.law, dist.param
    if law is ModulusLaw.WEIBULL:
        scale = 1.0 / math.sqrt(gamma(1.0 + 2.0 / p))
        return scale * (-np.log1p(-rng.random(size))) ** (1.0 / p)
    if law is ModulusLaw.LOGNORMAL:
        return np.exp(-p * p + p * rng.standard_normal(size))
    # Nakagami, Omega = 1
    return np.sqrt(rng.gamma(p, 1.0 / p, size))


def sample_entry(dist: EntryDistribution, rng: np.random.Generator, size=None):
    """
    X = r (sigma_r cos phi + j sigma_i sin phi), phi ~ U[0, 2 pi)

    The gaussian law draws the real and imaginary parts directly as
    N(0, sigma_r2 / 2) and N(0, sigma_i2 / 2).
    """
    sr, si = math.sqrt(dist.sigma_r2), math.sqrt(dist.sigma_i2)
    if dist.law is ModulusLaw.GAUSSIAN:
        re = rng.standard_normal(size)
        im = rng.standard_normal(size)
        return (sr * re + 1j * si * im) / math.sqrt(2.0)
    r = _modulus(dist, rng, size)
    phi = 2.0 * np.pi * rng.random(size)
    return r * (sr * np.cos(phi) + 1j * si * np.sin(phi))


def _check_moments(model: ChannelModel, dist: EntryDistribution) -> None:
    expected = moments_of(dist)
    got = model.moments
    if abs(expected.vartheta - got.vartheta) > MOMENT_MATCH_TOL or abs(expected.kappa - got.kappa) > MOMENT_MATCH_TOL:
        raise ConfigurationError(
            f"entry distribution moments (vartheta={expected.vartheta.real:.6g}, kappa={expected.kappa:.6g}) "
            f"do not match the model (vartheta={got.vartheta:.6g}, kappa={got.kappa:.6g})"
        )


def _scatter(model: ChannelModel, X: np.ndarray) -> np.ndarray:
    scale_rx = np.sqrt(model.D)[:, None]
    scale_tx = np.sqrt(model.Dt)[None, :]
    return model.A + scale_rx * X * scale_tx / math.sqrt(model.M)


def sample_channel(model: ChannelModel, dist: EntryDistribution, rng: np.random.Generator) -> np.ndarray:
    """
    H = A + (1/sqrt(M)) D^{1/2} X Dt^{1/2}

    Raises:
        ConfigurationError: moments_of(dist) differs from model.moments
    """
    _check_moments(model, dist)
    return _scatter(model, sample_entry(dist, rng, (model.N, model.M)))


# ============================================
# Block runner
# ============================================

@dataclass(frozen=True)
class _BlockResult:
    mi: StreamingMoments
    trace_re: StreamingMoments
    trace_im: StreamingMoments
    kept: np.ndarray


def _run_block(
    model: ChannelModel,
    dist: EntryDistribution,
    seed: int,
    start: int,
    stop: int,
    sigma2: Optional[float],
    z: Optional[complex],
    keep: Optional[np.ndarray],
) -> _BlockResult:
    N, M = model.N, model.M
    try:
        H = np.stack([
            _scatter(model, sample_entry(dist, trial_stream(seed, t, StreamTag.CHANNEL), (N, M)))
            for t in range(start, stop)
        ])
        HH = np.conj(np.swapaxes(H, 1, 2))
        gram = H @ HH if N <= M else HH @ H
        eig = np.clip(np.linalg.eigvalsh(gram), 0.0, None)
    except (np.linalg.LinAlgError, ValueError, FloatingPointError) as e:
        raise TrialFailedError(f"trials {start}..{stop - 1}: {e}", trial=start) from e

    mi = StreamingMoments()
    kept = np.empty(0)
    if sigma2 is not None:
        values = np.sum(np.log1p(eig / sigma2), axis=1)
        if not np.all(np.isfinite(values)):
            bad = start + int(np.argmax(~np.isfinite(values)))
            raise TrialFailedError(f"trial {bad}: non-finite mutual information", trial=bad)
        mi = StreamingMoments.from_values(values)
        if keep is None:
            kept = values
        else:
            kept = values[np.isin(np.arange(start, stop), keep)]

    trace_re, trace_im = StreamingMoments(), StreamingMoments()
    if z is not None:
        traces = np.sum(1.0 / (eig - z), axis=1)
        if N > M:
            # N - M zero eigenvalues of HH^H
            traces = traces + (N - M) / (-z)
        trace_re = StreamingMoments.from_values(traces.real)
        trace_im = StreamingMoments.from_values(traces.imag)
    return _BlockResult(mi, trace_re, trace_im, kept)


def _run_blocks(
    model: ChannelModel,
    dist: EntryDistribution,
    trials: int,
    seed: int,
    workers: int,
    sigma2: Optional[float] = None,
    z: Optional[complex] = None,
    keep: Optional[np.ndarray] = None,
) -> List[_BlockResult]:
    if trials < 2:
        raise ParameterDomainError(f"trials must be >= 2, got {trials}")
    _check_moments(model, dist)
    bounds = [(start, min(start + BLOCK_SIZE, trials)) for start in range(0, trials, BLOCK_SIZE)]

    def work(bound: Tuple[int, int]) -> _BlockResult:
        return _run_block(model, dist, seed, bound[0], bound[1], sigma2, z, keep)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(work, bounds))
    return [work(bound) for bound in bounds]


def _merged(parts: List[StreamingMoments]) -> StreamingMoments:
    total = StreamingMoments()
    for part in parts:
        total = total.merge(part)
    return total


def _reservoir(trials: int, cap: int, seed: int) -> Optional[np.ndarray]:
    if trials <= cap:
        return None
    rng = trial_stream(seed, 0, StreamTag.RESERVOIR)
    return np.sort(rng.choice(trials, size=cap, replace=False))


# ============================================
# Experiments
# ============================================

def run_mi_experiment(
    model: ChannelModel,
    dist: EntryDistribution,
    sigma2: float,
    trials: int,
    seed: int,
    workers: int = 1,
    resolvent_z: Optional[PointLike] = None,
    ecdf_cap: int = DEFAULT_ECDF_CAP,
    stats: Optional[MIStatistics] = None,
) -> MonteCarloSummary:
    """
    Empirical mean / variance / ECDF of C(sigma2) over `trials` channel draws

    Args:
        model: 채널 모델
        dist: 엔트리 분포 (moments_of(dist) == model.moments)
        sigma2: 잡음 분산
        trials: 시행 횟수 (>= 2)
        seed: 64-bit seed
        workers: 블록 병렬 실행 개수 (결과에 영향 없음)
        resolvent_z: 주어지면 같은 채널로 E Tr Q(z) - Tr T(z) 도 추정
        ecdf_cap: 저장할 MI 샘플 상한 (초과 시 결정적 reservoir)
        stats: mi_clt 결과 (없으면 계산)

    Raises:
        TrialFailedError: 시행 실패 (시행 인덱스 포함)
    """
    if sigma2 <= 0:
        raise ParameterDomainError(f"sigma2 must be > 0, got {sigma2}")
    point = as_point(resolvent_z) if resolvent_z is not None else None
    keep = _reservoir(trials, ecdf_cap, seed)
    blocks = _run_blocks(
        model, dist, trials, seed, workers, sigma2=sigma2,
        z=point.z if point is not None else None, keep=keep,
    )
    mi = _merged([b.mi for b in blocks])
    samples = np.concatenate([b.kept for b in blocks])
    stats = stats or mi_clt(model, sigma2)

    resolvent_bias, se_resolvent = None, None
    if point is not None:
        resolvent_bias, se_resolvent, _ = _resolvent_from_blocks(model, point, blocks)

    logger.info(
        f"MC: {trials} trials, seed={seed}, mean C={mi.mean:.6g} (se {mi.se_mean:.2g}), var={mi.variance:.6g}"
    )
    return MonteCarloSummary(
        trials=trials,
        seed=seed,
        mean_C=mi.mean,
        var_C=mi.variance,
        se_mean=mi.se_mean,
        se_var=mi.se_variance,
        samples=samples,
        emp_bias_mean=mi.mean - stats.V,
        emp_bias_var=mi.variance - stats.Theta_G,
        emp_resolvent_bias=resolvent_bias,
        se_resolvent=se_resolvent,
    )


def _resolvent_from_blocks(
    model: ChannelModel, point: SpectralPoint, blocks: List[_BlockResult]
) -> Tuple[complex, complex, complex]:
    """(E Tr Q - Tr T, its real/imag standard errors, Tr T)"""
    re = _merged([b.trace_re for b in blocks])
    im = _merged([b.trace_im for b in blocks])
    trace_T = resolvent_trace_de(solve(model, point))
    return complex(re.mean, im.mean) - trace_T, complex(re.se_mean, im.se_mean), trace_T


def run_resolvent_experiment(
    model: ChannelModel,
    dist: EntryDistribution,
    z: PointLike,
    trials: int,
    seed: int,
    workers: int = 1,
) -> ResolventEstimate:
    """E Tr (HH^H - zI)^{-1} - Tr T(z) by Monte-Carlo"""
    point = as_point(z)
    blocks = _run_blocks(model, dist, trials, seed, workers, z=point.z)
    estimate, stderr, trace_T = _resolvent_from_blocks(model, point, blocks)
    return ResolventEstimate(
        z=point.z,
        estimate=estimate,
        stderr=stderr,
        trace_T=trace_T,
        trials=trials,
        seed=seed,
    )


# ============================================
# Covariance of two quadratic forms
# ============================================

def quadratic_form_covariance(
    a: np.ndarray,
    D: np.ndarray,
    Gamma: np.ndarray,
    Lambda: np.ndarray,
    moments: EntryMoments,
) -> Tuple[complex, Tuple[complex, ...]]:
    """
    E (z^H G z - E z^H G z)(z^H L z - E z^H L z) for z = a + N^{-1/2} D^{1/2} x

    Returns the total and its terms in the order
    Tr GDLD, a^H G D L a, a^H L D G a, |v|^2 Tr G D L^T D, v a^H L D G^T conj(a),
    conj(v) a^T L^T D G a, four zeta terms, kappa Tr D^2 diag(L) diag(G).
    """
    a = np.asarray(a, dtype=np.complex128)
    d = np.asarray(D, dtype=np.float64)
    G = np.asarray(Gamma, dtype=np.complex128)
    L = np.asarray(Lambda, dtype=np.complex128)
    N = a.size
    v, kappa, zeta = moments.vartheta, moments.kappa, moments.zeta
    aH = a.conj()
    d32 = d ** 1.5
    gdiag, ldiag = np.diag(G), np.diag(L)
    DL = d[:, None] * L
    DG = d[:, None] * G

    terms = (
        np.trace(G @ DL @ np.diag(d)) / N ** 2,
        aH @ G @ DL @ a / N,
        aH @ L @ DG @ a / N,
        abs(v) ** 2 * np.trace(G @ (d[:, None] * L.T) @ np.diag(d)) / N ** 2,
        v * (aH @ L @ (d[:, None] * G.T) @ a.conj()) / N,
        np.conj(v) * (a @ L.T @ DG @ a) / N,
        zeta * (aH @ G @ (d32 * ldiag)) / N ** 1.5,
        np.conj(zeta) * ((d32 * ldiag) @ G @ a) / N ** 1.5,
        zeta * (aH @ L @ (d32 * gdiag)) / N ** 1.5,
        np.conj(zeta) * ((d32 * gdiag) @ L @ a) / N ** 1.5,
        kappa * np.sum(d * d * ldiag * gdiag) / N ** 2,
    )
    terms = tuple(complex(t) for t in terms)
    return complex(sum(terms)), terms


def quadratic_form_cov_oracle(
    a: np.ndarray,
    D: np.ndarray,
    Gamma: np.ndarray,
    Lambda: np.ndarray,
    dist: EntryDistribution,
    trials: int,
    seed: int,
    moments: Optional[EntryMoments] = None,
) -> CovarianceOracleResult:
    """
    Analytic covariance expansion next to its empirical estimate

    Args:
        a: 결정적 벡터 (길이 N)
        D: 대각 성분 (길이 N, >= 0)
        Gamma, Lambda: N x N 행렬
        dist: x 의 엔트리 분포
        trials: 표본 수
        seed: 64-bit seed
        moments: 해석식에 쓸 모멘트 (기본값: moments_of(dist))
    """
    a = np.asarray(a, dtype=np.complex128)
    d = np.asarray(D, dtype=np.float64)
    G = np.asarray(Gamma, dtype=np.complex128)
    L = np.asarray(Lambda, dtype=np.complex128)
    N = a.size
    if d.shape != (N,) or G.shape != (N, N) or L.shape != (N, N):
        raise ParameterDomainError(
            f"inconsistent shapes: a {a.shape}, D {d.shape}, Gamma {G.shape}, Lambda {L.shape}"
        )
    if np.any(d < 0):
        raise ParameterDomainError("D must be non-negative")
    if trials < 2:
        raise ParameterDomainError(f"trials must be >= 2, got {trials}")
    moments = moments or moments_of(dist)
    analytic, terms = quadratic_form_covariance(a, d, G, L, moments)

    u_parts, v_parts = [], []
    scale = np.sqrt(d / N)
    for block, start in enumerate(range(0, trials, ORACLE_BLOCK_SIZE)):
        count = min(ORACLE_BLOCK_SIZE, trials - start)
        x = sample_entry(dist, trial_stream(seed, block, StreamTag.ORACLE), (count, N))
        z = a[None, :] + scale[None, :] * x
        zc = z.conj()
        u_parts.append(np.einsum("ti,ij,tj->t", zc, G, z))
        v_parts.append(np.einsum("ti,ij,tj->t", zc, L, z))
    u = np.concatenate(u_parts)
    v = np.concatenate(v_parts)
    product = (u - u.mean()) * (v - v.mean())
    empirical = complex(product.sum() / (trials - 1))
    stderr = complex(
        np.std(product.real, ddof=1) / math.sqrt(trials),
        np.std(product.imag, ddof=1) / math.sqrt(trials),
    )
    return CovarianceOracleResult(
        analytic=analytic,
        empirical=empirical,
        stderr=stderr,
        samples=trials,
        terms=terms,
    )
