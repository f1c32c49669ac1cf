"""
Scenario diagnostics (validate)

Every check reports pass / warn / fail instead of raising, so one run shows
everything that is wrong with a scenario.
"""
import logging
import math
from typing import List, Optional

import numpy as np

from rmtbias.errors import RMTBiasError
from rmtbias.models.config import ExperimentConfig
from rmtbias.models.domain import ChannelModel, EntryDistribution, EntryMoments, ModulusLaw, SpectralPoint
from rmtbias.models.outputs import CheckStatus, ValidationItem
from rmtbias.services.channel_model import (
    LOGNORMAL_HEAVY_TAIL_SIGMA,
    distribution_from_config,
    moments_of,
    scenario_arrays,
)
from rmtbias.services.fixed_point import identity_gaps, solve
from rmtbias.services.mi_statistics import mi_clt
from rmtbias.services.monte_carlo import sample_entry
from rmtbias.services.quantities import trace_functionals
from rmtbias.utils.rng import StreamTag, trial_stream

logger = logging.getLogger(__name__)

IDENTITY_PASS_TOL = 1e-10
IDENTITY_WARN_TOL = 1e-6
SAMPLE_MOMENT_SE = 4.0


def _item(check: str, ok: bool, detail: str, warn: bool = False) -> ValidationItem:
    if ok:
        status = CheckStatus.WARN if warn else CheckStatus.PASS
    else:
        status = CheckStatus.FAIL
    return ValidationItem(check=check, status=status, detail=detail)


def _dimension_checks(config: ExperimentConfig) -> List[ValidationItem]:
    N, M = config.scenario.N, config.scenario.M
    c = N / M
    return [_item("A1_dimensions", 0 < c < math.inf, f"N={N}, M={M}, c={c:.6g}")]


def _moment_checks(config: ExperimentConfig):
    try:
        dist = distribution_from_config(config.scenario.entry)
    except RMTBiasError as e:
        return [_item("A2_moment_normalization", False, e.detail)], None, None
    items = [_item(
        "A2_moment_normalization", True,
        f"sigma_r2 + sigma_i2 = {dist.sigma_r2 + dist.sigma_i2:g}",
    )]
    try:
        moments = moments_of(dist)
    except RMTBiasError as e:
        return items + [_item("A2_moments", False, e.detail)], dist, None
    items.append(_item(
        "A2_moments", True,
        f"vartheta={moments.vartheta.real:.6g}, kappa={moments.kappa:.6g}, E|x|^4={moments.fourth_moment:.6g}",
    ))
    if dist.law is ModulusLaw.LOGNORMAL and dist.param > LOGNORMAL_HEAVY_TAIL_SIGMA:
        items.append(_item("heavy_tail", True, f"lognormal sigma={dist.param:g}: slow MC convergence", warn=True))
    return items, dist, moments


def _array_checks(config: ExperimentConfig, base_dir, moments: Optional[EntryMoments]):
    try:
        A, D, Dt = scenario_arrays(config.scenario, base_dir)
    except RMTBiasError as e:
        return [_item("scenario_arrays", False, e.detail)], None
    M = config.scenario.M
    items = []
    profiles_ok = bool(np.all(D >= 0) and np.all(Dt >= 0) and D.sum() / M > 0 and Dt.sum() / M > 0)
    items.append(_item(
        "A4_variance_profiles", profiles_ok,
        f"min D={D.min():.4g}, mean D={D.sum() / M:.4g}, min Dt={Dt.min():.4g}, mean Dt={Dt.sum() / M:.4g}",
    ))
    norm = float(np.linalg.norm(A, 2)) if np.any(A) else 0.0
    items.append(_item("A3_los_norm", bool(np.isfinite(norm)), f"||A||={norm:.6g}"))
    if not profiles_ok or moments is None:
        return items, None
    try:
        model = ChannelModel(A=A, D=D, Dt=Dt, moments=moments, norm_cap=config.scenario.norm_cap)
    except RMTBiasError as e:
        items.append(_item("model", False, e.detail))
        return items, None
    items.append(_item("model", True, f"||A||={model.spectral_norm:.6g} <= cap {model.norm_limit:.6g}"))
    return items, model


def _solution_checks(config: ExperimentConfig, model: ChannelModel) -> List[ValidationItem]:
    sigma2 = config.sigma2
    try:
        sol = solve(model, SpectralPoint.from_sigma2(sigma2), config.solver)
    except RMTBiasError as e:
        return [_item("fixed_point", False, e.detail)]
    items = [_item(
        "fixed_point", True,
        f"sigma2={sigma2:g}: {sol.iterations} iterations, residual {sol.residual:.2e}",
        warn=sol.damping != 1.0,
    )]

    gaps = identity_gaps(model, sol)
    worst = max(gaps.values())
    items.append(_item(
        "identities", worst <= IDENTITY_WARN_TOL,
        ", ".join(f"{name}={gap:.2e}" for name, gap in gaps.items()),
        warn=worst > IDENTITY_PASS_TOL,
    ))

    try:
        q = trace_functionals(model, sol)
    except RMTBiasError as e:
        return items + [_item("Delta_positivity", False, e.detail)]
    positive = q.Delta.real > 0 and q.Delta_T.real > 0
    items.append(_item(
        "Delta_positivity", positive, f"Delta={q.Delta.real:.6g}, Delta_T={q.Delta_T.real:.6g}",
    ))
    if positive:
        try:
            stats = mi_clt(model, sigma2, config.solver, quantities=q)
            items.append(_item("Theta_positivity", True, f"Theta={stats.Theta:.6g}, Theta_G={stats.Theta_G:.6g}"))
        except RMTBiasError as e:
            items.append(_item("Theta_positivity", False, e.detail))
    return items


def sample_moment_check(dist: EntryDistribution, moments: EntryMoments, n: int, seed: int) -> List[ValidationItem]:
    """Empirical vartheta, kappa and E|x|^2 of n draws against the analytic values (4 SE)"""
    x = sample_entry(dist, trial_stream(seed, 0, StreamTag.ENTRY), n)
    power = np.abs(x) ** 2
    pseudo = x * x
    vartheta_hat = complex(pseudo.mean())
    kappa_hat = float((power * power).mean() - abs(vartheta_hat) ** 2 - 2.0)
    se_power = float(power.std(ddof=1) / math.sqrt(n))
    se_pseudo = float(np.abs(pseudo - vartheta_hat).std(ddof=1) / math.sqrt(n))
    se_fourth = float((power * power).std(ddof=1) / math.sqrt(n))

    def within(estimate, target, se):
        return abs(estimate - target) <= SAMPLE_MOMENT_SE * max(se, 1e-15)

    checks = [
        ("sample_power", power.mean(), 1.0, se_power),
        ("sample_vartheta", vartheta_hat, moments.vartheta, se_pseudo),
        ("sample_kappa", kappa_hat, moments.kappa, se_fourth),
    ]
    return [
        ValidationItem(
            check=name,
            status=CheckStatus.PASS if within(est, target, se) else CheckStatus.WARN,
            detail=f"empirical {complex(est).real:.6g} vs analytic {complex(target).real:.6g} (se {se:.2g}, n={n})",
        )
        for name, est, target, se in checks
    ]


def validate(config: ExperimentConfig, base_dir=None, sample_moments: Optional[int] = None) -> List[ValidationItem]:
    """
    시나리오 진단

    Args:
        config: experiment document (already schema-validated)
        base_dir: 상대 경로 기준 디렉터리
        sample_moments: 주어지면 n 개 엔트리를 뽑아 모멘트를 비교

    Returns:
        ValidationItem 목록 (pass / warn / fail)
    """
    items = _dimension_checks(config)
    moment_items, dist, moments = _moment_checks(config)
    items += moment_items
    array_items, model = _array_checks(config, base_dir, moments)
    items += array_items
    if model is not None:
        items += _solution_checks(config, model)
    if sample_moments and dist is not None and moments is not None:
        items += sample_moment_check(dist, moments, sample_moments, config.mc.seed)

    failed = sum(item.status is CheckStatus.FAIL for item in items)
    if failed:
        logger.warning(f"validate: {failed} failed check(s)")
    return items
