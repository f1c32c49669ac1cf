import itertools
import math
from typing import Optional, Tuple

import numpy as np
import pytest
from scipy.stats import kstest

from rmtbias.errors import ConfigurationError, ParameterDomainError
from rmtbias.models.config import ScenarioConfig
from rmtbias.models.domain import EntryDistribution, EntryMoments, ModulusLaw
from rmtbias.repositories.scenario_repository import scenario_with_N
from rmtbias.services.bias_engine import bias_closed_form
from rmtbias.services.channel_model import distribution_from_config, model_from_config, moments_of
from rmtbias.services.fixed_point import resolvent_trace_de, solve
from rmtbias.services.mi_statistics import mi_clt, mutual_information
from rmtbias.services.monte_carlo import (
    quadratic_form_cov_oracle,
    quadratic_form_covariance,
    run_mi_experiment,
    run_resolvent_experiment,
    sample_channel,
    sample_entry,
)
from rmtbias.utils.rng import StreamTag, trial_stream

from tests.conftest import GAUSSIAN_CIRCULAR, SCENARIO, WEIBULL_NONCIRCULAR, profile_model

LAWS = [
    WEIBULL_NONCIRCULAR,
    EntryDistribution(ModulusLaw.LOGNORMAL, 0.4, 1.2, 0.8),
    EntryDistribution(ModulusLaw.NAKAGAMI, 2.5, 0.5, 1.5),
    EntryDistribution(ModulusLaw.GAUSSIAN, None, 1.6, 0.4),
]


@pytest.mark.slow
@pytest.mark.parametrize("dist", LAWS, ids=lambda d: d.law.value)
def test_sampled_entries_match_their_moments(dist) -> None:
    x = sample_entry(dist, trial_stream(3, 0, StreamTag.ENTRY), 400_000)
    moments = moments_of(dist)
    assert np.mean(np.abs(x) ** 2) == pytest.approx(1.0, abs=0.02)
    assert np.mean(x * x).real == pytest.approx(moments.vartheta.real, abs=0.02)
    assert np.mean(np.abs(x) ** 4) == pytest.approx(moments.fourth_moment, rel=0.05)


def test_sample_channel_rejects_mismatched_distribution(noncircular_model) -> None:
    with pytest.raises(ConfigurationError):
        sample_channel(noncircular_model, GAUSSIAN_CIRCULAR, np.random.default_rng(0))


def test_first_sample_is_the_first_trial_channel(noncircular_model) -> None:
    summary = run_mi_experiment(noncircular_model, WEIBULL_NONCIRCULAR, 0.2, trials=10, seed=9)
    H = sample_channel(noncircular_model, WEIBULL_NONCIRCULAR, trial_stream(9, 0, StreamTag.CHANNEL))
    assert summary.samples[0] == pytest.approx(mutual_information(H, 0.2), rel=1e-10)
    assert summary.mean_C == pytest.approx(np.mean(summary.samples), rel=1e-12)
    assert summary.var_C == pytest.approx(np.var(summary.samples, ddof=1), rel=1e-10)


def test_results_do_not_depend_on_worker_count(noncircular_model) -> None:
    runs = [
        run_mi_experiment(noncircular_model, WEIBULL_NONCIRCULAR, 0.2, trials=700, seed=42, workers=w, resolvent_z=-0.2)
        for w in (1, 3, 8)
    ]
    for run in runs[1:]:
        assert run.mean_C == runs[0].mean_C
        assert run.var_C == runs[0].var_C
        assert run.emp_resolvent_bias == runs[0].emp_resolvent_bias
        assert np.array_equal(run.samples, runs[0].samples)


def test_different_seeds_differ(noncircular_model) -> None:
    first = run_mi_experiment(noncircular_model, WEIBULL_NONCIRCULAR, 0.2, trials=20, seed=1)
    second = run_mi_experiment(noncircular_model, WEIBULL_NONCIRCULAR, 0.2, trials=20, seed=2)
    assert first.mean_C != second.mean_C


def test_ecdf_cap_keeps_a_deterministic_subset(noncircular_model) -> None:
    capped = run_mi_experiment(noncircular_model, WEIBULL_NONCIRCULAR, 0.2, trials=600, seed=4, ecdf_cap=100)
    again = run_mi_experiment(noncircular_model, WEIBULL_NONCIRCULAR, 0.2, trials=600, seed=4, ecdf_cap=100, workers=4)
    full = run_mi_experiment(noncircular_model, WEIBULL_NONCIRCULAR, 0.2, trials=600, seed=4)
    assert capped.samples.size == 100
    assert np.array_equal(capped.samples, again.samples)
    assert np.all(np.isin(capped.samples, full.samples))
    assert capped.mean_C == full.mean_C
    assert np.all(np.diff(capped.ecdf) >= 0)


def test_empirical_biases_are_relative_to_deterministic_terms(noncircular_model) -> None:
    stats = mi_clt(noncircular_model, 0.2)
    summary = run_mi_experiment(noncircular_model, WEIBULL_NONCIRCULAR, 0.2, trials=50, seed=0, stats=stats)
    assert summary.emp_bias_mean == pytest.approx(summary.mean_C - stats.V)
    assert summary.emp_bias_var == pytest.approx(summary.var_C - stats.Theta_G)


def test_resolvent_experiment_averages_traces(noncircular_model) -> None:
    z = -0.3 + 0.2j
    estimate = run_resolvent_experiment(noncircular_model, WEIBULL_NONCIRCULAR, z, trials=2, seed=6)
    traces = []
    for t in range(2):
        H = sample_channel(noncircular_model, WEIBULL_NONCIRCULAR, trial_stream(6, t, StreamTag.CHANNEL))
        traces.append(np.trace(np.linalg.inv(H @ H.conj().T - z * np.eye(noncircular_model.N))))
    trace_T = resolvent_trace_de(solve(noncircular_model, z))
    assert estimate.trace_T == trace_T
    assert estimate.estimate == pytest.approx(np.mean(traces) - trace_T, rel=1e-9)


def test_tall_channel_resolvent_counts_null_space() -> None:
    model = profile_model(6, 3, WEIBULL_NONCIRCULAR)
    z = -0.5
    estimate = run_resolvent_experiment(model, WEIBULL_NONCIRCULAR, z, trials=2, seed=2)
    H = sample_channel(model, WEIBULL_NONCIRCULAR, trial_stream(2, 0, StreamTag.CHANNEL))
    H1 = sample_channel(model, WEIBULL_NONCIRCULAR, trial_stream(2, 1, StreamTag.CHANNEL))
    direct = np.mean([np.trace(np.linalg.inv(G @ G.conj().T - z * np.eye(6))) for G in (H, H1)])
    assert estimate.estimate + estimate.trace_T == pytest.approx(direct, rel=1e-9)


def test_experiments_need_two_trials(noncircular_model) -> None:
    with pytest.raises(ParameterDomainError):
        run_mi_experiment(noncircular_model, WEIBULL_NONCIRCULAR, 0.2, trials=1, seed=0)


def test_covariance_of_squared_norms_for_gaussian_vectors() -> None:
    N = 5
    analytic, terms = quadratic_form_covariance(
        np.zeros(N), np.ones(N), np.eye(N), np.eye(N), moments_of(GAUSSIAN_CIRCULAR)
    )
    assert analytic == pytest.approx(1.0 / N)
    assert len(terms) == 11
    assert sum(abs(t) for t in terms[1:]) == 0


def test_covariance_expansion_is_exact_for_a_two_point_law() -> None:
    # x = e^{j pi/4} s with s = sqrt(2) w.p. 1/3 and -1/sqrt(2) w.p. 2/3
    phase = np.exp(1j * np.pi / 4)
    points = phase * np.array([math.sqrt(2.0), -1.0 / math.sqrt(2.0)])
    weights = np.array([1.0 / 3.0, 2.0 / 3.0])
    moments = EntryMoments(vartheta=phase ** 2, kappa=-1.5, zeta=phase / math.sqrt(2.0))

    rng = np.random.default_rng(21)
    N = 3
    a = rng.standard_normal(N) + 1j * rng.standard_normal(N)
    d = rng.uniform(0.5, 1.5, N)
    G = rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))
    L = rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))

    scale = np.sqrt(d / N)
    u, v, p = [], [], []
    for outcome in itertools.product(range(2), repeat=N):
        index = list(outcome)
        z = a + scale * points[index]
        u.append(z.conj() @ G @ z)
        v.append(z.conj() @ L @ z)
        p.append(np.prod(weights[index]))
    u, v, p = np.array(u), np.array(v), np.array(p)
    exact = np.sum(p * (u - p @ u) * (v - p @ v))

    analytic, terms = quadratic_form_covariance(a, d, G, L, moments)
    assert analytic == pytest.approx(exact, rel=1e-10)
    zeta_part = sum(terms[6:10])
    assert abs(zeta_part) > 1e-6
    assert abs(analytic - zeta_part - exact) > 1e-6


ORACLE_LAWS = [
    GAUSSIAN_CIRCULAR,
    EntryDistribution(ModulusLaw.WEIBULL, 1.0, 1.0, 1.0),
    WEIBULL_NONCIRCULAR,
    EntryDistribution(ModulusLaw.GAUSSIAN, None, 1.6, 0.4),
]


@pytest.mark.slow
@pytest.mark.parametrize("dist", ORACLE_LAWS, ids=["gaussian", "weibull", "weibull_noncircular", "gaussian_noncircular"])
def test_covariance_oracle_matches_analytic_expansion(dist) -> None:
    rng = np.random.default_rng(17)
    N = 6
    a = (rng.standard_normal(N) + 1j * rng.standard_normal(N)) / 2.0
    d = rng.uniform(0.5, 1.5, N)
    G = rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))
    L = rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))
    result = quadratic_form_cov_oracle(a, d, G, L, dist, trials=1_000_000, seed=8)
    assert result.samples == 1_000_000
    assert abs(result.empirical.real - result.analytic.real) < 4.0 * result.stderr.real
    assert abs(result.empirical.imag - result.analytic.imag) < 4.0 * result.stderr.imag


# ============================================
# Scenario acceptance runs (Weibull k=1, vartheta=0.6, c=1/2, sigma2=0.2)
# ============================================

SIGMA2 = 0.2
TRIALS = 20_000


def _scenario(N: int, entry: Optional[dict] = None):
    document = dict(SCENARIO, entry=entry) if entry else SCENARIO
    scenario = scenario_with_N(ScenarioConfig.model_validate(document), N)
    return model_from_config(scenario), distribution_from_config(scenario.entry)


def _extrapolated(gap_small: float, se_small: float, gap_large: float, se_large: float) -> Tuple[float, float]:
    """2 gap(2N) - gap(N) and its standard error; cancels a gap decaying like 1/N"""
    return 2.0 * gap_large - gap_small, math.sqrt(4.0 * se_large ** 2 + se_small ** 2)


@pytest.mark.slow
def test_resolvent_bias_matches_closed_form() -> None:
    gaps, errors = [], []
    for N, seed in ((16, 101), (32, 102)):
        model, dist = _scenario(N)
        estimate = run_resolvent_experiment(model, dist, -SIGMA2, trials=TRIALS, seed=seed, workers=4)
        analytic = bias_closed_form(model, solve(model, -SIGMA2)).total
        gaps.append(estimate.estimate.real - analytic.real)
        errors.append(estimate.stderr.real)
    gap, se = _extrapolated(gaps[0], errors[0], gaps[1], errors[1])
    assert abs(gap) <= 3.0 * se


@pytest.mark.slow
def test_mutual_information_fits_the_corrected_clt() -> None:
    runs = {}
    for N, seed in ((16, 201), (32, 202)):
        model, dist = _scenario(N)
        stats = mi_clt(model, SIGMA2)
        runs[N] = stats, run_mi_experiment(model, dist, SIGMA2, trials=TRIALS, seed=seed, workers=4, stats=stats)

    stats, summary = runs[32]
    assert abs(summary.mean_C - stats.mean) <= 3.0 * summary.se_mean
    assert summary.samples.size == TRIALS
    normalized = (summary.samples - stats.mean) / math.sqrt(stats.Theta)
    assert kstest(normalized, "norm").statistic <= 0.02

    small, large = runs[16], runs[32]
    gap, se = _extrapolated(
        small[1].var_C - small[0].Theta, small[1].se_var,
        large[1].var_C - large[0].Theta, large[1].se_var,
    )
    assert abs(gap) <= 3.0 * se


@pytest.mark.slow
def test_circular_gaussian_entries_carry_no_bias() -> None:
    model, dist = _scenario(32, entry={"law": "gaussian"})
    stats = mi_clt(model, SIGMA2)
    assert stats.B_C == 0
    assert stats.Theta_B == 0
    summary = run_mi_experiment(model, dist, SIGMA2, trials=TRIALS, seed=303, workers=4, stats=stats)
    assert abs(summary.emp_bias_mean) <= 3.0 * summary.se_mean
