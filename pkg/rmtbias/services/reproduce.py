"""
Figure pipelines

Each pipeline maps an ExperimentConfig to named tables (lists of flat
rows). Sweep points run in order; a failing point stops the sweep and the
rows computed so far are returned inside a PartialResultsError together with
a failure marker row.
"""
import logging
import math
from enum import Enum
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.stats import kstest, norm

from rmtbias.errors import ConfigurationError, PartialResultsError, RMTBiasError
from rmtbias.models.config import ExperimentConfig, SweepVariable
from rmtbias.models.domain import MIStatistics, MonteCarloSummary, SpectralPoint
from rmtbias.repositories.scenario_repository import scenario_with_N
from rmtbias.services.bias_engine import bias_closed_form
from rmtbias.services.channel_model import (
    cv_of,
    distribution_for_cv,
    distribution_from_config,
    model_from_config,
    moments_of,
)
from rmtbias.services.fixed_point import solve
from rmtbias.services.mi_statistics import empirical_outage, mi_clt, outage_probability
from rmtbias.services.monte_carlo import DEFAULT_ECDF_CAP, run_mi_experiment

logger = logging.getLogger(__name__)

Tables = Dict[str, List[dict]]

FAILURE_MARKER = "FAILED"
DENSITY_GRID = np.linspace(-4.0, 4.0, 81)
CDF_POINTS = 101

DEFAULT_SWEEPS = {
    SweepVariable.N: [8, 16, 32],
    SweepVariable.SIGMA2: [1.0, 0.5, 0.2, 0.1, 0.05],
    SweepVariable.CV: [0.4, 0.5, 0.6, 0.7, 0.8],
}


class Figure(str, Enum):
    BIAS_VS_N = "bias_vs_N"
    CLT_PDF = "clt_pdf"
    CDF_COMPARISON = "cdf_comparison"
    OUTAGE_VS_SNR = "outage_vs_snr"
    CV_VS_VARIANCE = "cv_vs_variance"


def snr_db(sigma2: float) -> float:
    """SNR = 1 / sigma2 in dB"""
    return 10.0 * math.log10(1.0 / sigma2)


# ============================================
# Gaussian laws compared against the samples
# ============================================

def clt_variants(stats: MIStatistics) -> Dict[str, Tuple[float, float]]:
    """(mean, std) of the full corrected law and its three partial corrections"""
    return {
        "full": (stats.mean, math.sqrt(stats.Theta)),
        "gaussian": (stats.V, math.sqrt(stats.Theta_G)),
        "mean_only": (stats.mean, math.sqrt(stats.Theta_G)),
        "variance_only": (stats.V, math.sqrt(stats.Theta)),
    }


def ks_rows(samples: np.ndarray, stats: MIStatistics) -> List[dict]:
    rows = []
    for name, (loc, scale) in clt_variants(stats).items():
        result = kstest(samples, "norm", args=(loc, scale))
        rows.append({"law": name, "mean": loc, "std": scale, "ks_distance": float(result.statistic)})
    return rows


# ============================================
# Sweep plumbing
# ============================================

def _sweep_values(config: ExperimentConfig, variable: SweepVariable) -> List[float]:
    sweep = config.sweep
    if sweep is None:
        return list(DEFAULT_SWEEPS[variable])
    if sweep.variable is not variable:
        raise ConfigurationError(f"this figure sweeps {variable.value}, config sweeps {sweep.variable.value}")
    return list(sweep.values)


def _run_sweep(
    name: str,
    variable: SweepVariable,
    values: Sequence[float],
    point: Callable[[float], dict],
) -> List[dict]:
    rows: List[dict] = []
    for value in values:
        try:
            rows.append(point(value))
        except RMTBiasError as e:
            logger.warning(f"{name}: {variable.value}={value:g} failed, flushing {len(rows)} row(s)")
            rows.append({variable.value: FAILURE_MARKER, "error": str(e)})
            raise PartialResultsError(
                f"{name} stopped at {variable.value}={value:g}: {e.detail}", cause=e, partial={name: rows}
            ) from e
    return rows


def _mc(config: ExperimentConfig, model, dist, sigma2: float, workers: int, ecdf_cap: int, stats, resolvent_z=None) -> MonteCarloSummary:
    return run_mi_experiment(
        model, dist, sigma2, config.mc.trials, config.mc.seed,
        workers=workers, resolvent_z=resolvent_z, ecdf_cap=ecdf_cap, stats=stats,
    )


# ============================================
# Pipelines
# ============================================

def bias_vs_N(config: ExperimentConfig, base_dir=None, workers: int = 1, ecdf_cap: int = DEFAULT_ECDF_CAP) -> Tables:
    """Analytic vs empirical resolvent bias and MI mean/variance biases per N at z = -sigma2"""
    sigma2 = config.sigma2
    dist = distribution_from_config(config.scenario.entry)

    def point(N: float) -> dict:
        scenario = scenario_with_N(config.scenario, int(N))
        model = model_from_config(scenario, base_dir)
        z = SpectralPoint.from_sigma2(sigma2)
        bias = bias_closed_form(model, solve(model, z, config.solver))
        stats = mi_clt(model, sigma2, config.solver)
        mc = _mc(config, model, dist, sigma2, workers, ecdf_cap, stats, resolvent_z=z)
        return {
            "N": model.N,
            "M": model.M,
            "analytic_bias": bias.total.real,
            "emp_resolvent_bias": mc.emp_resolvent_bias.real,
            "se_resolvent": mc.se_resolvent.real,
            "B_C": stats.B_C,
            "emp_bias_mean": mc.emp_bias_mean,
            "se_mean": mc.se_mean,
            "Theta_B": stats.Theta_B,
            "emp_bias_var": mc.emp_bias_var,
            "se_var": mc.se_var,
        }

    values = _sweep_values(config, SweepVariable.N)
    return {Figure.BIAS_VS_N.value: _run_sweep(Figure.BIAS_VS_N.value, SweepVariable.N, values, point)}


def _single_point(config: ExperimentConfig, base_dir, workers: int, ecdf_cap: int):
    model = model_from_config(config.scenario, base_dir)
    dist = distribution_from_config(config.scenario.entry)
    stats = mi_clt(model, config.sigma2, config.solver)
    mc = _mc(config, model, dist, config.sigma2, workers, ecdf_cap, stats)
    return stats, mc


def clt_pdf(config: ExperimentConfig, base_dir=None, workers: int = 1, ecdf_cap: int = DEFAULT_ECDF_CAP) -> Tables:
    """
    Density of the normalized MI (C - mean) / sqrt(Theta) against N(0, 1)

    The partial-correction laws are mapped into the same normalized coordinate.
    """
    stats, mc = _single_point(config, base_dir, workers, ecdf_cap)
    samples = mc.samples
    normalized = (samples - stats.mean) / math.sqrt(stats.Theta)
    edges = np.concatenate([[-np.inf], 0.5 * (DENSITY_GRID[1:] + DENSITY_GRID[:-1]), [np.inf]])
    counts, _ = np.histogram(normalized, bins=edges)
    width = DENSITY_GRID[1] - DENSITY_GRID[0]
    density = counts / (samples.size * width)

    scale = math.sqrt(stats.Theta)
    rows = []
    for x, emp in zip(DENSITY_GRID, density):
        row = {"x": float(x), "empirical_density": float(emp), "standard_normal": float(norm.pdf(x))}
        for name, (loc, std) in clt_variants(stats).items():
            if name == "full":
                continue
            c = stats.mean + scale * x
            row[f"{name}_density"] = float(norm.pdf(c, loc, std) * scale)
        rows.append(row)
    return {Figure.CLT_PDF.value: rows, f"{Figure.CLT_PDF.value}_ks": ks_rows(samples, stats)}


def cdf_comparison(config: ExperimentConfig, base_dir=None, workers: int = 1, ecdf_cap: int = DEFAULT_ECDF_CAP) -> Tables:
    """
    ECDF of C against the CDF of each Gaussian law

    The rate grid is the R sweep when the config has one, otherwise an even
    grid spanning the samples.
    """
    stats, mc = _single_point(config, base_dir, workers, ecdf_cap)
    ecdf = mc.ecdf
    if config.sweep is not None:
        grid = np.asarray(_sweep_values(config, SweepVariable.R))
    else:
        grid = np.linspace(ecdf[0], ecdf[-1], CDF_POINTS)
    variants = clt_variants(stats)
    rows = []
    for rate in grid:
        row = {"rate": float(rate), "ecdf": empirical_outage(ecdf, rate)}
        for name, (loc, std) in variants.items():
            row[f"cdf_{name}"] = float(norm.cdf(rate, loc, std))
        rows.append(row)
    return {Figure.CDF_COMPARISON.value: rows, f"{Figure.CDF_COMPARISON.value}_ks": ks_rows(mc.samples, stats)}


def outage_vs_snr(config: ExperimentConfig, base_dir=None, workers: int = 1, ecdf_cap: int = DEFAULT_ECDF_CAP) -> Tables:
    """Analytic (corrected and Gaussian-only) and empirical outage at a fixed rate over a sigma2 grid"""
    if config.rate is None:
        raise ConfigurationError("outage_vs_snr needs 'rate' in the experiment document")
    rate = config.rate
    model = model_from_config(config.scenario, base_dir)
    dist = distribution_from_config(config.scenario.entry)

    def point(sigma2: float) -> dict:
        stats = mi_clt(model, sigma2, config.solver)
        mc = _mc(config, model, dist, sigma2, workers, ecdf_cap, stats)
        gaussian = MIStatistics(sigma2, stats.V, 0.0, 0.0, stats.Theta_G, 0.0)
        return {
            "sigma2": sigma2,
            "snr_db": snr_db(sigma2),
            "rate": rate,
            "p_out_analytic": outage_probability(stats, rate),
            "p_out_gaussian": outage_probability(gaussian, rate),
            "p_out_empirical": empirical_outage(mc.samples, rate),
        }

    # report in increasing SNR
    values = sorted(_sweep_values(config, SweepVariable.SIGMA2), reverse=True)
    return {Figure.OUTAGE_VS_SNR.value: _run_sweep(Figure.OUTAGE_VS_SNR.value, SweepVariable.SIGMA2, values, point)}


def cv_vs_variance(config: ExperimentConfig, base_dir=None, workers: int = 1, ecdf_cap: int = DEFAULT_ECDF_CAP) -> Tables:
    """MI variance terms as the fading severity (CV of |x|) varies within one law family"""
    base_model = model_from_config(config.scenario, base_dir)
    base_dist = distribution_from_config(config.scenario.entry)
    sigma2 = config.sigma2

    def point(cv: float) -> dict:
        dist = distribution_for_cv(base_dist, cv)
        moments = moments_of(dist)
        model = base_model.with_moments(moments)
        stats = mi_clt(model, sigma2, config.solver)
        mc = _mc(config, model, dist, sigma2, workers, ecdf_cap, stats)
        return {
            "cv": cv_of(dist),
            "law_param": dist.param,
            "vartheta": moments.vartheta.real,
            "kappa": moments.kappa,
            "V": stats.V,
            "B_C": stats.B_C,
            "Theta_G": stats.Theta_G,
            "Theta_B": stats.Theta_B,
            "Theta": stats.Theta,
            "var_C": mc.var_C,
            "se_var": mc.se_var,
        }

    values = _sweep_values(config, SweepVariable.CV)
    return {Figure.CV_VS_VARIANCE.value: _run_sweep(Figure.CV_VS_VARIANCE.value, SweepVariable.CV, values, point)}


PIPELINES = {
    Figure.BIAS_VS_N: bias_vs_N,
    Figure.CLT_PDF: clt_pdf,
    Figure.CDF_COMPARISON: cdf_comparison,
    Figure.OUTAGE_VS_SNR: outage_vs_snr,
    Figure.CV_VS_VARIANCE: cv_vs_variance,
}


def reproduce(
    figure: Figure,
    config: ExperimentConfig,
    base_dir: Optional[Path] = None,
    workers: int = 1,
    ecdf_cap: int = DEFAULT_ECDF_CAP,
) -> Tables:
    """
    그림 데이터 생성

    Returns:
        table name -> rows (first table is named after the figure)

    Raises:
        PartialResultsError: sweep stopped part-way (partial tables attached)
    """
    figure = Figure(figure)
    logger.info(f"reproduce {figure.value}: trials={config.mc.trials}, seed={config.mc.seed}")
    return PIPELINES[figure](config, base_dir=base_dir, workers=workers, ecdf_cap=ecdf_cap)
