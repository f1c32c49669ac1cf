import json
from pathlib import Path

import numpy as np
import pytest

from rmtbias.models.domain import ChannelModel, EntryDistribution, EntryMoments, ModulusLaw
from rmtbias.services.channel_model import moments_of, rician_model, ula_los

WEIBULL_NONCIRCULAR = EntryDistribution(ModulusLaw.WEIBULL, 1.0, 1.6, 0.4)
GAUSSIAN_CIRCULAR = EntryDistribution(ModulusLaw.GAUSSIAN)

SCENARIO = {
    "N": 4,
    "M": 8,
    "los": {"kind": "ula"},
    "rician_K": 1.0,
    "entry": {"law": "weibull", "params": {"k": 1.0}, "sigma_r2": 1.6, "sigma_i2": 0.4},
}


def profile_model(N: int, M: int, dist: EntryDistribution, K: float = 1.0, seed: int = 5) -> ChannelModel:
    """ULA LoS, Rician K, uneven variance profiles"""
    rng = np.random.default_rng(seed)
    D = rng.uniform(0.5, 1.5, N)
    Dt = rng.uniform(0.5, 1.5, M)
    return rician_model(ula_los(N, M), K, D, Dt, moments_of(dist))


def random_model(seed: int, max_dim: int = 12) -> ChannelModel:
    """
    Property-test corpus member: N, M in [2, max_dim], unit-norm-column A,
    profiles in [0.2, 2], 0.3 <= |vartheta| <= 0.9 with random phase, kappa in [-1, 6]
    """
    rng = np.random.default_rng(seed)
    N, M = (int(n) for n in rng.integers(2, max_dim + 1, 2))
    A = rng.standard_normal((N, M)) + 1j * rng.standard_normal((N, M))
    A /= np.linalg.norm(A, axis=0)
    vartheta = rng.uniform(0.3, 0.9) * np.exp(2j * np.pi * rng.random())
    moments = EntryMoments(vartheta=vartheta, kappa=rng.uniform(-1.0, 6.0))
    return ChannelModel(A, rng.uniform(0.2, 2.0, N), rng.uniform(0.2, 2.0, M), moments)


def centered_model(N: int, M: int, moments: EntryMoments) -> ChannelModel:
    return ChannelModel(np.zeros((N, M)), np.ones(N), np.ones(M), moments)


@pytest.fixture
def noncircular_model() -> ChannelModel:
    return profile_model(4, 6, WEIBULL_NONCIRCULAR)


@pytest.fixture
def gaussian_model() -> ChannelModel:
    return profile_model(4, 6, GAUSSIAN_CIRCULAR)


@pytest.fixture
def scenario_file(tmp_path: Path) -> Path:
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps(SCENARIO), encoding="utf-8")
    return path


@pytest.fixture
def experiment_file(tmp_path: Path):
    """Writes an experiment document next to the tmp scenario and returns its path"""
    def write(**fields) -> Path:
        document = {"scenario": dict(SCENARIO), "mc": {"trials": 600, "seed": 11}}
        document.update(fields)
        path = tmp_path / "experiment.json"
        path.write_text(json.dumps(document), encoding="utf-8")
        return path
    return write
