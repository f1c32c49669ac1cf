"""
Scenario / experiment document repository

JSON documents validated by the pydantic config models, plus matrix and
vector side files (.npy or whitespace-separated text).
"""
import json
import logging
from pathlib import Path
from typing import Optional, Union

import numpy as np
from pydantic import ValidationError

from rmtbias.errors import ConfigurationError
from rmtbias.models.config import ExperimentConfig, ScenarioConfig

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def load_experiment(path: PathLike) -> ExperimentConfig:
    """
    Experiment document 읽기

    A bare scenario document (top-level "N"/"M" without "scenario") is
    wrapped into an ExperimentConfig with default solver / mc / output.

    Raises:
        ConfigurationError: file missing, invalid JSON or schema violation
    """
    path = Path(path)
    try:
        document = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError as e:
        raise ConfigurationError(f"config file not found: {path}") from e
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigurationError(f"cannot read config {path}: {e}") from e

    if isinstance(document, dict) and "scenario" not in document and "N" in document:
        document = {"scenario": document}
    try:
        return ExperimentConfig.model_validate(document)
    except ValidationError as e:
        raise ConfigurationError(f"invalid config {path}: {e}") from e


def save_experiment(config: ExperimentConfig, path: PathLike) -> None:
    """Experiment document 저장 (load_experiment 와 round-trip)"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(config.model_dump_json(indent=2), encoding="utf-8")


def load_array(path: PathLike, base_dir: Optional[PathLike] = None, dtype=np.complex128) -> np.ndarray:
    """
    .npy / 텍스트 배열 읽기 (상대 경로는 base_dir 기준)

    Raises:
        ConfigurationError: file missing or unparsable
    """
    path = Path(path)
    if not path.is_absolute() and base_dir is not None:
        path = Path(base_dir) / path
    try:
        if path.suffix == ".npy":
            values = np.load(path, allow_pickle=False)
        else:
            values = np.loadtxt(path, dtype=dtype, ndmin=1)
    except FileNotFoundError as e:
        raise ConfigurationError(f"array file not found: {path}") from e
    except (OSError, ValueError) as e:
        raise ConfigurationError(f"cannot read array {path}: {e}") from e
    logger.debug(f"loaded array {path} with shape {values.shape}")
    return np.asarray(values, dtype=dtype)


def scenario_with_N(scenario: ScenarioConfig, N: int) -> ScenarioConfig:
    """
    Same scenario at N receive antennas, M rescaled so that c = N / M is kept

    Raises:
        ConfigurationError: c not preserved by an integer M, or explicit
            per-antenna data (profile vectors / files, ULA angles, LoS file)
    """
    M = N * scenario.M / scenario.N
    if M != int(M) or M < 1:
        raise ConfigurationError(f"N={N} does not keep c={scenario.N}/{scenario.M} with an integer M")
    if not (scenario.D == "identity" and scenario.Dt == "identity"):
        raise ConfigurationError("N sweeps need identity variance profiles")
    if scenario.los.angles is not None or scenario.los.path is not None:
        raise ConfigurationError("N sweeps need the default ULA or a zero LoS")
    return scenario.model_copy(update={"N": int(N), "M": int(M)})
