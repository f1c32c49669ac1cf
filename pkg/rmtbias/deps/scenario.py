"""
Per-command scenario dependencies

Loads the experiment document, applies CLI overrides and builds the
ChannelModel and EntryDistribution every subcommand works on.
"""
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Optional

from pydantic import ValidationError

from rmtbias.errors import ConfigurationError
from rmtbias.models.config import ExperimentConfig, SolverOptions
from rmtbias.models.domain import ChannelModel, EntryDistribution
from rmtbias.repositories.scenario_repository import load_experiment
from rmtbias.services.channel_model import distribution_from_config, model_from_config

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ScenarioContext:
    config: ExperimentConfig
    base_dir: Path
    model: ChannelModel
    dist: EntryDistribution

    @property
    def solver(self) -> SolverOptions:
        return self.config.solver


def apply_overrides(config: ExperimentConfig, overrides: Dict[str, Any]) -> ExperimentConfig:
    """
    CLI 플래그로 문서 값 덮어쓰기 (None 은 무시)

    Recognized keys: tol, max_iter, damping, trials, seed, sigma2, rate, out, format
    """
    given = {key: value for key, value in overrides.items() if value is not None}
    solver_update = {key: given[key] for key in ("tol", "max_iter", "damping") if key in given}
    mc_update = {key: given[key] for key in ("trials", "seed") if key in given}
    output_update = {}
    if "out" in given:
        output_update["path"] = given["out"]
    if "format" in given:
        output_update["format"] = given["format"]
    top_update = {key: given[key] for key in ("sigma2", "rate") if key in given}

    document = config.model_dump()
    document["solver"].update(solver_update)
    document["mc"].update(mc_update)
    document["output"].update(output_update)
    document.update(top_update)
    # re-validate so overrides obey the same constraints as the document
    try:
        return ExperimentConfig.model_validate(document)
    except ValidationError as e:
        raise ConfigurationError(f"invalid command-line override: {e}") from e


def load_context(path: str, overrides: Optional[Dict[str, Any]] = None) -> ScenarioContext:
    """
    설정 파일 -> ScenarioContext

    Raises:
        ConfigurationError: unreadable document or invalid scenario
    """
    config = load_experiment(path)
    if overrides:
        config = apply_overrides(config, overrides)
    base_dir = Path(path).resolve().parent
    model = model_from_config(config.scenario, base_dir)
    dist = distribution_from_config(config.scenario.entry)
    logger.debug(
        f"scenario N={model.N}, M={model.M}, vartheta={model.moments.vartheta.real:g}, "
        f"kappa={model.moments.kappa:g}, ||A||={model.spectral_norm:.4g}"
    )
    return ScenarioContext(config=config, base_dir=base_dir, model=model, dist=dist)

