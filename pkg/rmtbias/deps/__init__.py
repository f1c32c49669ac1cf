"""Dependencies package"""
from rmtbias.deps.runtime import configure_logging, ecdf_cap, load_environment, worker_count
from rmtbias.deps.scenario import ScenarioContext, load_context

__all__ = ["configure_logging", "ecdf_cap", "load_environment", "worker_count", "ScenarioContext", "load_context"]
