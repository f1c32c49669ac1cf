"""Models package"""
from rmtbias.models.config import *
from rmtbias.models.domain import *
from rmtbias.models.outputs import *

__all__ = [
    # Config Models
    "LosKind",
    "SweepVariable",
    "OutputFormat",
    "LosConfig",
    "EntryConfig",
    "ScenarioConfig",
    "SolverOptions",
    "McConfig",
    "OutputConfig",
    "SweepConfig",
    "ExperimentConfig",
    # Domain Models
    "ModulusLaw",
    "EntryMoments",
    "EntryDistribution",
    "ChannelModel",
    "SpectralPoint",
    "FixedPointSolution",
    "DeterministicQuantities",
    "UFunctionals",
    "BiasMethod",
    "BiasValue",
    "ContourShape",
    "ContourSpec",
    "LssResult",
    "MIStatistics",
    "MonteCarloSummary",
    "ResolventEstimate",
    "CovarianceOracleResult",
    # Output Models
    "CheckStatus",
    "SolveOut",
    "BiasOut",
    "LssOut",
    "CltOut",
    "OutageRow",
    "SummaryRow",
    "ValidationItem",
]
