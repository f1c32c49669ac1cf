"""rmtbias: bias and CLT of MIMO mutual information from random matrix theory"""
from rmtbias.errors import (
    ConfigurationError,
    NumericError,
    PartialResultsError,
    RMTBiasError,
)

__version__ = "1.0.0"

__all__ = [
    "RMTBiasError",
    "ConfigurationError",
    "NumericError",
    "PartialResultsError",
    "__version__",
]
