"""
Exception hierarchy

Every error carries a stable ``code`` string and the process ``exit_code``
the CLI maps it to (0 success, 2 config, 3 numeric, 4 partial results).
"""
from typing import Dict, List, Optional


class RMTBiasError(Exception):
    """Base class for all rmtbias errors"""
    code = "RMTBIAS_ERROR"
    exit_code = 1

    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail

    def __str__(self) -> str:
        return f"[{self.code}] {self.detail}"


# ============================================
# Configuration errors (exit 2)
# ============================================

class ConfigurationError(RMTBiasError):
    """Scenario/experiment document is unreadable or inconsistent"""
    code = "CONFIG_ERROR"
    exit_code = 2


class ParameterDomainError(ConfigurationError):
    """A parameter lies outside its mathematical domain (k <= 0, K < 0, ...)"""
    code = "PARAMETER_DOMAIN"


class ContourViolationError(ConfigurationError):
    """The integration contour would enclose a singularity of f"""
    code = "CONTOUR_VIOLATION"


# ============================================
# Numeric errors (exit 3)
# ============================================

class NumericError(RMTBiasError):
    """Linear algebra or evaluation failure"""
    code = "NUMERIC_ERROR"
    exit_code = 3


class IterationLimitError(NumericError):
    """Fixed-point iteration did not reach the tolerance"""
    code = "ITERATION_LIMIT"

    def __init__(self, detail: str, z: complex, residual: float, iterations: int):
        super().__init__(detail)
        self.z = z
        self.residual = residual
        self.iterations = iterations


class DegenerateDeterminantError(NumericError):
    """Delta or Delta_T vanishes (or is non-positive where it must be positive)"""
    code = "DEGENERATE_DETERMINANT"


class StepSizeError(NumericError):
    """Finite-difference step lost all significant digits"""
    code = "STEP_SIZE"


class TrialFailedError(NumericError):
    """A Monte-Carlo trial raised; the run is aborted"""
    code = "TRIAL_FAILED"

    def __init__(self, detail: str, trial: int):
        super().__init__(detail)
        self.trial = trial


# ============================================
# Partial results (exit 4)
# ============================================

class PartialResultsError(RMTBiasError):
    """A sweep failed part-way; rows computed so far were flushed"""
    code = "PARTIAL_RESULTS"
    exit_code = 4

    def __init__(
        self,
        detail: str,
        cause: Optional[RMTBiasError] = None,
        partial: Optional[Dict[str, List[dict]]] = None,
    ):
        super().__init__(detail)
        self.cause = cause
        self.partial = partial or {}
