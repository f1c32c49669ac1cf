"""
Domain value records

Immutable numeric records shared by the services. Arrays are copied and
frozen (``writeable = False``) on construction so records can be handed to
concurrent workers without defensive copies.
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Tuple

import numpy as np

from rmtbias.errors import ConfigurationError, ParameterDomainError


def _frozen(values, dtype) -> np.ndarray:
    arr = np.array(values, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


# ============================================
# Entry distribution
# ============================================

class ModulusLaw(str, Enum):
    """Law of the modulus r of X = r (sigma_r cos phi + j sigma_i sin phi)"""
    WEIBULL = "weibull"
    LOGNORMAL = "lognormal"
    NAKAGAMI = "nakagami"
    GAUSSIAN = "gaussian"


# parameter name per law; gaussian has none
LAW_PARAMETER = {
    ModulusLaw.WEIBULL: "k",
    ModulusLaw.LOGNORMAL: "sigma",
    ModulusLaw.NAKAGAMI: "m",
    ModulusLaw.GAUSSIAN: None,
}


@dataclass(frozen=True)
class EntryMoments:
    """Pseudo-variance, fourth cumulant and crossed third moment of one entry"""
    vartheta: complex
    kappa: float
    zeta: complex = 0j

    def __post_init__(self):
        object.__setattr__(self, "vartheta", complex(self.vartheta))
        object.__setattr__(self, "kappa", float(self.kappa))
        object.__setattr__(self, "zeta", complex(self.zeta))
        if abs(self.vartheta) > 1.0 + 1e-12:
            raise ParameterDomainError(f"|vartheta| must be <= 1, got {abs(self.vartheta):.6g}")
        if self.fourth_moment < 1.0 - 1e-12:
            raise ParameterDomainError(
                f"E|x|^4 = kappa + |vartheta|^2 + 2 must be >= 1, got {self.fourth_moment:.6g}"
            )

    @property
    def fourth_moment(self) -> float:
        return self.kappa + abs(self.vartheta) ** 2 + 2.0

    @property
    def is_gaussian_like(self) -> bool:
        return self.vartheta == 0 and self.kappa == 0


@dataclass(frozen=True)
class EntryDistribution:
    """Non-circular entry construction over a unit-power modulus law"""
    law: ModulusLaw
    param: Optional[float] = None
    sigma_r2: float = 1.0
    sigma_i2: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "law", ModulusLaw(self.law))
        if LAW_PARAMETER[self.law] is None:
            object.__setattr__(self, "param", None)
        elif self.param is None:
            raise ParameterDomainError(f"{self.law.value} law needs parameter '{LAW_PARAMETER[self.law]}'")
        else:
            object.__setattr__(self, "param", float(self.param))
            if self.law is ModulusLaw.LOGNORMAL:
                if self.param < 0:
                    raise ParameterDomainError(f"lognormal sigma must be >= 0, got {self.param}")
            elif self.param <= 0:
                raise ParameterDomainError(f"{self.law.value} {LAW_PARAMETER[self.law]} must be > 0, got {self.param}")
        if self.sigma_r2 < 0 or self.sigma_i2 < 0:
            raise ParameterDomainError("sigma_r2 and sigma_i2 must be non-negative")
        if abs(self.sigma_r2 + self.sigma_i2 - 2.0) > 1e-12:
            raise ParameterDomainError(
                f"sigma_r2 + sigma_i2 must equal 2 (E|X|^2 = 1), got {self.sigma_r2 + self.sigma_i2:.6g}"
            )

    @property
    def vartheta(self) -> float:
        return (self.sigma_r2 - self.sigma_i2) / 2.0


# ============================================
# Channel model
# ============================================

@dataclass(frozen=True, eq=False)
class ChannelModel:
    """
    H = A + (1/sqrt(M)) D^{1/2} X Dt^{1/2}

    Construction enforces the separable-profile and LoS-norm assumptions;
    an invalid scenario never becomes a ChannelModel.
    """
    A: np.ndarray
    D: np.ndarray
    Dt: np.ndarray
    moments: EntryMoments
    norm_cap: Optional[float] = None

    def __post_init__(self):
        A = _frozen(self.A, np.complex128)
        D = _frozen(self.D, np.float64)
        Dt = _frozen(self.Dt, np.float64)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "D", D)
        object.__setattr__(self, "Dt", Dt)

        if A.ndim != 2:
            raise ConfigurationError(f"A must be a matrix, got shape {A.shape}")
        N, M = A.shape
        if N < 1 or M < 1:
            raise ConfigurationError(f"dimensions must be positive, got N={N}, M={M}")
        if D.shape != (N,) or Dt.shape != (M,):
            raise ConfigurationError(
                f"profile shapes {D.shape}, {Dt.shape} do not match A of shape {A.shape}"
            )
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(D)) and np.all(np.isfinite(Dt))):
            raise ConfigurationError("A, D and Dt must be finite")
        if np.any(D < 0) or np.any(Dt < 0):
            raise ParameterDomainError("variance profiles must be non-negative")
        if D.sum() / M <= 0 or Dt.sum() / M <= 0:
            raise ParameterDomainError("variance profiles must have positive mean")
        if self.spectral_norm > self.norm_limit:
            raise ParameterDomainError(
                f"||A|| = {self.spectral_norm:.6g} exceeds the cap {self.norm_limit:.6g}"
            )

    @property
    def N(self) -> int:
        return self.A.shape[0]

    @property
    def M(self) -> int:
        return self.A.shape[1]

    @property
    def c(self) -> float:
        return self.N / self.M

    @property
    def is_centered(self) -> bool:
        return not np.any(self.A)

    @property
    def spectral_norm(self) -> float:
        if self.is_centered:
            return 0.0
        return float(np.linalg.norm(self.A, 2))

    @property
    def norm_limit(self) -> float:
        if self.norm_cap is not None:
            return float(self.norm_cap)
        max_col = float(np.max(np.linalg.norm(self.A, axis=0)))
        return 10.0 * max(1.0, np.sqrt(self.c)) * max_col

    def with_moments(self, moments: EntryMoments) -> "ChannelModel":
        return ChannelModel(self.A, self.D, self.Dt, moments, self.norm_cap)


# ============================================
# Spectral point / fixed point
# ============================================

@dataclass(frozen=True)
class SpectralPoint:
    """z in C minus the closed positive half-line"""
    z: complex

    def __post_init__(self):
        z = complex(self.z)
        object.__setattr__(self, "z", z)
        if not (np.isfinite(z.real) and np.isfinite(z.imag)):
            raise ParameterDomainError(f"spectral point must be finite, got {z}")
        if z.imag == 0 and z.real >= 0:
            raise ParameterDomainError(f"spectral point must lie off the non-negative real axis, got {z}")

    @classmethod
    def from_sigma2(cls, sigma2: float) -> "SpectralPoint":
        if sigma2 <= 0:
            raise ParameterDomainError(f"sigma2 must be > 0, got {sigma2}")
        return cls(complex(-sigma2, 0.0))

    @property
    def is_real_negative(self) -> bool:
        return self.z.imag == 0 and self.z.real < 0

    @property
    def omega(self) -> complex:
        return -self.z


@dataclass(frozen=True, eq=False)
class FixedPointSolution:
    z: SpectralPoint
    delta: complex
    delta_t: complex
    T: np.ndarray
    Tt: np.ndarray
    iterations: int
    residual: float
    damping: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "T", _frozen(self.T, np.complex128))
        object.__setattr__(self, "Tt", _frozen(self.Tt, np.complex128))


# ============================================
# Deterministic quantities
# ============================================

@dataclass(frozen=True, eq=False)
class DeterministicQuantities:
    z: complex
    Rdiag: np.ndarray
    Rtdiag: np.ndarray
    Sdiag: np.ndarray
    Stdiag: np.ndarray
    gamma: complex
    gamma_T: complex
    gamma_t: complex
    gamma_t_T: complex
    eta: complex
    eta_t: complex
    F: complex
    F_T: complex
    F_T_under: complex
    Ft_T: complex
    Ft_T_under: complex
    Delta: complex
    Delta_T: complex
    dprime: complex
    dtprime: complex

    def scalars(self) -> dict:
        """Flat ledger of every scalar field (complex values kept complex)"""
        return {
            name: getattr(self, name)
            for name in (
                "z", "gamma", "gamma_T", "gamma_t", "gamma_t_T", "eta", "eta_t",
                "F", "F_T", "F_T_under", "Ft_T", "Ft_T_under",
                "Delta", "Delta_T", "dprime", "dtprime",
            )
        }


@dataclass(frozen=True)
class UFunctionals:
    """
    Trace functionals with a general weight matrix U.

    side="receive": U is N x N and the fields are gamma(U), gamma_T(U), F(U),
    F_T(U), F_T_under(U) and the cross term script-Ft_T(U).
    side="transmit": U is M x M and the fields are the tilde counterparts
    with the cross term script-F_T(U).
    """
    side: str
    gamma: complex
    gamma_T: complex
    F: complex
    F_T: complex
    F_T_under: complex
    script_cross: complex


# ============================================
# Bias
# ============================================

class BiasMethod(str, Enum):
    CLOSED_FORM = "closed_form"
    LOG_DELTA_FD = "log_delta_fd"


@dataclass(frozen=True)
class BiasValue:
    z: complex
    B_theta: complex
    B_kappa: complex
    method: BiasMethod

    @property
    def total(self) -> complex:
        return self.B_theta + self.B_kappa


# ============================================
# Contour integration
# ============================================

class ContourShape(str, Enum):
    ELLIPSE = "ellipse"
    RECTANGLE = "rectangle"


@dataclass(frozen=True)
class ContourSpec:
    u_plus: float
    margin: float
    nodes: int = 256
    shape: ContourShape = ContourShape.ELLIPSE

    def __post_init__(self):
        object.__setattr__(self, "shape", ContourShape(self.shape))
        if self.u_plus <= 0:
            raise ParameterDomainError(f"u_plus must be > 0, got {self.u_plus}")
        if self.margin <= 0:
            raise ParameterDomainError(f"contour margin must be > 0, got {self.margin}")
        if self.nodes < 4 or self.nodes % 2:
            raise ParameterDomainError(f"node count must be even and >= 4, got {self.nodes}")

    @property
    def left(self) -> float:
        return -self.margin

    @property
    def right(self) -> float:
        return self.u_plus + self.margin


@dataclass(frozen=True)
class LssResult:
    V_f: complex
    B_f: complex
    contour: ContourSpec


# ============================================
# MI statistics
# ============================================

@dataclass(frozen=True)
class MIStatistics:
    sigma2: float
    V: float
    B_C_theta: float
    B_C_kappa: float
    Theta_G: float
    Theta_B: float

    @property
    def B_C(self) -> float:
        return self.B_C_theta + self.B_C_kappa

    @property
    def Theta(self) -> float:
        return self.Theta_G + self.Theta_B

    @property
    def mean(self) -> float:
        return self.V + self.B_C


# ============================================
# Monte-Carlo
# ============================================

@dataclass(frozen=True, eq=False)
class MonteCarloSummary:
    trials: int
    seed: int
    mean_C: float
    var_C: float
    se_mean: float
    se_var: float
    samples: Optional[np.ndarray]
    emp_bias_mean: float
    emp_bias_var: float
    emp_resolvent_bias: Optional[complex] = None
    se_resolvent: Optional[complex] = None

    def __post_init__(self):
        if self.samples is not None:
            object.__setattr__(self, "samples", _frozen(self.samples, np.float64))

    @property
    def ecdf(self) -> Optional[np.ndarray]:
        """Sorted (capped) MI sample"""
        if self.samples is None:
            return None
        return np.sort(self.samples)


@dataclass(frozen=True)
class ResolventEstimate:
    """Empirical E Tr Q(z) - Tr T(z); stderr holds the real/imag standard errors"""
    z: complex
    estimate: complex
    stderr: complex
    trace_T: complex
    trials: int
    seed: int


@dataclass(frozen=True)
class CovarianceOracleResult:
    analytic: complex
    empirical: complex
    stderr: complex
    samples: int
    terms: Tuple[complex, ...] = field(default=())
