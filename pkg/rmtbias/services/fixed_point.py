"""
Fixed-point solver for (delta, delta_t)

    delta   = f(delta, delta_t)  = (1/M) Tr D  T,   T  = (-z (I + delta_t D)  + A Rt A^H)^{-1}
    delta_t = ft(delta, delta_t) = (1/M) Tr Dt Tt,  Tt = (-z (I + delta Dt)  + A^H R A)^{-1}

with R = (I + delta_t D)^{-1}, Rt = (I + delta Dt)^{-1}. Gauss-Seidel sweeps
from delta = delta_t = 1: delta is refreshed first, delta_t is then computed
from the fresh delta.
"""
import logging
from typing import Dict, Optional, Union

import numpy as np

from rmtbias.errors import IterationLimitError, NumericError
from rmtbias.models.config import SolverOptions
from rmtbias.models.domain import ChannelModel, FixedPointSolution, SpectralPoint
from rmtbias.utils.linalg import general_inverse, hermitian_inverse, relative_gap

logger = logging.getLogger(__name__)

AUTO_DAMPING = 0.5

PointLike = Union[SpectralPoint, complex, float]


def as_point(z: PointLike) -> SpectralPoint:
    return z if isinstance(z, SpectralPoint) else SpectralPoint(complex(z))


# ============================================
# T(z), Tt(z) for given (delta, delta_t)
# ============================================

def _invert(K: np.ndarray, z: SpectralPoint) -> np.ndarray:
    if z.is_real_negative:
        return hermitian_inverse(K)
    return general_inverse(K)


def receive_matrix(model: ChannelModel, z: SpectralPoint, delta: complex, delta_t: complex) -> np.ndarray:
    Rt = 1.0 / (1.0 + delta * model.Dt)
    K = np.diag(-z.z * (1.0 + delta_t * model.D)) + (model.A * Rt) @ model.A.conj().T
    return _invert(K, z)


def transmit_matrix(model: ChannelModel, z: SpectralPoint, delta: complex, delta_t: complex) -> np.ndarray:
    R = 1.0 / (1.0 + delta_t * model.D)
    AH = model.A.conj().T
    K = np.diag(-z.z * (1.0 + delta * model.Dt)) + (AH * R) @ model.A
    return _invert(K, z)


def _weighted_trace(weights: np.ndarray, T: np.ndarray, z: SpectralPoint, M: int) -> complex:
    """(1/M) Tr diag(weights) T, real on the negative real axis"""
    value = complex(np.dot(weights, np.diag(T))) / M
    return complex(value.real) if z.is_real_negative else value


# ============================================
# Solver
# ============================================

def solve(model: ChannelModel, z: PointLike, opts: Optional[SolverOptions] = None) -> FixedPointSolution:
    """
    고정점 (delta, delta_t) 계산

    Args:
        model: 채널 모델
        z: spectral point (C minus R+)
        opts: 허용 오차 / 최대 반복 / 감쇠

    Returns:
        FixedPointSolution, T and Tt rebuilt from the converged pair

    Raises:
        IterationLimitError: tol not reached within max_iter (carries last residual)
        NumericError: singular matrix during inversion
    """
    opts = opts or SolverOptions()
    point = as_point(z)
    theta = opts.damping if opts.damping is not None else 1.0
    auto = opts.damping is None

    delta, delta_t = 1.0 + 0j, 1.0 + 0j
    residual = np.inf
    previous = np.inf
    non_monotone = 0

    for iteration in range(1, opts.max_iter + 1):
        # one inversion per half-sweep; the delta_t residual is taken at the fresh delta
        f_val = _weighted_trace(model.D, receive_matrix(model, point, delta, delta_t), point, model.M)
        next_delta = theta * f_val + (1.0 - theta) * delta
        ft_val = _weighted_trace(model.Dt, transmit_matrix(model, point, next_delta, delta_t), point, model.M)
        residual = max(abs(delta - f_val), abs(delta_t - ft_val))
        if not np.isfinite(residual):
            raise NumericError(f"fixed point diverged at z={point.z} (iteration {iteration})")
        delta, delta_t = next_delta, theta * ft_val + (1.0 - theta) * delta_t
        if residual <= opts.tol:
            break

        if residual > previous:
            non_monotone += 1
            if auto and theta == 1.0 and non_monotone >= opts.auto_damping_after:
                theta = AUTO_DAMPING
                logger.warning(
                    f"z={point.z}: {non_monotone} non-monotone iterations, damping theta={theta}"
                )
        previous = residual
    else:
        raise IterationLimitError(
            f"fixed point did not converge at z={point.z}: residual {residual:.3e} "
            f"after {opts.max_iter} iterations",
            z=point.z,
            residual=float(residual),
            iterations=opts.max_iter,
        )

    T = receive_matrix(model, point, delta, delta_t)
    Tt = transmit_matrix(model, point, delta, delta_t)
    logger.debug(f"z={point.z}: converged in {iteration} iterations, residual {residual:.2e}")
    return FixedPointSolution(
        z=point,
        delta=delta,
        delta_t=delta_t,
        T=T,
        Tt=Tt,
        iterations=iteration,
        residual=float(residual),
        damping=theta,
    )


def resolvent_trace_de(sol: FixedPointSolution) -> complex:
    """Tr T(z), deterministic approximation of E Tr Q(z)"""
    return complex(np.trace(sol.T))


# ============================================
# Structural identities
# ============================================

def identity_gaps(model: ChannelModel, sol: FixedPointSolution) -> Dict[str, float]:
    """
    Relative gaps of the structural identities of a solution:

    - "cotransmit": Tt = -R~/z + R~ A^H T A R~ / z
    - "push_through": T A Rt = R A Tt
    - "F_two_ways": (1/M) Tr Dt Tt A^H D R^2 A Tt = (1/M) Tr D T A Dt Rt^2 A^H T
    """
    z = sol.z.z
    A, AH = model.A, model.A.conj().T
    R = 1.0 / (1.0 + sol.delta_t * model.D)
    Rt = 1.0 / (1.0 + sol.delta * model.Dt)
    T, Tt = sol.T, sol.Tt

    woodbury = (-np.diag(Rt) + (Rt[:, None] * (AH @ T @ A)) * Rt[None, :]) / z
    left_push = (T @ A) * Rt[None, :]
    right_push = R[:, None] * (A @ Tt)

    F_transmit = np.sum((model.Dt[:, None] * (Tt @ AH)) * ((R * R * model.D)[:, None] * (A @ Tt)).T) / model.M
    F_receive = np.sum((model.D[:, None] * (T @ A)) * ((Rt * Rt * model.Dt)[:, None] * (AH @ T)).T) / model.M

    return {
        "cotransmit": relative_gap(Tt, woodbury),
        "push_through": relative_gap(left_push, right_push),
        "F_two_ways": relative_gap(np.array([F_transmit]), np.array([F_receive])),
    }
