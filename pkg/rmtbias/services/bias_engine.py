"""
Resolvent-trace bias B(z) = lim (E Tr Q(z) - Tr T(z))

Two independent evaluations:
- bias_closed_form: closed-form combination of the Y-terms
- bias_log_delta: central difference of g(z) = -log Delta_T + kappa z^2 eta eta_t,
  B = g'(z) / 2
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Optional

import numpy as np

from rmtbias.errors import ParameterDomainError, StepSizeError
from rmtbias.models.config import SolverOptions
from rmtbias.models.domain import (
    BiasMethod,
    BiasValue,
    ChannelModel,
    DeterministicQuantities,
    FixedPointSolution,
    SpectralPoint,
)
from rmtbias.services.fixed_point import PointLike, as_point, solve
from rmtbias.services.quantities import _Pieces, _receive_functionals, _transmit_functionals, trace_functionals

logger = logging.getLogger(__name__)

CANCELLATION_FACTOR = 1e3
DEFAULT_RELATIVE_STEP = 1e-4


# ============================================
# Y-terms
# ============================================

def y_theta(model: ChannelModel, sol: FixedPointSolution, q: DeterministicQuantities, U: np.ndarray) -> complex:
    """
    Y_theta(U), U acting on the receive side (N x N)

    [conj(v) F_T_under(D T U)(1 - v F_T) + v F_T(U T D)(1 - conj(v) F_T_under)
     + |v|^2 z gamma_T scriptFt_T(U) + |v|^2 z^2 gt_T gamma_T(U T D)] / Delta_T
    """
    v = model.moments.vartheta
    if v == 0:
        return 0j
    U = _square(U, model.N)
    p = _Pieces(model, sol)
    z = q.z
    DTU = (p.d[:, None] * p.T) @ U
    UTD = (U @ p.T) * p.d[None, :]
    at_DTU = _receive_functionals(p, DTU)
    at_UTD = _receive_functionals(p, UTD)
    at_U = _receive_functionals(p, U)
    v2 = abs(v) ** 2
    numerator = (
        np.conj(v) * at_DTU.F_T_under * (1.0 - v * q.F_T)
        + v * at_UTD.F_T * (1.0 - np.conj(v) * q.F_T_under)
        + v2 * z * q.gamma_T * at_U.script_cross
        + v2 * z * z * q.gamma_t_T * at_UTD.gamma_T
    )
    return complex(numerator / q.Delta_T)


def y_theta_tilde(model: ChannelModel, sol: FixedPointSolution, q: DeterministicQuantities, Ut: np.ndarray) -> complex:
    """
    Y~_theta(Ut), Ut acting on the transmit side (M x M)

    [v Ft_T_under(Dt Tt Ut)(1 - conj(v) Ft_T) + conj(v) Ft_T(Ut Tt Dt)(1 - v Ft_T_under)
     + |v|^2 z gt_T scriptF_T(Ut) + |v|^2 z^2 gamma_T gt_T(Ut Tt Dt)] / Delta_T
    """
    v = model.moments.vartheta
    if v == 0:
        return 0j
    Ut = _square(Ut, model.M)
    p = _Pieces(model, sol)
    z = q.z
    DTU = (p.dt[:, None] * p.Tt) @ Ut
    UTD = (Ut @ p.Tt) * p.dt[None, :]
    at_DTU = _transmit_functionals(p, DTU)
    at_UTD = _transmit_functionals(p, UTD)
    at_U = _transmit_functionals(p, Ut)
    v2 = abs(v) ** 2
    numerator = (
        v * at_DTU.F_T_under * (1.0 - np.conj(v) * q.Ft_T)
        + np.conj(v) * at_UTD.F_T * (1.0 - v * q.Ft_T_under)
        + v2 * z * q.gamma_t_T * at_U.script_cross
        + v2 * z * z * q.gamma_T * at_UTD.gamma_T
    )
    return complex(numerator / q.Delta_T)


def y_kappa(model: ChannelModel, sol: FixedPointSolution, q: DeterministicQuantities, U: np.ndarray) -> complex:
    """
    Y_kappa(U) = (z kappa eta / M) Tr Dt^2 St Rt^2 A^H T U T A
                 + (kappa z^2 eta_t / M) Tr S D^2 T U T
    """
    kappa = model.moments.kappa
    if kappa == 0:
        return 0j
    U = _square(U, model.N)
    p = _Pieces(model, sol)
    z, M = q.z, model.M
    TUT = p.T @ U @ p.T
    weight_t = p.dt * p.dt * q.Stdiag * p.Rt * p.Rt
    first = np.sum((weight_t[:, None] * p.AH) * (TUT @ p.A).T)
    second = np.sum(q.Sdiag * p.d * p.d * np.diag(TUT))
    return complex(z * kappa * q.eta / M * first + kappa * z * z * q.eta_t / M * second)


def y_kappa_tilde(model: ChannelModel, sol: FixedPointSolution, q: DeterministicQuantities, Ut: np.ndarray) -> complex:
    """
    Y~_kappa(Ut) = (z kappa eta_t / M) Tr D^2 S R^2 A Tt Ut Tt A^H
                   + (kappa z^2 eta / M) Tr St Dt^2 Tt Ut Tt
    """
    kappa = model.moments.kappa
    if kappa == 0:
        return 0j
    Ut = _square(Ut, model.M)
    p = _Pieces(model, sol)
    z, M = q.z, model.M
    TUT = p.Tt @ Ut @ p.Tt
    weight = p.d * p.d * q.Sdiag * p.R * p.R
    first = np.sum((weight[:, None] * p.A) * (TUT @ p.AH).T)
    second = np.sum(q.Stdiag * p.dt * p.dt * np.diag(TUT))
    return complex(z * kappa * q.eta_t / M * first + kappa * z * z * q.eta / M * second)


def _square(U: np.ndarray, size: int) -> np.ndarray:
    U = np.asarray(U)
    if U.ndim == 1:
        U = np.diag(U)
    if U.shape != (size, size):
        raise ParameterDomainError(f"weight must be {size}x{size}, got {U.shape}")
    return U


# ============================================
# Closed form
# ============================================

def bias_closed_form(
    model: ChannelModel,
    sol: FixedPointSolution,
    q: Optional[DeterministicQuantities] = None,
) -> BiasValue:
    """
    B(z) = Y(I) + (delta_t + z delta_t') Y(D) + z delta' Y~(Dt), for the theta and kappa parts

    Args:
        model: 채널 모델
        sol: 수렴한 고정점 해
        q: 미리 계산된 ledger (없으면 계산)
    """
    z = sol.z.z
    if model.moments.is_gaussian_like:
        return BiasValue(z=z, B_theta=0j, B_kappa=0j, method=BiasMethod.CLOSED_FORM)
    q = q or trace_functionals(model, sol)
    eye = np.eye(model.N)
    D = np.diag(model.D)
    Dt = np.diag(model.Dt)
    weight_D = sol.delta_t + z * q.dtprime
    weight_Dt = z * q.dprime

    B_theta = (
        y_theta(model, sol, q, eye)
        + weight_D * y_theta(model, sol, q, D)
        + weight_Dt * y_theta_tilde(model, sol, q, Dt)
    )
    B_kappa = (
        y_kappa(model, sol, q, eye)
        + weight_D * y_kappa(model, sol, q, D)
        + weight_Dt * y_kappa_tilde(model, sol, q, Dt)
    )
    return BiasValue(z=z, B_theta=complex(B_theta), B_kappa=complex(B_kappa), method=BiasMethod.CLOSED_FORM)


# ============================================
# Derivative form
# ============================================

def _log_parts(model: ChannelModel, point: SpectralPoint, opts: Optional[SolverOptions]):
    sol = solve(model, point, opts)
    q = trace_functionals(model, sol)
    kappa_part = model.moments.kappa * q.z * q.z * q.eta * q.eta_t
    return q.Delta_T, complex(kappa_part)


def bias_log_delta(
    model: ChannelModel,
    z: PointLike,
    h: Optional[float] = None,
    opts: Optional[SolverOptions] = None,
    workers: int = 1,
) -> BiasValue:
    """
    B(z) = (1/2) d/dz [-log Delta_T + (kappa z^2 / M^2) Tr D^2 S^2 Tr Dt^2 St^2] by central difference

    Args:
        model: 채널 모델
        z: spectral point
        h: 실수 step (기본값: 1e-4 |z|)
        opts: solver options for the two shifted solves
        workers: >1 이면 두 고정점 계산을 병렬 실행

    Raises:
        ParameterDomainError: z +- h leaves C minus R+
        StepSizeError: difference lost to cancellation
    """
    point = as_point(z)
    h = DEFAULT_RELATIVE_STEP * abs(point.z) if h is None else float(h)
    if h <= 0:
        raise ParameterDomainError(f"finite-difference step must be > 0, got {h}")
    plus, minus = SpectralPoint(point.z + h), SpectralPoint(point.z - h)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=2) as pool:
            f_plus = pool.submit(_log_parts, model, plus, opts)
            f_minus = pool.submit(_log_parts, model, minus, opts)
            (DT_plus, k_plus), (DT_minus, k_minus) = f_plus.result(), f_minus.result()
    else:
        DT_plus, k_plus = _log_parts(model, plus, opts)
        DT_minus, k_minus = _log_parts(model, minus, opts)

    # log of the ratio stays on the principal branch for nearby points
    theta_diff = -np.log(DT_plus / DT_minus)
    kappa_diff = k_plus - k_minus
    eps = np.finfo(float).eps
    theta_scale = max(abs(np.log(DT_plus)), abs(np.log(DT_minus)))
    kappa_scale = max(abs(k_plus), abs(k_minus))
    if 0 < theta_scale and abs(theta_diff) < CANCELLATION_FACTOR * eps * theta_scale:
        raise StepSizeError(f"step h={h:.3e} too small at z={point.z}: log Delta_T difference cancelled")
    if 0 < kappa_scale and abs(kappa_diff) < CANCELLATION_FACTOR * eps * kappa_scale:
        raise StepSizeError(f"step h={h:.3e} too small at z={point.z}: kappa term difference cancelled")

    B_theta = 0.5 * theta_diff / (2.0 * h)
    B_kappa = 0.5 * kappa_diff / (2.0 * h)
    return BiasValue(z=point.z, B_theta=complex(B_theta), B_kappa=complex(B_kappa), method=BiasMethod.LOG_DELTA_FD)


def relative_bias_gap(first: BiasValue, second: BiasValue) -> float:
    """|B1 - B2| / max(|B1|, |B2|), 0 when both vanish"""
    scale = max(abs(first.total), abs(second.total))
    if scale == 0:
        return 0.0
    return float(abs(first.total - second.total) / scale)
