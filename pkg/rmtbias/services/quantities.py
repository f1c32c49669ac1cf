"""
Deterministic trace functionals

Every functional carries the 1/M normalization. Notation used below:
R = (I + delta_t D)^{-1}, Rt = (I + delta Dt)^{-1}, S = diag(T), St = diag(Tt).
"""
import logging
from typing import Tuple

import numpy as np

from rmtbias.errors import DegenerateDeterminantError, ParameterDomainError
from rmtbias.models.domain import ChannelModel, DeterministicQuantities, FixedPointSolution, UFunctionals

logger = logging.getLogger(__name__)

DEGENERATE_TOL = 1e-8
REAL_AXIS_IMAG_TOL = 1e-10


class _Pieces:
    """Shared factors of one solution (products reused across functionals)"""

    def __init__(self, model: ChannelModel, sol: FixedPointSolution):
        self.M = model.M
        self.z = sol.z.z
        self.d = model.D
        self.dt = model.Dt
        self.T = sol.T
        self.Tt = sol.Tt
        self.A = model.A
        self.AH = model.A.conj().T
        self.R = 1.0 / (1.0 + sol.delta_t * model.D)
        self.Rt = 1.0 / (1.0 + sol.delta * model.Dt)
        # F-family weights: Rt^2 Dt on the transmit side, R^2 D on the receive side
        self.w = self.Rt * self.Rt * self.dt
        self.wt = self.R * self.R * self.d
        self.TA = self.T @ self.A       # N x M
        self.AHT = self.AH @ self.T     # M x N
        self.ATt = self.A @ self.Tt     # N x M
        self.TtAH = self.Tt @ self.AH   # M x N


# ============================================
# U-parameterized functionals
# ============================================

def _receive_functionals(p: _Pieces, U: np.ndarray) -> UFunctionals:
    M = p.M
    UT = U @ p.T
    DT = p.d[:, None] * p.T
    gamma = np.sum(UT * DT.T) / M                               # Tr U T D T
    gamma_T = np.sum((DT @ U) * p.T) / M                        # Tr D T U T^T
    F = np.sum((U @ (p.TA * p.w)) * p.AHT.T) / M                # Tr U T A Rt^2 Dt A^H T
    F_T = np.sum((U @ (p.AHT.T * p.w)) * p.AHT.T) / M           # Tr U T^T Abar Rt^2 Dt A^H T
    F_T_under = np.sum((U @ (p.TA * p.w)) * p.TA) / M           # Tr U T A Rt^2 Dt A^T T^T
    # Tr Dt Tt^T Dt Tt A^H R^2 U A Tt
    left = (p.dt[:, None] * p.Tt.T) @ (p.dt[:, None] * p.Tt) @ (p.AH * (p.R * p.R))
    script = np.sum((left @ U) * p.ATt.T) / M
    return UFunctionals("receive", complex(gamma), complex(gamma_T), complex(F),
                        complex(F_T), complex(F_T_under), complex(script))


def _transmit_functionals(p: _Pieces, Ut: np.ndarray) -> UFunctionals:
    M = p.M
    UTt = Ut @ p.Tt
    DTt = p.dt[:, None] * p.Tt
    gamma = np.sum(UTt * DTt.T) / M                             # Tr Ut Tt Dt Tt
    gamma_T = np.sum((DTt @ Ut) * p.Tt) / M                     # Tr Dt Tt Ut Tt^T
    F = np.sum((Ut @ (p.TtAH * p.wt)) * p.ATt.T) / M            # Tr Ut Tt A^H R^2 D A Tt
    F_T = np.sum((Ut @ (p.ATt.T * p.wt)) * p.ATt.T) / M         # Tr Ut Tt^T A^T R^2 D A Tt
    F_T_under = np.sum((Ut @ (p.TtAH * p.wt)) * p.TtAH) / M     # Tr Ut Tt A^H R^2 D Abar Tt^T
    # Tr D T^T D T A Rt^2 Ut A^H T
    left = (p.d[:, None] * p.T.T) @ (p.d[:, None] * p.T) @ (p.A * (p.Rt * p.Rt))
    script = np.sum((left @ Ut) * p.AHT.T) / M
    return UFunctionals("transmit", complex(gamma), complex(gamma_T), complex(F),
                        complex(F_T), complex(F_T_under), complex(script))


def u_functionals(model: ChannelModel, sol: FixedPointSolution, U: np.ndarray, side: str = "receive") -> UFunctionals:
    """
    U 가중 함수 (gamma(U), gamma_T(U), F(U), F_T(U), F_T_under(U), 교차항)

    Args:
        model: 채널 모델
        sol: 수렴한 고정점 해
        U: N x N (side="receive") 또는 M x M (side="transmit") 행렬, 1-D 이면 대각으로 해석
        side: "receive" | "transmit"

    Raises:
        ParameterDomainError: 차원 불일치
    """
    U = np.asarray(U)
    if U.ndim == 1:
        U = np.diag(U)
    size = {"receive": model.N, "transmit": model.M}.get(side)
    if size is None:
        raise ParameterDomainError(f"side must be 'receive' or 'transmit', got {side!r}")
    if U.shape != (size, size):
        raise ParameterDomainError(f"{side} weight must be {size}x{size}, got {U.shape}")
    pieces = _Pieces(model, sol)
    if side == "receive":
        return _receive_functionals(pieces, U)
    return _transmit_functionals(pieces, U)


# ============================================
# Derivatives
# ============================================

def solve_derivatives(
    model: ChannelModel,
    sol: FixedPointSolution,
    F: complex,
    gamma: complex,
    gamma_t: complex,
) -> Tuple[complex, complex]:
    """
    (delta', delta_t') = d/dz of the fixed point.

    Solves [[1-F, w gamma], [w gamma_t, 1-F]] x = -[Tr D T^2 / M + delta_t gamma,
    Tr Dt Tt^2 / M + delta gamma_t] for the omega-derivatives (w = -z) and
    flips their sign.

    Raises:
        DegenerateDeterminantError: singular 2x2 system
    """
    z = sol.z.z
    omega = -z
    M = model.M
    tr_DT2 = np.sum((model.D[:, None] * sol.T) * sol.T.T) / M
    tr_DtTt2 = np.sum((model.Dt[:, None] * sol.Tt) * sol.Tt.T) / M
    det = (1.0 - F) ** 2 - omega * omega * gamma * gamma_t
    if abs(det) < DEGENERATE_TOL:
        raise DegenerateDeterminantError(f"derivative system is singular at z={z} (Delta={det:.3e})")
    rhs0 = -tr_DT2 - sol.delta_t * gamma
    rhs1 = -tr_DtTt2 - sol.delta * gamma_t
    d_omega = ((1.0 - F) * rhs0 - omega * gamma * rhs1) / det
    dt_omega = ((1.0 - F) * rhs1 - omega * gamma_t * rhs0) / det
    return complex(-d_omega), complex(-dt_omega)


# ============================================
# Full ledger
# ============================================

def trace_functionals(model: ChannelModel, sol: FixedPointSolution) -> DeterministicQuantities:
    """
    Full ledger of deterministic quantities at sol.z

    Raises:
        DegenerateDeterminantError: |Delta_T| < 1e-8
    """
    p = _Pieces(model, sol)
    M, z = p.M, p.z
    vartheta = model.moments.vartheta

    receive = _receive_functionals(p, np.diag(p.d))
    transmit = _transmit_functionals(p, np.diag(p.dt))
    gamma, gamma_T = receive.gamma, receive.gamma_T
    gamma_t, gamma_t_T = transmit.gamma, transmit.gamma_T
    F, F_T, F_T_under = receive.F, receive.F_T, receive.F_T_under
    Ft_T, Ft_T_under = transmit.F_T, transmit.F_T_under

    S = np.diag(p.T).copy()
    St = np.diag(p.Tt).copy()
    eta = complex(np.sum(S * S * p.d * p.d) / M)
    eta_t = complex(np.sum(St * St * p.dt * p.dt) / M)

    Delta = (1.0 - F) ** 2 - z * z * gamma * gamma_t
    Delta_T = (
        (1.0 - vartheta * F_T) * (1.0 - np.conj(vartheta) * F_T_under)
        - abs(vartheta) ** 2 * z * z * gamma_T * gamma_t_T
    )
    if abs(Delta_T) < DEGENERATE_TOL:
        raise DegenerateDeterminantError(f"Delta_T = {Delta_T:.3e} is degenerate at z={z}")
    if sol.z.is_real_negative and abs(Delta_T.imag) > REAL_AXIS_IMAG_TOL * max(1.0, abs(Delta_T)):
        logger.warning(f"Delta_T has imaginary part {Delta_T.imag:.3e} at real z={z}")

    dprime, dtprime = solve_derivatives(model, sol, F, gamma, gamma_t)

    return DeterministicQuantities(
        z=z,
        Rdiag=p.R,
        Rtdiag=p.Rt,
        Sdiag=S,
        Stdiag=St,
        gamma=gamma,
        gamma_T=gamma_T,
        gamma_t=gamma_t,
        gamma_t_T=gamma_t_T,
        eta=eta,
        eta_t=eta_t,
        F=F,
        F_T=F_T,
        F_T_under=F_T_under,
        Ft_T=Ft_T,
        Ft_T_under=Ft_T_under,
        Delta=complex(Delta),
        Delta_T=complex(Delta_T),
        dprime=dprime,
        dtprime=dtprime,
    )
