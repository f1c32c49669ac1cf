"""
Linear spectral statistics by contour integration

    V_f = (-1/2 pi j) oint f(z) Tr T(z) dz
    B_f = (-1/2 pi j) oint f(z) B(z) dz

over a closed counterclockwise curve around [0, u_plus]. The default curve is
an ellipse with foci 0 and u_plus, sampled by the periodic trapezoid rule at
theta_k = 2 pi (k + 1/2) / n; no node lands on the real axis.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from rmtbias.errors import ContourViolationError, IterationLimitError, NumericError, ParameterDomainError
from rmtbias.models.config import SolverOptions
from rmtbias.models.domain import ChannelModel, ContourShape, ContourSpec, LssResult, SpectralPoint
from rmtbias.services.bias_engine import bias_closed_form
from rmtbias.services.fixed_point import resolvent_trace_de, solve

logger = logging.getLogger(__name__)

DEFAULT_NODES = 256
DEFAULT_MARGIN_FRACTION = 0.1


# ============================================
# Integrands
# ============================================

@dataclass(frozen=True)
class LssFunction:
    """
    Scalar analytic function for Tr f(HH^H)

    branch_point: real singularity that must stay outside the contour (None if entire)
    real_coefficients: f(conj z) = conj f(z), enables the half-contour evaluation
    """
    name: str
    func: Callable[[complex], complex]
    branch_point: Optional[float] = None
    real_coefficients: bool = True

    def __call__(self, z: complex) -> complex:
        return complex(self.func(z))


def mi_function(sigma2: float) -> LssFunction:
    """f(x) = log(1 + x / sigma2), branch point at -sigma2"""
    if sigma2 <= 0:
        raise ParameterDomainError(f"sigma2 must be > 0, got {sigma2}")
    return LssFunction(
        name=f"mi(sigma2={sigma2:g})",
        func=lambda z: np.log(1.0 + z / sigma2),
        branch_point=-float(sigma2),
    )


def polynomial(coeffs: Sequence[float]) -> LssFunction:
    """f(x) = c0 + c1 x + c2 x^2 + ..."""
    coeffs = [complex(c) for c in coeffs]
    if not coeffs:
        raise ParameterDomainError("polynomial needs at least one coefficient")
    highest_first = coeffs[::-1]
    return LssFunction(
        name="poly(" + ",".join(f"{c.real:g}" if c.imag == 0 else f"{c:g}" for c in coeffs) + ")",
        func=lambda z: np.polyval(highest_first, z),
        branch_point=None,
        real_coefficients=all(c.imag == 0 for c in coeffs),
    )


# ============================================
# Contour
# ============================================

def support_bound(model: ChannelModel) -> float:
    """u_plus = 2 ||A||^2 + 2 d_max dt_max (1 + sqrt(c))^2"""
    return float(
        2.0 * model.spectral_norm ** 2
        + 2.0 * float(np.max(model.D)) * float(np.max(model.Dt)) * (1.0 + math.sqrt(model.c)) ** 2
    )


def default_contour(
    model: ChannelModel,
    f: Optional[LssFunction] = None,
    nodes: int = DEFAULT_NODES,
    margin: Optional[float] = None,
    shape: ContourShape = ContourShape.ELLIPSE,
) -> ContourSpec:
    """
    Contour around [0, u_plus]; margin defaults to min(sigma2/2, 0.1 u_plus) for
    functions with a branch point at -sigma2, 0.1 u_plus otherwise.
    """
    u_plus = support_bound(model)
    if margin is None:
        margin = DEFAULT_MARGIN_FRACTION * u_plus
        if f is not None and f.branch_point is not None:
            margin = min(-f.branch_point / 2.0, margin)
    return ContourSpec(u_plus=u_plus, margin=float(margin), nodes=nodes, shape=shape)


def contour_nodes(contour: ContourSpec) -> Tuple[np.ndarray, np.ndarray]:
    """
    Quadrature nodes z_k and weights q_k with oint g(z) dz ~ sum_k q_k g(z_k)

    Ellipse: trapezoid in theta, q_k = (2 pi / n) z'(theta_k); the first n/2
    nodes are the upper half, node n-1-k is the mirror of node k.
    Rectangle: Gauss-Legendre per edge, counterclockwise from the lower-left corner.
    """
    if contour.shape is ContourShape.ELLIPSE:
        n = contour.nodes
        half_focal = contour.u_plus / 2.0
        a = half_focal + contour.margin
        b = math.sqrt(a * a - half_focal * half_focal)
        theta = 2.0 * np.pi * (np.arange(n) + 0.5) / n
        z = half_focal + a * np.cos(theta) + 1j * b * np.sin(theta)
        dz = -a * np.sin(theta) + 1j * b * np.cos(theta)
        return z, (2.0 * np.pi / n) * dz

    if contour.nodes < 8:
        raise ParameterDomainError(f"rectangle contour needs at least 8 nodes, got {contour.nodes}")
    # even count on vertical edges keeps nodes off the real axis
    n_vertical = max(2, 2 * (contour.nodes // 8))
    n_horizontal = (contour.nodes - 2 * n_vertical) // 2
    left, right, h = contour.left, contour.right, contour.margin
    corners = [complex(left, -h), complex(right, -h), complex(right, h), complex(left, h)]
    counts = [n_horizontal, n_vertical, n_horizontal, n_vertical]
    zs, qs = [], []
    for k, count in enumerate(counts):
        start, end = corners[k], corners[(k + 1) % 4]
        x, w = np.polynomial.legendre.leggauss(count)
        zs.append(0.5 * (start + end) + 0.5 * (end - start) * x)
        qs.append(0.5 * (end - start) * w)
    return np.concatenate(zs), np.concatenate(qs)


# ============================================
# Integration
# ============================================

def _node_values(
    model: ChannelModel,
    z: complex,
    index: int,
    opts: Optional[SolverOptions],
    with_bias: bool,
) -> Tuple[complex, complex]:
    try:
        sol = solve(model, SpectralPoint(z), opts)
        trace = resolvent_trace_de(sol)
        bias = bias_closed_form(model, sol).total if with_bias else 0j
    except IterationLimitError as e:
        raise IterationLimitError(f"contour node {index} (z={z:.6g}): {e.detail}", e.z, e.residual, e.iterations) from e
    except NumericError as e:
        raise NumericError(f"contour node {index} (z={z:.6g}): {e.detail}") from e
    return trace, bias


def lss_mean(
    model: ChannelModel,
    f: LssFunction,
    contour: Optional[ContourSpec] = None,
    opts: Optional[SolverOptions] = None,
    workers: int = 1,
    use_symmetry: bool = True,
    with_bias: bool = True,
) -> LssResult:
    """
    Deterministic mean V_f and bias B_f of Tr f(HH^H)

    Args:
        model: 채널 모델
        f: 적분할 해석 함수
        contour: 적분 경로 (기본값: default_contour(model, f))
        opts: 각 노드의 고정점 solver 옵션
        workers: 노드 병렬 평가 개수 (합산 순서는 노드 인덱스 순으로 고정)
        use_symmetry: real-coefficient f 에 대해 위쪽 반 경로만 계산
        with_bias: False 이면 B_f 계산 생략 (B_f = 0)

    Raises:
        ContourViolationError: f 의 branch point 가 경로 안쪽에 있음
        NumericError / IterationLimitError: 노드에서 고정점 실패 (노드 위치 포함)
    """
    contour = contour or default_contour(model, f)
    if f.branch_point is not None and f.branch_point >= contour.left:
        raise ContourViolationError(
            f"{f.name}: branch point {f.branch_point:g} is not left of the contour (left end {contour.left:g}); "
            "reduce the margin"
        )

    z, q = contour_nodes(contour)
    symmetric = use_symmetry and f.real_coefficients and contour.shape is ContourShape.ELLIPSE
    count = contour.nodes // 2 if symmetric else contour.nodes

    def evaluate(k: int) -> Tuple[complex, complex]:
        return _node_values(model, complex(z[k]), k, opts, with_bias)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            values = list(pool.map(evaluate, range(count)))
    else:
        values = [evaluate(k) for k in range(count)]

    sum_V, sum_B = 0j, 0j
    for k, (trace, bias) in enumerate(values):
        weighted = q[k] * f(z[k])
        sum_V += weighted * trace
        sum_B += weighted * bias

    if symmetric:
        # the mirrored half contributes the conjugate with opposite sign
        V_f = complex(-sum_V.imag / np.pi)
        B_f = complex(-sum_B.imag / np.pi)
    else:
        V_f = complex(-sum_V / (2j * np.pi))
        B_f = complex(-sum_B / (2j * np.pi))
    logger.debug(f"{f.name}: V_f={V_f:.10g}, B_f={B_f:.6g} over {count} evaluated nodes")
    return LssResult(V_f=V_f, B_f=B_f, contour=contour)
