"""
bias / lss 커맨드
"""
import logging
from argparse import ArgumentTypeError

from rmtbias.deps.runtime import worker_count
from rmtbias.errors import ConfigurationError
from rmtbias.models.domain import BiasValue, ContourShape, SpectralPoint
from rmtbias.models.outputs import BiasOut, LssOut
from rmtbias.routers.base import (
    CommandRouter,
    context_of,
    option,
    output_for,
    parse_complex,
    parse_floats,
    split_complex,
)
from rmtbias.services.bias_engine import bias_closed_form, bias_log_delta, relative_bias_gap
from rmtbias.services.fixed_point import solve
from rmtbias.services.lss_contour import DEFAULT_NODES, default_contour, lss_mean, mi_function, polynomial

logger = logging.getLogger(__name__)

router = CommandRouter(tags=["Bias"])


def _bias_record(value: BiasValue, rel_gap=None) -> BiasOut:
    return BiasOut(
        **split_complex("z", value.z),
        method=value.method.value,
        **split_complex("B_theta", value.B_theta),
        **split_complex("B_kappa", value.B_kappa),
        **split_complex("total", value.total),
        rel_gap=rel_gap,
    )


@router.command(
    "bias",
    help="resolvent-trace bias B(z)",
    options=[
        option("--z", type=parse_complex, default=None, help="spectral point (기본값: -sigma2)"),
        option("--method", choices=["t1", "t2", "both"], default="t1", help="closed form | derivative | both"),
        option("--h", type=float, default=None, help="derivative step (기본값: 1e-4 |z|)"),
    ],
)
def bias_command(args):
    """
    B(z) 계산

    --method both 는 두 행을 출력하고 rel_gap 을 채웁니다.
    """
    ctx = context_of(args)
    point = SpectralPoint(args.z) if args.z is not None else SpectralPoint.from_sigma2(ctx.config.sigma2)
    values = []
    if args.method in ("t1", "both"):
        values.append(bias_closed_form(ctx.model, solve(ctx.model, point, ctx.solver)))
    if args.method in ("t2", "both"):
        values.append(bias_log_delta(ctx.model, point, args.h, ctx.solver, workers=min(2, worker_count(args.workers))))
    rel_gap = relative_bias_gap(values[0], values[1]) if len(values) == 2 else None
    return output_for(ctx, [_bias_record(value, rel_gap) for value in values])


def parse_function(text: str, sigma2: float):
    """'mi' | 'poly:c0,c1,...'"""
    if text == "mi":
        return mi_function(sigma2)
    if text.startswith("poly:"):
        try:
            return polynomial(parse_floats(text[len("poly:"):]))
        except ArgumentTypeError as e:
            raise ConfigurationError(str(e)) from e
    raise ConfigurationError(f"unknown LSS function {text!r} (expected 'mi' or 'poly:c0,c1,...')")


@router.command(
    "lss",
    help="mean V_f and bias B_f of Tr f(HH^H) by contour integration",
    options=[
        option("--f", dest="function", default="mi", help="mi | poly:c0,c1,..."),
        option("--nodes", type=int, default=DEFAULT_NODES, help="quadrature nodes (even)"),
        option("--margin", type=float, default=None, help="contour clearance (기본값: 자동)"),
        option("--shape", choices=[s.value for s in ContourShape], default=ContourShape.ELLIPSE.value),
        option("--no-symmetry", action="store_true", help="evaluate the full contour"),
    ],
)
def lss_command(args):
    """선형 스펙트럼 통계량"""
    ctx = context_of(args)
    f = parse_function(args.function, ctx.config.sigma2)
    contour = default_contour(ctx.model, f, nodes=args.nodes, margin=args.margin, shape=ContourShape(args.shape))
    result = lss_mean(
        ctx.model, f, contour, ctx.solver,
        workers=worker_count(args.workers), use_symmetry=not args.no_symmetry,
    )
    record = LssOut(
        f=args.function,
        **split_complex("V_f", result.V_f),
        **split_complex("B_f", result.B_f),
        nodes=contour.nodes,
        margin=contour.margin,
        u_plus=contour.u_plus,
        shape=contour.shape.value,
    )
    return output_for(ctx, [record])
