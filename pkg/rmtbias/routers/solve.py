"""
solve / quantities 커맨드
"""
from rmtbias.models.domain import SpectralPoint
from rmtbias.models.outputs import SolveOut
from rmtbias.routers.base import CommandRouter, context_of, option, output_for, parse_complex, split_complex
from rmtbias.services.fixed_point import resolvent_trace_de, solve
from rmtbias.services.quantities import trace_functionals

router = CommandRouter(tags=["DeterministicEquivalent"])

Z_OPTION = option("--z", type=parse_complex, default=None, help="spectral point (기본값: -sigma2)")


def _point(args, ctx) -> SpectralPoint:
    if args.z is None:
        return SpectralPoint.from_sigma2(ctx.config.sigma2)
    return SpectralPoint(args.z)


@router.command("solve", help="fixed point (delta, delta_t) and Tr T(z)", options=[Z_OPTION])
def solve_command(args):
    """
    고정점 계산

    Returns:
        SolveOut 한 행
    """
    ctx = context_of(args)
    sol = solve(ctx.model, _point(args, ctx), ctx.solver)
    record = SolveOut(
        **split_complex("z", sol.z.z),
        **split_complex("delta", sol.delta),
        **split_complex("delta_t", sol.delta_t),
        **split_complex("trace_T", resolvent_trace_de(sol)),
        iterations=sol.iterations,
        residual=sol.residual,
        damping=sol.damping,
    )
    return output_for(ctx, [record])


@router.command("quantities", help="ledger of deterministic quantities at z", options=[Z_OPTION])
def quantities_command(args):
    """quantity,value_re,value_im 행 목록"""
    ctx = context_of(args)
    sol = solve(ctx.model, _point(args, ctx), ctx.solver)
    ledger = {"delta": sol.delta, "delta_t": sol.delta_t, **trace_functionals(ctx.model, sol).scalars()}
    rows = [{"quantity": name, **split_complex("value", value)} for name, value in ledger.items()]
    return output_for(ctx, rows)
