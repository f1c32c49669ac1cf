"""
mc 커맨드
"""
from rmtbias.deps.runtime import ecdf_cap, worker_count
from rmtbias.models.domain import SpectralPoint
from rmtbias.models.outputs import SummaryRow
from rmtbias.routers.base import CommandRouter, context_of, option, output_for, parse_complex
from rmtbias.services.bias_engine import bias_closed_form
from rmtbias.services.fixed_point import solve
from rmtbias.services.mi_statistics import mi_clt
from rmtbias.services.monte_carlo import run_mi_experiment

router = CommandRouter(tags=["MonteCarlo"])


@router.command(
    "mc",
    help="Monte-Carlo MI mean / variance (and resolvent bias with --z)",
    options=[
        option("--z", type=parse_complex, default=None, help="resolvent bias 도 추정할 spectral point"),
        option("--dump-samples", default=None, help="MI 샘플 파일 (한 줄에 하나)"),
    ],
)
def mc_command(args):
    """
    quantity,value,stderr 요약 행

    Output is bit-identical for a fixed seed regardless of --workers.
    """
    ctx = context_of(args)
    sigma2 = ctx.config.sigma2
    stats = mi_clt(ctx.model, sigma2, ctx.solver)
    summary = run_mi_experiment(
        ctx.model, ctx.dist, sigma2, ctx.config.mc.trials, ctx.config.mc.seed,
        workers=worker_count(args.workers), resolvent_z=args.z, ecdf_cap=ecdf_cap(), stats=stats,
    )

    rows = [
        SummaryRow(quantity="trials", value=summary.trials),
        SummaryRow(quantity="seed", value=summary.seed),
        SummaryRow(quantity="mean_C", value=summary.mean_C, stderr=summary.se_mean),
        SummaryRow(quantity="var_C", value=summary.var_C, stderr=summary.se_var),
        SummaryRow(quantity="V", value=stats.V),
        SummaryRow(quantity="B_C", value=stats.B_C),
        SummaryRow(quantity="Theta_G", value=stats.Theta_G),
        SummaryRow(quantity="Theta_B", value=stats.Theta_B),
        SummaryRow(quantity="Theta", value=stats.Theta),
        SummaryRow(quantity="emp_bias_mean", value=summary.emp_bias_mean, stderr=summary.se_mean),
        SummaryRow(quantity="emp_bias_var", value=summary.emp_bias_var, stderr=summary.se_var),
    ]
    if args.z is not None:
        analytic = bias_closed_form(ctx.model, solve(ctx.model, SpectralPoint(args.z), ctx.solver)).total
        rows += [
            SummaryRow(quantity="emp_resolvent_bias_re", value=summary.emp_resolvent_bias.real,
                       stderr=summary.se_resolvent.real),
            SummaryRow(quantity="emp_resolvent_bias_im", value=summary.emp_resolvent_bias.imag,
                       stderr=summary.se_resolvent.imag),
            SummaryRow(quantity="analytic_bias_re", value=analytic.real),
            SummaryRow(quantity="analytic_bias_im", value=analytic.imag),
        ]

    output = output_for(ctx, rows)
    if args.dump_samples:
        output.samples = summary.samples
        output.samples_path = args.dump_samples
    return output
