"""
clt / outage 커맨드

--bits converts MI-valued fields at presentation only: values / log 2,
variances / log^2 2. For outage, --rates are then read in bits too.
"""
import logging
import math
from typing import List, Optional

import numpy as np

from rmtbias.deps.runtime import ecdf_cap, worker_count
from rmtbias.errors import ConfigurationError, ParameterDomainError
from rmtbias.models.domain import ChannelModel
from rmtbias.models.outputs import CltOut, OutageRow
from rmtbias.routers.base import CommandRouter, context_of, option, output_for, parse_floats
from rmtbias.services.mi_statistics import SpecialCase, empirical_outage, mi_clt, outage_probability, special_case_bias
from rmtbias.services.monte_carlo import run_mi_experiment

logger = logging.getLogger(__name__)

router = CommandRouter(tags=["MutualInformation"])

LN2 = math.log(2.0)
BITS_OPTION = option("--bits", action="store_true", help="MI 값을 bits 로 표시")


def applicable_special_case(model: ChannelModel) -> Optional[SpecialCase]:
    """Most specific reduced closed form the model satisfies, if any"""
    if model.is_centered:
        if np.all(model.D == 1.0) and np.all(model.Dt == 1.0):
            return SpecialCase.CENTERED_IID
        return SpecialCase.CENTERED
    if model.moments.vartheta == 0:
        return SpecialCase.NONCENTERED_CIRCULAR
    return None


@router.command(
    "clt",
    help="V, B_C, Theta_G, Theta_B, Theta of the MI at sigma2",
    options=[
        BITS_OPTION,
        option("--special", action="store_true", help="축약 공식 B_C 도 함께 출력"),
    ],
)
def clt_command(args):
    """MI CLT 통계량"""
    ctx = context_of(args)
    sigma2 = ctx.config.sigma2
    stats = mi_clt(ctx.model, sigma2, ctx.solver)
    scale = 1.0 / LN2 if args.bits else 1.0

    special_case, special_value = None, None
    if args.special:
        case = applicable_special_case(ctx.model)
        if case is None:
            logger.warning("no reduced closed form applies to this scenario")
        else:
            special_case = case.value
            special_value = special_case_bias(ctx.model, sigma2, case, ctx.solver) * scale

    record = CltOut(
        sigma2=sigma2,
        V=stats.V * scale,
        B_C=stats.B_C * scale,
        B_C_theta=stats.B_C_theta * scale,
        B_C_kappa=stats.B_C_kappa * scale,
        Theta_G=stats.Theta_G * scale * scale,
        Theta_B=stats.Theta_B * scale * scale,
        Theta=stats.Theta * scale * scale,
        mean=stats.mean * scale,
        unit="bits" if args.bits else "nats",
        special_case=special_case,
        special_B_C=special_value,
    )
    return output_for(ctx, [record])


def parse_rate_grid(text: str) -> List[float]:
    """'lo:hi:n' -> n equally spaced rates"""
    try:
        lo, hi, n = text.split(":")
        lo, hi, n = float(lo), float(hi), int(n)
    except ValueError as e:
        raise ConfigurationError(f"--rate-grid must be lo:hi:n, got {text!r}") from e
    if n < 1 or hi < lo:
        raise ParameterDomainError(f"--rate-grid needs n >= 1 and hi >= lo, got {text!r}")
    return [float(r) for r in np.linspace(lo, hi, n)]


@router.command(
    "outage",
    help="outage probability P(C <= R) under the corrected Gaussian law",
    options=[
        option("--rates", type=parse_floats, default=None, help="a,b,c"),
        option("--rate-grid", default=None, help="lo:hi:n"),
        option("--empirical", action="store_true", help="Monte-Carlo ECDF 값도 출력"),
        BITS_OPTION,
    ],
)
def outage_command(args):
    """rate,p_out[,p_out_empirical] 행"""
    ctx = context_of(args)
    if args.rates is not None:
        rates = args.rates
    elif args.rate_grid is not None:
        rates = parse_rate_grid(args.rate_grid)
    elif ctx.config.rate is not None:
        rates = [ctx.config.rate]
    else:
        raise ConfigurationError("outage needs --rates, --rate-grid or 'rate' in the config")

    to_nats = LN2 if args.bits else 1.0
    sigma2 = ctx.config.sigma2
    stats = mi_clt(ctx.model, sigma2, ctx.solver)
    samples = None
    if args.empirical:
        mc = run_mi_experiment(
            ctx.model, ctx.dist, sigma2, ctx.config.mc.trials, ctx.config.mc.seed,
            workers=worker_count(args.workers), ecdf_cap=ecdf_cap(), stats=stats,
        )
        samples = mc.ecdf

    rows = []
    for rate in rates:
        rate_nats = rate * to_nats
        rows.append(OutageRow(
            rate=rate,
            p_out=outage_probability(stats, rate_nats),
            p_out_empirical=empirical_outage(samples, rate_nats) if samples is not None else None,
        ))
    return output_for(ctx, rows)
