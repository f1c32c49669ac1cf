"""
reproduce / validate 커맨드
"""
from pathlib import Path

from rmtbias.deps.runtime import ecdf_cap, worker_count
from rmtbias.deps.scenario import apply_overrides
from rmtbias.errors import PartialResultsError
from rmtbias.repositories.scenario_repository import load_experiment
from rmtbias.routers.base import CommandOutput, CommandRouter, context_of, option, overrides_of
from rmtbias.services.diagnostics import validate
from rmtbias.services.reproduce import Figure, reproduce

router = CommandRouter(tags=["Experiments"])


@router.command(
    "reproduce",
    help="figure data as <out>/<table>.csv",
    options=[option("--figure", required=True, choices=[f.value for f in Figure])],
)
def reproduce_command(args):
    """
    그림 데이터 생성

    The output path is a directory. On a mid-sweep failure the rows computed
    so far (with a failure marker row) are written before exiting with 4.
    """
    ctx = context_of(args)
    config = ctx.config
    output = CommandOutput(path=config.output.path, fmt=config.output.format)
    try:
        output.tables = reproduce(
            Figure(args.figure), config, base_dir=ctx.base_dir,
            workers=worker_count(args.workers), ecdf_cap=ecdf_cap(),
        )
    except PartialResultsError as e:
        output.tables = e.partial
        output.error = e
    return output


@router.command(
    "validate",
    help="assumption / moment / determinant checks (pass, warn, fail)",
    options=[option("--sample-moments", type=int, default=None, help="n 개 엔트리로 모멘트 표본 점검")],
)
def validate_command(args):
    """
    시나리오 진단

    Only an unreadable document is an error; failed checks are reported as rows.
    """
    config = apply_overrides(load_experiment(args.config), overrides_of(args))
    items = validate(config, base_dir=Path(args.config).resolve().parent, sample_moments=args.sample_moments)
    return CommandOutput(records=items, path=config.output.path, fmt=config.output.format)
