"""
rmtbias CLI

결정적 등가(deterministic equivalent), resolvent trace bias, LSS bias,
MI CLT (평균 편향 / 분산 / outage) 계산과 Monte-Carlo 검증

    python -m rmtbias <subcommand> --config <path> [flags]

Exit codes: 0 success, 2 configuration error, 3 numeric error, 4 partial results.
"""
import argparse
import logging
import sys
from typing import List, Optional, Sequence

from rmtbias.deps.runtime import configure_logging, load_environment
from rmtbias.errors import RMTBiasError
from rmtbias.models.config import OutputFormat
from rmtbias.repositories.result_repository import write_records, write_samples, write_tables
from rmtbias.routers import bias, clt, mc, reproduce, solve
from rmtbias.routers.base import Command, CommandOutput, CommandRouter

logger = logging.getLogger("rmtbias")

VERSION = "1.0.0"


# ============================================
# App
# ============================================

class CommandApp:
    def __init__(self, prog: str, description: str, version: str):
        self.prog = prog
        self.description = description
        self.version = version
        self.commands: List[Command] = []

    def include_router(self, router: CommandRouter) -> None:
        self.commands.extend(router.commands)

    def build_parser(self) -> argparse.ArgumentParser:
        parser = argparse.ArgumentParser(prog=self.prog, description=self.description)
        parser.add_argument("--version", action="version", version=f"%(prog)s {self.version}")
        subparsers = parser.add_subparsers(dest="command", required=True)
        for command in self.commands:
            sub = subparsers.add_parser(command.name, help=command.help, description=command.help)
            _add_common_options(sub)
            for opt in command.options:
                sub.add_argument(*opt.flags, **opt.kwargs)
            sub.set_defaults(handler=command.handler)
        return parser


def _add_common_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", required=True, help="scenario / experiment JSON")
    parser.add_argument("--out", default=None, help='출력 경로 ("-" = stdout, reproduce 는 디렉터리)')
    parser.add_argument("--format", choices=[f.value for f in OutputFormat], default=None)
    parser.add_argument("--workers", type=int, default=None, help="병렬 작업 수 (기본값: RMTBIAS_THREADS)")
    parser.add_argument("--log-level", default=None, help="DEBUG | INFO | WARNING | ERROR")
    parser.add_argument("--sigma2", type=float, default=None, help="잡음 분산")
    parser.add_argument("--tol", type=float, default=None, help="고정점 허용 오차")
    parser.add_argument("--max-iter", type=int, default=None, help="고정점 최대 반복")
    parser.add_argument("--damping", type=float, default=None, help="고정점 감쇠 계수")
    parser.add_argument("--trials", type=int, default=None, help="Monte-Carlo 시행 횟수")
    parser.add_argument("--seed", type=int, default=None, help="64-bit seed")


def _write(output: CommandOutput) -> None:
    if output.tables is not None:
        write_tables(output.tables, output.path, output.fmt)
    else:
        write_records(output.records, output.path, output.fmt)
    if output.samples is not None and output.samples_path:
        write_samples(output.samples, output.samples_path)


app = CommandApp(
    prog="rmtbias",
    description="Bias and CLT of mutual information for non-centered, non-Gaussian MIMO channels",
    version=VERSION,
)

# ============================================
# 라우터 등록
# ============================================

app.include_router(solve.router)
app.include_router(bias.router)
app.include_router(clt.router)
app.include_router(mc.router)
app.include_router(reproduce.router)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    CLI 진입점

    Returns:
        process exit code
    """
    load_environment()
    args = app.build_parser().parse_args(argv)
    try:
        configure_logging(args.log_level)
        output = args.handler(args)
        _write(output)
    except RMTBiasError as e:
        logger.error(str(e))
        return e.exit_code
    if output.error is not None:
        logger.error(str(output.error))
        return output.error.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
