"""
Command router

Subcommands are registered on a CommandRouter with a decorator and
collected by the app through include_router, one router per concern.
"""
import argparse
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from rmtbias.deps.scenario import ScenarioContext, load_context
from rmtbias.errors import RMTBiasError
from rmtbias.models.config import OutputFormat
from rmtbias.repositories.result_repository import Record


# ============================================
# Handler result
# ============================================

@dataclass
class CommandOutput:
    """
    What a handler hands back to the app for writing

    tables: named tables written as <path>/<name>.<fmt> (reproduce)
    error: raised after the output has been flushed (partial results)
    """
    records: Sequence[Record] = ()
    path: str = "-"
    fmt: OutputFormat = OutputFormat.CSV
    tables: Optional[Dict[str, List[Record]]] = None
    samples: Optional[np.ndarray] = None
    samples_path: Optional[str] = None
    error: Optional[RMTBiasError] = None


Handler = Callable[[argparse.Namespace], CommandOutput]


# ============================================
# Router
# ============================================

@dataclass(frozen=True)
class Option:
    flags: Tuple[str, ...]
    kwargs: Dict[str, Any]


def option(*flags: str, **kwargs) -> Option:
    """argparse add_argument 인자 묶음"""
    return Option(flags=flags, kwargs=kwargs)


@dataclass
class Command:
    name: str
    handler: Handler
    help: str
    options: Sequence[Option] = field(default_factory=tuple)


class CommandRouter:
    def __init__(self, tags: Optional[List[str]] = None):
        self.tags = tags or []
        self.commands: List[Command] = []

    def command(self, name: str, help: str = "", options: Sequence[Option] = ()):
        """
        서브커맨드 등록 데코레이터

        Example:
            @router.command("solve", help="...", options=[option("--z", type=parse_complex)])
            def solve_command(args): ...
        """
        def decorator(handler: Handler) -> Handler:
            self.commands.append(Command(name, handler, help, tuple(options)))
            return handler
        return decorator


# ============================================
# Shared argument helpers
# ============================================

def parse_complex(text: str) -> complex:
    """
    Complex literal: Python style ("1+2j") or "a+bi"

    Examples:
        >>> parse_complex("-0.2")
        (-0.2+0j)
        >>> parse_complex("1-0.5i")
        (1-0.5j)
    """
    cleaned = text.strip().replace(" ", "").lower()
    if cleaned.endswith("i"):
        cleaned = cleaned[:-1] + "j"
    try:
        return complex(cleaned)
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}") from e


def parse_floats(text: str) -> List[float]:
    """'a,b,c' -> [a, b, c]"""
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of numbers: {text!r}") from e


def overrides_of(args: argparse.Namespace) -> Dict[str, Any]:
    return {
        key: getattr(args, key, None)
        for key in ("tol", "max_iter", "damping", "trials", "seed", "sigma2", "rate", "out", "format")
    }


def context_of(args: argparse.Namespace) -> ScenarioContext:
    """--config + 공통 플래그 -> ScenarioContext"""
    return load_context(args.config, overrides_of(args))


def output_for(ctx: ScenarioContext, records: Sequence[Record]) -> CommandOutput:
    return CommandOutput(records=records, path=ctx.config.output.path, fmt=ctx.config.output.format)


def split_complex(name: str, value: complex) -> Dict[str, float]:
    value = complex(value)
    return {f"{name}_re": value.real, f"{name}_im": value.imag}
