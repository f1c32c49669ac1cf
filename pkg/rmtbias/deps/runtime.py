"""
Runtime dependencies: environment, worker count, logging
"""
import logging
import os
from typing import Optional

from dotenv import load_dotenv

from rmtbias.errors import ConfigurationError

LOG_FORMAT = "%(asctime)s [%(levelname)s] %(name)s: %(message)s"
DEFAULT_ECDF_CAP = 200_000

_env_loaded = False


def load_environment() -> None:
    """.env 를 한 번만 읽음 (이미 설정된 환경 변수가 우선)"""
    global _env_loaded
    if not _env_loaded:
        load_dotenv()
        _env_loaded = True


def _positive_int(name: str, raw: str) -> int:
    try:
        value = int(raw)
    except ValueError as e:
        raise ConfigurationError(f"{name} must be an integer, got {raw!r}") from e
    if value < 1:
        raise ConfigurationError(f"{name} must be >= 1, got {value}")
    return value


def worker_count(override: Optional[int] = None) -> int:
    """
    병렬 작업 수

    Priority: explicit override > RMTBIAS_THREADS > os.cpu_count()
    """
    if override is not None:
        return _positive_int("--workers", str(override))
    raw = os.getenv("RMTBIAS_THREADS")
    if raw:
        return _positive_int("RMTBIAS_THREADS", raw)
    return os.cpu_count() or 1


def ecdf_cap() -> int:
    return _positive_int("RMTBIAS_ECDF_CAP", os.getenv("RMTBIAS_ECDF_CAP", str(DEFAULT_ECDF_CAP)))


def configure_logging(level: Optional[str] = None) -> None:
    """루트 로거 설정 (stderr). level 이 없으면 RMTBIAS_LOG_LEVEL, 기본값 INFO"""
    name = (level or os.getenv("RMTBIAS_LOG_LEVEL", "INFO")).upper()
    numeric = logging.getLevelName(name)
    if not isinstance(numeric, int):
        raise ConfigurationError(f"unknown log level {name!r}")
    logging.basicConfig(level=numeric, format=LOG_FORMAT, force=True)
