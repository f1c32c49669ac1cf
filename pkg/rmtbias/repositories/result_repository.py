"""
Result writers

CSV (header row, UTF-8, '.' decimal, shortest round-trip floats) or JSON
mirroring the same records. Path "-" writes to stdout.
"""
import csv
import json
import logging
import sys
from contextlib import contextmanager
from enum import Enum
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Sequence, Union

import numpy as np
from pydantic import BaseModel

from rmtbias.models.config import OutputFormat

logger = logging.getLogger(__name__)

Record = Union[BaseModel, Mapping]

STDOUT = "-"


def _plain(value):
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, complex):
        raise TypeError("complex values must be split into _re/_im columns before writing")
    if isinstance(value, Enum):
        return value.value
    return value


def to_rows(records: Iterable[Record]) -> List[Dict]:
    """pydantic 모델 / dict 를 평탄한 dict 행으로 변환"""
    rows = []
    for record in records:
        raw = record.model_dump() if isinstance(record, BaseModel) else dict(record)
        rows.append({key: _plain(value) for key, value in raw.items()})
    return rows


def _fieldnames(rows: Sequence[Dict]) -> List[str]:
    names: List[str] = []
    for row in rows:
        for key in row:
            if key not in names:
                names.append(key)
    return names


@contextmanager
def _open_text(path: str):
    if path == STDOUT:
        yield sys.stdout
        return
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with open(target, "w", newline="", encoding="utf-8") as handle:
        yield handle


def write_records(records: Iterable[Record], path: str = STDOUT, fmt: OutputFormat = OutputFormat.CSV) -> None:
    """
    레코드 목록 저장

    Args:
        records: pydantic 모델 또는 dict
        path: 출력 경로 ("-" = stdout)
        fmt: csv | json
    """
    rows = to_rows(records)
    fmt = OutputFormat(fmt)
    with _open_text(path) as handle:
        if fmt is OutputFormat.JSON:
            handle.write(json.dumps(rows, indent=2))
            handle.write("\n")
            return
        writer = csv.DictWriter(handle, fieldnames=_fieldnames(rows), restval="", lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    if path != STDOUT:
        logger.info(f"wrote {len(rows)} rows to {path}")


def write_tables(tables: Mapping[str, Iterable[Record]], directory: str, fmt: OutputFormat = OutputFormat.CSV) -> List[str]:
    """tables 의 각 항목을 <directory>/<name>.<fmt> 로 저장, 작성한 경로 목록 반환"""
    fmt = OutputFormat(fmt)
    written = []
    for name, records in tables.items():
        path = STDOUT if directory == STDOUT else str(Path(directory) / f"{name}.{fmt.value}")
        write_records(records, path, fmt)
        written.append(path)
    return written


def write_samples(samples: np.ndarray, path: str) -> None:
    """MI 샘플을 한 줄에 하나씩 기록"""
    with _open_text(path) as handle:
        for value in np.asarray(samples, dtype=np.float64):
            handle.write(repr(float(value)))
            handle.write("\n")
