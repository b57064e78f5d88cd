"""
Verification report - records, JSON persistence and a summary viewer
"""

import fcntl
import json
import logging
import math
import sys
from pathlib import Path
from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator

from .errors import ConfigError

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1


class CheckRecord(BaseModel):
    """Outcome of a single check"""
    model_config = ConfigDict(extra="forbid")

    check_id: str
    module: str
    identity: str
    measured: Optional[float] = None
    reference: Optional[float] = None
    tolerance: float
    passed: bool
    dimension: Optional[int] = None
    error: Optional[str] = None
    runtime: Optional[float] = None

    @field_validator('measured', 'reference')
    @classmethod
    def _finite_or_none(cls, value):
        if value is not None and not math.isfinite(value):
            return None
        return value


class Report(BaseModel):
    """All records of a suite run plus the seed that produced them"""
    model_config = ConfigDict(extra="forbid")

    schema_version: int = SCHEMA_VERSION
    seed: int
    records: List[CheckRecord] = Field(default_factory=list)

    @field_validator('records')
    @classmethod
    def _sorted(cls, records):
        return sorted(records, key=lambda r: r.check_id)

    @field_validator('schema_version')
    @classmethod
    def _known_schema(cls, value):
        if value != SCHEMA_VERSION:
            raise ValueError(f"unsupported report schema version {value}, expected {SCHEMA_VERSION}")
        return value

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records)

    @property
    def failures(self) -> List[CheckRecord]:
        return [r for r in self.records if not r.passed]

    def summary(self) -> dict:
        return {"total": len(self.records), "failed": len(self.failures), "passed": self.passed}

    def to_json(self, timings: bool = False) -> str:
        data = self.model_dump(exclude={'records': {'__all__': {'runtime'}}} if not timings else None)
        data["summary"] = self.summary()
        return json.dumps(data, sort_keys=True, indent=2, ensure_ascii=False) + "\n"

    @classmethod
    def from_json(cls, text: str) -> 'Report':
        data = json.loads(text)
        if not isinstance(data, dict):
            raise ValueError(f"expected a JSON object, got {type(data).__name__}")
        data.pop("summary", None)
        return cls.model_validate(data)


def write_report(report: Report, path: Path, timings: bool = False) -> Path:
    """Write the report JSON under an exclusive lock"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as f:
        fcntl.flock(f.fileno(), fcntl.LOCK_EX)
        f.write(report.to_json(timings=timings))
        fcntl.flock(f.fileno(), fcntl.LOCK_UN)
    logger.info(f"Report written to {path} ({len(report.records)} records)")
    return path


def load_report(path: Path) -> Report:
    text = Path(path).read_text(encoding='utf-8')
    try:
        return Report.from_json(text)
    except ValueError as e:
        raise ConfigError(f"{path} is not a valid report: {e}") from e


def show_report(path: Path, stream=None) -> bool:
    """Print one line per record; returns whether the suite passed"""
    stream = stream or sys.stdout
    report = load_report(path)
    print(f"📋 Verification report (seed {report.seed}):", file=stream)
    print("=" * 60, file=stream)
    for record in report.records:
        mark = "✅" if record.passed else "❌"
        detail = f"error: {record.error}" if record.error else f"measured={record.measured!r} reference={record.reference!r}"
        print(f"{mark} {record.check_id:<40} {detail}", file=stream)
    print("=" * 60, file=stream)
    summary = report.summary()
    print(f"{summary['total'] - summary['failed']}/{summary['total']} checks passed", file=stream)
    return report.passed
