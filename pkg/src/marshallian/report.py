"""Audit reports and their JSON / CSV forms."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field

CSV_COLUMNS = ("auditName", "verdict", "statistic", "bound", "samples", "seed")


def _clean(obj):
    if isinstance(obj, float):
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        if math.isnan(obj):
            return "nan"
        return obj
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


@dataclass
class AuditReport:
    audit_name: str
    verdict: str
    statistic: float
    bound: float | None = None
    stderr: float | None = None
    witness: dict | None = None
    samples: int = 0
    seed: int = 0
    family: str | None = None
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.verdict not in ("pass", "fail"):
            raise ValueError(f"verdict must be pass/fail, got {self.verdict!r}")
        if self.verdict == "fail" and self.witness is None:
            raise ValueError("a failing report needs a witness")

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_dict(self) -> dict:
        d = asdict(self)
        return _clean(
            {
                "auditName": d.pop("audit_name"),
                "verdict": d.pop("verdict"),
                **d,
            }
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def csv_row(self) -> dict:
        return {
            "auditName": self.audit_name,
            "verdict": self.verdict,
            "statistic": repr(float(self.statistic)),
            "bound": "" if self.bound is None else repr(float(self.bound)),
            "samples": self.samples,
            "seed": self.seed,
        }


def reports_to_csv(reports, header: bool = True) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    if header:
        w.writeheader()
    for r in reports:
        w.writerow(r.csv_row())
    return buf.getvalue()
