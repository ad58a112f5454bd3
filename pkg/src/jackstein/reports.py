"""Structured verdicts pairing a measured quantity with an analytic bound."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import VerificationError

SLACK = 1e-10

PASS = "pass"
FAIL = "fail"
REPORT_ONLY = "report-only"


def _plain(value):
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


@dataclass(frozen=True)
class BoundReport:
    name: str
    lhs: float | None
    rhs: float | None
    verdict: str
    context: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.verdict != FAIL

    @property
    def margin(self) -> float | None:
        if self.lhs is None or self.rhs is None:
            return None
        return self.rhs - self.lhs

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "lhs": _plain(self.lhs),
            "rhs": _plain(self.rhs),
            "verdict": self.verdict,
            "context": _plain(self.context),
        }

    def __str__(self) -> str:
        def fmt(v):
            return "-" if v is None else f"{v:.6g}"
        return f"{self.name}: {fmt(self.lhs)} <= {fmt(self.rhs)} [{self.verdict}]"


def judge(name: str, lhs, rhs, slack: float = SLACK, **context) -> BoundReport:
    """Pass iff ``lhs <= rhs + slack``; NaN on either side fails."""
    lhs_f, rhs_f = float(lhs), float(rhs)
    ok = lhs_f <= rhs_f + slack
    return BoundReport(name, lhs_f, rhs_f, PASS if ok else FAIL, context)


def report_only(name: str, lhs=None, rhs=None, **context) -> BoundReport:
    return BoundReport(
        name,
        None if lhs is None else float(lhs),
        None if rhs is None else float(rhs),
        REPORT_ONLY,
        context,
    )


def require(reports, what: str = "bound check"):
    """Raise :class:`VerificationError` if any report failed; return the reports."""
    reports = list(reports)
    failed = [str(r) for r in reports if r.verdict == FAIL]
    if failed:
        raise VerificationError(f"{what} failed: " + "; ".join(failed), failed)
    return reports
