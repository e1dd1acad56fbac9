"""The record produced by every inequality check."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

PASS = "pass"
FAIL = "fail"
SKIPPED = "skipped_log_only"


def _hex(x: Optional[float]):
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return None
    return float.hex(float(x))


@dataclass(frozen=True)
class CheckResult:
    """One inequality ``lhs <= rhs`` compared in log form.

    ``margin_log = rhs_log - lhs_log`` and the verdict is ``pass`` exactly
    when the margin is nonnegative.  Skipped checks carry NaN logs and a
    reason.
    """

    name: str
    lemma_ref: str
    lhs_log: float
    rhs_log: float
    margin_log: float
    verdict: str
    samples_used: int = 0
    reason: str = ""

    @classmethod
    def compare(cls, name: str, lemma_ref: str, lhs_log: float, rhs_log: float,
                samples_used: int = 0, reason: str = "") -> "CheckResult":
        margin = float(rhs_log) - float(lhs_log)
        verdict = PASS if margin >= 0 else FAIL
        return cls(name, lemma_ref, float(lhs_log), float(rhs_log), margin, verdict,
                   int(samples_used), reason)

    @classmethod
    def skipped(cls, name: str, lemma_ref: str, reason: str) -> "CheckResult":
        nan = float("nan")
        return cls(name, lemma_ref, nan, nan, nan, SKIPPED, 0, reason)

    @property
    def passed(self) -> bool:
        return self.verdict == PASS

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "lemma_ref": self.lemma_ref,
            "lhs_log": _hex(self.lhs_log),
            "rhs_log": _hex(self.rhs_log),
            "margin_log": _hex(self.margin_log),
            "margin": None if math.isnan(self.margin_log) else float(f"{self.margin_log:.12g}"),
            "verdict": self.verdict,
            "samples_used": self.samples_used,
            "reason": self.reason,
        }
