from enum import Enum
from typing import Dict, List, Optional

from pydantic import BaseModel

from supbound.services.maxpoly import Verdict


class CriterionKind(str, Enum):
    PI = "pi"
    QI = "qi"
    DPI = "dpi"


class PiMode(str, Enum):
    NAT_STRICT = "nat"
    SUBTERM_STRICT_2A = "2a"
    DELTA_STRICT_2B = "2b"


class Overall(str, Enum):
    VALID = "valid"
    INVALID = "invalid"
    INCONCLUSIVE = "inconclusive"


class ConstraintCategory(str, Enum):
    ADDITIVE = "additive"
    MONOTONE = "monotone"
    STRICT_MONOTONE = "strict-monotone"
    SUBTERM = "subterm"
    RULE = "rule"
    DEPENDENCY_PAIR = "dependency-pair"


class ConstraintResult(BaseModel):
    category: ConstraintCategory
    subject: str
    description: str
    verdict: Verdict
    witness: Optional[Dict[str, str]] = None


SOUNDNESS_NOTE = (
    "sound but not complete: Valid is certified, Unknown constraints that sampling "
    "cannot refute leave the result Inconclusive"
)


class VerificationReport(BaseModel):
    kind: CriterionKind
    pi_mode: Optional[PiMode] = None
    overall: Overall
    constraints: List[ConstraintResult] = []
    notes: List[str] = []
    certifying: bool = True

    @classmethod
    def assemble(cls, kind, constraints: List[ConstraintResult], notes=(), certifying=True, pi_mode=None):
        verdicts = {c.verdict for c in constraints}
        if Verdict.FAILS in verdicts:
            overall = Overall.INVALID
        elif Verdict.UNKNOWN in verdicts:
            overall = Overall.INCONCLUSIVE
        else:
            overall = Overall.VALID
        return cls(
            kind=kind,
            pi_mode=pi_mode,
            overall=overall,
            constraints=constraints,
            notes=[SOUNDNESS_NOTE, *notes],
            certifying=certifying,
        )

    def failures(self) -> List[ConstraintResult]:
        return [c for c in self.constraints if c.verdict == Verdict.FAILS]
