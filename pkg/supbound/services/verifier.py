import logging
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from pydantic import BaseModel

from supbound import settings
from supbound.services.assignments import (
    Assignment,
    check_additive,
    check_monotone,
    check_strictly_monotone,
    check_subterm,
    extend_to_term,
)
from supbound.services.deppairs import dependency_pairs
from supbound.services.maxpoly import (
    MaxPolyFn,
    Verdict,
    check_geq_uniform,
    decompose_geq,
    dominates_coefficientwise,
    render_scalar,
)
from supbound.services.reports import (
    ConstraintCategory,
    ConstraintResult,
    CriterionKind,
    PiMode,
    VerificationReport,
)
from supbound.services.rewriting import NormalForm, check_orthogonality, normalize
from supbound.services.sampling import SamplingPlan, find_violation
from supbound.services.terms import App, Term, Trs

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Criterion:
    kind: CriterionKind
    pi_mode: PiMode = PiMode.NAT_STRICT
    delta: Fraction = settings.PI_DELTA
    epsilon: Fraction = settings.PI_EPSILON
    relax_nullary: Optional[Fraction] = None
    approximate: bool = False

    def __post_init__(self):
        if self.kind == CriterionKind.PI and self.pi_mode == PiMode.DELTA_STRICT_2B and self.delta <= 0:
            raise ValueError("delta must be positive")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")

    @property
    def tolerance(self) -> Fraction:
        return settings.APPROX_TOLERANCE if self.approximate else Fraction(0)


def _strictly_dominates(q: MaxPolyFn, r: MaxPolyFn, tolerance: Fraction) -> Verdict:
    """Each branch of r is below some branch of q with a positive constant gap."""
    for clause in decompose_geq(q, r).clauses:
        if not any(
            dominates_coefficientwise(a.lhs, a.rhs, tolerance) and a.lhs.constant_term - a.rhs.constant_term > 0
            for a in clause.atoms
        ):
            return Verdict.UNKNOWN
    return Verdict.HOLDS


def compare_terms(
        a: Assignment,
        lhs: Term,
        rhs: Term,
        plan: Optional[SamplingPlan],
        shift: Fraction = Fraction(0),
        strict: bool = False,
        tolerance: Fraction = Fraction(0),
) -> Tuple[Verdict, Optional[Dict[str, str]]]:
    """Check [lhs] >= [rhs] + shift (or > when strict) over the variables of lhs."""
    var_order = lhs.variables() + tuple(v for v in rhs.variables() if v not in lhs.variables())
    q = extend_to_term(a, lhs, var_order)
    r = extend_to_term(a, rhs, var_order)
    if shift:
        r = r.shift(shift)
    if strict:
        verdict = _strictly_dominates(q, r, tolerance)
        holds = lambda x: q.evaluate(x) > r.evaluate(x) - tolerance
    else:
        verdict = check_geq_uniform(q, r, tolerance)
        holds = lambda x: q.evaluate(x) >= r.evaluate(x) - tolerance
    if verdict == Verdict.HOLDS:
        return verdict, None
    point = find_violation(holds, len(var_order), plan)
    if point is None:
        return Verdict.UNKNOWN, None
    return Verdict.FAILS, {v.name: str(x) for v, x in zip(var_order, point)}


def _additivity_constraints(a: Assignment, trs: Trs, relax: Optional[Fraction]) -> List[ConstraintResult]:
    report = check_additive(a, trs, relax_nullary=relax)
    results = []
    for d in report.diagnostics:
        results.append(ConstraintResult(
            category=ConstraintCategory.ADDITIVE,
            subject=d.symbol,
            description=f"[{d.symbol}] additive" + (f": {d.message}" if d.message else ""),
            verdict=Verdict.HOLDS if d.additive else Verdict.FAILS,
            witness=None if d.additive else {f"X{i}": x for i, x in enumerate(d.witness or [], start=1)},
        ))
    return results


def _monotone_constraints(a: Assignment, trs: Trs, strict: bool) -> List[ConstraintResult]:
    verdicts = check_strictly_monotone(a) if strict else check_monotone(a)
    category = ConstraintCategory.STRICT_MONOTONE if strict else ConstraintCategory.MONOTONE
    word = "strictly monotone" if strict else "monotone"
    return [
        ConstraintResult(
            category=category,
            subject=s.name,
            description=f"[{s.name}] {word}: {a.function_for(s).render()}",
            verdict=verdicts[s.name],
        )
        for s in trs.signature
    ]


def _rule_constraints(
        a: Assignment, trs: Trs, plan, tolerance, shift=Fraction(0), strict=False
) -> List[ConstraintResult]:
    results = []
    relation = ">" if strict else ">="
    suffix = f" + {render_scalar(shift)}" if shift else ""
    for rule in trs.rules:
        verdict, witness = compare_terms(a, rule.lhs, rule.rhs, plan, shift=shift, strict=strict, tolerance=tolerance)
        results.append(ConstraintResult(
            category=ConstraintCategory.RULE,
            subject=f"rule {rule.index}",
            description=f"[{rule.lhs}] {relation} [{rule.rhs}]{suffix}",
            verdict=verdict,
            witness=witness,
        ))
    return results


def _notes(trs: Trs, criterion: Criterion) -> List[str]:
    notes = []
    if not check_orthogonality(trs).orthogonal:
        notes.append("TRS is not orthogonal; computed functions may be relations")
    if criterion.approximate:
        notes.append(f"approximate mode (tolerance {render_scalar(criterion.tolerance)}): NOT a certificate")
    if criterion.relax_nullary is not None:
        notes.append(f"nullary constructors relaxed to [0, {render_scalar(criterion.relax_nullary)}]")
    return notes


def _log_report(report: VerificationReport):
    for c in report.constraints:
        logger.debug(f"{c.category.value} {c.subject}: {c.verdict.value} {c.witness or ''}")
    logger.info(f"{report.kind.value.upper()} verification: {report.overall.value}")
    return report


def verify_qi(
        trs: Trs, a: Assignment, plan: Optional[SamplingPlan] = None, criterion: Optional[Criterion] = None
) -> VerificationReport:
    criterion = criterion or Criterion(kind=CriterionKind.QI)
    a.check_total(trs)
    tol = criterion.tolerance
    constraints = (
        _additivity_constraints(a, trs, criterion.relax_nullary)
        + _monotone_constraints(a, trs, strict=False)
        + check_subterm(a, trs.signature, plan, tolerance=tol)
        + _rule_constraints(a, trs, plan, tol)
    )
    return _log_report(VerificationReport.assemble(
        CriterionKind.QI, constraints, notes=_notes(trs, criterion), certifying=not criterion.approximate
    ))


def verify_pi(
        trs: Trs, a: Assignment, plan: Optional[SamplingPlan] = None, criterion: Optional[Criterion] = None
) -> VerificationReport:
    criterion = criterion or Criterion(kind=CriterionKind.PI)
    a.check_total(trs)
    tol = criterion.tolerance
    constraints = _additivity_constraints(a, trs, criterion.relax_nullary) + _monotone_constraints(a, trs, strict=True)
    if criterion.pi_mode == PiMode.SUBTERM_STRICT_2A:
        constraints += check_subterm(a, trs.signature, plan, margin=criterion.epsilon, tolerance=tol)
        constraints += _rule_constraints(a, trs, plan, tol, strict=True)
    elif criterion.pi_mode == PiMode.DELTA_STRICT_2B:
        constraints += _rule_constraints(a, trs, plan, tol, shift=criterion.delta)
    else:
        constraints += _rule_constraints(a, trs, plan, tol, shift=Fraction(1))
    return _log_report(VerificationReport.assemble(
        CriterionKind.PI,
        constraints,
        notes=_notes(trs, criterion),
        certifying=not criterion.approximate,
        pi_mode=criterion.pi_mode,
    ))


def verify_dpi(
        trs: Trs, a: Assignment, plan: Optional[SamplingPlan] = None, criterion: Optional[Criterion] = None
) -> VerificationReport:
    criterion = criterion or Criterion(kind=CriterionKind.DPI)
    a.check_total(trs)
    tol = criterion.tolerance
    constraints = (
        _additivity_constraints(a, trs, criterion.relax_nullary)
        + _monotone_constraints(a, trs, strict=False)
        + _rule_constraints(a, trs, plan, tol)
    )
    for pair in dependency_pairs(trs):
        verdict, witness = compare_terms(a, pair.lhs_marked, pair.rhs_marked, plan, tolerance=tol)
        constraints.append(ConstraintResult(
            category=ConstraintCategory.DEPENDENCY_PAIR,
            subject=f"rule {pair.origin}",
            description=f"<{pair.lhs_marked}> >= <{pair.rhs_marked}>",
            verdict=verdict,
            witness=witness,
        ))
    return _log_report(VerificationReport.assemble(
        CriterionKind.DPI, constraints, notes=_notes(trs, criterion), certifying=not criterion.approximate
    ))


def verify(
        trs: Trs, a: Assignment, criterion: Criterion, plan: Optional[SamplingPlan] = None
) -> VerificationReport:
    verifiers = {
        CriterionKind.QI: verify_qi,
        CriterionKind.PI: verify_pi,
        CriterionKind.DPI: verify_dpi,
    }
    return verifiers[criterion.kind](trs, a, plan=plan, criterion=criterion)


class EmpiricalViolation(BaseModel):
    term: str
    value: str
    check: str
    lhs: str
    rhs: str


class EmpiricalReport(BaseModel):
    checked: int = 0
    skipped: int = 0
    violations: List[EmpiricalViolation] = []

    @property
    def passed(self) -> bool:
        return not self.violations


def empirical_si_check(
        trs: Trs,
        a,
        samples: Sequence[App],
        budget: Optional[int] = None,
        k: Optional[Fraction] = None,
) -> EmpiricalReport:
    """Check theta(f(v)) >= theta(value) and theta(f)(k|v1|, ..., k|vm|) >= |value| on basic terms.

    ``a`` is an ``Assignment`` or any object offering ``value_of(term)`` and
    ``apply(symbol, args)``; ``k`` defaults to its additivity bound.
    """
    if k is None:
        k = getattr(a, "k_bound", None)
    if k is None and isinstance(a, Assignment):
        k = check_additive(a, trs, relax_nullary=_largest_nullary(a, trs)).k_value
    report = EmpiricalReport()
    for term in samples:
        outcome = normalize(trs, term, max_steps=budget)
        if not isinstance(outcome, NormalForm):
            report.skipped += 1
            continue
        report.checked += 1
        value = outcome.term
        lhs, rhs = a.value_of(term), a.value_of(value)
        if lhs < rhs:
            report.violations.append(EmpiricalViolation(
                term=str(term), value=str(value), check="theta(f(v)) >= theta(value)",
                lhs=render_scalar(Fraction(lhs)), rhs=render_scalar(Fraction(rhs)),
            ))
        if k is not None:
            bound = a.apply(term.symbol, [k * arg.size() for arg in term.args])
            if bound < value.size():
                report.violations.append(EmpiricalViolation(
                    term=str(term), value=str(value), check="theta(f)(k|v|) >= |value|",
                    lhs=render_scalar(Fraction(bound)), rhs=str(value.size()),
                ))
    if report.skipped:
        logger.warning(f"{report.skipped} sample(s) did not normalize to a value within budget and were skipped")
    return report


def _largest_nullary(a: Assignment, trs: Trs) -> Optional[Fraction]:
    values = [a.value_of(App(c, ())) for c in trs.constructors if c.arity == 0 and c.name in a.functions]
    return max(values) if values else None


class TraceViolation(BaseModel):
    term: str
    step: int
    before: str
    after: str
    valuation: Dict[str, str]


class TraceReport(BaseModel):
    derivations: int = 0
    steps: int = 0
    violations: List[TraceViolation] = []

    @property
    def passed(self) -> bool:
        return not self.violations


def check_pi_trace_decrease(
        trs: Trs,
        a: Assignment,
        terms: Sequence[Term],
        random_valuations: int = 20,
        seed: int = settings.DEFAULT_SEED,
        budget: Optional[int] = None,
) -> TraceReport:
    """Interpretations strictly decrease along traced leftmost-innermost derivations."""
    rng = random.Random(seed)
    report = TraceReport()
    for term in terms:
        outcome = normalize(trs, term, max_steps=budget, trace=True)
        if not getattr(outcome, "trace", None):
            continue
        report.derivations += 1
        var_order = term.variables()
        valuations = [tuple(Fraction(1) for _ in var_order)] + [
            tuple(Fraction(rng.randint(0, 32), rng.randint(1, 8)) for _ in var_order)
            for _ in range(random_valuations)
        ]
        trace = outcome.trace
        for step, (before, after) in enumerate(zip(trace, trace[1:]), start=1):
            report.steps += 1
            q = extend_to_term(a, before, var_order)
            r = extend_to_term(a, after, var_order)
            for valuation in valuations:
                if not q.evaluate(valuation) > r.evaluate(valuation):
                    report.violations.append(TraceViolation(
                        term=str(term), step=step, before=str(before), after=str(after),
                        valuation={v.name: str(x) for v, x in zip(var_order, valuation)},
                    ))
                    break
    return report
