from fractions import Fraction

import pytest

from supbound.services.assignments import load_assignment
from supbound.services.maxpoly import Verdict
from supbound.services.reports import ConstraintCategory, CriterionKind, Overall, PiMode
from supbound.services.trs_parser import parse_term
from supbound.services.verifier import (
    Criterion,
    check_pi_trace_decrease,
    compare_terms,
    empirical_si_check,
    verify,
    verify_dpi,
    verify_pi,
    verify_qi,
)


def test_qiex_quasi_interpretation_is_valid(qiex_trs, qiex_assignment, small_plan):
    report = verify_qi(qiex_trs, qiex_assignment, plan=small_plan)

    assert report.overall == Overall.VALID
    assert report.certifying
    assert not report.failures()
    categories = {c.category for c in report.constraints}
    assert categories == {
        ConstraintCategory.ADDITIVE,
        ConstraintCategory.MONOTONE,
        ConstraintCategory.SUBTERM,
        ConstraintCategory.RULE,
    }


def test_qiex_zero_function_is_invalid(qiex_trs, small_plan):
    a = load_assignment("0 = 0\ns = X + 1\nf = 0\n", qiex_trs)

    report = verify_qi(qiex_trs, a, plan=small_plan)

    assert report.overall == Overall.INVALID
    subterm = next(c for c in report.failures() if c.category == ConstraintCategory.SUBTERM)
    assert subterm.subject == "f"
    assert subterm.witness == {"X1": "1"}


def test_doubling_polynomial_interpretation(doubling_trs, doubling_assignment, small_plan):
    report = verify_pi(doubling_trs, doubling_assignment, plan=small_plan)

    assert report.overall == Overall.VALID
    assert report.pi_mode == PiMode.NAT_STRICT


def test_doubling_without_constant_is_not_strict(doubling_trs, small_plan):
    a = load_assignment("0 = 0\ns = X + 1\nd = 2 * X\n", doubling_trs)

    report = verify_pi(doubling_trs, a, plan=small_plan)

    assert report.overall == Overall.INVALID
    assert [c.subject for c in report.failures()] == ["rule 1", "rule 2"]


def test_pi_delta_mode(doubling_trs, small_plan):
    criterion = Criterion(kind=CriterionKind.PI, pi_mode=PiMode.DELTA_STRICT_2B, delta=Fraction(1, 2))
    tight = load_assignment("0 = 0\ns = X + 1\nd = 3 * X + 1\n", doubling_trs)
    loose = load_assignment("0 = 0\ns = X + 1\nd = 3 * X + 2\n", doubling_trs)

    assert verify(doubling_trs, tight, criterion, plan=small_plan).overall == Overall.INVALID
    report = verify(doubling_trs, loose, criterion, plan=small_plan)
    assert report.overall == Overall.VALID
    assert report.pi_mode == PiMode.DELTA_STRICT_2B


def test_pi_subterm_mode_needs_epsilon_margin(doubling_trs, doubling_assignment, small_plan):
    criterion = Criterion(kind=CriterionKind.PI, pi_mode=PiMode.SUBTERM_STRICT_2A, epsilon=Fraction(1, 2))

    report = verify(doubling_trs, doubling_assignment, criterion, plan=small_plan)

    # d = 3X + 1 clears the margin, s = X + 1 too
    subterms = [c for c in report.constraints if c.category == ConstraintCategory.SUBTERM]
    assert {c.verdict for c in subterms} == {Verdict.HOLDS}


def test_halflog_dp_interpretation(halflog_trs, halflog_assignment, small_plan):
    criterion = Criterion(kind=CriterionKind.DPI, relax_nullary=Fraction(1))

    report = verify_dpi(halflog_trs, halflog_assignment, plan=small_plan, criterion=criterion)

    assert report.overall == Overall.VALID
    pairs = [c for c in report.constraints if c.category == ConstraintCategory.DEPENDENCY_PAIR]
    assert len(pairs) == 3
    assert any("relaxed" in note for note in report.notes)


def test_halflog_is_not_a_quasi_interpretation(halflog_trs, halflog_assignment, small_plan):
    criterion = Criterion(kind=CriterionKind.QI, relax_nullary=Fraction(1))

    report = verify(halflog_trs, halflog_assignment, criterion, plan=small_plan)

    assert report.overall == Overall.INVALID
    half = next(c for c in report.failures() if c.subject == "half")
    assert half.witness == {"X1": "2"}


def test_halflog_without_relaxation_fails_additivity(halflog_trs, halflog_assignment, small_plan):
    report = verify_dpi(halflog_trs, halflog_assignment, plan=small_plan)

    assert report.overall == Overall.INVALID
    assert [c.subject for c in report.failures()] == ["0"]


def test_halflog_dpi_reports_rule_witness(halflog_trs, small_plan):
    a = load_assignment("0 = 1\ns = X + 1\nhalf = (X + 1) / 2\nlog = X / 2\n", halflog_trs)
    criterion = Criterion(kind=CriterionKind.DPI, relax_nullary=Fraction(1))

    report = verify_dpi(halflog_trs, a, plan=small_plan, criterion=criterion)

    assert report.overall == Overall.INVALID
    rule5 = next(c for c in report.failures() if c.subject == "rule 5" and c.category == ConstraintCategory.RULE)
    assert rule5.witness == {"x": "0"}


def test_pointwise_only_inequality_is_inconclusive(pointwise_only_trs, pointwise_only_assignment, small_plan):
    report = verify_qi(pointwise_only_trs, pointwise_only_assignment, plan=small_plan)

    assert report.overall == Overall.INCONCLUSIVE
    assert not report.failures()
    unknown = [c.subject for c in report.constraints if c.verdict == Verdict.UNKNOWN]
    assert "rule 1" in unknown


def test_approximate_mode_is_not_certifying(gadget_sqrt2_trs, gadget_sqrt2_assignment, small_plan):
    criterion = Criterion(kind=CriterionKind.QI, approximate=True)

    report = verify(gadget_sqrt2_trs, gadget_sqrt2_assignment, criterion, plan=small_plan)

    assert report.overall == Overall.VALID
    assert not report.certifying
    assert any("NOT a certificate" in note for note in report.notes)
    assert any("not orthogonal" in note for note in report.notes)


def test_criterion_rejects_non_positive_margins():
    with pytest.raises(ValueError):
        Criterion(kind=CriterionKind.PI, pi_mode=PiMode.DELTA_STRICT_2B, delta=Fraction(0))
    with pytest.raises(ValueError):
        Criterion(kind=CriterionKind.QI, epsilon=Fraction(0))


def test_compare_terms_strict(doubling_trs, doubling_assignment, small_plan):
    lhs = parse_term("d(s(x))", doubling_trs)
    rhs = parse_term("s(s(d(x)))", doubling_trs)

    assert compare_terms(doubling_assignment, lhs, rhs, small_plan)[0] == Verdict.HOLDS
    verdict, witness = compare_terms(doubling_assignment, lhs, rhs, small_plan, strict=True)
    assert verdict == Verdict.FAILS
    assert witness == {"x": "0"}


def test_empirical_check_passes_on_odd_inputs(qiex_trs, qiex_assignment):
    samples = [parse_term("f(" + "s(" * n + "0" + ")" * n + ")", qiex_trs) for n in range(1, 8)]

    report = empirical_si_check(qiex_trs, qiex_assignment, samples, budget=50)

    assert report.passed
    assert report.checked == 4
    assert report.skipped == 3


def test_empirical_check_finds_violation(qiex_trs):
    a = load_assignment("0 = 0\ns = X + 1\nf = 0\n", qiex_trs)

    report = empirical_si_check(qiex_trs, a, [parse_term("f(s(0))", qiex_trs)], budget=50)

    assert not report.passed
    assert report.violations[0].term == "f(s(0))"
    assert report.violations[0].check == "theta(f(v)) >= theta(value)"


def test_pi_trace_decrease(doubling_trs, doubling_assignment):
    terms = [parse_term(t, doubling_trs) for t in ["d(s(s(0)))", "d(d(s(x)))"]]

    report = check_pi_trace_decrease(doubling_trs, doubling_assignment, terms)

    assert report.passed
    assert report.derivations == 2
    assert report.steps == 3 + 3


def test_pi_trace_decrease_flags_non_decreasing_steps(halflog_trs, halflog_assignment):
    report = check_pi_trace_decrease(halflog_trs, halflog_assignment, [parse_term("half(s(0))", halflog_trs)])

    # half(s(0)) -> 0 with [half(s(0))] = 3/2 > 1 = [0]
    assert report.passed
    qi_only = load_assignment("0 = 0\ns = X + 1\nhalf = X\nlog = X\n", halflog_trs)
    report = check_pi_trace_decrease(halflog_trs, qi_only, [parse_term("half(0)", halflog_trs)])
    assert not report.passed
    assert report.violations[0].step == 1
