from fractions import Fraction

import pytest

from supbound.services.assignments import (
    Assignment,
    check_additive,
    check_monotone,
    check_strictly_monotone,
    check_subterm,
    extend_to_term,
    load_assignment,
)
from supbound.services.errors import ArityMismatch, MissingSymbolMapping
from supbound.services.maxpoly import MaxPolyFn, Verdict
from supbound.services.terms import Var
from supbound.services.trs_parser import parse_term


def test_load_assignment_normalizes_per_symbol_arity(doubling_trs, doubling_assignment):
    assert doubling_assignment.function_for(doubling_trs.symbol("d")).render() == "3*X1 + 1"
    assert doubling_assignment.function_for(doubling_trs.symbol("0")).arity == 0
    assert not doubling_assignment.approximate


def test_load_assignment_ignores_unknown_symbols(doubling_trs):
    a = load_assignment("0 = 0\ns = X + 1\nd = 2 * X\nh = X\n", doubling_trs)

    assert set(a.functions) == {"0", "s", "d"}


def test_load_assignment_marks_irrational_coefficients(gadget_sqrt2_trs, gadget_sqrt2_assignment):
    assert gadget_sqrt2_assignment.approximate
    gadget_sqrt2_assignment.check_total(gadget_sqrt2_trs)


def test_load_assignment_rejects_too_many_variables(doubling_trs):
    with pytest.raises(ArityMismatch):
        load_assignment("s = X + Y\n", doubling_trs)


def test_check_total_lists_missing_symbols(doubling_trs):
    a = load_assignment("s = X + 1\n", doubling_trs)

    with pytest.raises(MissingSymbolMapping) as e:
        a.check_total(doubling_trs)

    assert set(e.value.symbols) == {"0", "d"}


def test_value_of_ground_terms(doubling_trs, doubling_assignment):
    assert doubling_assignment.value_of(parse_term("s(s(0))", doubling_trs)) == 2
    assert doubling_assignment.value_of(parse_term("d(s(0))", doubling_trs)) == 4


def test_apply(doubling_trs, doubling_assignment):
    assert doubling_assignment.apply(doubling_trs.symbol("d"), [Fraction(1, 3)]) == 2


def test_render_follows_signature_order(doubling_trs, doubling_assignment):
    assert doubling_assignment.render(doubling_trs) == "d = 3*X1 + 1\n0 = 0\ns = X1 + 1\n"


def test_with_function_replaces_one_symbol(doubling_trs, doubling_assignment):
    updated = doubling_assignment.with_function("d", MaxPolyFn.projection(1, 0))

    assert updated.function_for(doubling_trs.symbol("d")).render() == "X1"
    assert doubling_assignment.function_for(doubling_trs.symbol("d")).render() == "3*X1 + 1"


def test_check_additive_accepts_additive_constructors(doubling_trs, doubling_assignment):
    report = check_additive(doubling_assignment, doubling_trs)

    assert report.additive
    assert report.k_value == 1


def test_check_additive_needs_relaxation_for_positive_constants(halflog_trs, halflog_assignment):
    strict = check_additive(halflog_assignment, halflog_trs)
    relaxed = check_additive(halflog_assignment, halflog_trs, relax_nullary=Fraction(1))

    assert not strict.additive
    assert [d.symbol for d in strict.diagnostics if not d.additive] == ["0"]
    assert relaxed.additive


@pytest.mark.parametrize("s_fn", ["X", "2 * X + 1", "max(X + 1, 3)", "X + 1/2"])
def test_check_additive_rejects_non_additive_successor(doubling_trs, s_fn):
    a = load_assignment(f"0 = 0\ns = {s_fn}\nd = 3 * X + 1\n", doubling_trs)

    report = check_additive(a, doubling_trs)

    assert not report.additive
    assert report.k is None
    bad = next(d for d in report.diagnostics if d.symbol == "s")
    assert "expected" in bad.message


def test_check_monotone_and_strict(halflog_assignment):
    assert set(check_monotone(halflog_assignment).values()) == {Verdict.HOLDS}
    strict = check_strictly_monotone(halflog_assignment)
    assert strict["s"] == Verdict.HOLDS
    assert strict["log"] == Verdict.HOLDS


def test_check_strictly_monotone_flags_constant_branches(qiex_trs):
    a = load_assignment("0 = 0\ns = X + 1\nf = max(X, 3)\n", qiex_trs)

    assert check_strictly_monotone(a)["f"] == Verdict.UNKNOWN


def test_check_subterm(qiex_trs, qiex_assignment, small_plan):
    results = check_subterm(qiex_assignment, qiex_trs.signature, small_plan)

    assert {r.subject for r in results} == {"f", "s"}
    assert all(r.verdict == Verdict.HOLDS for r in results)


def test_check_subterm_finds_witness(qiex_trs, small_plan):
    a = load_assignment("0 = 0\ns = X + 1\nf = 0\n", qiex_trs)

    results = check_subterm(a, [qiex_trs.symbol("f")], small_plan)

    assert results[0].verdict == Verdict.FAILS
    assert results[0].witness == {"X1": "1"}


def test_check_subterm_with_margin(qiex_trs, qiex_assignment, small_plan):
    results = check_subterm(qiex_assignment, [qiex_trs.symbol("f")], small_plan, margin=Fraction(1, 2))

    assert results[0].verdict == Verdict.FAILS


def test_extend_to_term(halflog_trs, halflog_assignment):
    term = parse_term("log(half(s(x)))", halflog_trs)

    extended = extend_to_term(halflog_assignment, term, [Var("x")])

    assert extended.render() == "X1 + 2"


def test_extend_to_term_requires_every_variable(halflog_trs, halflog_assignment):
    with pytest.raises(ArityMismatch):
        extend_to_term(halflog_assignment, parse_term("half(x)", halflog_trs), [])


def test_empty_assignment_has_no_functions(doubling_trs):
    with pytest.raises(MissingSymbolMapping):
        Assignment().function_for(doubling_trs.symbol("d"))
