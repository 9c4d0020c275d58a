import random

import pytest

from supbound.services.errors import RcUndefined
from supbound.services.rc_bridge import (
    ConstructorTerms,
    RcFunction,
    RcKind,
    check_size_lemma,
    construct_si_from_rc,
    enumerate_basic_terms,
    measure_rc,
    random_basic_term,
    sample_traces,
)
from supbound.services.trs_parser import parse_term
from supbound.services.verifier import empirical_si_check


def test_constructor_terms_by_size(gadget_sqrt2_trs):
    factory = ConstructorTerms(gadget_sqrt2_trs.constructors)

    assert [str(t) for t in factory.of_size(1)] == ["0"]
    assert sorted(str(t) for t in factory.of_size(3)) == ["a(a(0))", "a(b(0))", "b(a(0))", "b(b(0))", "c(0, 0)"]
    assert all(t.size() == 4 for t in factory.of_size(4))
    assert factory.of_size(0) == []


def test_enumerate_basic_terms(halflog_trs):
    assert [str(t) for t in enumerate_basic_terms(halflog_trs, 3)] == ["half(s(0))", "log(s(0))"]
    assert enumerate_basic_terms(halflog_trs, 1) == []


def test_random_basic_term_has_requested_size(gadget_sqrt2_trs, rng):
    for size in range(2, 9):
        term = random_basic_term(gadget_sqrt2_trs, size, rng)
        assert term is not None
        assert term.size() == size
        assert term.symbol.is_defined
        assert all(s.is_constructor for arg in term.args for s in arg.symbols())


def test_measure_rc_doubling(doubling_trs):
    report = measure_rc(doubling_trs, max_size=6)

    assert report.table() == {1: 0, 2: 1, 3: 2, 4: 3, 5: 4, 6: 5}
    assert report.entries[2].witness == "d(s(0))"
    assert report.entries[0].terms == 0
    assert not report.approximate


def test_measure_rc_samples_above_exhaustive_size(doubling_trs):
    report = measure_rc(doubling_trs, max_size=6, exhaustive_max_size=3, samples_per_size=5)

    assert report.approximate
    assert [e.exhaustive for e in report.entries] == [True, True, True, False, False, False]
    assert report.rc_at(6) == 5


def test_measure_rc_is_undefined_after_nontermination(qiex_trs):
    report = measure_rc(qiex_trs, max_size=4, budget=100)

    assert report.rc_at(1) == 0
    assert report.rc_at(2) is None
    assert report.rc_at(4) is None
    assert report.entries[1].nonterminating == 1


@pytest.mark.parametrize(
    "text,kind,values",
    [
        ("linear:3", RcKind.LINEAR, [0, 3, 6]),
        ("poly:2,2", RcKind.POLY, [0, 2, 8]),
    ],
)
def test_rc_function_parse(text, kind, values):
    rc = RcFunction.parse(text)

    assert rc.kind == kind
    assert [rc(n) for n in range(3)] == values


@pytest.mark.parametrize("text", ["cubic:1", "linear:a", "linear:-1", "poly:1", "linear"])
def test_rc_function_parse_rejects(text):
    with pytest.raises(ValueError):
        RcFunction.parse(text)


def test_rc_function_from_table():
    rc = RcFunction(kind=RcKind.TABLE, points={1: 0, 2: 3, 3: 2, 4: None})

    assert rc(2) == 3
    assert rc(3) == 3
    with pytest.raises(RcUndefined) as e:
        rc(4)
    assert e.value.size == 4
    with pytest.raises(RcUndefined):
        rc(9)


def test_construct_si_from_measured_rc(doubling_trs):
    theta = construct_si_from_rc(doubling_trs, RcFunction.from_report(measure_rc(doubling_trs, max_size=4)))

    assert theta.trs_size == 10
    assert theta.value_of(parse_term("s(s(0))", doubling_trs)) == 2
    assert theta.apply(doubling_trs.symbol("d"), [2]) == 3 * 10 ** 2
    assert theta.value_of(parse_term("d(s(0))", doubling_trs)) == 2 * 10
    assert "d = (X1 + 1) * 10^(rc(X1 + 1))" in theta.render()
    assert "# rc = {1: 0, 2: 1, 3: 2, 4: 3}" in theta.render()


def test_rc_assignment_is_defined_on_naturals(doubling_trs):
    theta = construct_si_from_rc(doubling_trs, RcFunction.linear(1))

    with pytest.raises(ValueError):
        theta.apply(doubling_trs.symbol("d"), [0.5])
    with pytest.raises(ValueError):
        theta.value_of(parse_term("d(x)", doubling_trs))


def test_measured_sup_interpretation_passes_empirical_check(doubling_trs):
    theta = construct_si_from_rc(doubling_trs, RcFunction.from_report(measure_rc(doubling_trs, max_size=8)))
    samples = [t for n in range(1, 9) for t in enumerate_basic_terms(doubling_trs, n)]

    report = empirical_si_check(doubling_trs, theta, samples)

    assert report.passed
    assert report.checked == 7


def test_size_lemma_holds_on_sampled_traces(doubling_trs, halflog_trs, qiex_trs, gadget_sqrt2_trs):
    derivations = 0

    for trs in (doubling_trs, halflog_trs, qiex_trs, gadget_sqrt2_trs):
        traces = sample_traces(trs, count=250, max_size=6, max_steps=30)
        report = check_size_lemma(trs, traces)
        assert report.passed, report.violations[:1]
        assert report.derivations == len(traces) == 250
        assert report.steps > 0
        derivations += report.derivations

    assert derivations >= 1000


def test_size_lemma_reports_violations(doubling_trs):
    start = parse_term("0", doubling_trs)
    big = parse_term("s(" * 14 + "0" + ")" * 14, doubling_trs)

    report = check_size_lemma(doubling_trs, [(start, big)])

    assert not report.passed
    assert report.violations[0].bound == 10
    assert report.violations[0].size == 15


def test_sample_traces_is_seeded(halflog_trs):
    first = sample_traces(halflog_trs, count=5, max_size=5, max_steps=10, seed=3)
    second = sample_traces(halflog_trs, count=5, max_size=5, max_steps=10, seed=3)

    assert first == second
    assert len(first) == 5
    assert all(trace[0].symbol.is_defined for trace in first)


def test_random_terms_are_reproducible(doubling_trs):
    one = random_basic_term(doubling_trs, 5, random.Random(1))
    two = random_basic_term(doubling_trs, 5, random.Random(1))

    assert one == two
