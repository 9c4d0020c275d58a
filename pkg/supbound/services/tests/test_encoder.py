from fractions import Fraction

import pyparsing as pp
import pytest

from supbound.services.encoder import (
    DELTA,
    ScriptFormat,
    assignment_from_model,
    check_model,
    emit_smtlib,
    encode,
    evaluate_at,
    exponent_vectors,
    parse_model,
    sanitize,
)
from supbound.services.errors import MissingCoefficient, ModelSyntaxError
from supbound.services.reports import CriterionKind, Overall, PiMode

QIEX_UNKNOWNS = ["a_f_1_0", "a_f_1_1", "a_s_1_0", "a_s_1_1"]

SEXPRS = pp.ZeroOrMore(pp.nested_expr())
SEXPRS.ignore(";" + pp.rest_of_line)


@pytest.fixture
def qiex_doc(qiex_trs):
    return encode(qiex_trs, CriterionKind.QI, k=1, d=1)


@pytest.fixture
def golden_model(fixtures_dir):
    return parse_model((fixtures_dir / "qiex-qi.model").read_text())


def test_exponent_vectors():
    assert exponent_vectors(2, 2) == [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]
    assert exponent_vectors(0, 3) == [()]


def test_sanitize():
    assert sanitize("f'") == "f_p"


def test_encode_qiex_unknowns_and_constraints(qiex_doc):
    assert qiex_doc.unknowns == QIEX_UNKNOWNS
    assert [c.name for c in qiex_doc.constraints] == ["s_f_1", "m_f", "s_s_1", "m_s", "r1", "r2", "r3"]
    assert len(qiex_doc.side_conditions) == len(QIEX_UNKNOWNS) + 2


def test_encode_more_branches_only_for_defined_symbols(qiex_trs):
    doc = encode(qiex_trs, CriterionKind.QI, k=2, d=1)

    assert len(doc.unknowns) == 6
    assert "a_f_2_1" in doc.unknowns
    assert not any(name.startswith("a_s_2") for name in doc.unknowns)


def test_encode_degree_two_templates(qiex_trs):
    doc = encode(qiex_trs, CriterionKind.QI, k=1, d=2)

    assert "a_f_1_2" in doc.unknowns
    assert len(doc.unknowns) == 6


@pytest.mark.parametrize("k,d", [(0, 1), (1, 0), (5, 1), (1, 5)])
def test_encode_rejects_out_of_range_templates(qiex_trs, k, d):
    with pytest.raises(ValueError):
        encode(qiex_trs, CriterionKind.QI, k=k, d=d)


def test_encode_pi_uses_single_branch_and_strict_monotonicity(doubling_trs):
    doc = encode(doubling_trs, CriterionKind.PI, k=3, d=1)

    assert doc.templates.k == 1
    assert doc.pi_mode == PiMode.NAT_STRICT
    names = [c.name for c in doc.constraints]
    assert "m_d_1" in names
    assert not any(n.startswith("s_") for n in names)
    assert doc.constraint("r1").description.endswith("+ 1")


def test_encode_pi_delta_mode_adds_delta_unknown(doubling_trs):
    doc = encode(doubling_trs, CriterionKind.PI, pi_mode=PiMode.DELTA_STRICT_2B)

    assert doc.unknowns[-1] == DELTA
    assert doc.constraint("r2").description.endswith("+ delta")


def test_encode_pi_subterm_mode_has_strict_subterm_constraints(doubling_trs):
    doc = encode(doubling_trs, CriterionKind.PI, pi_mode=PiMode.SUBTERM_STRICT_2A)

    assert doc.constraint("s_d_1").description == "[d] > X1"


def test_encode_dpi_adds_dependency_pairs(halflog_trs):
    doc = encode(halflog_trs, CriterionKind.DPI, relax_nullary=Fraction(1))

    names = [c.name for c in doc.constraints]
    assert names[-3:] == ["dp1", "dp2", "dp3"]
    assert "a_0_1" in doc.unknowns
    assert not any(n.startswith("s_") for n in names)


def test_emit_smtlib_is_deterministic(qiex_doc):
    text = emit_smtlib(qiex_doc)

    assert text.startswith("; supbound qi k=1 d=1\n")
    assert "(set-logic NRA)" in text
    for name in QIEX_UNKNOWNS:
        assert f"(declare-fun {name} () Real)" in text
    assert "forall" in text
    assert text.rstrip().endswith("(get-model)")
    assert text == emit_smtlib(qiex_doc)


def test_emit_smtlib_matches_golden_script(qiex_doc, fixtures_dir):
    golden = (fixtures_dir / "qiex-qi.smt2").read_text()

    text = emit_smtlib(qiex_doc, ScriptFormat.SMT2)

    assert text.splitlines()[0] == golden.splitlines()[0]
    assert len(text.splitlines()) == len(golden.splitlines())
    assert SEXPRS.parse_string(text, parse_all=True).as_list() == SEXPRS.parse_string(golden, parse_all=True).as_list()


def test_emit_smtlib_rejects_unknown_format(qiex_doc):
    with pytest.raises(ValueError):
        emit_smtlib(qiex_doc, "json")


def test_parse_model_golden(golden_model):
    assert golden_model == {
        "a_f_1_0": 0,
        "a_f_1_1": 1,
        "a_s_1_0": 1,
        "a_s_1_1": 1,
    }


def test_parse_model_reads_solver_value_forms():
    model = parse_model(
        "; from a solver\n"
        "sat\n"
        "(\n"
        "  (define-fun a () Real (/ 1 2))\n"
        "  (define-fun b () Real (- 3.0))\n"
        "  (define-fun |c| () Real 2)\n"
        ")\n"
    )

    assert model == {"a": Fraction(1, 2), "b": -3, "c": 2}


@pytest.mark.parametrize(
    "text",
    [
        "unsat\n",
        "(model (define-fun a () Real 1)",
        "(model (define-fun a Real 1))",
        "(model (define-fun a () Real (/ 1 0)))",
    ],
)
def test_parse_model_rejects_bad_models(text):
    with pytest.raises(ModelSyntaxError):
        parse_model(text)


def test_assignment_from_model(qiex_trs, qiex_doc, golden_model):
    assignment = assignment_from_model(qiex_doc, golden_model)

    assert assignment.render(qiex_trs) == "f = X1\ns = X1 + 1\n0 = 0\n"


def test_assignment_from_model_requires_every_unknown(qiex_doc, golden_model):
    partial = {name: value for name, value in golden_model.items() if name != "a_s_1_1"}

    with pytest.raises(MissingCoefficient) as e:
        assignment_from_model(qiex_doc, partial)

    assert e.value.names == ("a_s_1_1",)


def test_check_model_certifies_golden_model(qiex_trs, qiex_doc, golden_model, small_plan):
    report = check_model(qiex_trs, qiex_doc, golden_model, plan=small_plan)

    assert report.overall == Overall.VALID


def test_check_model_rejects_zero_model(qiex_trs, qiex_doc, small_plan):
    zeros = {name: Fraction(0) for name in QIEX_UNKNOWNS}

    report = check_model(qiex_trs, qiex_doc, zeros, plan=small_plan)

    assert report.overall == Overall.INVALID


def test_evaluate_at_matches_verifier(qiex_doc, golden_model):
    zeros = {name: Fraction(0) for name in QIEX_UNKNOWNS}

    assert evaluate_at(qiex_doc, golden_model, qiex_doc.constraint("r1"), [Fraction(3)])
    assert evaluate_at(qiex_doc, golden_model, qiex_doc.constraint("s_f_1"), [Fraction(5, 2)])
    assert evaluate_at(qiex_doc, zeros, qiex_doc.constraint("s_f_1"), [Fraction(0)])
    assert not evaluate_at(qiex_doc, zeros, qiex_doc.constraint("s_f_1"), [Fraction(1)])
    assert evaluate_at(qiex_doc, golden_model, qiex_doc.constraint("m_f"), [Fraction(1), Fraction(2)])
