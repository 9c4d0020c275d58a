"""Export of the synthesis problem as a quantified nonlinear real arithmetic formula.

The document has the shape ``exists coefficients . forall X . guard -> matrix``:
coefficients become declared constants of an SMT-LIB script and the universal
block is a single ``forall`` assertion.
"""
import io
import itertools
import logging
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import pyparsing as pp
import pysmt.smtlib.commands as smtcmd
from pysmt.fnode import FNode
from pysmt.logics import NRA
from pysmt.shortcuts import (
    GE,
    GT,
    LE,
    TRUE,
    And,
    Equals,
    ForAll,
    Implies,
    Or,
    Plus,
    Real,
    Symbol,
    Times,
    substitute,
)
from pysmt.smtlib.script import SmtLibCommand, SmtLibScript
from pysmt.typing import REAL

from supbound import settings
from supbound.services.assignments import Assignment
from supbound.services.deppairs import dependency_pairs
from supbound.services.errors import MissingCoefficient, ModelSyntaxError
from supbound.services.maxpoly import MaxPolyFn, Poly
from supbound.services.reports import CriterionKind, PiMode, VerificationReport
from supbound.services.sampling import SamplingPlan
from supbound.services.terms import Term, Trs, Var
from supbound.services.verifier import Criterion, verify

logger = logging.getLogger(__name__)

Powers = Tuple[int, ...]
Coefficient = Union[str, Fraction]  # a named unknown or a fixed value

DELTA = "delta"


class ScriptFormat(str, Enum):
    SMT2 = "smt2"


def sanitize(name: str) -> str:
    return name.replace("'", "_p")


def exponent_vectors(arity: int, degree: int) -> List[Powers]:
    """All exponent vectors with total degree at most ``degree``, constant first."""
    vectors = [p for p in itertools.product(range(degree + 1), repeat=arity) if sum(p) <= degree]
    return sorted(vectors, key=lambda p: (sum(p), tuple(-e for e in p)))


@dataclass(frozen=True)
class SymbolTemplate:
    name: str
    arity: int
    branches: Tuple[Tuple[Tuple[Powers, Coefficient], ...], ...]

    def coefficient_names(self) -> List[str]:
        return [c for branch in self.branches for _, c in branch if isinstance(c, str)]


@dataclass(frozen=True)
class TemplateSpec:
    k: int
    d: int
    symbols: Tuple[SymbolTemplate, ...]

    def template(self, name: str) -> SymbolTemplate:
        return next(t for t in self.symbols if t.name == name)

    @property
    def coefficient_names(self) -> List[str]:
        return sorted(n for t in self.symbols for n in t.coefficient_names())


@dataclass(frozen=True)
class EncodedConstraint:
    name: str
    description: str
    variables: Tuple[FNode, ...]
    matrix: FNode
    source: Optional[Tuple[Term, Term]] = None


@dataclass
class FormulaDocument:
    kind: CriterionKind
    templates: TemplateSpec
    pi_mode: Optional[PiMode] = None
    relax_nullary: Optional[Fraction] = None
    side_conditions: List[FNode] = field(default_factory=list)
    constraints: List[EncodedConstraint] = field(default_factory=list)

    @property
    def unknowns(self) -> List[str]:
        names = self.templates.coefficient_names
        if self.pi_mode == PiMode.DELTA_STRICT_2B:
            names = names + [DELTA]
        return names

    @property
    def universals(self) -> List[FNode]:
        return list(dict.fromkeys(v for c in self.constraints for v in c.variables))

    @property
    def matrix(self) -> FNode:
        return And([c.matrix for c in self.constraints]) if self.constraints else TRUE()

    @property
    def formula(self) -> FNode:
        """The universally quantified part; the unknowns are the free (existential) constants."""
        universals = self.universals
        if not universals:
            return self.matrix
        guard = And([GE(v, Real(0)) for v in universals])
        return ForAll(universals, Implies(guard, self.matrix))

    def constraint(self, name: str) -> EncodedConstraint:
        return next(c for c in self.constraints if c.name == name)


def _build_templates(trs: Trs, k: int, d: int, relax: Optional[Fraction]) -> TemplateSpec:
    symbols = []
    for s in trs.signature:
        base = f"a_{sanitize(s.name)}"
        if s.is_constructor and s.arity == 0:
            value: Coefficient = f"{base}_1" if relax is not None else Fraction(0)
            symbols.append(SymbolTemplate(s.name, 0, (((), value),)))
            continue
        branch_count = 1 if s.is_constructor else k
        vectors = exponent_vectors(s.arity, d)
        branches = tuple(
            tuple((p, "_".join([base, str(i)] + [str(e) for e in p])) for p in vectors)
            for i in range(1, branch_count + 1)
        )
        symbols.append(SymbolTemplate(s.name, s.arity, branches))
    return TemplateSpec(k=k, d=d, symbols=tuple(symbols))


def _coefficient(c: Coefficient) -> FNode:
    return Symbol(c, REAL) if isinstance(c, str) else Real(c)


def _sum(terms: Sequence[FNode]) -> FNode:
    if not terms:
        return Real(0)
    return terms[0] if len(terms) == 1 else Plus(list(terms))


def _branch_value(branch, args: Sequence[FNode]) -> FNode:
    terms = []
    for powers, c in branch:
        factors = [_coefficient(c)] + [a for a, e in zip(args, powers) for _ in range(e)]
        terms.append(factors[0] if len(factors) == 1 else Times(factors))
    return _sum(terms)


def _apply(template: SymbolTemplate, args: Sequence[List[FNode]]) -> List[FNode]:
    """Branch values of ``template`` applied to arguments given as branch lists (max of each)."""
    values = []
    for choice in itertools.product(*args):
        for branch in template.branches:
            values.append(_branch_value(branch, choice))
    return values


def _term_value(spec: TemplateSpec, term: Term, env: Mapping[Var, FNode]) -> List[FNode]:
    if isinstance(term, Var):
        return [env[term]]
    return _apply(spec.template(term.symbol.name), [_term_value(spec, a, env) for a in term.args])


def _geq(lhs: List[FNode], rhs: List[FNode], margin: Optional[FNode] = None, strict: bool = False) -> FNode:
    """max(lhs) >= max(rhs) (+ margin), as: every rhs branch is below some lhs branch."""
    relation = GT if strict else GE
    clauses = []
    for r in rhs:
        bound = Plus(r, margin) if margin is not None else r
        clauses.append(Or([relation(l, bound) for l in lhs]))
    return And(clauses)


def _universal(prefix: str, name: str) -> FNode:
    return Symbol(f"v_{prefix}_{sanitize(name)}", REAL)


def _inequality(spec, name, description, lhs: Term, rhs: Term, margin=None, strict=False) -> EncodedConstraint:
    env = {v: _universal(name, v.name) for v in lhs.variables()}
    matrix = _geq(_term_value(spec, lhs, env), _term_value(spec, rhs, env), margin=margin, strict=strict)
    return EncodedConstraint(name, description, tuple(env.values()), matrix, source=(lhs, rhs))


def _subterm(spec: TemplateSpec, template: SymbolTemplate, strict: bool) -> List[EncodedConstraint]:
    name = f"s_{sanitize(template.name)}"
    xs = [_universal(name, f"x{i}") for i in range(1, template.arity + 1)]
    value = _apply(template, [[x] for x in xs])
    relation = GT if strict else GE
    return [
        EncodedConstraint(
            f"{name}_{i}",
            f"[{template.name}] {'>' if strict else '>='} X{i}",
            tuple(xs),
            Or([relation(b, x) for b in value]),
        )
        for i, x in enumerate(xs, start=1)
    ]


def _monotone(spec: TemplateSpec, template: SymbolTemplate, strict: bool) -> List[EncodedConstraint]:
    name = f"m_{sanitize(template.name)}"
    xs = [_universal(name, f"x{i}") for i in range(1, template.arity + 1)]
    ys = [_universal(name, f"y{i}") for i in range(1, template.arity + 1)]
    fx = _apply(template, [[x] for x in xs])
    fy = _apply(template, [[y] for y in ys])
    if not strict:
        premise = And([LE(x, y) for x, y in zip(xs, ys)])
        return [EncodedConstraint(
            name, f"[{template.name}] monotone", tuple(xs + ys), Implies(premise, _geq(fy, fx))
        )]
    constraints = []
    for i in range(template.arity):
        premise = And([GT(ys[j], xs[j]) if j == i else Equals(xs[j], ys[j]) for j in range(template.arity)])
        constraints.append(EncodedConstraint(
            f"{name}_{i + 1}",
            f"[{template.name}] strictly monotone in X{i + 1}",
            tuple(xs + ys),
            Implies(premise, _geq(fy, fx, strict=True)),
        ))
    return constraints


def _additive_side_conditions(template: SymbolTemplate) -> List[FNode]:
    conditions = []
    for branch in template.branches:
        for powers, c in branch:
            unknown = _coefficient(c)
            if sum(powers) == 0:
                conditions.append(GE(unknown, Real(1)))
            elif sum(powers) == 1:
                conditions.append(Equals(unknown, Real(1)))
            else:
                conditions.append(Equals(unknown, Real(0)))
    return conditions


def encode(
        trs: Trs,
        kind: CriterionKind,
        k: int = 1,
        d: int = 1,
        pi_mode: PiMode = PiMode.NAT_STRICT,
        relax_nullary: Optional[Fraction] = None,
) -> FormulaDocument:
    if not 1 <= k <= settings.ENCODER_MAX_K or not 1 <= d <= settings.ENCODER_MAX_D:
        raise ValueError(f"k and d must lie in [1, {settings.ENCODER_MAX_K}] and [1, {settings.ENCODER_MAX_D}]")
    if kind == CriterionKind.PI and k > 1:
        logger.warning("Polynomial interpretations have a single branch, using k=1")
        k = 1
    spec = _build_templates(trs, k, d, relax_nullary)
    doc = FormulaDocument(
        kind=kind,
        templates=spec,
        pi_mode=pi_mode if kind == CriterionKind.PI else None,
        relax_nullary=relax_nullary,
    )

    for name in spec.coefficient_names:
        doc.side_conditions.append(GE(Symbol(name, REAL), Real(0)))
    for s in trs.signature:
        template = spec.template(s.name)
        if s.is_constructor and s.arity > 0:
            doc.side_conditions.extend(_additive_side_conditions(template))
        elif s.is_constructor and relax_nullary is not None:
            doc.side_conditions.append(LE(_coefficient(template.branches[0][0][1]), Real(relax_nullary)))
    if doc.pi_mode == PiMode.DELTA_STRICT_2B:
        doc.side_conditions.append(GT(Symbol(DELTA, REAL), Real(0)))

    strict_pi = kind == CriterionKind.PI
    for s in trs.signature:
        if s.arity == 0:
            continue
        template = spec.template(s.name)
        if kind == CriterionKind.QI:
            doc.constraints.extend(_subterm(spec, template, strict=False))
        elif doc.pi_mode == PiMode.SUBTERM_STRICT_2A:
            doc.constraints.extend(_subterm(spec, template, strict=True))
        doc.constraints.extend(_monotone(spec, template, strict=strict_pi))

    for rule in trs.rules:
        name = f"r{rule.index}"
        description = f"[{rule.lhs}] >= [{rule.rhs}]"
        if doc.pi_mode == PiMode.NAT_STRICT:
            c = _inequality(spec, name, description + " + 1", rule.lhs, rule.rhs, margin=Real(1))
        elif doc.pi_mode == PiMode.DELTA_STRICT_2B:
            c = _inequality(spec, name, description + " + delta", rule.lhs, rule.rhs, margin=Symbol(DELTA, REAL))
        elif doc.pi_mode == PiMode.SUBTERM_STRICT_2A:
            c = _inequality(spec, name, f"[{rule.lhs}] > [{rule.rhs}]", rule.lhs, rule.rhs, strict=True)
        else:
            c = _inequality(spec, name, description, rule.lhs, rule.rhs)
        doc.constraints.append(c)

    if kind == CriterionKind.DPI:
        for i, pair in enumerate(dependency_pairs(trs), start=1):
            doc.constraints.append(_inequality(
                spec, f"dp{i}", f"<{pair.lhs_marked}> >= <{pair.rhs_marked}>", pair.lhs_marked, pair.rhs_marked
            ))

    logger.info(
        f"Encoded {kind.value.upper()} with k={k}, d={d}: {len(doc.unknowns)} unknown(s), "
        f"{len(doc.constraints)} constraint(s)"
    )
    return doc


def emit_smtlib(doc: FormulaDocument, script_format: ScriptFormat = ScriptFormat.SMT2) -> str:
    """Deterministic SMT-LIB 2 script: declarations sorted by name, one quantified assertion."""
    if script_format != ScriptFormat.SMT2:
        raise ValueError(f"unsupported script format {script_format}")
    script = SmtLibScript()
    script.add_command(SmtLibCommand(smtcmd.SET_LOGIC, [NRA]))
    for name in sorted(doc.unknowns):
        script.add_command(SmtLibCommand(smtcmd.DECLARE_FUN, [Symbol(name, REAL)]))
    for condition in doc.side_conditions:
        script.add_command(SmtLibCommand(smtcmd.ASSERT, [condition]))
    script.add_command(SmtLibCommand(smtcmd.ASSERT, [doc.formula]))
    script.add_command(SmtLibCommand(smtcmd.CHECK_SAT, []))
    script.add_command(SmtLibCommand(smtcmd.GET_MODEL, []))
    out = io.StringIO()
    header = f"; supbound {doc.kind.value} k={doc.templates.k} d={doc.templates.d}"
    if doc.pi_mode is not None:
        header += f" pi-mode={doc.pi_mode.value}"
    out.write(header + "\n")
    script.serialize(out, daggify=False)
    text = out.getvalue()
    return text if text.endswith("\n") else text + "\n"


# Solver model reader

_SEXPRS = pp.ZeroOrMore(pp.Suppress(pp.Keyword("sat")) | pp.nested_expr())
_SEXPRS.ignore(";" + pp.rest_of_line)


def _model_value(token) -> Fraction:
    if isinstance(token, str):
        return Fraction(token)
    if len(token) == 3 and token[0] == "/":
        return _model_value(token[1]) / _model_value(token[2])
    if len(token) == 2 and token[0] == "-":
        return -_model_value(token[1])
    raise ValueError(f"unsupported value {token}")


def _define_funs(items) -> Dict[str, Fraction]:
    values = {}
    for item in items:
        if isinstance(item, str):
            continue
        if item and item[0] == "model":
            values.update(_define_funs(item[1:]))
        elif item and item[0] == "define-fun":
            if len(item) != 5:
                raise ModelSyntaxError(f"malformed define-fun for {item[1] if len(item) > 1 else '?'}")
            name = str(item[1]).strip("|")
            try:
                values[name] = _model_value(item[4])
            except (ValueError, ZeroDivisionError) as e:
                raise ModelSyntaxError(f"{name}: {e}")
        else:
            values.update(_define_funs(item))
    return values


def parse_model(text: str) -> Dict[str, Fraction]:
    """Coefficient values from ``(model (define-fun a () Real v) ...)`` or bare define-fun forms."""
    if text.lstrip().startswith("unsat"):
        raise ModelSyntaxError("solver reported unsat, there is no model")
    try:
        parsed = _SEXPRS.parse_string(text, parse_all=True)
    except pp.ParseException as e:
        raise ModelSyntaxError(e.msg, e.lineno, e.col)
    return _define_funs(parsed.as_list())


def _require(doc: FormulaDocument, model: Mapping[str, Fraction]):
    missing = [n for n in doc.unknowns if n not in model]
    if missing:
        raise MissingCoefficient(missing)


def assignment_from_model(doc: FormulaDocument, model: Mapping[str, Fraction]) -> Assignment:
    _require(doc, model)
    functions = {}
    for template in doc.templates.symbols:
        branches = [
            Poly.from_dict(template.arity, {p: model[c] if isinstance(c, str) else c for p, c in branch})
            for branch in template.branches
        ]
        functions[template.name] = MaxPolyFn.of(template.arity, branches)
    return Assignment(functions=functions)


def check_model(
        trs: Trs, doc: FormulaDocument, model: Mapping[str, Fraction], plan: Optional[SamplingPlan] = None
) -> VerificationReport:
    """Substitute a solver model into the templates and certify the result with the verifier."""
    assignment = assignment_from_model(doc, model)
    criterion = Criterion(
        kind=doc.kind,
        pi_mode=doc.pi_mode or PiMode.NAT_STRICT,
        delta=model.get(DELTA, settings.PI_DELTA) if doc.pi_mode == PiMode.DELTA_STRICT_2B else settings.PI_DELTA,
        relax_nullary=doc.relax_nullary,
    )
    return verify(trs, assignment, criterion, plan=plan)


def evaluate_at(
        doc: FormulaDocument,
        model: Mapping[str, Fraction],
        constraint: EncodedConstraint,
        point: Sequence[Fraction],
) -> bool:
    """Truth of one constraint matrix for a coefficient valuation and a point for its variables."""
    _require(doc, model)
    mapping = {Symbol(n, REAL): Real(Fraction(model[n])) for n in doc.unknowns}
    mapping.update({v: Real(Fraction(x)) for v, x in zip(constraint.variables, point)})
    return substitute(constraint.matrix, mapping).simplify().is_true()
