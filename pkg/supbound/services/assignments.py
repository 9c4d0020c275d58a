import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence

from pydantic import BaseModel

from supbound.services.errors import ArityMismatch, MissingSymbolMapping
from supbound.services.fn_parser import parse_assignment_text, render_assignment
from supbound.services.maxpoly import (
    MaxPolyFn,
    Poly,
    Verdict,
    check_geq_uniform,
    normalize_fn,
    render_scalar,
)
from supbound.services.reports import ConstraintCategory, ConstraintResult
from supbound.services.sampling import SamplingPlan, find_violation, refute_by_sampling
from supbound.services.terms import App, Symbol, Term, Trs, Var

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Assignment:
    """Functions for signature symbols, keyed by name; marked symbols share their base's function."""
    functions: Mapping[str, MaxPolyFn] = field(default_factory=dict)
    approximate: bool = False

    def function_for(self, symbol: Symbol) -> MaxPolyFn:
        fn = self.functions.get(symbol.name)
        if fn is None:
            raise MissingSymbolMapping([symbol.name])
        if fn.arity != symbol.arity:
            raise ArityMismatch(symbol.arity, fn.arity, what=f"function for '{symbol.name}'")
        return fn

    def missing(self, trs: Trs) -> List[str]:
        return [s.name for s in trs.signature if s.name not in self.functions]

    def check_total(self, trs: Trs):
        missing = self.missing(trs)
        if missing:
            raise MissingSymbolMapping(missing)
        for symbol in trs.signature:
            self.function_for(symbol)

    def with_function(self, name: str, fn: MaxPolyFn) -> "Assignment":
        return Assignment(functions={**self.functions, name: fn}, approximate=self.approximate)

    def value_of(self, term: Term) -> Fraction:
        """Interpretation of a ground term."""
        return extend_to_term(self, term, ()).evaluate(())

    def apply(self, symbol: Symbol, args: Sequence[Fraction]) -> Fraction:
        return self.function_for(symbol).evaluate(tuple(args))

    def render(self, trs: Optional[Trs] = None) -> str:
        names = [s.name for s in trs.signature] if trs else sorted(self.functions)
        return render_assignment({n: self.functions[n].render() for n in names if n in self.functions})


def load_assignment(text: str, trs: Trs) -> Assignment:
    bindings = parse_assignment_text(text)
    functions = {}
    for name, binding in bindings.items():
        symbol = trs.symbol(name)
        if symbol is None:
            logger.warning(f"Assignment line {binding.line}: '{name}' is not in the signature, ignored")
            continue
        functions[name] = normalize_fn(binding.expr, arity=symbol.arity)
    approximate = any(b.approximate for b in bindings.values())
    if approximate:
        logger.warning("Assignment uses irrational coefficients; only approximate checks are meaningful")
    return Assignment(functions=functions, approximate=approximate)


class ConstructorDiagnostic(BaseModel):
    symbol: str
    additive: bool
    constant: Optional[str] = None
    message: str = ""
    witness: Optional[List[str]] = None


class AdditivityReport(BaseModel):
    additive: bool
    k: Optional[str] = None
    diagnostics: List[ConstructorDiagnostic] = []

    @property
    def k_value(self) -> Optional[Fraction]:
        return Fraction(self.k) if self.k is not None else None


def _constant_of(fn: MaxPolyFn) -> Optional[Fraction]:
    if len(fn.branches) == 1 and fn.branches[0].degree == 0:
        return fn.branches[0].constant_term
    return None


def check_additive(a: Assignment, trs: Trs, relax_nullary: Optional[Fraction] = None) -> AdditivityReport:
    """Constructors must be X1 + ... + Xn + k_c with k_c >= 1; nullary ones 0 (or at most ``relax_nullary``)."""
    missing = [c.name for c in trs.constructors if c.name not in a.functions]
    if missing:
        raise MissingSymbolMapping(missing)

    diagnostics = []
    constants = [Fraction(1)]
    for c in trs.constructors:
        fn = a.function_for(c)
        if c.arity == 0:
            value = _constant_of(fn)
            bound = relax_nullary if relax_nullary is not None else Fraction(0)
            ok = value is not None and 0 <= value <= bound
            diagnostics.append(ConstructorDiagnostic(
                symbol=c.name,
                additive=ok,
                constant=render_scalar(value) if value is not None else None,
                message="" if ok else f"nullary constructor must map to a constant in [0, {render_scalar(bound)}]",
                witness=None if ok else [],
            ))
            if ok:
                constants.append(value)
            continue
        branch = fn.branches[0]
        k_c = branch.constant_term
        expected = MaxPolyFn.additive(c.arity, k_c)
        ok = len(fn.branches) == 1 and fn == expected and k_c >= 1
        witness = None
        if not ok:
            template = MaxPolyFn.additive(c.arity, max(k_c, Fraction(1)))
            point = find_violation(lambda x: fn.evaluate(x) == template.evaluate(x), c.arity)
            witness = [str(x) for x in point] if point is not None else []
        diagnostics.append(ConstructorDiagnostic(
            symbol=c.name,
            additive=ok,
            constant=render_scalar(k_c),
            message="" if ok else f"expected {template.render()}, got {fn.render()}",
            witness=witness,
        ))
        if ok:
            constants.append(k_c)

    additive = all(d.additive for d in diagnostics)
    return AdditivityReport(
        additive=additive,
        k=render_scalar(max(constants)) if additive else None,
        diagnostics=diagnostics,
    )


def check_monotone(a: Assignment) -> Dict[str, Verdict]:
    """Nonnegative coefficients make every function monotone."""
    return {
        name: Verdict.HOLDS if all(c >= 0 for b in fn.branches for _, c in b.terms) else Verdict.UNKNOWN
        for name, fn in a.functions.items()
    }


def _has_pure_power(branch: Poly, index: int) -> bool:
    return any(
        c > 0 and p[index] > 0 and all(e == 0 for j, e in enumerate(p) if j != index)
        for p, c in branch.terms
    )


def check_strictly_monotone(a: Assignment) -> Dict[str, Verdict]:
    """Sufficient: for each argument, every branch has a positive pure power of it."""
    verdicts = {}
    for name, fn in a.functions.items():
        ok = all(_has_pure_power(b, i) for i in range(fn.arity) for b in fn.branches)
        verdicts[name] = Verdict.HOLDS if ok else Verdict.UNKNOWN
    return verdicts


def check_subterm(
        a: Assignment,
        symbols: Sequence[Symbol],
        plan: Optional[SamplingPlan] = None,
        margin: Fraction = Fraction(0),
        tolerance: Fraction = Fraction(0),
) -> List[ConstraintResult]:
    """One result per symbol and argument j for f >= Xj (+ margin)."""
    results = []
    for symbol in symbols:
        fn = a.function_for(symbol)
        for j in range(symbol.arity):
            projection = MaxPolyFn.projection(symbol.arity, j)
            if margin:
                projection = projection.shift(margin)
            verdict = check_geq_uniform(fn, projection, tolerance)
            witness = None
            if verdict == Verdict.UNKNOWN:
                point = refute_by_sampling(fn, projection, plan, tolerance)
                if point is not None:
                    verdict = Verdict.FAILS
                    witness = {f"X{i}": str(x) for i, x in enumerate(point, start=1)}
            relation = ">=" if not margin else f">= {render_scalar(margin)} +"
            results.append(ConstraintResult(
                category=ConstraintCategory.SUBTERM,
                subject=symbol.name,
                description=f"[{symbol.name}] {relation} X{j + 1}: {fn.render()}",
                verdict=verdict,
                witness=witness,
            ))
    return results


def extend_to_term(a: Assignment, t: Term, var_order: Sequence[Var], prune: bool = True) -> MaxPolyFn:
    """Homomorphic extension of ``a`` to ``t`` over the variables in ``var_order``."""
    arity = len(var_order)
    positions = {v: i for i, v in enumerate(var_order)}
    memo: Dict[Term, MaxPolyFn] = {}

    def extend(term: Term) -> MaxPolyFn:
        if term in memo:
            return memo[term]
        if isinstance(term, Var):
            if term not in positions:
                raise ArityMismatch(arity, arity + 1, what=f"variable order (missing {term.name})")
            result = MaxPolyFn.projection(arity, positions[term])
        else:
            fn = a.function_for(term.symbol)
            result = fn.compose([extend(arg) for arg in term.args], arity=arity)
            if prune:
                result = result.pruned()
        memo[term] = result
        return result

    return extend(t)
