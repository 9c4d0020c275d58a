import bisect
import itertools
import logging
import time
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Dict, FrozenSet, Iterator, List, Optional, Sequence, Tuple

import pydantic

from supbound import settings
from supbound.services.assignments import Assignment, extend_to_term
from supbound.services.deppairs import dependency_pairs
from supbound.services.linear import LinearExpr, LpStatus, Sense, solve
from supbound.services.maxpoly import MaxPolyFn, Poly, Verdict, check_geq_uniform, render_scalar
from supbound.services.reports import CriterionKind, Overall, VerificationReport
from supbound.services.sampling import SamplingPlan
from supbound.services.terms import App, Symbol, Term, Trs, Var
from supbound.services.verifier import Criterion, verify

logger = logging.getLogger(__name__)


class Domain(str, Enum):
    NATURALS = "nat"
    RATIONALS = "rat"


class SynthesisConfig(pydantic.BaseModel):
    kind: CriterionKind = CriterionKind.QI
    domain: Domain = Domain.NATURALS
    max_branches: int = 1
    coeff_bound: int = 1
    nullary_relax: Optional[Fraction] = None
    time_budget: float = settings.SYNTH_TIME_BUDGET

    class Config:
        arbitrary_types_allowed = True

    @pydantic.validator("kind")
    def qi_or_dpi(cls, v):
        if v == CriterionKind.PI:
            raise ValueError("synthesis supports qi and dpi only")
        return v

    @pydantic.validator("max_branches", "coeff_bound")
    def positive(cls, v):
        if v < 1:
            raise ValueError("must be at least 1")
        return v

    @pydantic.validator("nullary_relax")
    def nonnegative(cls, v):
        if v is not None and v < 0:
            raise ValueError("must be nonnegative")
        return v

    def grid(self) -> List[Fraction]:
        return coefficient_grid(self.domain, self.coeff_bound)


class SynthesisStatus(str, Enum):
    FOUND = "found"
    EXHAUSTED = "exhausted"
    TIMED_OUT = "timed_out"


@dataclass(frozen=True)
class SynthesisResult:
    status: SynthesisStatus
    candidates_tried: int
    assignment: Optional[Assignment] = None
    certificate: Optional[VerificationReport] = None
    notes: Tuple[str, ...] = ()

    @property
    def found(self) -> bool:
        return self.status == SynthesisStatus.FOUND

    def summary(self, trs: Optional[Trs] = None) -> dict:
        return {
            "status": self.status.value,
            "candidates_tried": self.candidates_tried,
            "assignment": self.assignment.render(trs) if self.assignment else None,
            "certificate": self.certificate.dict() if self.certificate else None,
            "notes": list(self.notes),
        }


EXHAUSTED_NOTE = "Exhausted is relative to the candidate grid and the sound verifier, not a proof of nonexistence"


def coefficient_grid(domain: Domain, bound: int) -> List[Fraction]:
    if domain == Domain.NATURALS:
        return [Fraction(i) for i in range(bound + 1)]
    return sorted({Fraction(p, q) for p in range(bound + 1) for q in range(1, bound + 1)})


@dataclass(frozen=True)
class Candidate:
    fn: MaxPolyFn
    cost: int
    key: tuple


def _cost(values: Sequence[Fraction]) -> int:
    return sum(v.numerator for v in values)


def _affine(arity: int, slopes: Sequence[Fraction], constant: Fraction) -> Poly:
    coefficients = {tuple(1 if i == j else 0 for i in range(arity)): s for j, s in enumerate(slopes)}
    coefficients[(0,) * arity] = constant
    return Poly.from_dict(arity, coefficients)


def symbol_candidates(symbol: Symbol, cfg: SynthesisConfig) -> List[Candidate]:
    """Candidate functions for one symbol, sorted by (cost, key)."""
    grid = cfg.grid()
    candidates = []
    if symbol.is_constructor and symbol.arity == 0:
        relax = cfg.nullary_relax if cfg.nullary_relax is not None else Fraction(0)
        for value in grid:
            if value <= relax:
                candidates.append(Candidate(MaxPolyFn.of(0, [Poly.constant(0, value)]), value.numerator + 1, (value,)))
    elif symbol.is_constructor:
        for value in grid:
            if value >= 1:
                candidates.append(Candidate(MaxPolyFn.additive(symbol.arity, value), value.numerator + 1, (value,)))
    else:
        branches = [
            (values, _affine(symbol.arity, values[:-1], values[-1]))
            for values in itertools.product(grid, repeat=symbol.arity + 1)
        ]
        for size in range(1, cfg.max_branches + 1):
            for combo in itertools.combinations(branches, size):
                fn = MaxPolyFn.of(symbol.arity, [poly for _, poly in combo])
                if len(fn.pruned().branches) < size:
                    # a dominated branch; the same function has a cheaper candidate
                    continue
                cost = sum(_cost(values) for values, _ in combo) + size
                candidates.append(Candidate(fn, cost, tuple(sorted(values for values, _ in combo))))
    candidates.sort(key=lambda c: (c.cost, c.key))
    return candidates


@dataclass(frozen=True)
class _Constraint:
    description: str
    lhs: Term
    rhs: Term
    symbols: FrozenSet[str]

    def holds(self, a: Assignment) -> bool:
        var_order = self.lhs.variables()
        q = extend_to_term(a, self.lhs, var_order)
        r = extend_to_term(a, self.rhs, var_order)
        return check_geq_uniform(q, r) == Verdict.HOLDS


def _symbols_of(*terms: Term) -> FrozenSet[str]:
    return frozenset(s.name for t in terms if isinstance(t, App) for s in t.symbols())


def _constraints(trs: Trs, kind: CriterionKind) -> List[_Constraint]:
    constraints = [
        _Constraint(f"rule {r.index}", r.lhs, r.rhs, _symbols_of(r.lhs, r.rhs)) for r in trs.rules
    ]
    if kind == CriterionKind.DPI:
        constraints += [
            _Constraint(f"pair {p}", p.lhs_marked, p.rhs_marked, _symbols_of(p.lhs_marked, p.rhs_marked))
            for p in dependency_pairs(trs)
        ]
    return constraints


def _subterm_ok(fn: MaxPolyFn) -> bool:
    return all(
        check_geq_uniform(fn, MaxPolyFn.projection(fn.arity, j)) == Verdict.HOLDS for j in range(fn.arity)
    )


class _OutOfTime(Exception):
    pass


class _SearchSpace:
    """Filtered per-symbol candidates, the remaining constraints and the symbol order."""

    def __init__(self, trs: Trs, cfg: SynthesisConfig, deadline: float):
        self.trs = trs
        self.cfg = cfg
        self.deadline = deadline
        self.tried = 0
        self.raw: Dict[str, List[Candidate]] = {}
        self.candidates: Dict[str, List[Candidate]] = {}
        constraints = _constraints(trs, cfg.kind)
        unary = [c for c in constraints if len(c.symbols) == 1]
        self.constraints = [c for c in constraints if len(c.symbols) > 1]
        for symbol in trs.signature:
            self.check_time()
            raw = symbol_candidates(symbol, cfg)
            self.raw[symbol.name] = raw
            kept = []
            for candidate in raw:
                self.check_time()
                if cfg.kind == CriterionKind.QI and symbol.is_defined and not _subterm_ok(candidate.fn):
                    continue
                single = Assignment({symbol.name: candidate.fn})
                if all(c.holds(single) for c in unary if symbol.name in c.symbols):
                    kept.append(candidate)
            self.candidates[symbol.name] = kept
            logger.debug(f"Symbol {symbol.name}: {len(kept)} of {len(raw)} candidate(s) after unary filtering")
        self.order = self._symbol_order()

    def check_time(self):
        if time.monotonic() > self.deadline:
            raise _OutOfTime()

    def tick(self):
        self.tried += 1
        self.check_time()

    def _symbol_order(self) -> List[str]:
        """Greedy: next the symbol completing the most constraints; ties by fewer candidates, then signature order."""
        remaining = [s.name for s in self.trs.signature]
        assigned: set = set()
        order = []
        while remaining:
            def completes(name):
                now = assigned | {name}
                return sum(1 for c in self.constraints if c.symbols <= now and not c.symbols <= assigned)

            best = min(remaining, key=lambda n: (-completes(n), len(self.candidates[n]), remaining.index(n)))
            order.append(best)
            assigned.add(best)
            remaining.remove(best)
        return order

    @property
    def empty(self) -> bool:
        return any(not self.candidates[s] for s in self.order)

    def assignment(self, chosen: Dict[str, int], candidates=None) -> Assignment:
        candidates = candidates or self.candidates
        return Assignment({name: candidates[name][i].fn for name, i in chosen.items()})

    def search(self) -> Iterator[Assignment]:
        """Assignments passing every constraint, in (total cost, rank tuple) order."""
        if self.empty:
            return
        costs = {s: [c.cost for c in self.candidates[s]] for s in self.order}
        suffix_min = [0] * (len(self.order) + 1)
        suffix_max = [0] * (len(self.order) + 1)
        for i in range(len(self.order) - 1, -1, -1):
            suffix_min[i] = suffix_min[i + 1] + costs[self.order[i]][0]
            suffix_max[i] = suffix_max[i + 1] + costs[self.order[i]][-1]
        completing = []
        for depth in range(len(self.order)):
            before, upto = set(self.order[:depth]), set(self.order[:depth + 1])
            completing.append([
                i for i, c in enumerate(self.constraints) if c.symbols <= upto and not c.symbols <= before
            ])
        memo: Dict[tuple, bool] = {}

        def holds(ci: int, chosen: Dict[str, int]) -> bool:
            constraint = self.constraints[ci]
            names = sorted(constraint.symbols)
            key = (ci, tuple(chosen[n] for n in names))
            if key not in memo:
                memo[key] = constraint.holds(self.assignment({n: chosen[n] for n in names}))
            return memo[key]

        def dfs(depth: int, remaining: int, chosen: Dict[str, int]):
            if depth == len(self.order):
                yield self.assignment(chosen)
                return
            name = self.order[depth]
            symbol_costs = costs[name]
            start = bisect.bisect_left(symbol_costs, remaining - suffix_max[depth + 1])
            stop = bisect.bisect_right(symbol_costs, remaining - suffix_min[depth + 1])
            for idx in range(start, stop):
                self.tick()
                chosen[name] = idx
                if all(holds(ci, chosen) for ci in completing[depth]):
                    yield from dfs(depth + 1, remaining - symbol_costs[idx], chosen)
                del chosen[name]

        for level in range(suffix_min[0], suffix_max[0] + 1):
            logger.debug(f"Searching total cost {level}")
            yield from dfs(0, level, {})


def _criterion(cfg: SynthesisConfig) -> Criterion:
    return Criterion(kind=cfg.kind, relax_nullary=cfg.nullary_relax)


def synthesize(trs: Trs, cfg: SynthesisConfig, plan: Optional[SamplingPlan] = None) -> SynthesisResult:
    """First certified assignment in (total cost, rank tuple) order over the bounded grid."""
    started = time.monotonic()
    space = None
    try:
        space = _SearchSpace(trs, cfg, started + cfg.time_budget)
        for assignment in space.search():
            certificate = verify(trs, assignment, _criterion(cfg), plan=plan)
            if certificate.overall == Overall.VALID:
                logger.info(
                    f"Found {cfg.kind.value.upper()} after {space.tried} candidate(s) "
                    f"in {time.monotonic() - started:.2f}s"
                )
                return SynthesisResult(SynthesisStatus.FOUND, space.tried, assignment, certificate)
            logger.warning(f"Candidate passed the search but not the verifier: {certificate.overall.value}")
    except _OutOfTime:
        tried = space.tried if space else 0
        logger.warning(f"Synthesis timed out after {cfg.time_budget}s and {tried} candidate(s)")
        return SynthesisResult(SynthesisStatus.TIMED_OUT, tried)
    logger.info(f"Search space exhausted after {space.tried} candidate(s)")
    return SynthesisResult(SynthesisStatus.EXHAUSTED, space.tried, notes=(EXHAUSTED_NOTE,))


def synthesize_brute_force(trs: Trs, cfg: SynthesisConfig, plan: Optional[SamplingPlan] = None) -> SynthesisResult:
    """Unpruned oracle: every candidate of the full product, in the same global order, through the verifier."""
    plan = plan or SamplingPlan(grid_max=1, random_points=0)
    space = _SearchSpace(trs, cfg, deadline=float("inf"))
    order = space.order
    # ranks relative to the unfiltered lists order candidates exactly as the filtered ranks do
    ranked = [list(enumerate(space.raw[name])) for name in order]
    combos = sorted(
        itertools.product(*ranked),
        key=lambda combo: (sum(c.cost for _, c in combo), tuple(i for i, _ in combo)),
    )
    tried = 0
    criterion = _criterion(cfg)
    for combo in combos:
        tried += 1
        assignment = Assignment({name: c.fn for name, (_, c) in zip(order, combo)})
        certificate = verify(trs, assignment, criterion, plan=plan)
        if certificate.overall == Overall.VALID:
            return SynthesisResult(SynthesisStatus.FOUND, tried, assignment, certificate)
    return SynthesisResult(SynthesisStatus.EXHAUSTED, tried, notes=(EXHAUSTED_NOTE,))


# Exact path for one affine branch per symbol

@dataclass(frozen=True)
class _SymbolicAffine:
    slopes: Tuple[Fraction, ...]
    constant: LinearExpr


@dataclass(frozen=True)
class _SymbolicValue:
    coefficients: Dict[Var, Fraction] = field(default_factory=dict)
    constant: LinearExpr = field(default_factory=LinearExpr)


def _symbolic(term: Term, functions: Dict[str, _SymbolicAffine]) -> _SymbolicValue:
    if isinstance(term, Var):
        return _SymbolicValue({term: Fraction(1)})
    fn = functions[term.symbol.name]
    coefficients: Dict[Var, Fraction] = {}
    constant = fn.constant
    for slope, arg in zip(fn.slopes, term.args):
        value = _symbolic(arg, functions)
        for v, c in value.coefficients.items():
            coefficients[v] = coefficients.get(v, Fraction(0)) + slope * c
        constant = constant + value.constant.scale(slope)
    return _SymbolicValue(coefficients, constant)


def slope_grid(bound: int) -> List[Fraction]:
    return sorted({Fraction(p, q) for p in range(bound + 1) for q in range(1, bound + 1)})


def synthesize_linear_template(
        trs: Trs,
        kind: CriterionKind,
        nullary_relax: Optional[Fraction] = None,
        slope_bound: int = settings.LINEAR_SLOPE_BOUND,
        time_budget: float = settings.SYNTH_TIME_BUDGET,
        plan: Optional[SamplingPlan] = None,
) -> SynthesisResult:
    """Affine templates: slopes enumerated from a small grid, constants solved exactly by linear programming."""
    started = time.monotonic()
    defined = list(trs.defined)
    grid = slope_grid(slope_bound)
    slots = [(f, j) for f in defined for j in range(f.arity)]
    slot_grids = [[s for s in grid if s >= 1] if kind == CriterionKind.QI else grid for _ in slots]
    vectors = sorted(
        itertools.product(*slot_grids),
        key=lambda v: (sum(s.numerator for s in v), v),
    )

    constant_names = {s.name: f"k_{s.name}" if s.is_constructor else f"b_{s.name}" for s in trs.signature}
    bounds = {}
    for s in trs.signature:
        if s.is_defined:
            bounds[constant_names[s.name]] = (0, None)
        elif s.arity > 0:
            bounds[constant_names[s.name]] = (1, None)
        elif nullary_relax is not None:
            bounds[constant_names[s.name]] = (0, nullary_relax)
    inequalities = [(r.lhs, r.rhs) for r in trs.rules]
    if kind == CriterionKind.DPI:
        inequalities += [(p.lhs_marked, p.rhs_marked) for p in dependency_pairs(trs)]
    objective = LinearExpr({name: Fraction(1) for name in bounds})

    tried = 0
    for vector in vectors:
        if time.monotonic() - started > time_budget:
            logger.warning(f"Linear template search timed out after {tried} slope vector(s)")
            return SynthesisResult(SynthesisStatus.TIMED_OUT, tried)
        tried += 1
        slopes = {}
        for (f, j), s in zip(slots, vector):
            slopes.setdefault(f.name, []).append(s)
        functions = {}
        for s in trs.signature:
            constant = LinearExpr.unknown(constant_names[s.name]) if constant_names[s.name] in bounds else LinearExpr()
            arity_slopes = tuple(slopes.get(s.name, ())) if s.is_defined else (Fraction(1),) * s.arity
            functions[s.name] = _SymbolicAffine(arity_slopes, constant)

        rows = []
        feasible = True
        for lhs, rhs in inequalities:
            left, right = _symbolic(lhs, functions), _symbolic(rhs, functions)
            if any(left.coefficients.get(v, Fraction(0)) < c for v, c in right.coefficients.items()):
                feasible = False
                break
            rows.append((left.constant - right.constant, Sense.GE, 0))
        if not feasible:
            continue
        result = solve(rows, objective, bounds)
        if result.status != LpStatus.OPTIMAL:
            continue

        assignment = Assignment({
            name: MaxPolyFn.from_poly(
                _affine(len(fn.slopes), fn.slopes, fn.constant.evaluate(result.values))
            )
            for name, fn in functions.items()
        })
        certificate = verify(trs, assignment, Criterion(kind=kind, relax_nullary=nullary_relax), plan=plan)
        if certificate.overall == Overall.VALID:
            logger.info(
                f"Linear template found after {tried} slope vector(s): "
                + ", ".join(f"{n}={render_scalar(v)}" for n, v in sorted(result.values.items()))
            )
            return SynthesisResult(SynthesisStatus.FOUND, tried, assignment, certificate)
    note = f"Exhausted over affine templates with slopes in {{{', '.join(render_scalar(g) for g in grid)}}}"
    return SynthesisResult(SynthesisStatus.EXHAUSTED, tried, notes=(note, EXHAUSTED_NOTE))
