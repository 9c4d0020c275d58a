"""Max-polynomial functions with nonnegative rational coefficients.

A ``MaxPolyFn`` is kept in normal form ``max(P1, ..., Pk)`` where every
``Pi`` is a ``Poly``: exponent vectors mapped to positive ``Fraction``
coefficients. The MaxPlus fragment is the case where every branch is affine.
"""
import functools
import itertools
import logging
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from supbound.services.errors import ArityMismatch

logger = logging.getLogger(__name__)

Powers = Tuple[int, ...]
Point = Tuple[Fraction, ...]


class Verdict(str, Enum):
    HOLDS = "holds"
    FAILS = "fails"
    UNKNOWN = "unknown"


def _term_key(item):
    powers, coeff = item
    return (-sum(powers), tuple(-p for p in powers))


def _power(value: Fraction, exponent: int) -> Fraction:
    return value ** exponent if exponent else Fraction(1)


def render_scalar(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True)
class Monomial:
    coeff: Fraction
    powers: Powers

    @property
    def degree(self) -> int:
        return sum(self.powers)

    def evaluate(self, point: Sequence[Fraction]) -> Fraction:
        value = self.coeff
        for x, e in zip(point, self.powers):
            if e:
                value *= _power(x, e)
        return value

    def render(self) -> str:
        factors = []
        for i, e in enumerate(self.powers, start=1):
            if e == 1:
                factors.append(f"X{i}")
            elif e > 1:
                factors.append(f"X{i}^{e}")
        if not factors:
            return render_scalar(self.coeff)
        if self.coeff == 1:
            return "*".join(factors)
        return "*".join([render_scalar(self.coeff)] + factors)


@dataclass(frozen=True)
class Poly:
    arity: int
    terms: Tuple[Tuple[Powers, Fraction], ...] = ()

    @classmethod
    def from_dict(cls, arity: int, coefficients: Dict[Powers, Fraction]) -> "Poly":
        cleaned = {p: Fraction(c) for p, c in coefficients.items() if c != 0}
        for p, c in cleaned.items():
            if len(p) != arity:
                raise ArityMismatch(arity, len(p), what="monomial")
            if c < 0:
                raise ValueError(f"negative coefficient {c} in a max-polynomial")
        return cls(arity=arity, terms=tuple(sorted(cleaned.items(), key=_term_key)))

    @classmethod
    def zero(cls, arity: int) -> "Poly":
        return cls(arity=arity)

    @classmethod
    def constant(cls, arity: int, value) -> "Poly":
        return cls.from_dict(arity, {(0,) * arity: Fraction(value)})

    @classmethod
    def variable(cls, arity: int, index: int, coeff=1) -> "Poly":
        """``coeff * X(index+1)``; ``index`` is 0-based."""
        if not 0 <= index < arity:
            raise ArityMismatch(arity, index + 1, what="variable index")
        powers = tuple(1 if i == index else 0 for i in range(arity))
        return cls.from_dict(arity, {powers: Fraction(coeff)})

    @functools.cached_property
    def coefficients(self) -> Dict[Powers, Fraction]:
        return dict(self.terms)

    @property
    def monomials(self) -> Tuple[Monomial, ...]:
        return tuple(Monomial(c, p) for p, c in self.terms)

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def degree(self) -> int:
        return max((sum(p) for p, _ in self.terms), default=0)

    @property
    def is_affine(self) -> bool:
        return self.degree <= 1

    @property
    def constant_term(self) -> Fraction:
        return self.coefficients.get((0,) * self.arity, Fraction(0))

    def coefficient(self, powers: Powers) -> Fraction:
        return self.coefficients.get(tuple(powers), Fraction(0))

    def __add__(self, other: "Poly") -> "Poly":
        self._check_same_arity(other)
        merged = dict(self.coefficients)
        for p, c in other.terms:
            merged[p] = merged.get(p, 0) + c
        return Poly.from_dict(self.arity, merged)

    def __mul__(self, other: "Poly") -> "Poly":
        self._check_same_arity(other)
        product: Dict[Powers, Fraction] = {}
        for (p1, c1), (p2, c2) in itertools.product(self.terms, other.terms):
            p = tuple(a + b for a, b in zip(p1, p2))
            product[p] = product.get(p, 0) + c1 * c2
        return Poly.from_dict(self.arity, product)

    def scale(self, factor) -> "Poly":
        return Poly.from_dict(self.arity, {p: c * Fraction(factor) for p, c in self.terms})

    def shift(self, amount) -> "Poly":
        return self + Poly.constant(self.arity, amount)

    def difference(self, other: "Poly") -> Dict[Powers, Fraction]:
        """Key-wise coefficients of ``self - other`` (may be negative)."""
        self._check_same_arity(other)
        diff = dict(self.coefficients)
        for p, c in other.terms:
            diff[p] = diff.get(p, 0) - c
        return diff

    def evaluate(self, point: Sequence[Fraction]) -> Fraction:
        if len(point) != self.arity:
            raise ArityMismatch(self.arity, len(point))
        total = Fraction(0)
        for p, c in self.terms:
            value = c
            for x, e in zip(point, p):
                if e:
                    value *= x ** e
            total += value
        return total

    def substitute(self, args: Sequence["Poly"]) -> "Poly":
        """``self(args[0], ..., args[n-1])``; all args share one arity."""
        if len(args) != self.arity:
            raise ArityMismatch(self.arity, len(args))
        target = args[0].arity if args else 0
        result = Poly.zero(target)
        powers_cache: Dict[Tuple[int, int], Poly] = {}

        def power(i: int, e: int) -> Poly:
            if (i, e) not in powers_cache:
                powers_cache[(i, e)] = args[i] if e == 1 else power(i, e - 1) * args[i]
            return powers_cache[(i, e)]

        for p, c in self.terms:
            term = Poly.constant(target, c)
            for i, e in enumerate(p):
                if e:
                    term = term * power(i, e)
            result = result + term
        return result

    def variables_used(self) -> Tuple[int, ...]:
        return tuple(i for i in range(self.arity) if any(p[i] for p, _ in self.terms))

    def render(self) -> str:
        if not self.terms:
            return "0"
        return " + ".join(m.render() for m in self.monomials)

    def _check_same_arity(self, other: "Poly"):
        if other.arity != self.arity:
            raise ArityMismatch(self.arity, other.arity, what="polynomial")

    def __str__(self):
        return self.render()


def _branch_key(poly: Poly):
    return tuple((_term_key(item), -item[1]) for item in poly.terms)


def dominates_coefficientwise(p: Poly, r: Poly, tolerance: Fraction = Fraction(0)) -> bool:
    return all(c >= -tolerance for c in p.difference(r).values())


@dataclass(frozen=True)
class MaxPolyFn:
    arity: int
    branches: Tuple[Poly, ...]

    @classmethod
    def of(cls, arity: int, branches: Iterable[Poly]) -> "MaxPolyFn":
        unique = {}
        for branch in branches:
            if branch.arity != arity:
                raise ArityMismatch(arity, branch.arity, what="branch")
            unique.setdefault(branch, None)
        if not unique:
            raise ValueError("a max-polynomial needs at least one branch")
        return cls(arity=arity, branches=tuple(sorted(unique, key=_branch_key)))

    @classmethod
    def from_poly(cls, poly: Poly) -> "MaxPolyFn":
        return cls.of(poly.arity, [poly])

    @classmethod
    def zero(cls, arity: int) -> "MaxPolyFn":
        return cls.of(arity, [Poly.zero(arity)])

    @classmethod
    def projection(cls, arity: int, index: int) -> "MaxPolyFn":
        return cls.of(arity, [Poly.variable(arity, index)])

    @classmethod
    def additive(cls, arity: int, constant) -> "MaxPolyFn":
        """``X1 + ... + Xn + constant``"""
        poly = Poly.constant(arity, constant)
        for i in range(arity):
            poly = poly + Poly.variable(arity, i)
        return cls.from_poly(poly)

    @property
    def is_max_plus(self) -> bool:
        return all(b.is_affine for b in self.branches)

    def evaluate(self, point: Sequence[Fraction]) -> Fraction:
        if len(point) != self.arity:
            raise ArityMismatch(self.arity, len(point))
        return max(b.evaluate(point) for b in self.branches)

    def compose(self, args: Sequence["MaxPolyFn"], arity: Optional[int] = None) -> "MaxPolyFn":
        """Substitute ``args`` for the formal arguments.

        ``arity`` fixes the arity of the result when there are no arguments.
        """
        if len(args) != self.arity:
            raise ArityMismatch(self.arity, len(args))
        target = args[0].arity if args else (arity or 0)
        for a in args:
            if a.arity != target:
                raise ArityMismatch(target, a.arity, what="composed argument")
        if not args:
            return MaxPolyFn.of(target, [Poly.constant(target, b.constant_term) for b in self.branches])
        branches = []
        for branch in self.branches:
            # nonnegative coefficients make each branch monotone, so it
            # distributes over the max of every argument it mentions
            used = branch.variables_used()
            choices = [args[i].branches if i in used else (args[i].branches[0],) for i in range(self.arity)]
            for choice in itertools.product(*choices):
                branches.append(branch.substitute(choice))
        return MaxPolyFn.of(target, branches)

    def add(self, other: "MaxPolyFn") -> "MaxPolyFn":
        return MaxPolyFn.of(self.arity, [p + q for p in self.branches for q in other.branches])

    def shift(self, amount) -> "MaxPolyFn":
        return MaxPolyFn.of(self.arity, [b.shift(amount) for b in self.branches])

    def pruned(self) -> "MaxPolyFn":
        """Drop branches coefficient-wise dominated by another branch (pointwise equal)."""
        kept = []
        for i, b in enumerate(self.branches):
            dominated = any(
                j != i and dominates_coefficientwise(other, b) and (other != b)
                for j, other in enumerate(self.branches)
            )
            if not dominated:
                kept.append(b)
        return MaxPolyFn.of(self.arity, kept)

    def render(self) -> str:
        if len(self.branches) == 1:
            return self.branches[0].render()
        return f"max({', '.join(b.render() for b in self.branches)})"

    def __str__(self):
        return self.render()


def evaluate(f: MaxPolyFn, point: Sequence[Fraction]) -> Fraction:
    return f.evaluate(tuple(Fraction(x) for x in point))


def compose(f: MaxPolyFn, args: Sequence[MaxPolyFn], arity: Optional[int] = None) -> MaxPolyFn:
    return f.compose(args, arity=arity)


@dataclass(frozen=True)
class Degrees:
    xdegree: int
    maxdegree: int
    plusdegree: Optional[Fraction]


def degrees(f: MaxPolyFn) -> Degrees:
    plus = None
    if f.is_max_plus:
        plus = max((c for b in f.branches for _, c in b.terms), default=Fraction(0))
    return Degrees(
        xdegree=max(b.degree for b in f.branches),
        maxdegree=len(f.branches),
        plusdegree=plus,
    )


# Function expressions, as written by users before normalization

class FnExpr:
    def evaluate(self, point: Sequence[Fraction]) -> Fraction:
        raise NotImplementedError

    def max_index(self) -> int:
        raise NotImplementedError


@dataclass(frozen=True)
class FnVar(FnExpr):
    index: int  # 0-based

    def evaluate(self, point):
        return Fraction(point[self.index])

    def max_index(self):
        return self.index


@dataclass(frozen=True)
class FnConst(FnExpr):
    value: Fraction

    def evaluate(self, point):
        return self.value

    def max_index(self):
        return -1


@dataclass(frozen=True)
class FnAdd(FnExpr):
    terms: Tuple[FnExpr, ...]

    def evaluate(self, point):
        return sum((t.evaluate(point) for t in self.terms), Fraction(0))

    def max_index(self):
        return max((t.max_index() for t in self.terms), default=-1)


@dataclass(frozen=True)
class FnMul(FnExpr):
    factors: Tuple[FnExpr, ...]

    def evaluate(self, point):
        value = Fraction(1)
        for f in self.factors:
            value *= f.evaluate(point)
        return value

    def max_index(self):
        return max((f.max_index() for f in self.factors), default=-1)


@dataclass(frozen=True)
class FnMax(FnExpr):
    args: Tuple[FnExpr, ...]

    def __post_init__(self):
        if not self.args:
            raise ValueError("max needs at least one argument")

    def evaluate(self, point):
        return max(a.evaluate(point) for a in self.args)

    def max_index(self):
        return max(a.max_index() for a in self.args)


def _branches_of(e: FnExpr, arity: int) -> List[Poly]:
    if isinstance(e, FnVar):
        return [Poly.variable(arity, e.index)]
    if isinstance(e, FnConst):
        if e.value < 0:
            raise ValueError(f"negative constant {e.value}")
        return [Poly.constant(arity, e.value)]
    if isinstance(e, FnMax):
        return [b for a in e.args for b in _branches_of(a, arity)]
    if isinstance(e, FnAdd):
        combined = [Poly.zero(arity)]
        for t in e.terms:
            # max(Q,R)+P = max(Q+P,R+P)
            combined = list(dict.fromkeys(c + b for c in combined for b in _branches_of(t, arity)))
        return combined
    if isinstance(e, FnMul):
        combined = [Poly.constant(arity, 1)]
        for f in e.factors:
            combined = list(dict.fromkeys(c * b for c in combined for b in _branches_of(f, arity)))
        return combined
    raise TypeError(f"not a function expression: {e!r}")


def normalize_fn(e: FnExpr, arity: Optional[int] = None) -> MaxPolyFn:
    arity = e.max_index() + 1 if arity is None else arity
    if e.max_index() >= arity:
        raise ArityMismatch(arity, e.max_index() + 1, what="expression")
    return MaxPolyFn.of(arity, _branches_of(e, arity))


# Inequalities between max-polynomials

@dataclass(frozen=True)
class Atom:
    lhs: Poly
    rhs: Poly

    def holds_at(self, point: Sequence[Fraction]) -> bool:
        return self.lhs.evaluate(point) >= self.rhs.evaluate(point)

    def __str__(self):
        return f"{self.lhs.render()} >= {self.rhs.render()}"


@dataclass(frozen=True)
class Clause:
    atoms: Tuple[Atom, ...]

    def holds_at(self, point: Sequence[Fraction]) -> bool:
        return any(a.holds_at(point) for a in self.atoms)

    def __str__(self):
        return " or ".join(f"({a})" for a in self.atoms)


@dataclass(frozen=True)
class GeqCnf:
    clauses: Tuple[Clause, ...]

    def holds_at(self, point: Sequence[Fraction]) -> bool:
        return all(c.holds_at(point) for c in self.clauses)


def decompose_geq(q: MaxPolyFn, q_prime: MaxPolyFn) -> GeqCnf:
    """``q >= q'`` as: for every branch R of q', some branch P of q with P >= R."""
    if q.arity != q_prime.arity:
        raise ArityMismatch(q.arity, q_prime.arity)
    return GeqCnf(clauses=tuple(
        Clause(atoms=tuple(Atom(p, r) for p in q.branches)) for r in q_prime.branches
    ))


def poly_dominates(p: Poly, r: Poly, tolerance: Fraction = Fraction(0)) -> Verdict:
    """Absolute positiveness of ``p - r``; complete for affine polynomials."""
    return Verdict.HOLDS if dominates_coefficientwise(p, r, tolerance) else Verdict.UNKNOWN


def check_clause_uniform(clause: Clause, tolerance: Fraction = Fraction(0)) -> Verdict:
    for atom in clause.atoms:
        if poly_dominates(atom.lhs, atom.rhs, tolerance) == Verdict.HOLDS:
            return Verdict.HOLDS
    return Verdict.UNKNOWN


def check_geq_uniform(q: MaxPolyFn, q_prime: MaxPolyFn, tolerance: Fraction = Fraction(0)) -> Verdict:
    clauses = decompose_geq(q, q_prime).clauses
    if all(check_clause_uniform(c, tolerance) == Verdict.HOLDS for c in clauses):
        return Verdict.HOLDS
    return Verdict.UNKNOWN
