import itertools
import logging
import random
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from pydantic import BaseModel

from supbound import settings
from supbound.services.errors import RcUndefined
from supbound.services.rewriting import BudgetExceeded, derivational_length, random_derivation
from supbound.services.terms import App, Symbol, Term, Trs

logger = logging.getLogger(__name__)


def _compositions(total: int, parts: int) -> Iterator[Tuple[int, ...]]:
    """Ordered splits of ``total`` into ``parts`` positive integers."""
    if parts == 0:
        if total == 0:
            yield ()
        return
    for cut in itertools.combinations(range(1, total), parts - 1):
        bounds = (0,) + cut + (total,)
        yield tuple(b - a for a, b in zip(bounds, bounds[1:]))


class ConstructorTerms:
    """Constructor terms of a given size, generated in canonical order and memoised."""

    def __init__(self, constructors: Sequence[Symbol]):
        self.constructors = tuple(constructors)
        self._by_size: Dict[int, List[App]] = {}

    def of_size(self, size: int) -> List[App]:
        if size < 1:
            return []
        if size not in self._by_size:
            terms = []
            for c in self.constructors:
                if c.arity == 0:
                    if size == 1:
                        terms.append(App(c, ()))
                    continue
                for split in _compositions(size - 1, c.arity):
                    for args in itertools.product(*(self.of_size(n) for n in split)):
                        terms.append(App(c, tuple(args)))
            self._by_size[size] = terms
        return self._by_size[size]

    def random(self, size: int, rng: random.Random, attempts: int = 20) -> Optional[App]:
        """A random term of exactly ``size`` symbols built from random shapes, or None."""
        for _ in range(attempts):
            term = self._random(size, rng)
            if term is not None:
                return term
        return None

    def _random(self, size: int, rng: "random.Random") -> Optional[App]:
        fitting = [c for c in self.constructors if (c.arity == 0 and size == 1) or (0 < c.arity <= size - 1)]
        if not fitting:
            return None
        c = rng.choice(fitting)
        if c.arity == 0:
            return App(c, ())
        cuts = sorted(rng.sample(range(1, size - 1), c.arity - 1)) if c.arity > 1 else []
        bounds = [0] + cuts + [size - 1]
        args = []
        for a, b in zip(bounds, bounds[1:]):
            arg = self._random(b - a, rng)
            if arg is None:
                return None
            args.append(arg)
        return App(c, tuple(args))


def enumerate_basic_terms(trs: Trs, size: int, factory: Optional[ConstructorTerms] = None) -> List[App]:
    """All basic terms f(v1, ..., vm) with exactly ``size`` symbols."""
    factory = factory or ConstructorTerms(trs.constructors)
    terms = []
    for f in trs.defined:
        for split in _compositions(size - 1, f.arity):
            for args in itertools.product(*(factory.of_size(n) for n in split)):
                terms.append(App(f, tuple(args)))
    return terms


def random_basic_term(
        trs: Trs, size: int, rng: random.Random, factory: Optional[ConstructorTerms] = None
) -> Optional[App]:
    factory = factory or ConstructorTerms(trs.constructors)
    fitting = [f for f in trs.defined if (f.arity == 0 and size == 1) or (0 < f.arity <= size - 1)]
    if not fitting:
        return None
    f = rng.choice(fitting)
    if f.arity == 0:
        return App(f, ())
    cuts = sorted(rng.sample(range(1, size - 1), f.arity - 1)) if f.arity > 1 else []
    bounds = [0] + cuts + [size - 1]
    args = []
    for a, b in zip(bounds, bounds[1:]):
        arg = factory.random(b - a, rng)
        if arg is None:
            return None
        args.append(arg)
    return App(f, tuple(args))


class RcEntry(BaseModel):
    size: int
    terms: int
    size_max: int = 0
    rc: Optional[int] = None
    witness: Optional[str] = None
    nonterminating: int = 0
    exhaustive: bool = True


class RcReport(BaseModel):
    max_size: int
    entries: List[RcEntry] = []
    approximate: bool = False

    def rc_at(self, n: int) -> Optional[int]:
        for entry in self.entries:
            if entry.size == n:
                return entry.rc
        return None

    def table(self) -> Dict[int, Optional[int]]:
        return {e.size: e.rc for e in self.entries}


def measure_rc(
        trs: Trs,
        max_size: int,
        budget: Optional[int] = None,
        seed: int = settings.DEFAULT_SEED,
        exhaustive_max_size: int = settings.RC_EXHAUSTIVE_MAX_SIZE,
        samples_per_size: int = settings.RC_SAMPLES_PER_SIZE,
) -> RcReport:
    """rc(n) = max derivational length over basic terms of size <= n.

    Sizes above ``exhaustive_max_size`` are sampled and the report is marked
    approximate. A term whose derivation exceeds the budget or cycles makes
    rc undefined from its size on.
    """
    factory = ConstructorTerms(trs.constructors)
    rng = random.Random(seed)
    report = RcReport(max_size=max_size)
    running, defined = 0, True
    for n in range(1, max_size + 1):
        exhaustive = n <= exhaustive_max_size
        if exhaustive:
            terms = enumerate_basic_terms(trs, n, factory)
        else:
            sampled = (random_basic_term(trs, n, rng, factory) for _ in range(samples_per_size))
            terms = list(dict.fromkeys(t for t in sampled if t is not None))
            report.approximate = True
        entry = RcEntry(size=n, terms=len(terms), exhaustive=exhaustive)
        for t in terms:
            dl = derivational_length(trs, t, budget)
            if isinstance(dl, BudgetExceeded):
                entry.nonterminating += 1
                continue
            if entry.witness is None or dl > entry.size_max:
                entry.size_max = dl
                entry.witness = str(t)
        if entry.nonterminating:
            logger.warning(
                f"{entry.nonterminating} basic term(s) of size {n} exceeded the budget (possible nontermination); "
                f"rc is undefined from size {n} on"
            )
            defined = False
        running = max(running, entry.size_max)
        entry.rc = running if defined else None
        report.entries.append(entry)
    return report


class RcKind(str, Enum):
    LINEAR = "linear"
    POLY = "poly"
    TABLE = "table"


class RcFunction(BaseModel):
    """A nondecreasing bound on derivation length as a function of term size."""
    kind: RcKind
    c: int = 1
    e: int = 1
    points: Dict[int, Optional[int]] = {}

    @classmethod
    def linear(cls, c: int) -> "RcFunction":
        return cls(kind=RcKind.LINEAR, c=c)

    @classmethod
    def poly(cls, c: int, e: int) -> "RcFunction":
        return cls(kind=RcKind.POLY, c=c, e=e)

    @classmethod
    def from_report(cls, report: RcReport) -> "RcFunction":
        return cls(kind=RcKind.TABLE, points=report.table())

    @classmethod
    def parse(cls, text: str) -> "RcFunction":
        """``linear:c`` or ``poly:c,e`` with nonnegative integers."""
        kind, _, params = text.partition(":")
        try:
            values = [int(p) for p in params.split(",")] if params else []
        except ValueError:
            raise ValueError(f"rc parameters must be integers: {text}")
        if any(v < 0 for v in values):
            raise ValueError(f"rc parameters must be nonnegative: {text}")
        if kind == RcKind.LINEAR.value and len(values) == 1:
            return cls.linear(values[0])
        if kind == RcKind.POLY.value and len(values) == 2:
            return cls.poly(*values)
        raise ValueError(f"expected linear:c or poly:c,e, got {text}")

    def __call__(self, n: int) -> int:
        if self.kind == RcKind.LINEAR:
            return self.c * n
        if self.kind == RcKind.POLY:
            return self.c * n ** self.e
        value = self.points.get(n)
        if value is None:
            raise RcUndefined(n)
        # closed under the running maximum
        return max(v for m, v in self.points.items() if m <= n and v is not None)

    def render(self, argument: str = "n") -> str:
        if self.kind == RcKind.LINEAR:
            return f"{self.c}*({argument})"
        if self.kind == RcKind.POLY:
            return f"{self.c}*({argument})^{self.e}"
        return f"rc({argument})"


def _integral(value) -> int:
    value = Fraction(value)
    if value.denominator != 1 or value < 0:
        raise ValueError(f"rc-based interpretations are defined on naturals, got {value}")
    return value.numerator


@dataclass(frozen=True)
class RcAssignment:
    """theta(c) = 0 for nullary c, sum + 1 for other constructors, (S + 1) * |R|^rc(S + 1) for defined symbols."""
    trs: Trs
    rc: RcFunction
    k_bound: Fraction = Fraction(1)

    @property
    def trs_size(self) -> int:
        return self.trs.size()

    def apply(self, symbol: Symbol, args: Sequence) -> int:
        total = sum(_integral(a) for a in args)
        if symbol.is_constructor:
            return 0 if symbol.arity == 0 else total + 1
        n = total + 1
        return n * self.trs_size ** self.rc(n)

    def value_of(self, term: Term) -> int:
        if not isinstance(term, App):
            raise ValueError(f"rc-based interpretations evaluate ground terms only, got {term}")
        return self.apply(term.symbol, [self.value_of(a) for a in term.args])

    def render(self) -> str:
        lines = []
        for s in self.trs.signature:
            xs = [f"X{i}" for i in range(1, s.arity + 1)]
            total = " + ".join(xs + ["1"])
            if s.is_constructor:
                lines.append(f"{s.name} = {'0' if s.arity == 0 else total}")
            else:
                lines.append(f"{s.name} = ({total}) * {self.trs_size}^({self.rc.render(total)})")
        if self.rc.kind == RcKind.TABLE:
            table = ", ".join(f"{n}: {'undefined' if v is None else v}" for n, v in sorted(self.rc.points.items()))
            lines.append(f"# rc = {{{table}}}")
        return "\n".join(lines) + "\n"


def construct_si_from_rc(trs: Trs, rc: RcFunction) -> RcAssignment:
    """Sup-interpretation from a runtime complexity bound; the caller vouches for termination."""
    return RcAssignment(trs=trs, rc=rc)


class SizeLemmaViolation(BaseModel):
    start: str
    step: int
    size: int
    bound: int


class SizeLemmaReport(BaseModel):
    derivations: int = 0
    steps: int = 0
    tightest_ratio: str = "0"
    violations: List[SizeLemmaViolation] = []

    @property
    def passed(self) -> bool:
        return not self.violations


def check_size_lemma(trs: Trs, traces: Sequence[Sequence[Term]]) -> SizeLemmaReport:
    """size(t_n) <= size(t_0) * |R|^n along every traced derivation t_0 -> ... -> t_n."""
    trs_size = trs.size()
    report = SizeLemmaReport()
    tightest = Fraction(0)
    for trace in traces:
        if not trace:
            continue
        report.derivations += 1
        start = trace[0].size()
        for n, term in enumerate(trace[1:], start=1):
            report.steps += 1
            bound = start * trs_size ** n
            size = term.size()
            if size > bound:
                report.violations.append(SizeLemmaViolation(start=str(trace[0]), step=n, size=size, bound=bound))
            if bound:
                tightest = max(tightest, Fraction(size, bound))
    report.tightest_ratio = str(tightest)
    return report


def sample_traces(
        trs: Trs, count: int, max_size: int, max_steps: int, seed: int = settings.DEFAULT_SEED
) -> List[Tuple[Term, ...]]:
    """Random derivations from random basic terms of size 1..max_size."""
    rng = random.Random(seed)
    factory = ConstructorTerms(trs.constructors)
    traces = []
    attempts = 0
    while len(traces) < count and attempts < count * 10:
        attempts += 1
        t = random_basic_term(trs, rng.randint(1, max_size), rng, factory)
        if t is not None:
            traces.append(random_derivation(trs, t, max_steps, rng))
    return traces
