import logging
import random
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple, Union

import pydantic

from supbound import settings
from supbound.services.terms import (
    App,
    Position,
    Rule,
    Term,
    Trs,
    Var,
    is_value,
    render_position,
)

logger = logging.getLogger(__name__)

Substitution = Dict[Var, Term]


def match(pattern: Term, term: Term, subst: Optional[Substitution] = None) -> Optional[Substitution]:
    """Syntactic matching; repeated pattern variables must bind equal subterms."""
    subst = dict(subst or {})
    pending = [(pattern, term)]
    while pending:
        p, t = pending.pop()
        if isinstance(p, Var):
            bound = subst.get(p)
            if bound is None:
                subst[p] = t
            elif bound != t:
                return None
        elif isinstance(t, App) and p.symbol == t.symbol:
            pending.extend(zip(p.args, t.args))
        else:
            return None
    return subst


def unify(*eqns: Tuple[Term, Term]) -> Optional[Substitution]:
    """Most general unifier of the given equations, or None."""
    unifier: Substitution = {}
    eqns = list(eqns)

    while eqns:
        lhs, rhs = eqns.pop()

        if lhs == rhs:
            continue

        if isinstance(lhs, App):
            if isinstance(rhs, App):
                if lhs.symbol == rhs.symbol:
                    eqns.extend(zip(lhs.args, rhs.args))
                    continue
                return None
            lhs, rhs = rhs, lhs

        if rhs.contains_var(lhs):
            return None

        s = {lhs: rhs}
        eqns = [(l.subst(s), r.subst(s)) for l, r in eqns]
        unifier = {x: t.subst(s) for x, t in unifier.items()}
        unifier.update(s)

    return unifier


class RuleIndex:
    """Rules grouped by root symbol, preserving rule order."""

    def __init__(self, trs: Trs):
        self.trs = trs
        self._by_root: Dict[str, List[Rule]] = {}
        for rule in trs.rules:
            self._by_root.setdefault(rule.root.name, []).append(rule)

    def contract(self, term: Term) -> List[Term]:
        if not isinstance(term, App):
            return []
        results = []
        for rule in self._by_root.get(term.symbol.name, ()):
            subst = match(rule.lhs, term)
            if subst is not None:
                results.append(rule.rhs.subst(subst))
        return results

    def is_redex(self, term: Term) -> bool:
        if not isinstance(term, App):
            return False
        return any(match(rule.lhs, term) is not None for rule in self._by_root.get(term.symbol.name, ()))

    def successors(self, term: Term) -> List[Term]:
        results = []
        for position, sub in term.iter_positions():
            for contractum in self.contract(sub):
                results.append(term.replace_at(position, contractum))
        return results

    def innermost_redex(self, term: Term) -> Optional[Position]:
        if isinstance(term, App):
            for i, arg in enumerate(term.args, start=1):
                inner = self.innermost_redex(arg)
                if inner is not None:
                    return (i,) + inner
            if self.is_redex(term):
                return ()
        return None


def rewrite_step(trs: Trs, t: Term) -> List[Term]:
    """All one-step successors, by position (pre-order) then rule index."""
    return RuleIndex(trs).successors(t)


@dataclass(frozen=True)
class NormalForm:
    term: Term
    steps: int
    trace: Tuple[Term, ...] = ()


@dataclass(frozen=True)
class StuckNonValue:
    term: Term
    steps: int
    trace: Tuple[Term, ...] = ()


@dataclass(frozen=True)
class BudgetExceeded:
    steps: int
    reason: str = "budget"


NormalizeOutcome = Union[NormalForm, StuckNonValue, BudgetExceeded]


def normalize(trs: Trs, t: Term, max_steps: Optional[int] = None, trace: bool = False) -> NormalizeOutcome:
    """Leftmost-innermost normalization under a step budget."""
    max_steps = max_steps or settings.NORMALIZE_MAX_STEPS
    index = RuleIndex(trs)
    current = t
    history = [t] if trace else []
    steps = 0
    while True:
        position = index.innermost_redex(current)
        if position is None:
            break
        if steps >= max_steps:
            logger.debug(f"Budget of {max_steps} steps exceeded normalizing {t}")
            return BudgetExceeded(steps=steps)
        contractum = index.contract(current.subterm_at(position))[0]
        current = current.replace_at(position, contractum)
        steps += 1
        if trace:
            history.append(current)
    if is_value(current):
        return NormalForm(term=current, steps=steps, trace=tuple(history))
    return StuckNonValue(term=current, steps=steps, trace=tuple(history))


def derivational_length(trs: Trs, t: Term, budget: Optional[int] = None) -> Union[int, BudgetExceeded]:
    """Length of the longest derivation from ``t``.

    Exhaustive depth-first search over distinct reducts with memoisation;
    a reduct repeated on the current path means an infinite derivation.
    """
    budget = budget or settings.DERIVATION_MAX_STATES
    index = RuleIndex(trs)
    memo: Dict[Term, int] = {}
    frames = [[t, list(dict.fromkeys(index.successors(t))), 0, 0]]
    on_path = {t}
    states = 1
    while frames:
        frame = frames[-1]
        term, successors, i, best = frame
        if i < len(successors):
            frame[2] += 1
            nxt = successors[i]
            if nxt in memo:
                frame[3] = max(best, memo[nxt] + 1)
                continue
            if nxt in on_path:
                logger.debug(f"Cycle through {nxt} while measuring {t}")
                return BudgetExceeded(steps=states, reason="cycle")
            states += 1
            if states > budget:
                return BudgetExceeded(steps=states, reason="budget")
            frames.append([nxt, list(dict.fromkeys(index.successors(nxt))), 0, 0])
            on_path.add(nxt)
        else:
            frames.pop()
            on_path.discard(term)
            memo[term] = best
            if frames:
                frames[-1][3] = max(frames[-1][3], best + 1)
    return memo[t]


def random_derivation(trs: Trs, t: Term, max_steps: int, rng: random.Random) -> Tuple[Term, ...]:
    """A derivation from ``t`` picking a uniformly random redex at every step."""
    index = RuleIndex(trs)
    derivation = [t]
    for _ in range(max_steps):
        successors = index.successors(derivation[-1])
        if not successors:
            break
        derivation.append(rng.choice(successors))
    return tuple(derivation)


class Overlap(pydantic.BaseModel):
    rule_i: int
    rule_j: int
    position: str


class OrthogonalityReport(pydantic.BaseModel):
    left_linear: bool
    non_left_linear_rules: List[int] = []
    overlaps: List[Overlap] = []

    @property
    def orthogonal(self) -> bool:
        return self.left_linear and not self.overlaps


def _is_left_linear(rule: Rule) -> bool:
    occurrences = list(rule.lhs.iter_vars())
    return len(occurrences) == len(set(occurrences))


def check_orthogonality(trs: Trs) -> OrthogonalityReport:
    non_linear = [rule.index for rule in trs.rules if not _is_left_linear(rule)]
    overlaps = []
    for outer in trs.rules:
        for position, sub in outer.lhs.iter_positions():
            if isinstance(sub, Var):
                continue
            for inner in trs.rules:
                if inner.index == outer.index and not position:
                    continue
                # root overlaps are symmetric, report each pair once
                if not position and inner.index < outer.index:
                    continue
                renamed = inner.rename("@")
                if unify((renamed.lhs, sub)) is not None:
                    overlaps.append(Overlap(rule_i=outer.index, rule_j=inner.index, position=render_position(position)))
    report = OrthogonalityReport(left_linear=not non_linear, non_left_linear_rules=non_linear, overlaps=overlaps)
    if not report.orthogonal:
        logger.warning(
            f"TRS is not orthogonal (left-linear: {report.left_linear}, overlaps: {len(report.overlaps)}); "
            f"function semantics may be a relation"
        )
    return report
