import logging
from dataclasses import dataclass
from typing import List

from supbound.services.terms import App, Position, Trs, render_position

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DependencyPair:
    lhs_marked: App
    rhs_marked: App
    origin: int  # rule index
    position: Position  # of the rhs subterm in the rule's rhs

    @property
    def rhs_unmarked(self) -> App:
        return App(self.rhs_marked.symbol.unmark(), self.rhs_marked.args)

    def to_dict(self) -> dict:
        return {
            "lhs": str(self.lhs_marked),
            "rhs": str(self.rhs_marked),
            "origin": self.origin,
            "position": render_position(self.position),
        }

    def __str__(self):
        return f"{self.lhs_marked} -> {self.rhs_marked}"


def dependency_pairs(trs: Trs) -> List[DependencyPair]:
    """``l# -> u#`` for every defined-rooted subterm u of r that is not a proper subterm of l.

    A subterm equal to ``l`` itself is kept. Pairs repeat across rules but not within one.
    """
    pairs = []
    for rule in trs.rules:
        proper = set(rule.lhs.proper_subterms())
        lhs_marked = rule.lhs.mark_root()
        for position, sub in rule.rhs.iter_positions():
            if not isinstance(sub, App) or not sub.symbol.is_defined:
                continue
            if sub in proper:
                continue
            rhs_marked = sub.mark_root()
            if any(p.origin == rule.index and p.lhs_marked == lhs_marked and p.rhs_marked == rhs_marked for p in pairs):
                continue
            pairs.append(DependencyPair(lhs_marked=lhs_marked, rhs_marked=rhs_marked, origin=rule.index, position=position))
    logger.debug(f"Extracted {len(pairs)} dependency pair(s)")
    return pairs
