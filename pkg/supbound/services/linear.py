import logging
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Dict, List, Mapping, Optional, Sequence

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class LinearExpr:
    """``constant + sum(coeff * unknown)`` over named rational unknowns."""
    coefficients: Mapping[str, Fraction] = field(default_factory=dict)
    constant: Fraction = Fraction(0)

    @classmethod
    def unknown(cls, name: str) -> "LinearExpr":
        return cls({name: Fraction(1)})

    @classmethod
    def const(cls, value) -> "LinearExpr":
        return cls({}, Fraction(value))

    def __add__(self, other: "LinearExpr") -> "LinearExpr":
        coefficients = dict(self.coefficients)
        for name, c in other.coefficients.items():
            coefficients[name] = coefficients.get(name, Fraction(0)) + c
        return LinearExpr({n: c for n, c in coefficients.items() if c != 0}, self.constant + other.constant)

    def __sub__(self, other: "LinearExpr") -> "LinearExpr":
        return self + other.scale(-1)

    def scale(self, factor) -> "LinearExpr":
        factor = Fraction(factor)
        if factor == 0:
            return LinearExpr()
        return LinearExpr({n: c * factor for n, c in self.coefficients.items()}, self.constant * factor)

    def evaluate(self, values: Mapping[str, Fraction]) -> Fraction:
        return self.constant + sum((c * values[n] for n, c in self.coefficients.items()), Fraction(0))

    @property
    def is_constant(self) -> bool:
        return not self.coefficients


class Sense(str, Enum):
    GE = ">="
    LE = "<="
    EQ = "="


class LpStatus(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class LpResult:
    status: LpStatus
    values: Dict[str, Fraction] = field(default_factory=dict)
    objective: Optional[Fraction] = None


class LinearProgram:
    """Minimisation over nonnegative rational unknowns, solved exactly.

    Two-phase tableau simplex with Bland's rule for entering and leaving
    variables, so it terminates without cycling.
    """

    def __init__(self):
        self.variables: List[str] = []
        self.lower: Dict[str, Fraction] = {}
        self.rows: List[tuple] = []

    def add_variable(self, name: str, lower=0, upper=None):
        if name in self.lower:
            return
        self.variables.append(name)
        self.lower[name] = Fraction(lower)
        if upper is not None:
            self.add_constraint(LinearExpr.unknown(name), Sense.LE, upper)

    def add_constraint(self, expr: LinearExpr, sense: Sense, rhs=0):
        """``expr <sense> rhs``; unknowns not yet declared get lower bound 0."""
        for name in expr.coefficients:
            self.add_variable(name)
        self.rows.append((dict(expr.coefficients), Sense(sense), Fraction(rhs) - expr.constant))

    def minimize(self, objective: LinearExpr) -> LpResult:
        for name in objective.coefficients:
            self.add_variable(name)
        n = len(self.variables)
        index = {v: j for j, v in enumerate(self.variables)}

        # shift x = y + lower so that y >= 0
        matrix, rhs, senses = [], [], []
        for coeffs, sense, b in self.rows:
            row = [Fraction(0)] * n
            for name, c in coeffs.items():
                row[index[name]] = c
                b -= c * self.lower[name]
            matrix.append(row)
            rhs.append(b)
            senses.append(sense)

        m = len(matrix)
        slack_count = sum(1 for s in senses if s != Sense.EQ)
        width = n + slack_count + m
        tableau = []
        slack = n
        for i, (row, b, sense) in enumerate(zip(matrix, rhs, senses)):
            full = row + [Fraction(0)] * (slack_count + m)
            if sense == Sense.GE:
                full[slack] = Fraction(-1)
                slack += 1
            elif sense == Sense.LE:
                full[slack] = Fraction(1)
                slack += 1
            if b < 0:
                full = [-x for x in full]
                b = -b
            full[n + slack_count + i] = Fraction(1)
            tableau.append(full + [b])
        basis = [n + slack_count + i for i in range(m)]
        artificial = set(basis)

        # phase one: minimise the sum of artificials
        cost = [Fraction(0)] * width
        for j in artificial:
            cost[j] = Fraction(1)
        if not self._optimize(tableau, basis, cost, allowed=range(width)):
            raise RuntimeError("phase one cannot be unbounded")
        infeasibility = sum(tableau[i][-1] for i in range(len(basis)) if basis[i] in artificial)
        if infeasibility > 0:
            logger.debug(f"Linear program infeasible ({len(self.rows)} rows, {n} unknowns)")
            return LpResult(status=LpStatus.INFEASIBLE)
        self._drive_out_artificials(tableau, basis, artificial)

        # phase two
        cost = [Fraction(0)] * width
        for name, c in objective.coefficients.items():
            cost[index[name]] = c
        allowed = [j for j in range(width) if j not in artificial]
        if not self._optimize(tableau, basis, cost, allowed=allowed):
            return LpResult(status=LpStatus.UNBOUNDED)

        values = {name: self.lower[name] for name in self.variables}
        for i, j in enumerate(basis):
            if j < n:
                values[self.variables[j]] += tableau[i][-1]
        return LpResult(status=LpStatus.OPTIMAL, values=values, objective=objective.evaluate(values))

    @staticmethod
    def _pivot(tableau, basis, r, col):
        pivot = tableau[r][col]
        tableau[r] = [x / pivot for x in tableau[r]]
        for i, row in enumerate(tableau):
            if i != r and row[col] != 0:
                factor = row[col]
                pivot_row = tableau[r]
                tableau[i] = [x - factor * p for x, p in zip(row, pivot_row)]
        basis[r] = col

    def _optimize(self, tableau, basis, cost, allowed: Sequence[int]) -> bool:
        allowed = sorted(allowed)
        while True:
            # reduced costs
            entering = None
            for j in allowed:
                if j in basis:
                    continue
                reduced = cost[j] - sum((cost[basis[i]] * tableau[i][j] for i in range(len(basis))), Fraction(0))
                if reduced < 0:
                    entering = j
                    break
            if entering is None:
                return True
            leaving = None
            for i, row in enumerate(tableau):
                if row[entering] > 0:
                    key = (row[-1] / row[entering], basis[i])
                    if leaving is None or key < leaving[0]:
                        leaving = (key, i)
            if leaving is None:
                return False
            self._pivot(tableau, basis, leaving[1], entering)

    def _drive_out_artificials(self, tableau, basis, artificial):
        r = 0
        while r < len(basis):
            if basis[r] in artificial:
                col = next(
                    (j for j, x in enumerate(tableau[r][:-1]) if x != 0 and j not in artificial),
                    None,
                )
                if col is None:
                    # redundant row
                    del tableau[r]
                    del basis[r]
                    continue
                self._pivot(tableau, basis, r, col)
            r += 1


def solve(constraints: Sequence[tuple], objective: LinearExpr, bounds: Mapping[str, tuple] = None) -> LpResult:
    """Convenience wrapper: ``constraints`` are ``(expr, sense, rhs)`` triples."""
    lp = LinearProgram()
    for name, (lower, upper) in sorted((bounds or {}).items()):
        lp.add_variable(name, lower=lower, upper=upper)
    for expr, sense, rhs in constraints:
        lp.add_constraint(expr, sense, rhs)
    return lp.minimize(objective)
