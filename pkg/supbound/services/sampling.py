import itertools
import logging
import random
from fractions import Fraction
from typing import Callable, Iterator, Optional

import pydantic

from supbound import settings
from supbound.services.maxpoly import MaxPolyFn, Point

logger = logging.getLogger(__name__)


class SamplingPlan(pydantic.BaseModel):
    grid_step: Fraction = settings.SAMPLING_GRID_STEP
    grid_max: int = settings.SAMPLING_GRID_MAX
    grid_cap: int = settings.SAMPLING_GRID_CAP
    random_points: int = settings.SAMPLING_RANDOM_POINTS
    max_numerator: int = settings.SAMPLING_MAX_NUMERATOR
    seed: int = settings.DEFAULT_SEED

    class Config:
        arbitrary_types_allowed = True

    @pydantic.validator("grid_step")
    def step_positive(cls, v):
        if v <= 0:
            raise ValueError("grid step must be positive")
        return v

    def points(self, arity: int) -> Iterator[Point]:
        """Integer grid first, then the fine grid, then seeded random rationals."""
        if arity == 0:
            yield ()
            return
        emitted = 0
        integers = [Fraction(i) for i in range(self.grid_max + 1)]
        for point in itertools.product(integers, repeat=arity):
            if emitted >= self.grid_cap:
                break
            emitted += 1
            yield point
        steps = int(self.grid_max / self.grid_step)
        fine = [self.grid_step * i for i in range(steps + 1)]
        for point in itertools.product(fine, repeat=arity):
            if emitted >= self.grid_cap:
                break
            if all(x.denominator == 1 for x in point):
                continue
            emitted += 1
            yield point
        rng = random.Random(self.seed)
        for _ in range(self.random_points):
            yield tuple(
                Fraction(rng.randint(0, self.max_numerator), rng.randint(1, self.max_numerator))
                for _ in range(arity)
            )


DEFAULT_PLAN = SamplingPlan()


def find_violation(
        predicate: Callable[[Point], bool], arity: int, plan: Optional[SamplingPlan] = None
) -> Optional[Point]:
    """First point of the plan where ``predicate`` is false."""
    plan = plan or DEFAULT_PLAN
    for point in plan.points(arity):
        if not predicate(point):
            return point
    return None


def refute_by_sampling(
        q: MaxPolyFn,
        q_prime: MaxPolyFn,
        plan: Optional[SamplingPlan] = None,
        tolerance: Fraction = Fraction(0),
) -> Optional[Point]:
    """A point x >= 0 with q(x) < q'(x) - tolerance, if the plan hits one.

    Not finding a witness proves nothing.
    """
    witness = find_violation(lambda x: q.evaluate(x) >= q_prime.evaluate(x) - tolerance, q.arity, plan)
    if witness is not None:
        logger.debug(f"Refuted {q} >= {q_prime} at {[str(x) for x in witness]}")
    return witness
