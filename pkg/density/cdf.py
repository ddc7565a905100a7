# density/cdf.py
"""
The cumulative distribution x -> mu+([0, x]) at a finite depth.

Masses of the depth-n cylinders left of x are summed along the cylinder
chain of x; inside the containing cylinder the mass is spread linearly.
At every depth-n endpoint the value does not depend on n.
"""
from __future__ import annotations

from dataclasses import dataclass

from markov.measures import MeasureSpec
from numerics.backends import Backend, ExactBackend
from numerics.field import FieldElement
from schedule.engine import Schedule
from symbolic.shift import cylinder_chain


# siblings to the left of a child, given the child's last symbol and depth
_LEFT_SIBLINGS = {"1": (), "3": ("1",), "2": ()}
_LEFT_AT_TOP = {"1": (), "3": ("1",), "2": ("1", "3")}


@dataclass(frozen=True)
class CdfApprox:
    spec: MeasureSpec
    n: int
    backend: Backend

    @classmethod
    def for_schedule(cls, schedule: Schedule, n: int, backend: Backend | None = None) -> "CdfApprox":
        backend = backend or ExactBackend()
        return cls(MeasureSpec.from_schedule(schedule, backend=backend), n, backend)

    def __call__(self, x):
        if self.n < 1:
            raise ValueError("depth must be at least 1")
        if x < 0 or x > 1:
            raise ValueError(f"point {x} outside [0, 1]")
        if x == 1:
            return self.backend.lift(1)
        total = self.backend.lift(0)
        parent = ""
        chain = cylinder_chain(x, self.n)
        for depth, cylinder in enumerate(chain, start=1):
            symbol = cylinder.last
            left = _LEFT_AT_TOP[symbol] if depth == 1 else _LEFT_SIBLINGS[symbol]
            for sibling in left:
                total = total + self.spec.cylinder_mass(parent + sibling)
            parent = cylinder.word
        cylinder = chain[-1]
        mass = self.spec.cylinder_mass(cylinder.word)
        offset = x - cylinder.low if isinstance(x, FieldElement) else x - self.backend.lift(cylinder.low)
        return total + mass * offset / self.backend.lift(cylinder.length)


def mu_plus_cdf(schedule: Schedule | None, n: int, x, *, spec: MeasureSpec | None = None,
                backend: Backend | None = None):
    """mu+([0, x]) at depth n; ``spec`` replaces the schedule's mu+ when given."""
    backend = backend or ExactBackend()
    if spec is None:
        if schedule is None:
            raise ValueError("need a schedule or a measure spec")
        return CdfApprox.for_schedule(schedule, n, backend)(x)
    return CdfApprox(spec, n, backend)(x)
