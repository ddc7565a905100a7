# homeo1d/badsets.py
"""
Bad sets: where a psi-stage is not affine.

On C_w the stage derivative h_n' o H_{n-1} equals one of the two psi slopes
except on four collars, pulled back from H_{n-1}(C_w) to C_w.
"""
from __future__ import annotations

from dataclasses import dataclass

from numerics.backends import Backend
from numerics.field import INV_PHI
from schedule.engine import Schedule
from symbolic.shift import check_word, cylinder_of

from .construction import PSI_STAGE, get_construction, stage_kind


@dataclass(frozen=True)
class BadSet:
    n: int
    word: str
    intervals: tuple

    @property
    def length(self) -> float:
        return sum(float(high) - float(low) for low, high in self.intervals)

    def overlap(self, other: "BadSet") -> float:
        total = 0.0
        for low, high in self.intervals:
            for other_low, other_high in other.intervals:
                total += max(0.0, min(float(high), float(other_high)) - max(float(low), float(other_low)))
        return total


def bad_sets(schedule: Schedule, n: int, word: str, backend: Backend | None = None) -> BadSet:
    """The collars of the psi-stage n inside C_w, in the original coordinate."""
    check_word(word)
    if len(word) != n:
        raise ValueError(f"word {word} does not have length {n}")
    if stage_kind(schedule, n) != PSI_STAGE:
        raise ValueError(f"stage {n} is not a psi-stage")
    if word[-1] != "1":
        raise ValueError("psi acts only on cylinders ending in 1")
    epsilon = schedule.stage(schedule.block_of(n)).epsilon
    if epsilon == 0:
        return BadSet(n, word, ())

    construction = get_construction(schedule, backend)
    cylinder = cylinder_of(word)
    low, high = construction.image(cylinder)
    width = high - low
    eps = construction.lift(epsilon)
    inv_phi = construction.lift(INV_PHI)
    relative = (
        (0, eps),
        (inv_phi - eps, inv_phi),
        (inv_phi, inv_phi + eps),
        (1 - eps, 1),
    )

    def pull_back(s):
        if s == 0:
            return construction.lift(cylinder.low)
        if s == 1:
            return construction.lift(cylinder.high)
        return construction.eval_H_inverse(n - 1, low + width * s)

    intervals = tuple((pull_back(a), pull_back(b)) for a, b in relative)
    return BadSet(n, word, intervals)
