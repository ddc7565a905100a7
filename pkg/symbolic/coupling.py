# symbolic/coupling.py
"""
Horizontal boundary levels of the rectangle model and the coupling words.

The boundary of M is cut into segments V_j; on V_j the two identified
sides carry the cylinders of the words w(j) and w~(j), which first share
an admissible continuation after j + 1 steps.
"""
from __future__ import annotations

from dataclasses import dataclass

from numerics.field import PHI, FieldElement

from .shift import Cylinder, check_word, cylinder_of


TOP = PHI * PHI / (PHI + 2)
MID = 1 / (PHI + 2)
BOTTOM = -PHI / (PHI + 2)


def upper_word(j: int) -> str:
    """w(j): the word carried by the first side of V_j."""
    if j < 1:
        raise ValueError("coupling index starts at 1")
    if j == 1:
        return "1"
    if j == 2:
        return "11"
    if j % 2:
        return "32" * ((j - 3) // 2) + "132"
    return "32" * ((j - 4) // 2) + "3211"


def lower_word(j: int) -> str:
    """w~(j): the word carried by the identified side of V_j."""
    if j < 1:
        raise ValueError("coupling index starts at 1")
    if j == 1:
        return "2"
    if j == 2:
        return "32"
    if j % 2:
        return "23" * ((j - 3) // 2) + "211"
    return "23" * ((j - 4) // 2) + "2132"


@dataclass(frozen=True)
class BoundarySide:
    word: str
    level: FieldElement

    @property
    def cylinder(self) -> Cylinder:
        return cylinder_of(self.word)

    @property
    def interval(self) -> tuple[FieldElement, FieldElement]:
        cylinder = self.cylinder
        return cylinder.low, cylinder.high


@dataclass(frozen=True)
class CouplingSegment:
    index: int
    upper: BoundarySide
    lower: BoundarySide

    @property
    def coupling_time(self) -> int:
        return self.index + 1

    @property
    def offset(self) -> FieldElement:
        """Translation taking the upper side onto the lower side."""
        return self.lower.cylinder.low - self.upper.cylinder.low

    def sides(self) -> tuple[BoundarySide, BoundarySide]:
        return self.upper, self.lower


def coupling_segment(j: int) -> CouplingSegment:
    """V_j with both identified boundary intervals.

    V_1 joins C_1 on the bottom edge to C_2 on the middle edge; every
    later segment joins C_{w(j)} on the top edge to C_{w~(j)} on the bottom.
    """
    upper = check_word(upper_word(j))
    lower = check_word(lower_word(j))
    if j == 1:
        return CouplingSegment(1, BoundarySide(upper, BOTTOM), BoundarySide(lower, MID))
    return CouplingSegment(j, BoundarySide(upper, TOP), BoundarySide(lower, BOTTOM))
