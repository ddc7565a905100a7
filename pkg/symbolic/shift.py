# symbolic/shift.py
"""
The golden-mean topological Markov shift and its cylinder geometry.

Symbols are the characters "1", "2", "3" with J1 = [0, 1/phi^2),
J3 = [1/phi^2, 1/phi) and J2 = [1/phi, 1). The map S(x) = phi*x mod 1 is
Markov for this partition, so every admissible word w has an interval
C_w = [low, high) with endpoints in Q(sqrt 5).
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from numerics.field import INV_PHI, INV_PHI2, ONE, PHI, ZERO, FieldElement, approximate


SYMBOLS = ("1", "2", "3")
# left-to-right order of the partition intervals, i.e. the cylinder order
ORDER = ("1", "3", "2")
RANK = {symbol: rank for rank, symbol in enumerate(ORDER)}

ADJACENCY = (
    (1, 0, 1),
    (1, 0, 1),
    (0, 1, 0),
)

FOLLOWERS = {
    "1": ("1", "3"),
    "2": ("1", "3"),
    "3": ("2",),
}

PARTITION = {
    "1": (ZERO, INV_PHI2),
    "3": (INV_PHI2, INV_PHI),
    "2": (INV_PHI, ONE),
}

# bits used when a float point is compared against an exact endpoint
SPLIT_PRECISION = 128


class InadmissibleWordError(ValueError):
    """Word uses an unknown symbol or a forbidden transition."""


def is_admissible(word: str) -> bool:
    if not word or any(symbol not in FOLLOWERS for symbol in word):
        return False
    return all(b in FOLLOWERS[a] for a, b in zip(word, word[1:]))


def check_word(word: str) -> str:
    if not is_admissible(word):
        raise InadmissibleWordError(f"inadmissible word {word!r}")
    return word


@dataclass(frozen=True)
class Cylinder:
    word: str
    low: FieldElement
    high: FieldElement

    @property
    def depth(self) -> int:
        return len(self.word)

    @property
    def length(self) -> FieldElement:
        return self.high - self.low

    @property
    def last(self) -> str:
        return self.word[-1]

    def contains(self, x) -> bool:
        return not _below(x, self.low) and _below(x, self.high)

    def children(self) -> list["Cylinder"]:
        return [cylinder_of(self.word + s) for s in FOLLOWERS[self.last]]

    def __str__(self) -> str:
        return f"C[{self.word}] = [{self.low}, {self.high})"


def _split_point(low: FieldElement, high: FieldElement) -> FieldElement:
    return low + (high - low) * INV_PHI


@lru_cache(maxsize=1 << 18)
def cylinder_of(word: str) -> Cylinder:
    """Exact interval of an admissible word, by forward refinement."""
    check_word(word)
    if len(word) == 1:
        low, high = PARTITION[word]
        return Cylinder(word, low, high)
    parent = cylinder_of(word[:-1])
    if parent.last == "3":
        # S^(n-1) maps the parent onto J3, and S(J3) = J2: a single child.
        return Cylinder(word, parent.low, parent.high)
    cut = _split_point(parent.low, parent.high)
    if word[-1] == "1":
        return Cylinder(word, parent.low, cut)
    return Cylinder(word, cut, parent.high)


@lru_cache(maxsize=64)
def enumerate_words(n: int) -> tuple[str, ...]:
    """All admissible words of length n, listed left to right."""
    if n < 1:
        raise ValueError("word length must be at least 1")
    if n == 1:
        return ORDER
    return tuple(w + s for w in enumerate_words(n - 1) for s in FOLLOWERS[w[-1]])


def word_count(n: int) -> int:
    """#Sigma_A(n) without listing the words (3, 5, 8, 13, ...)."""
    if n < 1:
        raise ValueError("word length must be at least 1")
    ending_open, ending_three = 2, 1
    for _ in range(n - 1):
        ending_open, ending_three = ending_open + ending_three, ending_open
    return ending_open + ending_three


def precede(w: str, z: str) -> bool:
    """Strict cylinder order: C_w lies left of C_z."""
    check_word(w)
    check_word(z)
    for a, b in zip(w, z):
        if a != b:
            return RANK[a] < RANK[b]
    return False


# -- point location ------------------------------------------------------

def _below(x, e: FieldElement) -> bool:
    if isinstance(x, (FieldElement, int, Fraction)):
        return FieldElement.coerce(x) < e
    value = getattr(x, "value", x)
    return value < approximate(e, SPLIT_PRECISION)


def _at_most(x, e: FieldElement) -> bool:
    if isinstance(x, (FieldElement, int, Fraction)):
        return FieldElement.coerce(x) <= e
    value = getattr(x, "value", x)
    return value <= approximate(e, SPLIT_PRECISION)


def _check_unit(x) -> None:
    if _below(x, ZERO) or not _at_most(x, ONE):
        raise ValueError(f"point {x} outside [0, 1]")


def _descend(x, n: int, closed_right: bool) -> list[Cylinder]:
    less = _at_most if closed_right else _below
    first = "1" if less(x, INV_PHI2) else "3" if less(x, INV_PHI) else "2"
    chain = [cylinder_of(first)]
    for _ in range(1, n):
        parent = chain[-1]
        if parent.last == "3":
            chain.append(cylinder_of(parent.word + "2"))
            continue
        cut = _split_point(parent.low, parent.high)
        symbol = "1" if less(x, cut) else "3"
        chain.append(cylinder_of(parent.word + symbol))
    return chain


def cylinder_chain(x, n: int) -> list[Cylinder]:
    """The cylinders C_{x|1}, ..., C_{x|n} containing x (x in [0, 1))."""
    if n < 1:
        raise ValueError("depth must be at least 1")
    _check_unit(x)
    if not _below(x, ONE):
        raise ValueError("the point 1 lies in no cylinder; use 0")
    return _descend(x, n, closed_right=False)


def cylinder_containing(x, n: int) -> Cylinder:
    return cylinder_chain(x, n)[-1]


def adjacent_cylinder(anchor, n: int, side: str = "right") -> Cylinder:
    """The depth-n cylinder touching ``anchor`` from the given side.

    ``side="right"`` returns the cylinder whose closure starts at or
    contains the anchor from the right; ``side="left"`` the one ending at it.
    """
    _check_unit(anchor)
    if side == "right":
        if not _below(anchor, ONE):
            raise ValueError("nothing lies right of 1")
        return _descend(anchor, n, closed_right=False)[-1]
    if side == "left":
        if _at_most(anchor, ZERO):
            raise ValueError("nothing lies left of 0")
        return _descend(anchor, n, closed_right=True)[-1]
    raise ValueError(f"side must be 'left' or 'right', not {side!r}")


def predecessor(word: str) -> str:
    """Cyclic left neighbour of ``word`` among words of the same length."""
    cylinder = cylinder_of(word)
    anchor = cylinder.low if cylinder.low != ZERO else ONE
    return adjacent_cylinder(anchor, len(word), side="left").word


def endpoints(n: int) -> list[FieldElement]:
    """Sorted distinct endpoints of the depth-n cylinders, 0 and 1 included."""
    points = [cylinder_of(w).low for w in enumerate_words(n)]
    points.append(ONE)
    return points


# -- the expanding map ---------------------------------------------------

def _constant_like(x, e: FieldElement):
    if isinstance(x, (FieldElement, int, Fraction)):
        return e
    context = getattr(x, "context", None)
    if context is not None:
        return context.mpf(approximate(e, context.prec + 16))
    return float(e)


def shift_map(x):
    """S(x) = phi*x mod 1 on [0, 1)."""
    _check_unit(x)
    phi = _constant_like(x, PHI)
    if _below(x, INV_PHI):
        return x * phi
    return x * phi - 1


def inverse_branches(y) -> tuple:
    """Preimages of y under S: the left branch and, for y < 1/phi, the right one."""
    _check_unit(y)
    phi = _constant_like(y, PHI)
    left = y / phi
    if _below(y, INV_PHI):
        return left, (y + 1) / phi
    return (left,)
