# anosov2d/manifold.py
"""
The rectangle model M of the two-torus and the hyperbolic map f~ on it.

    M = [0, 1/phi] x [BOTTOM, TOP]  U  [1/phi, 1] x [BOTTOM, MID]

with TOP = phi^2/(phi+2), MID = 1/(phi+2) and BOTTOM = -phi/(phi+2). The
boundary is glued by five orientation preserving translations; the glued
space is the torus and f~ becomes the golden toral automorphism on it.

Near the horizontal edges (within 1/phi^10) every point is attached to a
coupling segment V_j: the edge piece carrying C_{w(j)} or C_{w~(j)}.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
from django.conf import settings

from numerics.backends import NATIVE_FLOAT_BITS, Backend, ExactBackend, FloatBackend
from numerics.field import INV_PHI, INV_PHI2, INV_PHI3, ONE, PHI, ZERO, FieldElement
from symbolic.coupling import BOTTOM, MID, TOP, coupling_segment, lower_word, upper_word
from symbolic.shift import adjacent_cylinder, cylinder_containing, cylinder_of


U_WIDTH = INV_PHI ** 10

R1 = "R1"
R2 = "R2"
R3 = "R3"
BOUNDARY = "boundary"

VERTICAL = "vertical"
HORIZONTAL = "horizontal"


def native_backend() -> FloatBackend:
    return FloatBackend(NATIVE_FLOAT_BITS)


def backend_for(*values) -> Backend:
    """Exact arithmetic when every coordinate is exact, native floats otherwise."""
    if all(isinstance(v, (FieldElement, int, Fraction)) for v in values):
        return ExactBackend()
    return native_backend()


@dataclass(frozen=True)
class Constants:
    """The model's constants lifted into one backend."""

    zero: object
    one: object
    phi: object
    inv_phi: object
    inv_phi2: object
    inv_phi3: object
    top: object
    mid: object
    bottom: object
    width: object
    phi20: object
    phi30: object


@lru_cache(maxsize=16)
def _constants(name: str, precision: int | None) -> Constants:
    backend = ExactBackend() if name == "exact" else FloatBackend(precision)
    lift = backend.lift
    return Constants(
        zero=lift(ZERO), one=lift(ONE), phi=lift(PHI),
        inv_phi=lift(INV_PHI), inv_phi2=lift(INV_PHI2), inv_phi3=lift(INV_PHI3),
        top=lift(TOP), mid=lift(MID), bottom=lift(BOTTOM), width=lift(U_WIDTH),
        phi20=lift(PHI ** 20), phi30=lift(PHI ** 30),
    )


def constants(backend: Backend) -> Constants:
    return _constants(backend.name, backend.precision)


def lift_value(value, backend: Backend):
    if isinstance(value, FieldElement) and backend.exact:
        return value
    return backend.lift(value)


# -- points ----------------------------------------------------------------

def in_manifold(x, y, backend: Backend | None = None) -> bool:
    backend = backend or backend_for(x, y)
    c = constants(backend)
    x, y = lift_value(x, backend), lift_value(y, backend)
    if x < c.zero or x > c.one or y < c.bottom or y > c.top:
        return False
    return not (x > c.inv_phi and y > c.mid)


def region_of(x, y, backend: Backend | None = None) -> str:
    """R1, R3 or R2 by the column J_i holding x; ``boundary`` on the edges of M."""
    backend = backend or backend_for(x, y)
    c = constants(backend)
    x, y = lift_value(x, backend), lift_value(y, backend)
    if not in_manifold(x, y, backend):
        raise ValueError(f"({x}, {y}) lies outside M")
    if x == c.zero or x == c.one or y == c.bottom:
        return BOUNDARY
    if x <= c.inv_phi and y == c.top:
        return BOUNDARY
    if x >= c.inv_phi and y == c.mid:
        return BOUNDARY
    if x == c.inv_phi and y > c.mid:
        return BOUNDARY
    if x < c.inv_phi2:
        return R1
    if x < c.inv_phi:
        return R3
    return R2


@dataclass(frozen=True)
class ManifoldPoint:
    x: object
    y: object
    region: str

    @classmethod
    def at(cls, x, y, backend: Backend | None = None) -> "ManifoldPoint":
        backend = backend or backend_for(x, y)
        x, y = lift_value(x, backend), lift_value(y, backend)
        return cls(x, y, region_of(x, y, backend))

    def as_tuple(self) -> tuple:
        return self.x, self.y

    def __iter__(self):
        return iter((self.x, self.y))


# -- gluing ------------------------------------------------------------------

@dataclass(frozen=True)
class Edge:
    """A boundary segment {fixed} x [low, high] or [low, high] x {fixed}."""

    axis: str
    fixed: FieldElement
    low: FieldElement
    high: FieldElement

    def carries(self, x, y, backend: Backend) -> bool:
        fixed, moving = (x, y) if self.axis == VERTICAL else (y, x)
        return (fixed == lift_value(self.fixed, backend)
                and lift_value(self.low, backend) <= moving <= lift_value(self.high, backend))


@dataclass(frozen=True)
class Identification:
    index: int
    source: Edge
    target: Edge

    @property
    def shift(self) -> FieldElement:
        return self.target.low - self.source.low

    def _move(self, x, y, origin: Edge, destination: Edge, backend: Backend) -> tuple:
        offset = lift_value(destination.low, backend) - lift_value(origin.low, backend)
        if origin.axis == VERTICAL:
            return lift_value(destination.fixed, backend), y + offset
        return x + offset, lift_value(destination.fixed, backend)

    def forward(self, x, y, backend: Backend) -> tuple:
        return self._move(x, y, self.source, self.target, backend)

    def backward(self, x, y, backend: Backend) -> tuple:
        return self._move(x, y, self.target, self.source, backend)


GLUING_TABLE = (
    Identification(1, Edge(VERTICAL, ZERO, ZERO, TOP), Edge(VERTICAL, ONE, BOTTOM, MID)),
    Identification(2, Edge(VERTICAL, ZERO, BOTTOM, ZERO), Edge(VERTICAL, INV_PHI, MID, TOP)),
    Identification(3, Edge(HORIZONTAL, TOP, ZERO, INV_PHI3), Edge(HORIZONTAL, BOTTOM, INV_PHI2, INV_PHI)),
    Identification(4, Edge(HORIZONTAL, TOP, INV_PHI3, INV_PHI), Edge(HORIZONTAL, BOTTOM, INV_PHI, ONE)),
    # lengths matched: [0, 1/phi^2] on the bottom edge against [1/phi, 1] on the middle one
    Identification(5, Edge(HORIZONTAL, BOTTOM, ZERO, INV_PHI2), Edge(HORIZONTAL, MID, INV_PHI, ONE)),
)


def gluing_partners(x, y, backend: Backend | None = None) -> list[tuple]:
    """Every point identified with (x, y) by a single gluing, in table order."""
    backend = backend or backend_for(x, y)
    x, y = lift_value(x, backend), lift_value(y, backend)
    partners = []
    for identification in GLUING_TABLE:
        if identification.source.carries(x, y, backend):
            partners.append(identification.forward(x, y, backend))
        if identification.target.carries(x, y, backend):
            partners.append(identification.backward(x, y, backend))
    return partners


def gluing_partner(x, y, backend: Backend | None = None) -> tuple | None:
    partners = gluing_partners(x, y, backend)
    return partners[0] if partners else None


def normalize(x, y, backend: Backend | None = None) -> tuple:
    """Representative with x < 1: points on {1} x [BOTTOM, MID] move to {0}."""
    backend = backend or backend_for(x, y)
    c = constants(backend)
    x, y = lift_value(x, backend), lift_value(y, backend)
    if x == c.one:
        return GLUING_TABLE[0].backward(x, y, backend)
    return x, y


# -- the hyperbolic map --------------------------------------------------------

def f_tilde(x, y, backend: Backend | None = None) -> tuple:
    """f~(x, y) = (phi x, -y/phi) left of 1/phi, (phi x - 1, -(y - TOP)/phi) right of it."""
    backend = backend or backend_for(x, y)
    c = constants(backend)
    if not in_manifold(x, y, backend):
        raise ValueError(f"({x}, {y}) lies outside M")
    x, y = normalize(x, y, backend)
    if x < c.inv_phi:
        return x * c.phi, -y / c.phi
    return x * c.phi - 1, (c.top - y) / c.phi


def f_tilde_inv(x, y, backend: Backend | None = None) -> tuple:
    backend = backend or backend_for(x, y)
    c = constants(backend)
    if not in_manifold(x, y, backend):
        raise ValueError(f"({x}, {y}) lies outside M")
    x, y = normalize(x, y, backend)
    if y <= c.mid:
        return x / c.phi, -y * c.phi
    return (x + 1) / c.phi, c.top - y * c.phi


def f_tilde_jacobian() -> np.ndarray:
    phi = float(PHI)
    return np.array([[phi, 0.0], [0.0, -1.0 / phi]])


def horizontal_image(low: FieldElement, high: FieldElement, level: FieldElement) -> tuple:
    """f~ of the edge piece [low, high) x {level}, which lies on one side of 1/phi."""
    if high <= INV_PHI:
        return low * PHI, high * PHI, -level / PHI
    if low >= INV_PHI:
        return low * PHI - 1, high * PHI - 1, (TOP - level) / PHI
    raise ValueError(f"[{low}, {high}) straddles 1/phi")


def cascade_image(j: int) -> set[tuple]:
    """The two sides of f~(V_j) as (low, high, level) triples."""
    segment = coupling_segment(j)
    return {horizontal_image(*side.interval, side.level) for side in segment.sides()}


def segment_sides(j: int) -> set[tuple]:
    return {(*side.interval, side.level) for side in coupling_segment(j).sides()}


def coupling_cascade_holds(j: int) -> bool:
    """f~(V_j) = V_{j-1}; f~(V_1) is the interior segment [0, 1/phi) x {MID}."""
    if j == 1:
        return cascade_image(1) == {(ZERO, INV_PHI, MID)}
    return cascade_image(j) == segment_sides(j - 1)


# -- distance to the horizontal edges -----------------------------------------

@dataclass(frozen=True)
class BoundaryGeometry:
    """u, the nearest horizontal level, U membership and the coupling data."""

    u: object
    level: FieldElement
    in_u: bool
    j: int | None = None
    word: str | None = None

    @property
    def level_name(self) -> str:
        return {TOP: "top", MID: "mid", BOTTOM: "bottom"}[self.level]

    def to_dict(self) -> dict:
        return {
            "u": float(self.u), "level": self.level_name, "in_U": self.in_u,
            "j": self.j, "word": self.word,
        }


def _search_limit(limit: int | None) -> int:
    return limit or getattr(settings, "GOLDEN_COUPLING_SEARCH_LIMIT", 64)


def _fallback(x, limit: int, closed_right: bool = False) -> tuple[int, str]:
    if closed_right:
        return limit, adjacent_cylinder(x, limit, side="left").word
    return limit, cylinder_containing(x, limit).word


def coupling_index(x, level: FieldElement, limit: int | None = None) -> tuple[int, str]:
    """(j, word) with (x, level) on the side of V_j carrying C_word.

    Past the search limit the coupling segments have shrunk below the
    depth-``limit`` cylinders; the limit is returned with the cylinder of x.
    """
    limit = _search_limit(limit)
    if level == MID:
        return 1, lower_word(1)
    if level == BOTTOM and cylinder_of("1").contains(x):
        return 1, upper_word(1)
    words = upper_word if level == TOP else lower_word
    if level == TOP and not cylinder_of("1").contains(x) and not cylinder_of("3").contains(x):
        # only the corner (1/phi, TOP) is left; it is reached from the left
        return _fallback(x, limit, closed_right=True)
    for j in range(2, limit):
        word = words(j)
        if cylinder_of(word).contains(x):
            return j, word
    return _fallback(x, limit)


def boundary_geometry(x, y, backend: Backend | None = None, limit: int | None = None) -> BoundaryGeometry:
    """u(x, y), the nearest level y(x, y) and, off U, the coupling index j(x, y)."""
    backend = backend or backend_for(x, y)
    c = constants(backend)
    x, y = lift_value(x, backend), lift_value(y, backend)
    if not in_manifold(x, y, backend):
        raise ValueError(f"({x}, {y}) lies outside M")
    x, y = normalize(x, y, backend)
    upper, upper_level = (c.top, TOP) if x <= c.inv_phi else (c.mid, MID)
    above, below = upper - y, y - c.bottom
    u, level = (above, upper_level) if above <= below else (below, BOTTOM)
    if u >= c.width:
        return BoundaryGeometry(u, level, True)
    j, word = coupling_index(x, level, limit)
    return BoundaryGeometry(u, level, False, j, word)
