# anosov2d/fibered.py
"""
Fibered circle homeomorphisms K_{n,y} that agree with H_n away from the edges.

In U, at distance at least 1/phi^10 from the horizontal edges, K_{n,y} is
H_n. In the collar U^c a point (x, y) belongs to a coupling segment V_j,
and up to stage j the map blends H_n with the identity,

    q_n(x, u) = (H_n(x) - x) B(u) + x,   B(u) = 3 phi^20 u^2 - 2 phi^30 u^3,

so that K_{j,y} is the identity on the edge itself. Past j the stages of
the construction are replayed on the images K_{k-1,y}(C_w): psi-rescaling
on cylinders ending in 1 at psi-stages, and at each correction depth M the
slope alpha_y(w) = |K_{M-1,y}(C_w)| / |C_w| with a g_ab bridge across a
collar of width eps |C_w|. The bridge starts from alpha_y(w-) of the cyclic
predecessor w- among all words of length M. When w- leaves the coupling
cylinder its slope is read on the fiber of C_{w-} at the same distance u
from the edge, so at u = 1/phi^10 every fiber is H and K_{n,y} meets H_n
continuously on the boundary of U.
"""
from __future__ import annotations

import logging
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from homeo1d.construction import (
    PSI_STAGE,
    Construction,
    ScheduleViolationError,
    correction_epsilon,
    first_depth,
    get_construction,
    stage_kind,
)
from homeo1d.profiles import Profile
from numerics.backends import Backend, get_backend
from numerics.field import ONE, ZERO, FieldElement
from schedule.engine import Schedule
from symbolic.coupling import BOTTOM, MID, TOP
from symbolic.shift import Cylinder, cylinder_chain, cylinder_containing, cylinder_of, predecessor

from .manifold import (
    BoundaryGeometry,
    Constants,
    boundary_geometry,
    constants,
    coupling_index,
    lift_value,
    native_backend,
)


logger = logging.getLogger(__name__)

ROOT_TOLERANCE = 1e-15


def blend(u, c: Constants) -> tuple:
    """(B(u), B'(u)) of the cubic edge blend."""
    u2 = u * u
    return 3 * c.phi20 * u2 - 2 * c.phi30 * u2 * u, 6 * c.phi20 * u - 6 * c.phi30 * u2


def q_interp(schedule: Schedule, J: int, x, u, backend: Backend | None = None):
    """q_J(x, u) = (H_J(x) - x) B(u) + x for 0 <= u <= 1/phi^10."""
    backend = backend or native_backend()
    c = constants(backend)
    u = lift_value(u, backend)
    if u < c.zero or u > c.width:
        raise ValueError(f"u = {u} outside [0, 1/phi^10]")
    H, _ = get_construction(schedule, backend).eval_H(J, x)
    x = lift_value(x, backend)
    value, _ = blend(u, c)
    return (H - x) * value + x


def q_interp_du(schedule: Schedule, J: int, x, u, backend: Backend | None = None):
    """dq_J/du = (H_J(x) - x) B'(u)."""
    backend = backend or native_backend()
    c = constants(backend)
    u = lift_value(u, backend)
    if u < c.zero or u > c.width:
        raise ValueError(f"u = {u} outside [0, 1/phi^10]")
    H, _ = get_construction(schedule, backend).eval_H(J, x)
    _, slope = blend(u, c)
    return (H - lift_value(x, backend)) * slope


class _Fiber:
    """K_{k,y} on one coupling cylinder for one fixed y.

    Every value travels with its derivative in the blend weight B(u), so
    dK/dy is that derivative times B'(u) du/dy. Endpoint images are
    memoized per fiber: an endpoint first appearing at depth d keeps the
    value K_{max(d-1, j),y}(e) through every later stage.
    """

    def __init__(self, homeo: "FiberedHomeo", j: int, word: str, weight, level=BOTTOM):
        self.homeo = homeo
        self.construction: Construction = homeo.construction
        self.lift = homeo.construction.lift
        self.schedule = homeo.schedule
        self.j = j
        self.word = word
        self.weight = weight
        self.level = level
        self.zero = homeo.constants.zero
        self._values: dict = {}
        self._alphas: dict = {}
        self._neighbours: dict = {}

    def base(self, x) -> tuple:
        """q_j at x with its x- and weight-derivatives."""
        return self.blended(self.j, x)

    def blended(self, n: int, x) -> tuple:
        """(q_n(x), dq_n/dx, dq_n/dweight)."""
        H, dH = self.construction.eval_H(n, x)
        x = lift_value(x, self.homeo.backend)
        return (H - x) * self.weight + x, (dH - 1) * self.weight + 1, H - x

    def point(self, e: FieldElement) -> tuple:
        """(K_{d,y}(e), weight-derivative) with d = max(depth of e - 1, j)."""
        if e == ZERO or e == ONE:
            return self.lift(e), self.zero
        cached = self._values.get(e)
        if cached is None:
            value, _, dw = self.forward(e, max(first_depth(e) - 1, self.j))
            cached = self._values[e] = (value, dw)
        return cached

    def value_at(self, e: FieldElement):
        return self.point(e)[0]

    def endpoint_pair(self, e: FieldElement, n: int) -> tuple:
        """K_{n,y}(e) and its weight-derivative for an endpoint of depth at most n + 1."""
        if n > self.j:
            return self.point(e)
        if e == ONE:
            return self.lift(e), self.zero
        value, _, dw = self.blended(n, e)
        return value, dw

    def endpoint(self, e: FieldElement, n: int):
        return self.endpoint_pair(e, n)[0]

    def image(self, cylinder: Cylinder) -> tuple:
        """((low, dlow), (high, dhigh)) of K_y(C)."""
        return self.point(cylinder.low), self.point(cylinder.high)

    def alpha(self, word: str) -> tuple:
        """(alpha_y(w), d alpha_y(w) / dweight)."""
        cached = self._alphas.get(word)
        if cached is None:
            cylinder = cylinder_of(word)
            (low, dlow), (high, dhigh) = self.image(cylinder)
            length = self.lift(cylinder.length)
            cached = self._alphas[word] = ((high - low) / length, (dhigh - dlow) / length)
        return cached

    def neighbour(self, cylinder: Cylinder) -> "_Fiber":
        """The fiber carrying ``cylinder`` at the same distance from the edge."""
        if cylinder.word.startswith(self.word):
            return self
        x = (cylinder.low + cylinder.high) / 2
        level = self.level
        if level != BOTTOM:
            # the upper edge is TOP left of 1/phi and MID right of it
            level = MID if cylinder_of("2").contains(x) else TOP
        j, word = coupling_index(x, level, self.homeo.search_limit)
        key = (j, word, level)
        fiber = self._neighbours.get(key)
        if fiber is None:
            fiber = self._neighbours[key] = _Fiber(self.homeo, j, word, self.weight, level)
        return fiber

    def predecessor_alpha(self, word: str) -> tuple:
        """alpha_y(w-) for the cyclic predecessor w- of ``word``, read on its own fiber."""
        cylinder = cylinder_of(predecessor(word))
        fiber = self.neighbour(cylinder)
        if fiber is self:
            return self.alpha(cylinder.word)
        low, dlow = fiber.endpoint_pair(cylinder.low, len(word) - 1)
        high, dhigh = fiber.endpoint_pair(cylinder.high, len(word) - 1)
        length = self.lift(cylinder.length)
        return (high - low) / length, (dhigh - dlow) / length

    def correction(self, cylinder: Cylinder, x, t: int) -> tuple:
        alpha1, dalpha1 = self.predecessor_alpha(cylinder.word)
        alpha2, dalpha2 = self.alpha(cylinder.word)
        start, dstart = self.point(cylinder.low)
        offset = x - self.lift(cylinder.low)
        collar = self.lift(correction_epsilon(self.schedule, t)) * self.lift(cylinder.length)
        if collar > 0 and offset < collar:
            try:
                bridge = Profile.g_ab(alpha1, alpha2, self.homeo.backend)
            except ValueError as exc:
                raise ScheduleViolationError(f"fibered correction at {cylinder.word}: {exc}") from exc
            s = offset / collar
            value, density = bridge.evaluate(s)
            by_alpha1, by_alpha2 = bridge.slope_partials(s)
            return start + collar * value, density, dstart + collar * (by_alpha1 * dalpha1 + by_alpha2 * dalpha2)
        return start + alpha2 * offset, alpha2, dstart + dalpha2 * offset

    def forward(self, x, n: int) -> tuple:
        """(K_{n,y}(x), dK_{n,y}/dx, dK_{n,y}/dweight)."""
        if n <= self.j:
            return self.blended(n, x)
        chain = cylinder_chain(x, n)
        start = self.construction.last_correction(n)
        if start > self.j:
            z, dz, dw = self.correction(chain[start - 1], lift_value(x, self.homeo.backend), self.schedule.block_of(start))
        else:
            start = self.j
            z, dz, dw = self.base(x)
        for k in range(start + 1, n + 1):
            cylinder = chain[k - 1]
            if cylinder.last != "1" or stage_kind(self.schedule, k) != PSI_STAGE:
                continue
            (low, dlow), (high, dhigh) = self.image(cylinder)
            width, dwidth = high - low, dhigh - dlow
            relative = (z - low) / width
            clamped = relative < 0 or relative > 1
            if relative < 0:
                relative = relative * 0
            elif relative > 1:
                relative = relative * 0 + 1
            value, density = self.construction.psi_profile(self.schedule.block_of(k)).evaluate(relative)
            moved = dlow + dwidth * value
            if not clamped:
                moved = moved + density * (dw - dlow - relative * dwidth)
            z, dz, dw = low + width * value, dz * density, moved
        return z, dz, dw


class FiberedHomeo:
    """K_{n,y}(x) with both partial derivatives, for one schedule and backend."""

    def __init__(self, schedule: Schedule, backend: Backend | None = None, search_limit: int | None = None):
        self.schedule = schedule
        self.backend = backend or native_backend()
        self.construction = get_construction(schedule, self.backend)
        self.constants = constants(self.backend)
        self.search_limit = search_limit

    def __repr__(self) -> str:
        return f"FiberedHomeo(T={self.schedule.T}, backend={self.backend!r})"

    def _check(self, n: int) -> None:
        if not 0 <= n <= self.construction.depth:
            raise ValueError(f"stage {n} outside 0..{self.construction.depth}")

    def geometry(self, x, y) -> BoundaryGeometry:
        return boundary_geometry(x, y, self.backend, self.search_limit)

    def _fiber(self, geometry: BoundaryGeometry, u) -> _Fiber:
        weight, _ = blend(u, self.constants)
        return _Fiber(self, geometry.j, geometry.word, weight, geometry.level)

    def value(self, n: int, y, x):
        """K_{n,y}(x) alone."""
        self._check(n)
        if n == 0:
            return lift_value(x, self.backend)
        geometry = self.geometry(x, y)
        if geometry.in_u:
            return self.construction.eval_H(n, x)[0]
        return self._fiber(geometry, geometry.u).forward(x, n)[0]

    def evaluate(self, n: int, y, x) -> tuple:
        """(K_{n,y}(x), dK/dx, dK/dy)."""
        self._check(n)
        c = self.constants
        if n == 0:
            return lift_value(x, self.backend), c.one, c.zero
        geometry = self.geometry(x, y)
        if geometry.in_u:
            value, dx = self.construction.eval_H(n, x)
            return value, dx, c.zero
        # du/dy is +1 above the bottom edge and -1 below the upper ones
        sign = 1 if geometry.level == BOTTOM else -1
        _, slope = blend(geometry.u, c)
        value, dx, dw = self._fiber(geometry, geometry.u).forward(x, n)
        return value, dx, dw * slope * sign

    def inverse(self, n: int, y, target) -> float:
        """x with K_{n,y}(x) = target, bracketed in the partition interval of target."""
        self._check(n)
        target = float(target)
        if not 0 <= target < 1:
            raise ValueError(f"point {target} outside [0, 1)")
        if n == 0:
            return target
        cylinder = cylinder_containing(target, 1)
        low, high = float(cylinder.low), float(cylinder.high)
        if target == low:
            return low

        def gap(x: float) -> float:
            if x >= high:
                return high - target
            return float(self.value(n, y, x)) - target

        return brentq(gap, low, high, xtol=ROOT_TOLERANCE, rtol=4 * np.finfo(float).eps)

    def coupling_proximity(self, J: int, x) -> float:
        """|H_J(x) - x|, bounded by phi^-(J-3) on a coupling cylinder of index J."""
        H, _ = self.construction.eval_H(J, x)
        return abs(float(H) - float(x))


@lru_cache(maxsize=16)
def _homeo(schedule: Schedule, backend_name: str, precision: int | None) -> FiberedHomeo:
    return FiberedHomeo(schedule, get_backend(backend_name, precision))


def fibered_homeo(schedule: Schedule, backend: Backend | None = None) -> FiberedHomeo:
    backend = backend or native_backend()
    return _homeo(schedule, backend.name, backend.precision)


def eval_K(schedule: Schedule, n: int, y, x, backend: Backend | None = None) -> tuple:
    """(K_{n,y}(x), dK/dx, dK/dy)."""
    return fibered_homeo(schedule, backend).evaluate(n, y, x)


def eval_K_inverse(schedule: Schedule, n: int, y, target, backend: Backend | None = None) -> float:
    return fibered_homeo(schedule, backend).inverse(n, y, target)


def x_delta(schedule: Schedule, stage: int | None, x, y, delta) -> float:
    """The point keeping the proportion of K_{stage,y}(x) in its cylinder at y + delta.

    With ``stage`` None the coupling index j(x, y) is used. The cylinder is
    C_{[w]_1^{stage+1}} of x; both y and y + delta must lie in the same
    collar of U^c.
    """
    homeo = fibered_homeo(schedule)
    x, y, delta = float(x), float(y), float(delta)
    here = homeo.geometry(x, y)
    there = homeo.geometry(x, y + delta)
    if here.in_u or there.in_u or here.level != there.level:
        raise ValueError(f"delta {delta} leaves the collar U^c at ({x}, {y})")
    n = here.j if stage is None else stage
    if delta == 0:
        return x
    cylinder = cylinder_containing(x, n + 1)
    low, high = float(cylinder.low), float(cylinder.high)

    def proportion(geometry: BoundaryGeometry) -> Callable[[float], float]:
        fiber = homeo._fiber(geometry, geometry.u)
        start = float(fiber.endpoint(cylinder.low, n))
        width = float(fiber.endpoint(cylinder.high, n)) - start
        return lambda point: (float(fiber.forward(point, n)[0]) - start) / width

    target = proportion(here)(x)
    shifted = proportion(there)
    if target <= 0:
        return low
    if target >= 1:
        return high
    return brentq(lambda p: (shifted(p) if p < high else 1.0) - target, low, high, xtol=ROOT_TOLERANCE)
