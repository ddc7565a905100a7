# homeo1d/construction.py
"""
The staged circle homeomorphisms H_n = h_n o ... o h_1 of a schedule.

Stage kinds follow the block layout: psi-stages 1 and M_{t-1} < n <= N_t,
identity stages N_t < n < M_t, and the correction at n = M_t.

A psi-stage rescales psi onto every interval H_{n-1}(C_w) with |w| = n and
w_n = 1. The correction at M is defined on the level of H: on C_w the
derivative H_M' follows G'_(alpha(w-), alpha(w)) across a left collar of
width eps |C_w| and equals alpha(w) = |H_{M-1}(C_w)| / |C_w| beyond it.

Every stage fixes the images of the cylinders it acts on, so a cylinder
endpoint e first appearing at depth d satisfies H_k(e) = H_{d-1}(e) for all
k >= d - 1. Those values are memoized; evaluating H_n at a point is a
single pass through the stages along the point's cylinder chain.
"""
from __future__ import annotations

import logging
import threading
from dataclasses import dataclass
from functools import lru_cache

from numerics.backends import Backend, ExactBackend, FloatBackend, PrecisionBudgetError
from numerics.field import INV_PHI, ONE, PHI, ZERO, FieldElement
from schedule.engine import Schedule
from symbolic.shift import Cylinder, cylinder_chain, cylinder_of, enumerate_words, predecessor, word_count

from .profiles import Profile


logger = logging.getLogger(__name__)

PSI_STAGE = "psi"
IDENTITY = "identity"
CORRECTION = "correction"

INVERSE_ITERATIONS = 200


class ScheduleViolationError(ValueError):
    """A collar does not fit inside the cylinders it is meant for."""


def stage_kind(schedule: Schedule, n: int) -> str:
    t = schedule.block_of(n)
    stage = schedule.stage(t)
    if n == stage.M:
        return CORRECTION
    if n == 1 or schedule.M(t - 1) < n <= stage.N:
        return PSI_STAGE
    return IDENTITY


def correction_epsilon(schedule: Schedule, t: int):
    """The collar of the correction closing block t: eps_{t+1}, or eps_T last."""
    return schedule.stage(min(t + 1, schedule.T)).epsilon


@dataclass(frozen=True)
class StageFactor:
    n: int
    kind: str
    factor: object


def first_depth(e: FieldElement) -> int:
    """Depth at which e first appears as a cylinder endpoint."""
    cylinder = cylinder_chain(e, 1)[0]
    depth = 1
    while cylinder.low != e:
        if cylinder.last == "3":
            cylinder = cylinder_of(cylinder.word + "2")
        else:
            left = cylinder_of(cylinder.word + "1")
            cylinder = left if e < left.high else cylinder_of(cylinder.word + "3")
        depth += 1
    return depth


class Construction:
    """Evaluation engine for one schedule and one arithmetic backend."""

    def __init__(self, schedule: Schedule, backend: Backend | None = None):
        self.schedule = schedule
        self.backend = backend or FloatBackend()
        self.exact = self.backend.exact
        self._lock = threading.RLock()
        self._values: dict = {}
        self._alphas: dict = {}
        self._psi = {}
        self._corrections = []
        for stage in schedule.stages:
            try:
                self._psi[stage.t] = Profile.psi(stage.epsilon, stage.lam, self.backend)
            except ValueError as exc:
                raise ScheduleViolationError(f"block {stage.t}: {exc}") from exc
            epsilon = correction_epsilon(schedule, stage.t)
            if not 0 <= epsilon < 1:
                raise ScheduleViolationError(f"correction collar {epsilon} at M_{stage.t} must lie in [0, 1)")
            self._corrections.append(stage.M)
        self.depth = schedule.depth

    def __repr__(self) -> str:
        return f"Construction(T={self.schedule.T}, depth={self.depth}, backend={self.backend!r})"

    # -- points ------------------------------------------------------------
    def lift(self, x):
        return self.backend.lift(x)

    def _check_depth(self, n: int) -> None:
        if not 0 <= n <= self.depth:
            raise ValueError(f"stage {n} outside 0..{self.depth}")

    def last_correction(self, n: int) -> int:
        last = 0
        for M in self._corrections:
            if M <= n:
                last = M
        return last

    def psi_profile(self, t: int) -> Profile:
        return self._psi[t]

    # -- memoized endpoint images -----------------------------------------
    def value_at(self, e: FieldElement):
        """H_k(e) for a cylinder endpoint e and every k >= d(e) - 1."""
        if e == ZERO or e == ONE:
            return self.lift(e)
        with self._lock:
            cached = self._values.get(e)
            if cached is not None:
                return cached
            value, _ = self._forward(e, first_depth(e) - 1)
            self._values[e] = value
            return value

    def image(self, cylinder: Cylinder) -> tuple:
        """[H_k(low), H_k(high)) for k >= depth - 1."""
        return self.value_at(cylinder.low), self.value_at(cylinder.high)

    def alpha(self, word: str):
        """|H_{M-1}(C_w)| / |C_w| for a word of correction depth M."""
        with self._lock:
            cached = self._alphas.get(word)
            if cached is not None:
                return cached
            cylinder = cylinder_of(word)
            low, high = self.image(cylinder)
            value = (high - low) / self.lift(cylinder.length)
            self._alphas[word] = value
            return value

    # -- forward evaluation ------------------------------------------------
    def _correction(self, cylinder: Cylinder, x, t: int) -> tuple:
        alpha1 = self.alpha(predecessor(cylinder.word))
        alpha2 = self.alpha(cylinder.word)
        low = self.lift(cylinder.low)
        start = self.value_at(cylinder.low)
        offset = x - low
        collar = self.lift(correction_epsilon(self.schedule, t)) * self.lift(cylinder.length)
        if collar > 0 and offset < collar:
            try:
                bridge = Profile.g_ab(alpha1, alpha2, self.backend)
            except ValueError as exc:
                raise ScheduleViolationError(f"correction at {cylinder.word}: {exc}") from exc
            value, density = bridge.evaluate(offset / collar)
            return start + collar * value, density
        return start + alpha2 * offset, alpha2

    def _forward(self, x, n: int, factors: list | None = None) -> tuple:
        """(H_n(x), H_n'(x)); x is located exactly when it is a FieldElement."""
        if n == 0:
            return self.lift(x), self.lift(1)
        chain = cylinder_chain(x, n)
        z = self.lift(x)
        dz = self.lift(1)
        start = self.last_correction(n)
        if start:
            t = self.schedule.block_of(start)
            z, dz = self._correction(chain[start - 1], z, t)
            if factors is not None:
                factors.append(StageFactor(start, CORRECTION, dz))
        for k in range(start + 1, n + 1):
            cylinder = chain[k - 1]
            if cylinder.last != "1" or stage_kind(self.schedule, k) != PSI_STAGE:
                continue
            low, high = self.image(cylinder)
            width = high - low
            relative = (z - low) / width
            if relative < 0:
                relative = relative * 0
            elif relative > 1:
                relative = relative * 0 + 1
            psi = self._psi[self.schedule.block_of(k)]
            value, density = psi.evaluate(relative)
            z = low + width * value
            dz = dz * density
            if factors is not None:
                factors.append(StageFactor(k, PSI_STAGE, density))
        return z, dz

    def eval_H(self, n: int, x) -> tuple:
        self._check_depth(n)
        if not isinstance(x, FieldElement):
            x = self.lift(x)
        return self._forward(x, n)

    def stage_factors(self, n: int, x) -> list[StageFactor]:
        """Derivative factors of the active stages at x, in stage order.

        The correction factor is H_M'(x) itself; divide by H_{M-1}'(x) for
        the stage derivative h_M'.
        """
        self._check_depth(n)
        factors: list[StageFactor] = []
        self._forward(x if isinstance(x, FieldElement) else self.lift(x), n, factors)
        return factors

    # -- inversion ---------------------------------------------------------
    def locate_image(self, y, depth: int) -> Cylinder:
        """The depth-`depth` cylinder C_w with H_{depth-1}(C_w) containing y."""
        if depth < 1:
            raise ValueError("depth must be at least 1")
        cylinder = cylinder_of("1")
        if not y < self.value_at(cylinder.high):
            third = cylinder_of("3")
            cylinder = third if y < self.value_at(third.high) else cylinder_of("2")
        for _ in range(1, depth):
            if cylinder.last == "3":
                cylinder = cylinder_of(cylinder.word + "2")
                continue
            left = cylinder_of(cylinder.word + "1")
            cylinder = left if y < self.value_at(left.high) else cylinder_of(cylinder.word + "3")
        return cylinder

    def eval_H_inverse(self, n: int, y):
        """x with H_n(x) = y: cylinder descent to depth n + 1, then a bracketed solve.

        The exact backend only returns exact preimages; one that bisection
        cannot reach raises PrecisionBudgetError.
        """
        self._check_depth(n)
        y = y if isinstance(y, FieldElement) and self.exact else self.lift(y)
        if y < 0 or not y < 1:
            raise ValueError(f"point {y} outside [0, 1)")
        if n == 0:
            return y
        cylinder = self.locate_image(y, n + 1)
        lo, hi = self.lift(cylinder.low), self.lift(cylinder.high)
        v_lo, v_hi = self.image(cylinder)
        if y == v_lo:
            return cylinder.low if self.exact else lo
        # H_n is affine on C_w off the collars: interpolation is exact there
        x = lo + (y - v_lo) / (v_hi - v_lo) * (hi - lo)
        if self.exact:
            return self._bisect_exact(n, y, lo, hi, x)
        return self._newton(n, y, lo, hi, x)

    def _newton(self, n: int, y, lo, hi, x):
        tolerance = self.backend.resolution() * 256
        for _ in range(INVERSE_ITERATIONS):
            value, slope = self._forward(x, n)
            gap = value - y
            if abs(gap) <= tolerance or hi - lo <= tolerance:
                return x
            if gap > 0:
                hi = x
            else:
                lo = x
            step = x - gap / slope
            x = step if lo < step < hi else (lo + hi) / 2
        return x

    def _bisect_exact(self, n: int, y, lo, hi, guess):
        value, _ = self._forward(guess, n)
        if value == y:
            return guess
        bits = self.backend.precision or 64
        for _ in range(bits):
            middle = (lo + hi) / 2
            value, _ = self._forward(middle, n)
            if value == y:
                return middle
            if value < y:
                lo = middle
            else:
                hi = middle
        raise PrecisionBudgetError(
            f"H_{n}^-1({y}) has no exact preimage within {bits} halvings of [{lo}, {hi}]; use a float backend"
        )

    # -- the conjugated expanding map --------------------------------------
    def eval_g(self, n: int, x) -> tuple:
        """g_n = H_n o S o H_n^-1 and g_n' = phi H_n'(S y) / H_n'(y)."""
        self._check_depth(n)
        y = self.eval_H_inverse(n, x)
        phi = self.lift(PHI)
        inv_phi = self.lift(INV_PHI)
        shifted = y * phi if y < inv_phi else y * phi - 1
        if n == 0:
            return shifted, phi
        _, dy = self._forward(y, n)
        value, ds = self._forward(shifted, n)
        return value, phi * ds / dy


@lru_cache(maxsize=16)
def construction_for(schedule: Schedule, backend_name: str = "float", precision: int | None = None) -> Construction:
    backend = ExactBackend() if backend_name == "exact" else FloatBackend(precision)
    return Construction(schedule, backend)


def get_construction(schedule: Schedule, backend: Backend | None = None) -> Construction:
    if backend is None:
        return construction_for(schedule)
    return construction_for(schedule, backend.name, backend.precision)


def eval_H(schedule: Schedule, n: int, x, backend: Backend | None = None) -> tuple:
    return get_construction(schedule, backend).eval_H(n, x)


def eval_H_inverse(schedule: Schedule, n: int, y, backend: Backend | None = None):
    return get_construction(schedule, backend).eval_H_inverse(n, y)


def eval_g(schedule: Schedule, n: int, x, backend: Backend | None = None) -> tuple:
    return get_construction(schedule, backend).eval_g(n, x)


def stage_factors(schedule: Schedule, n: int, x, backend: Backend | None = None) -> list[StageFactor]:
    return get_construction(schedule, backend).stage_factors(n, x)


def uniform_cauchy_gap(schedule: Schedule, n: int, grid, backend: Backend | None = None) -> float:
    """max over the grid of |H_{n+1}(x) - H_n(x)|."""
    construction = get_construction(schedule, backend)
    gap = 0.0
    for x in grid:
        after, _ = construction.eval_H(n + 1, x)
        before, _ = construction.eval_H(n, x)
        gap = max(gap, abs(float(after) - float(before)))
    return gap


def proportion_transport_defect(schedule: Schedule, n: int, word: str, backend: Backend | None = None) -> float:
    """Relative offset of H_{n-1}(1/phi point of C_w) from the 1/phi point of its image."""
    construction = get_construction(schedule, backend)
    cylinder = cylinder_of(word)
    if len(word) != n:
        raise ValueError(f"word {word} does not have length {n}")
    if cylinder.last == "3":
        raise ValueError("cylinders ending in 3 have no 1/phi point")
    split = cylinder_of(word + "1").high
    low, high = construction.image(cylinder)
    moved, _ = construction.eval_H(n - 1, split)
    reference = low + (high - low) * construction.lift(INV_PHI)
    return abs(float(moved) - float(reference)) / float(high - low)


@dataclass(frozen=True)
class HomeoStage:
    """h_n acting on the image coordinate z = H_{n-1}(x)."""

    n: int
    kind: str
    block: int
    construction: Construction

    @property
    def profile(self) -> Profile | None:
        return self.construction.psi_profile(self.block) if self.kind == PSI_STAGE else None

    def evaluate(self, z) -> tuple:
        """(h_n(z), h_n'(z))."""
        construction = self.construction
        z = construction.lift(z)
        if self.kind == IDENTITY:
            return z, construction.lift(1)
        if self.kind == CORRECTION:
            x = construction.eval_H_inverse(self.n - 1, z)
            value, slope = construction.eval_H(self.n, x)
            _, previous = construction.eval_H(self.n - 1, x)
            return value, slope / previous
        cylinder = construction.locate_image(z, self.n)
        if cylinder.last != "1":
            return z, construction.lift(1)
        low, high = construction.image(cylinder)
        value, density = self.profile.evaluate((z - low) / (high - low))
        return low + (high - low) * value, density

    def intervals(self, limit: int = 4096) -> list[tuple[str, object, object]]:
        """(w, H_{n-1}(low), H_{n-1}(high)) for the words the stage acts on."""
        if word_count(self.n) > limit:
            raise ValueError(f"stage {self.n} has {word_count(self.n)} cylinders, above the limit {limit}")
        words = enumerate_words(self.n)
        if self.kind == PSI_STAGE:
            words = [w for w in words if w[-1] == "1"]
        elif self.kind == IDENTITY:
            words = []
        return [(w, *self.construction.image(cylinder_of(w))) for w in words]


def build_stage(schedule: Schedule, n: int, backend: Backend | None = None) -> HomeoStage:
    construction = get_construction(schedule, backend)
    if not 1 <= n <= construction.depth:
        raise ValueError(f"stage {n} outside 1..{construction.depth}")
    return HomeoStage(n, stage_kind(schedule, n), schedule.block_of(n), construction)
