# density/martingale.py
"""
Radon-Nikodym densities between the perturbed and the unperturbed stages.

z_t(x) = H'_{eps,N_t}(x) / H'_{0,N_t}(x) compares the construction of a
schedule with the one whose collars are all zero. Its cylinder version on
the depth-N_t cylinders,

    z_t(w) = m(H_{eps,N_t}(C_w)) / m(H_{0,N_t}(C_w)),

is measurable for the filtration of the depth-N_t cylinders. Since the
zero-collar images carry exactly the mu+ masses, these values form a
mu+-martingale and sum to one against mu+.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable

from anosov2d.fibered import eval_K
from homeo1d.construction import get_construction
from numerics.backends import Backend, FloatBackend
from numerics.field import FieldElement
from schedule.engine import Schedule
from symbolic.shift import check_word, cylinder_containing, cylinder_of, enumerate_words, word_count


logger = logging.getLogger(__name__)

MAX_CYLINDERS = 1 << 16


def _backend(backend: Backend | None) -> Backend:
    return backend or FloatBackend()


def substitution_schedule(schedule: Schedule, k: int) -> Schedule:
    """The schedule keeping eps_1..eps_k and zeroing every later collar."""
    if not 0 <= k <= schedule.T:
        raise ValueError(f"substitution index {k} outside 0..{schedule.T}")
    return schedule.with_epsilons([
        stage.epsilon if stage.t <= k else 0 for stage in schedule.stages
    ])


def _check_point(schedule: Schedule, t: int, x, backend: Backend) -> None:
    depth = schedule.N(t) + 1
    cylinder = cylinder_containing(x, depth)
    low = cylinder.low if isinstance(x, FieldElement) else backend.lift(cylinder.low)
    if x == low:
        raise ValueError(f"{x} is an endpoint of a depth-{depth} cylinder")


def _words(length: int, prefix: str = "") -> list[str]:
    if word_count(length) > MAX_CYLINDERS:
        raise ValueError(f"{word_count(length)} cylinders at depth {length} exceed {MAX_CYLINDERS}")
    return [w for w in enumerate_words(length) if w.startswith(prefix)]


@dataclass(frozen=True)
class DensityStage:
    """z_t for one schedule and block t."""

    schedule: Schedule
    t: int
    backend: Backend = field(default_factory=FloatBackend)

    def __post_init__(self):
        self.schedule.stage(self.t)

    @property
    def depth(self) -> int:
        return self.schedule.N(self.t)

    def _derivative(self, schedule: Schedule, x):
        return get_construction(schedule, self.backend).eval_H(self.depth, x)[1]

    def evaluate(self, x):
        """Direct ratio H'_{eps,N_t}(x) / H'_{0,N_t}(x)."""
        _check_point(self.schedule, self.t, x, self.backend)
        return self._derivative(self.schedule, x) / self._derivative(self.schedule.zero_epsilon(), x)

    def telescoping(self, x) -> tuple:
        """(product, factors) of H'_{d(k)}(x) / H'_{d(k-1)}(x) over k = 1..t."""
        _check_point(self.schedule, self.t, x, self.backend)
        previous = self._derivative(substitution_schedule(self.schedule, 0), x)
        product = self.backend.lift(1)
        factors = []
        for k in range(1, self.t + 1):
            current = self._derivative(substitution_schedule(self.schedule, k), x)
            factor = current / previous
            factors.append(factor)
            product = product * factor
            previous = current
        return product, factors

    def cylinder_value(self, word: str):
        check_word(word)
        if len(word) != self.depth:
            raise ValueError(f"word {word} does not have length N_{self.t} = {self.depth}")
        perturbed = get_construction(self.schedule, self.backend)
        reference = get_construction(self.schedule.zero_epsilon(), self.backend)
        cylinder = cylinder_of(word)
        low, high = perturbed.image(cylinder)
        ref_low, ref_high = reference.image(cylinder)
        return (high - low) / (ref_high - ref_low)

    def reference_mass(self, word: str):
        """mu+(C_w), read off the zero-collar construction."""
        low, high = get_construction(self.schedule.zero_epsilon(), self.backend).image(cylinder_of(word))
        return high - low


def z_eval(schedule: Schedule, t: int, x, backend: Backend | None = None):
    return DensityStage(schedule, t, _backend(backend)).evaluate(x)


def z_telescoping(schedule: Schedule, t: int, x, backend: Backend | None = None) -> tuple:
    return DensityStage(schedule, t, _backend(backend)).telescoping(x)


def cylinder_density(schedule: Schedule, t: int, word: str, backend: Backend | None = None):
    return DensityStage(schedule, t, _backend(backend)).cylinder_value(word)


def conditional_average(schedule: Schedule, t: int, word: str, s: int, backend: Backend | None = None):
    """E_{mu+}[z_s | C_w] for a depth-N_t word w and s >= t."""
    if s < t:
        raise ValueError("the averaged density must come from a later block")
    backend = _backend(backend)
    outer = DensityStage(schedule, s, backend)
    inner = DensityStage(schedule, t, backend)
    if len(word) != inner.depth:
        raise ValueError(f"word {word} does not have length N_{t} = {inner.depth}")
    total = backend.lift(0)
    for v in _words(outer.depth, word):
        total = total + outer.reference_mass(v) * outer.cylinder_value(v)
    return total / inner.reference_mass(word)


def mass_balance(schedule: Schedule, t: int, backend: Backend | None = None):
    """E_{mu+}[z_t] as an exact cylinder sum."""
    stage = DensityStage(schedule, t, _backend(backend))
    total = stage.backend.lift(0)
    for word in _words(stage.depth):
        total = total + stage.reference_mass(word) * stage.cylinder_value(word)
    return total


def density_spread(schedule: Schedule, t: int, backend: Backend | None = None) -> tuple[float, float]:
    """(min, max) of the cylinder values of z_t."""
    stage = DensityStage(schedule, t, _backend(backend))
    values = [float(stage.cylinder_value(word)) for word in _words(stage.depth)]
    return min(values), max(values)


@dataclass(frozen=True)
class TailRow:
    level: float
    t: int
    tail: float


@dataclass(frozen=True)
class UIReport:
    rows: tuple[TailRow, ...]

    @property
    def levels(self) -> list[float]:
        return sorted({row.level for row in self.rows})

    def sup_tail(self, level: float) -> float:
        return max(row.tail for row in self.rows if row.level == level)

    @property
    def nonincreasing(self) -> bool:
        sups = [self.sup_tail(level) for level in self.levels]
        return all(b <= a for a, b in zip(sups, sups[1:]))

    def to_dict(self) -> dict:
        return {
            "rows": [{"M": row.level, "t": row.t, "tail": row.tail} for row in self.rows],
            "sup": {str(level): self.sup_tail(level) for level in self.levels},
            "nonincreasing": self.nonincreasing,
        }


def ui_diagnostic(schedule: Schedule, t_max: int, levels: Iterable, backend: Backend | None = None) -> UIReport:
    """E_{mu+}[z_t 1{z_t > M}] from cylinder sums for t <= t_max and every M.

    A trend, not a proof of uniform integrability.
    """
    if not 1 <= t_max <= schedule.T:
        raise ValueError(f"t_max {t_max} outside 1..{schedule.T}")
    backend = _backend(backend)
    levels = sorted(float(level) for level in levels)
    rows = []
    for t in range(1, t_max + 1):
        stage = DensityStage(schedule, t, backend)
        masses = []
        for word in _words(stage.depth):
            value = float(stage.cylinder_value(word))
            masses.append((value, float(stage.reference_mass(word)) * value))
        for level in levels:
            rows.append(TailRow(level, t, sum(weighted for value, weighted in masses if value > level)))
    report = UIReport(tuple(rows))
    logger.info("ui_diagnostic t_max=%s levels=%s nonincreasing=%s", t_max, len(levels), report.nonincreasing)
    return report


def stage_density_2d(schedule: Schedule, t: int, x, y, backend: Backend | None = None):
    """z_{t,y}(x) = dK_{N_t,y}/dx (x) / H'_{0,N_t}(x) for the fibered construction."""
    backend = _backend(backend)
    depth = schedule.N(t)
    _, dx, _ = eval_K(schedule, depth, y, x, backend)
    reference = get_construction(schedule.zero_epsilon(), backend).eval_H(depth, x)[1]
    return dx / reference
