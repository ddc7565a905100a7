# anosov2d/audits.py
"""
Numerical audits of the fibered maps and of Y_N.

* y_derivative_audit: finite-difference dK_{N,y}/dy on a grid against
  (1.6)^-j(x, y) off U, and against zero in U and on the horizontal edges.
* hyperbolicity_certificate: Y_N orbits from Sobol seeds; per step growth
  of (1, 0) under the Jacobian and under its SL(2) normalisation, the
  determinant band and the Lyapunov exponents.
* proximity_audit: |H_J(x) - x| <= phi^-(J-3) on coupling cylinders.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from django.conf import settings
from scipy.stats import qmc

from numerics.field import PHI
from schedule.engine import BAND_HIGH, BAND_LOW, Schedule
from symbolic.coupling import lower_word, upper_word
from symbolic.shift import cylinder_of

from .diffeo import AnosovMap, lyapunov_exponents
from .fibered import fibered_homeo
from .manifold import constants, coupling_index, in_manifold, native_backend


logger = logging.getLogger(__name__)

Y_DECAY = 1.6
NORMALIZED_GROWTH = 1.52
GROWTH_MARGIN = 0.01
DET_SLACK = 1e-9
AUDIT_STEP = 1e-7


# -- y-derivatives ----------------------------------------------------------------

@dataclass(frozen=True)
class DerivativeRow:
    x: float
    y: float
    u: float
    j: int | None
    dy: float
    bound: float
    passed: bool

    def to_row(self) -> list:
        return [self.x, self.y, self.u, "" if self.j is None else self.j, self.dy, self.bound, self.passed]


@dataclass(frozen=True)
class DerivativeAudit:
    N: int
    step: float
    rows: tuple[DerivativeRow, ...]

    header = ("x", "y", "u", "j", "dy", "bound", "passed")

    @property
    def passed(self) -> bool:
        return all(row.passed for row in self.rows)

    @property
    def worst_margin(self) -> float:
        return min((row.bound - abs(row.dy) for row in self.rows), default=0.0)

    def to_dict(self) -> dict:
        return {
            "N": self.N, "step": self.step, "points": len(self.rows),
            "passed": self.passed, "worst_margin": self.worst_margin,
            "failures": [row.to_row() for row in self.rows if not row.passed],
        }


def _dy_fd(homeo, N: int, x: float, y: float, step: float) -> float:
    """Central difference, or the second-order one-sided stencil on the edges of M."""
    backend = native_backend()
    above_ok = in_manifold(x, y + step, backend)
    below_ok = in_manifold(x, y - step, backend)
    if above_ok and below_ok:
        return (float(homeo.value(N, y + step, x)) - float(homeo.value(N, y - step, x))) / (2 * step)
    sign = 1.0 if above_ok else -1.0
    values = [float(homeo.value(N, y + sign * k * step, x)) for k in range(3)]
    return sign * (-3 * values[0] + 4 * values[1] - values[2]) / (2 * step)


def y_derivative_audit(schedule: Schedule, N: int, grid, step: float = AUDIT_STEP) -> DerivativeAudit:
    """dK_{N,y}(x)/dy by finite differences at every (x, y) of the grid."""
    homeo = fibered_homeo(schedule, native_backend())
    width = float(constants(native_backend()).width)
    tolerance = 10 * step
    rows = []
    for x, y in grid:
        x, y = float(x), float(y)
        geometry = homeo.geometry(x, y)
        dy = _dy_fd(homeo, N, x, y, step)
        u = float(geometry.u)
        if geometry.in_u and u - step >= width:
            bound = tolerance
        elif u == 0:
            bound = tolerance
        else:
            j = geometry.j if geometry.j is not None else coupling_index(x, geometry.level)[0]
            bound = Y_DECAY ** -j + tolerance
        rows.append(DerivativeRow(x, y, u, geometry.j, dy, bound, abs(dy) <= bound))
    audit = DerivativeAudit(N, step, tuple(rows))
    logger.info("y_derivative_audit N=%s points=%s passed=%s", N, len(rows), audit.passed)
    return audit


# -- orbit seeds ----------------------------------------------------------------

def sobol_seeds(count: int, seed: int | None = None, margin: float = 1e-3) -> list[tuple[float, float]]:
    """Scrambled Sobol points mapped into M, ``margin`` away from its edges."""
    if count < 1:
        raise ValueError("need at least one seed")
    if seed is None:
        seed = getattr(settings, "GOLDEN_SEED", 0)
    c = constants(native_backend())
    sampler = qmc.Sobol(d=2, scramble=True, seed=seed)
    unit = sampler.random_base2(m=max(0, math.ceil(math.log2(count))))[:count]
    points = []
    for a, b in unit:
        x = margin + (1 - 2 * margin) * float(a)
        upper = c.top if x <= c.inv_phi else c.mid
        y = c.bottom + margin + (upper - c.bottom - 2 * margin) * float(b)
        points.append((x, y))
    return points


# -- hyperbolicity ----------------------------------------------------------------

@dataclass(frozen=True)
class OrbitSummary:
    seed: tuple[float, float]
    steps: int
    growth: float
    normalized_growth: float
    det_low: float
    det_high: float
    exponents: tuple[float, float]

    def to_dict(self) -> dict:
        return {
            "seed": list(self.seed), "steps": self.steps, "growth": self.growth,
            "normalized_growth": self.normalized_growth,
            "det": [self.det_low, self.det_high], "exponents": list(self.exponents),
        }


def orbit_summary(schedule: Schedule, N: int, seed: tuple[float, float], horizon: int) -> OrbitSummary:
    """Per step growth rates along one orbit; raises ValueError when it leaves the evaluable set."""
    images = AnosovMap(schedule, N).orbit(*seed, horizon)
    expansions = np.array([image.expansion for image in images])
    determinants = np.abs([image.determinant for image in images])
    log_growth = np.log(expansions).sum()
    # the SL(2) normalisation divides by sqrt|det|
    log_normalized = log_growth - 0.5 * np.log(determinants).sum()
    exponents = lyapunov_exponents(image.jacobian for image in images)
    return OrbitSummary(
        seed=tuple(seed), steps=horizon,
        growth=float(np.exp(log_growth / horizon)),
        normalized_growth=float(np.exp(log_normalized / horizon)),
        det_low=float(determinants.min()), det_high=float(determinants.max()),
        exponents=(float(exponents[0]), float(exponents[1])),
    )


@dataclass
class HyperbolicityReport:
    N: int
    horizon: int
    orbits: list[OrbitSummary] = field(default_factory=list)
    resampled: list[tuple[float, float]] = field(default_factory=list)

    @property
    def min_growth(self) -> float:
        return min(orbit.growth for orbit in self.orbits)

    @property
    def min_normalized_growth(self) -> float:
        return min(orbit.normalized_growth for orbit in self.orbits)

    @property
    def det_range(self) -> tuple[float, float]:
        return min(o.det_low for o in self.orbits), max(o.det_high for o in self.orbits)

    @property
    def exponents(self) -> tuple[float, float]:
        values = np.array([orbit.exponents for orbit in self.orbits])
        return float(values[:, 0].mean()), float(values[:, 1].mean())

    @property
    def det_band(self) -> tuple[float, float]:
        phi = float(PHI)
        return BAND_LOW / phi - DET_SLACK, BAND_HIGH / phi + DET_SLACK

    @property
    def passed(self) -> bool:
        if not self.orbits:
            return False
        low, high = self.det_range
        band_low, band_high = self.det_band
        return (self.min_growth >= BAND_LOW - DET_SLACK
                and self.min_normalized_growth >= NORMALIZED_GROWTH - GROWTH_MARGIN
                and band_low <= low and high <= band_high)

    def to_dict(self) -> dict:
        summary = {"N": self.N, "horizon": self.horizon, "orbits": len(self.orbits),
                   "resampled": [list(seed) for seed in self.resampled], "passed": self.passed}
        if self.orbits:
            summary.update({
                "min_growth": self.min_growth,
                "min_normalized_growth": self.min_normalized_growth,
                "det_range": list(self.det_range),
                "det_band": list(self.det_band),
                "exponents": list(self.exponents),
                "per_orbit": [orbit.to_dict() for orbit in self.orbits],
            })
        return summary


def hyperbolicity_certificate(schedule: Schedule, N: int, samples: int = 100, horizon: int = 200,
                              seed: int | None = None, mapper=map) -> HyperbolicityReport:
    """Run ``samples`` orbits of Y_N; orbits that hit a kink are replaced by fresh seeds.

    ``mapper`` is any map-like callable; pass an executor's ``map`` to run
    the orbits in parallel. Aggregation follows the seed order.
    """
    report = HyperbolicityReport(N, horizon)
    pool = sobol_seeds(2 * samples, seed)
    position = 0
    while len(report.orbits) < samples and position < len(pool):
        batch = pool[position:position + samples - len(report.orbits)]
        position += len(batch)
        results = mapper(_safe_summary, [(schedule, N, point, horizon) for point in batch])
        for point, result in zip(batch, results):
            if result is None:
                report.resampled.append(point)
            else:
                report.orbits.append(result)
    logger.info(
        "hyperbolicity_certificate N=%s orbits=%s resampled=%s passed=%s",
        N, len(report.orbits), len(report.resampled), report.passed,
    )
    return report


def _safe_summary(arguments: tuple) -> OrbitSummary | None:
    schedule, N, point, horizon = arguments
    try:
        return orbit_summary(schedule, N, point, horizon)
    except (ValueError, ArithmeticError) as exc:
        logger.debug("orbit_resampled seed=%s reason=%s", point, exc)
        return None


# -- coupling proximity ----------------------------------------------------------------

@dataclass(frozen=True)
class ProximityRow:
    J: int
    side: str
    x: float
    gap: float
    bound: float

    @property
    def passed(self) -> bool:
        return self.gap <= self.bound


def proximity_audit(schedule: Schedule, indices, points_per_cylinder: int = 5) -> list[ProximityRow]:
    """|H_J(x) - x| against phi^-(J-3) on both coupling cylinders of V_J."""
    homeo = fibered_homeo(schedule, native_backend())
    rows = []
    for J in indices:
        if not 3 <= J <= schedule.depth:
            raise ValueError(f"J = {J} outside 3..{schedule.depth}")
        bound = float(PHI) ** -(J - 3)
        for side, word in (("upper", upper_word(J)), ("lower", lower_word(J))):
            cylinder = cylinder_of(word)
            low, length = float(cylinder.low), float(cylinder.length)
            for k in range(points_per_cylinder):
                x = low + length * (k + 0.5) / points_per_cylinder
                rows.append(ProximityRow(J, side, x, homeo.coupling_proximity(J, x), bound))
    return rows
