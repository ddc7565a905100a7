# cli/suites.py
"""
Verification suites behind ``manage.py verify``.

Every suite takes a SuiteContext and returns a SuiteResult: a pass flag,
measured margins and the first few failures. Suites are module-level
functions so that a process pool can run them; the report keeps the order
in which the suites were requested.
"""
from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from anosov2d.audits import hyperbolicity_certificate, proximity_audit, sobol_seeds, y_derivative_audit
from anosov2d.diffeo import AnosovMap, lyapunov_exponents
from anosov2d.fibered import fibered_homeo, q_interp, q_interp_du
from anosov2d.manifold import GLUING_TABLE, U_WIDTH, coupling_cascade_holds, f_tilde, f_tilde_jacobian, gluing_partners
from density.martingale import conditional_average, cylinder_density, mass_balance, ui_diagnostic
from homeo1d.construction import (
    CORRECTION,
    PSI_STAGE,
    build_stage,
    get_construction,
    stage_factors,
    stage_kind,
    uniform_cauchy_gap,
)
from homeo1d.profiles import Profile
from markov.chains import matrix_q, stationary, stationary_q, sup_distance
from markov.measures import MeasureSpec
from numerics.backends import Backend, ExactBackend, FloatBackend, get_backend
from numerics.field import INV_PHI, INV_PHI2, ONE, PHI, ZERO, FieldElement
from schedule.engine import BAND_HIGH, BAND_LOW, Schedule, band_product
from symbolic.coupling import BOTTOM, MID, TOP, coupling_segment
from symbolic.shift import cylinder_of, enumerate_words, word_count


logger = logging.getLogger(__name__)

FLOAT_TOLERANCE = 2.0 ** -40
MAX_FAILURES = 20
CASCADE_DEPTH = 12
PROXIMITY_DEPTH = 14
UI_LEVELS = (1.0, 1.001, 1.01, 1.1, 2.0)
GLUING_PAIRS = 1000
SQUARE_SIDE = 100


class UnknownSuiteError(ValueError):
    pass


@dataclass(frozen=True)
class SuiteContext:
    schedule: Schedule
    grid: int = 10_000
    seed: int = 0
    backend: str = "float"
    precision: int | None = None
    tiling_depth: int = 12
    word_limit: int = 2048
    samples: int = 100
    horizon: int = 200

    @property
    def exact(self) -> bool:
        return self.backend == "exact"

    @property
    def tolerance(self) -> float:
        return 0.0 if self.exact else FLOAT_TOLERANCE

    @property
    def depth(self) -> int:
        return self.schedule.depth

    def get_backend(self) -> Backend:
        return get_backend(self.backend, self.precision)

    def grid_backend(self) -> FloatBackend:
        """Float backend for grid sweeps; grids are never swept exactly."""
        return FloatBackend(self.precision if not self.exact and self.precision else 53)

    def points(self, count: int | None = None) -> list[float]:
        count = count or self.grid
        return [(k + 0.5) / count for k in range(count)]

    def square(self) -> list[tuple[float, float]]:
        """A side x side grid over M, each column spanning its own fiber."""
        side = min(SQUARE_SIDE, max(2, math.isqrt(self.grid)))
        bottom, top, mid, inv_phi = float(BOTTOM), float(TOP), float(MID), float(INV_PHI)
        grid = []
        for x in self.points(side):
            upper = top if x <= inv_phi else mid
            grid.extend((x, bottom + (upper - bottom) * (k + 0.5) / side) for k in range(side))
        return grid


@dataclass
class SuiteResult:
    name: str
    passed: bool = True
    metrics: dict = field(default_factory=dict)
    failures: list[str] = field(default_factory=list)
    latency_ms: int = 0

    def check(self, condition: bool, message: str) -> bool:
        if not condition:
            self.passed = False
            if len(self.failures) < MAX_FAILURES:
                self.failures.append(message)
        return condition

    def to_dict(self) -> dict:
        return {
            "suite": self.name,
            "passed": self.passed,
            "metrics": self.metrics,
            "failures": self.failures,
        }


def _gap(a, b) -> float:
    return abs(float(a - b))


# -- one dimension ----------------------------------------------------------------

def tiling(ctx: SuiteContext) -> SuiteResult:
    """Depth-n cylinders chain from 0 to 1; the Lebesgue spec reproduces their lengths."""
    result = SuiteResult("tiling")
    count = 0
    for n in range(1, ctx.tiling_depth + 1):
        position = ZERO
        for word in enumerate_words(n):
            cylinder = cylinder_of(word)
            result.check(cylinder.low == position and cylinder.high > cylinder.low, f"C_{word} breaks the chain")
            position = cylinder.high
            count += 1
        result.check(position == ONE, f"depth {n} ends at {position}")
    lebesgue = MeasureSpec.lebesgue()
    mass_depth = min(ctx.tiling_depth, 8)
    for word in enumerate_words(mass_depth):
        result.check(lebesgue.cylinder_mass(word) == cylinder_of(word).length, f"Lebesgue mass of C_{word}")
    result.metrics.update(depth=ctx.tiling_depth, cylinders=count, mass_depth=mass_depth)
    return result


def markov_consistency(ctx: SuiteContext) -> SuiteResult:
    """Exact pi_Q and pi_j P_j = pi_{j+1} for the measure of the schedule."""
    result = SuiteResult("markov-consistency")
    exact_gap = sup_distance(stationary(matrix_q()), stationary_q())
    result.check(exact_gap == ZERO, f"exact stationary law off by {exact_gap}")
    float_law = stationary(matrix_q(FloatBackend(53)))
    float_gap = max(abs(float(a) - float(b)) for a, b in zip(float_law, stationary_q()))
    result.check(float_gap <= 1e-12, f"float stationary law off by {float_gap:.3e}")

    spec = MeasureSpec.from_schedule(ctx.schedule)
    worst = 0.0
    for j in range(1, ctx.depth + 2):
        residual = spec.consistency_residual(j)
        worst = max(worst, float(residual))
        result.check(residual == ZERO, f"consistency defect {float(residual):.3e} at j={j}")
    mass_depth = min(ctx.depth, 8)
    total = sum((spec.cylinder_mass(word) for word in enumerate_words(mass_depth)), ZERO)
    result.check(total == ONE, f"total mass {total} at depth {mass_depth}")
    result.metrics.update(float_stationary_gap=float_gap, worst_residual=worst, coordinates=ctx.depth + 1)
    return result


def psi_properties(ctx: SuiteContext) -> SuiteResult:
    """psi(1/phi), the endpoint slopes, the lambda^2 band and the mean of gAlpha."""
    result = SuiteResult("psi-properties")
    rows = []
    for stage in ctx.schedule.stages:
        lam = stage.lam
        psi = Profile.psi(stage.epsilon, lam)
        value, _ = psi.evaluate(INV_PHI)
        result.check(value == lam * PHI / (1 + lam * PHI), f"psi(1/phi) at block {stage.t}")
        result.check(psi.evaluate(ZERO) == (ZERO, ONE), f"psi at 0, block {stage.t}")
        result.check(psi.evaluate(ONE) == (ONE, ONE), f"psi at 1, block {stage.t}")

        lam_f = float(lam)
        sweep = Profile.psi(float(stage.epsilon), lam_f, FloatBackend(53))
        densities = np.array([sweep.evaluate(x)[1] for x in [k / ctx.grid for k in range(ctx.grid + 1)]], dtype=float)
        low, high = float(densities.min()), float(densities.max())
        result.check(lam_f ** -2 < low and high < lam_f ** 2, f"psi' outside the lambda^2 band at block {stage.t}")
        rows.append({"t": stage.t, "min": low, "max": high, "lambda_squared": lam_f ** 2})

    for alpha in (Fraction(1, 4), Fraction(3, 4), Fraction(1), Fraction(3, 2), Fraction(7)):
        mean, _ = Profile.g_alpha(alpha).evaluate(ONE)
        result.check(mean == FieldElement(alpha), f"gAlpha({alpha}) has mean {mean}")
    result.metrics.update(blocks=rows, grid=ctx.grid)
    return result


def stage_fixing(ctx: SuiteContext) -> SuiteResult:
    """h_n fixes every H_{n-1}(C_w) it acts on, H_n fixes the partition, and the stages contract."""
    result = SuiteResult("stage-fixing")
    backend = ctx.get_backend()
    construction = get_construction(ctx.schedule, backend)
    worst, checked, last = 0.0, 0, 0
    for n in range(1, ctx.depth + 1):
        if word_count(n) > ctx.word_limit:
            break
        stage = build_stage(ctx.schedule, n, backend)
        for word, low, high in stage.intervals(ctx.word_limit):
            for end in ((low, high) if stage.kind == PSI_STAGE else (low,)):
                value, slope = stage.evaluate(end)
                defect = _gap(value, end)
                worst = max(worst, defect)
                result.check(defect <= ctx.tolerance, f"h_{n} moves an end of H_{n - 1}(C_{word})")
                if stage.kind == PSI_STAGE:
                    result.check(_gap(slope, 1) <= ctx.tolerance, f"h_{n}' != 1 at an end of C_{word}")
            checked += 1
        last = n
    for n in range(0, ctx.depth + 1):
        for point in (ZERO, INV_PHI2, INV_PHI):
            point = construction.lift(point)
            value, _ = construction.eval_H(n, point)
            result.check(_gap(value, point) <= ctx.tolerance, f"H_{n} moves the partition point {float(point):.6f}")

    grid = ctx.points()
    contraction = []
    for n in range(1, ctx.depth + 1):
        gap = uniform_cauchy_gap(ctx.schedule, n - 1, grid, ctx.grid_backend())
        bound = math.e * 1.6 ** -n
        contraction.append({"n": n, "sup": gap, "bound": bound})
        result.check(gap <= bound, f"sup |h_{n} - id| = {gap:.3e} above {bound:.3e}")
    result.metrics.update(stages_checked=last, cylinders=checked, worst_defect=worst, contraction=contraction)
    return result


def derivative_band(ctx: SuiteContext) -> SuiteResult:
    """g'_{N_T} on the grid lies in [1.6, 1.7], and each block moves g' within its drift envelope."""
    result = SuiteResult("derivative-band")
    schedule = ctx.schedule
    n = schedule.N(schedule.T)
    construction = get_construction(schedule, ctx.grid_backend())
    points = ctx.points()
    slopes = {n: np.array([float(construction.eval_g(n, x)[1]) for x in points])}
    low, high = float(slopes[n].min()), float(slopes[n].max())
    margin = min(low - BAND_LOW, BAND_HIGH - high)
    result.check(margin >= 0, f"g'_{n} spans [{low:.6f}, {high:.6f}]")

    drift = []
    for t in range(1, schedule.T):
        before, after = schedule.N(t), schedule.N(t + 1)
        for depth in (before, after):
            if depth not in slopes:
                slopes[depth] = np.array([float(construction.eval_g(depth, x)[1]) for x in points])
        spread = schedule.stage(t).M * math.log(float(schedule.stage(t + 1).lam)) + 2.0 ** (-before + 2)
        ratios = np.log(slopes[after] / slopes[before])
        worst = float(np.abs(ratios).max())
        result.check(worst <= spread, f"log g'_{after}/g'_{before} reaches {worst:.3e} above {spread:.3e}")
        drift.append({"t": t, "worst_log_ratio": worst, "envelope": spread, "margin": spread - worst})

    certified = band_product(schedule)
    result.metrics.update(n=n, min=low, max=high, margin=margin, certified=list(certified), drift=drift)
    return result


def correction_flatness(ctx: SuiteContext) -> SuiteResult:
    """The corrections keep cylinder images, flatten H' to alpha(w) and keep |log h_M'| small.

    Past M_t, H_{M_t} is affine on every C_w of length M_t outside a collar
    narrower than the first child, so the depth-N_{t+1} cylinders inside
    C_w take their Lebesgue share of H_{M_t}(C_w).
    """
    result = SuiteResult("correction-flatness")
    schedule = ctx.schedule
    backend = ctx.get_backend()
    construction = get_construction(schedule, backend)
    grid_backend = ctx.grid_backend()
    rows = []
    for stage in schedule.stages:
        M = stage.M
        if stage_kind(schedule, M) != CORRECTION:
            continue
        row = {"t": stage.t, "M": M}
        if word_count(M) <= ctx.word_limit:
            for word in enumerate_words(M):
                cylinder = cylinder_of(word)
                low = construction.lift(cylinder.low)
                kept = _gap(construction.eval_H(M, low)[0], construction.eval_H(M - 1, low)[0])
                result.check(kept <= ctx.tolerance, f"H_{M}(C_{word}) != H_{M - 1}(C_{word})")
                middle = construction.lift(cylinder.low + cylinder.length / 2)
                _, slope = construction.eval_H(M, middle)
                result.check(_gap(slope, construction.alpha(word)) <= ctx.tolerance, f"H_{M}' != alpha({word})")
        if stage.t < schedule.T and word_count(schedule.N(stage.t + 1)) <= ctx.word_limit:
            depth = schedule.N(stage.t + 1)
            worst_share = 0.0
            for word in enumerate_words(depth):
                child, parent = cylinder_of(word), cylinder_of(word[:M])
                start, _ = construction.eval_H(M, construction.lift(child.low))
                end = construction.lift(ONE) if child.high == ONE else construction.eval_H(M, construction.lift(child.high))[0]
                parent_low, parent_high = construction.image(parent)
                share = (parent_high - parent_low) * construction.lift(child.length / parent.length)
                defect = _gap(end - start, share)
                worst_share = max(worst_share, defect)
                result.check(defect <= ctx.tolerance, f"|H_{M}(C_{word})| is not its share of |H_{M}(C_{word[:M]})|")
            row.update(share_depth=depth, share_cylinders=word_count(depth), worst_share_defect=worst_share)

        tolerance = float(schedule.profile.flatness_tolerance(stage.t, stage.N))
        worst = 0.0
        for x in ctx.points():
            correction = stage_factors(schedule, M, x, grid_backend)[0]
            previous = math.prod(float(f.factor) for f in stage_factors(schedule, M - 1, x, grid_backend))
            worst = max(worst, abs(math.log(float(correction.factor) / previous)))
        result.check(worst <= tolerance, f"|log h_{M}'| reaches {worst:.3e} above {tolerance:.3e}")
        row.update(worst_log_slope=worst, tolerance=tolerance)
        rows.append(row)
    result.metrics.update(corrections=rows)
    return result


def martingale(ctx: SuiteContext) -> SuiteResult:
    """E[z_t] = 1, E[z_{t+1} | F_t] = z_t on cylinders, and the UI tail trend."""
    result = SuiteResult("martingale")
    schedule = ctx.schedule
    backend = ctx.get_backend()
    balances = []
    for t in range(1, schedule.T + 1):
        if word_count(schedule.N(t)) > ctx.word_limit:
            break
        defect = _gap(mass_balance(schedule, t, backend), 1)
        balances.append(defect)
        result.check(defect <= ctx.tolerance, f"E[z_{t}] off by {defect:.3e}")
    worst = 0.0
    for t in range(1, schedule.T):
        if word_count(schedule.N(t + 1)) > ctx.word_limit:
            break
        for word in enumerate_words(schedule.N(t)):
            defect = _gap(conditional_average(schedule, t, word, t + 1, backend), cylinder_density(schedule, t, word, backend))
            worst = max(worst, defect)
            result.check(defect <= ctx.tolerance, f"E[z_{t + 1} | C_{word}] != z_{t}")
    t_max = max(1, len(balances))
    report = ui_diagnostic(schedule, t_max, UI_LEVELS, backend)
    result.check(report.nonincreasing, "UI tails grow with the level")
    result.metrics.update(
        mass_balance=balances, worst_conditional=worst,
        ui_sup={str(level): report.sup_tail(level) for level in report.levels},
    )
    return result


# -- two dimensions ----------------------------------------------------------------

def _edge_points(identification, count: int) -> list[tuple]:
    source = identification.source
    points = []
    for k in range(1, count + 1):
        t = source.low + (source.high - source.low) * Fraction(k, count + 1)
        points.append((source.fixed, t) if source.axis == "vertical" else (t, source.fixed))
    return points


def gluing(ctx: SuiteContext) -> SuiteResult:
    """Exact gluing round trips, f~ respecting the gluing and K_N equivariance on V_j."""
    result = SuiteResult("gluing")
    exact = ExactBackend()
    pairs = min(ctx.grid, GLUING_PAIRS)
    per_item = max(1, pairs // len(GLUING_TABLE))
    for identification in GLUING_TABLE:
        for point in _edge_points(identification, per_item):
            image = identification.forward(*point, exact)
            result.check(identification.backward(*image, exact) == point, f"round trip of item {identification.index}")
            first, second = f_tilde(*point), f_tilde(*image)
            result.check(first == second or second in gluing_partners(*first), f"f~ breaks item {identification.index}")

    backend = ctx.get_backend()
    homeo = fibered_homeo(ctx.schedule, backend)
    tolerance = 0.0 if ctx.exact else 1e-12
    segments = min(ctx.depth, 8)
    per_segment = max(1, pairs // segments)
    worst = 0.0
    for j in range(1, segments + 1):
        segment = coupling_segment(j)
        low, high = segment.upper.interval
        offset = segment.offset
        for k in range(1, per_segment + 1):
            x = low + (high - low) * Fraction(k, per_segment + 1)
            partner = x + offset
            if not ctx.exact:
                x, partner, offset_value = float(x), float(partner), float(offset)
            else:
                offset_value = offset
            upper = homeo.value(ctx.depth, segment.upper.level, x)
            lower = homeo.value(ctx.depth, segment.lower.level, partner)
            defect = abs(float(lower - upper - offset_value))
            worst = max(worst, defect)
            result.check(defect <= tolerance, f"K_N not equivariant on V_{j}")
    result.metrics.update(round_trips=per_item * len(GLUING_TABLE), equivariant_pairs=per_segment * segments, worst_equivariance=worst)
    return result


def coupling_cascade(ctx: SuiteContext) -> SuiteResult:
    """f~(V_j) = V_{j-1} exactly and |H_J - id| <= phi^-(J-3) on coupling cylinders."""
    result = SuiteResult("coupling-cascade")
    for j in range(1, CASCADE_DEPTH + 1):
        result.check(coupling_cascade_holds(j), f"f~(V_{j}) != V_{j - 1}")
    top = min(ctx.depth, PROXIMITY_DEPTH)
    rows = proximity_audit(ctx.schedule, range(3, top + 1)) if top >= 3 else []
    for row in rows:
        result.check(row.passed, f"|H_{row.J} - id| = {row.gap:.3e} on the {row.side} cylinder")
    margin = min((row.bound - row.gap for row in rows), default=None)
    result.metrics.update(cascade_depth=CASCADE_DEPTH, proximity_indices=max(0, top - 2), proximity_margin=margin)
    return result


def q_identities(ctx: SuiteContext) -> SuiteResult:
    """q_J(x, 0) = x, q_J(x, 1/phi^10) = H_J(x), flat ends, and |K_{n,y} - id| <= 1.5^-n."""
    result = SuiteResult("q-identities")
    backend = ctx.get_backend()
    construction = get_construction(ctx.schedule, backend)
    tolerance = 0.0 if ctx.exact else 1e-12
    count = min(ctx.grid, 50)
    width = U_WIDTH if ctx.exact else backend.lift(U_WIDTH)
    for J in range(1, ctx.depth + 1):
        for k in range(1, count):
            x = FieldElement(Fraction(k, count)) if ctx.exact else k / count
            H, _ = construction.eval_H(J, x)
            result.check(_gap(q_interp(ctx.schedule, J, x, 0, backend), x) <= tolerance, f"q_{J}(x, 0) != x")
            result.check(_gap(q_interp(ctx.schedule, J, x, width, backend), H) <= tolerance, f"q_{J}(x, w) != H_{J}(x)")
            result.check(abs(float(q_interp_du(ctx.schedule, J, x, 0, backend))) <= tolerance, f"dq_{J}/du at 0")
            result.check(abs(float(q_interp_du(ctx.schedule, J, x, width, backend))) <= tolerance, f"dq_{J}/du at w")

    homeo = fibered_homeo(ctx.schedule, ctx.grid_backend())
    square = ctx.square()
    proximity = []
    for n in range(1, ctx.depth + 1):
        sup = max(abs(float(homeo.value(n, y, x)) - x) for x, y in square)
        proximity.append({"n": n, "sup": sup, "bound": 1.5 ** -n})
        result.check(sup <= 1.5 ** -n, f"sup |K_{n} - id| = {sup:.3e}")
    result.metrics.update(points=count - 1, square=len(square), proximity=proximity)
    return result


def _edge_grid(ctx: SuiteContext) -> list[tuple[float, float]]:
    """Points on the horizontal edges, in their collars and on the edge of U."""
    side = min(SQUARE_SIDE, max(2, math.isqrt(ctx.grid)))
    width = float(U_WIDTH)
    top, mid, bottom, inv_phi = float(TOP), float(MID), float(BOTTOM), float(INV_PHI)
    grid = []
    for x in ctx.points(side):
        upper = top if x <= inv_phi else mid
        for fraction in (0.0, 0.25, 0.5, 0.75):
            grid.append((x, upper - width * fraction))
            grid.append((x, bottom + width * fraction))
        grid.append((x, upper - width))
        grid.append((x, 0.5 * (bottom + mid)))
    return grid


def y_derivative(ctx: SuiteContext) -> SuiteResult:
    result = SuiteResult("y-derivative")
    audit = y_derivative_audit(ctx.schedule, ctx.depth, _edge_grid(ctx))
    for row in audit.rows:
        result.check(row.passed, f"|dK/dy| = {abs(row.dy):.3e} above {row.bound:.3e} at ({row.x:.6f}, {row.y:.6f})")
    result.metrics.update(audit.to_dict())
    result.metrics.pop("failures", None)
    return result


def hyperbolicity(ctx: SuiteContext) -> SuiteResult:
    """Orbit growth, determinant band, Jacobian shape and the N = 0 exponents."""
    result = SuiteResult("hyperbolicity")
    schedule, N = ctx.schedule, ctx.depth
    report = hyperbolicity_certificate(schedule, N, samples=ctx.samples, horizon=ctx.horizon, seed=ctx.seed)
    result.check(report.passed, "orbit growth or determinant outside the band")

    phi = float(PHI)
    linear = lyapunov_exponents([f_tilde_jacobian()] * ctx.horizon)
    linear_gap = float(np.max(np.abs(linear - np.array([math.log(phi), -math.log(phi)]))))
    result.check(linear_gap <= 1e-10, f"N = 0 exponents off by {linear_gap:.3e}")

    anosov = AnosovMap(schedule, N)
    shape_gap, fd_gap = 0.0, 0.0
    for point in sobol_seeds(8, ctx.seed):
        image = anosov(*point)
        shape_gap = max(shape_gap, abs(image.jacobian[1, 0]), abs(image.jacobian[1, 1] + 1 / phi))
        difference = np.abs(anosov.jacobian_fd(*point) - image.jacobian)
        fd_gap = max(fd_gap, float(np.max(difference / np.maximum(1.0, np.abs(image.jacobian)))))
    result.check(shape_gap <= 1e-15, "Jacobian is not upper triangular with (2, 2) entry -1/phi")
    result.check(fd_gap <= 1e-3, f"analytic and finite-difference Jacobians differ by {fd_gap:.3e}")

    summary = report.to_dict()
    summary.pop("per_orbit", None)
    result.metrics.update(summary, linear_gap=linear_gap, shape_gap=shape_gap, fd_gap=fd_gap)
    return result


SUITES = {
    "tiling": tiling,
    "markov-consistency": markov_consistency,
    "psi-properties": psi_properties,
    "stage-fixing": stage_fixing,
    "derivative-band": derivative_band,
    "correction-flatness": correction_flatness,
    "martingale": martingale,
    "gluing": gluing,
    "coupling-cascade": coupling_cascade,
    "q-identities": q_identities,
    "y-derivative": y_derivative,
    "hyperbolicity": hyperbolicity,
}
SUITE_NAMES = tuple(SUITES)


def run_suite(name: str, ctx: SuiteContext) -> SuiteResult:
    try:
        suite = SUITES[name]
    except KeyError:
        raise UnknownSuiteError(f"unknown suite {name!r}; choose from {', '.join(SUITE_NAMES)}")
    started_at = time.perf_counter()
    result = suite(ctx)
    result.latency_ms = round((time.perf_counter() - started_at) * 1000)
    logger.info("suite_finished suite=%s passed=%s latency_ms=%s", name, result.passed, result.latency_ms)
    return result


def run_suites(names, ctx: SuiteContext, workers: int = 1) -> list[SuiteResult]:
    """Run the named suites, across a process pool when workers > 1."""
    names = list(names)
    for name in names:
        if name not in SUITES:
            raise UnknownSuiteError(f"unknown suite {name!r}; choose from {', '.join(SUITE_NAMES)}")
    if workers > 1 and len(names) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(names))) as pool:
            return list(pool.map(run_suite, names, [ctx] * len(names)))
    return [run_suite(name, ctx) for name in names]


def verification_report(ctx: SuiteContext, results: list[SuiteResult]) -> dict:
    schedule = ctx.schedule
    return {
        "schedule": {"profile": schedule.profile.name, "T": schedule.T, "depth": schedule.depth},
        "context": {
            "grid": ctx.grid, "seed": ctx.seed, "backend": ctx.backend, "precision": ctx.precision,
            "tiling_depth": ctx.tiling_depth, "samples": ctx.samples, "horizon": ctx.horizon,
        },
        "suites": [result.to_dict() for result in results],
        "passed": all(result.passed for result in results),
    }
