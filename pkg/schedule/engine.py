# schedule/engine.py
"""
The inductive parameter engine.

Stages are chosen in the order lambda_t, then (n_t, N_t), then eps_t, then
(m_t, M_t). Every inequality the engine checks is recorded as a
Certificate so a built schedule can be audited without re-running the
search. Lattice exactness comes from the theta parametrization
f(lambda_t) = theta^(a_t) with dyadic exponents a_t.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Sequence

from numerics.backends import FloatBackend
from numerics.field import INV_PHI2, INV_PHI3, ONE, PHI, SQRT5, ZERO, FieldElement
from markov.chains import distortion_ratio, matrix_q, matrix_q_lambda, mixing_certificate, stationary, stationary_q, sup_distance
from markov.frequencies import PairFrequency, SymbolFrequency, empirical_frequency_prob
from markov.measures import MeasureSpec
from symbolic.shift import adjacent_cylinder

from .profiles import RigorProfile


logger = logging.getLogger(__name__)

BAND_LOW = 1.6
BAND_HIGH = 1.7
PAIR_THRESHOLD = Fraction(1, 15)


class LatticeError(ValueError):
    """No admissible lambda for the requested lattice step p."""


class InfeasibleScheduleError(ValueError):
    def __init__(self, inequality: str, message: str, suggestion: str = ""):
        self.inequality = inequality
        self.suggestion = suggestion
        text = f"{inequality}: {message}"
        if suggestion:
            text = f"{text} ({suggestion})"
        super().__init__(text)


@dataclass(frozen=True)
class Certificate:
    name: str
    stage: int
    passed: bool
    margin: float
    waived: bool = False
    detail: str = ""

    @property
    def ok(self) -> bool:
        return self.passed or self.waived

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "stage": self.stage,
            "passed": self.passed,
            "margin": self.margin,
            "waived": self.waived,
            "detail": self.detail,
        }


@dataclass(frozen=True)
class StageParams:
    t: int
    lam: FieldElement
    n: int
    N: int
    m: int
    M: int
    epsilon: Fraction
    exponent: int
    mixing_steps: int | None = None

    @property
    def psi_range(self) -> tuple[int, int]:
        """First and last psi-stage of the block."""
        first = 1 if self.t == 1 else self.N - self.n + 1
        return first, self.N


@dataclass(frozen=True)
class Schedule:
    profile: RigorProfile
    stages: tuple[StageParams, ...]
    theta: Fraction | None = None
    certificates: tuple[Certificate, ...] = field(default=())

    @property
    def T(self) -> int:
        return len(self.stages)

    @property
    def depth(self) -> int:
        return self.stages[-1].M if self.stages else 0

    def stage(self, t: int) -> StageParams:
        if not 1 <= t <= self.T:
            raise IndexError(f"block {t} outside 1..{self.T}")
        return self.stages[t - 1]

    def M(self, t: int) -> int:
        return 1 if t == 0 else self.stage(t).M

    def N(self, t: int) -> int:
        return self.stage(t).N

    def block_of(self, n: int) -> int:
        """Block whose range (M_{t-1}, M_t] holds stage n."""
        if not 1 <= n <= self.depth:
            raise ValueError(f"stage {n} outside 1..{self.depth}")
        for stage in self.stages:
            if n <= stage.M:
                return stage.t
        raise AssertionError("unreachable")

    def epsilons(self) -> tuple[Fraction, ...]:
        return tuple(stage.epsilon for stage in self.stages)

    def with_epsilons(self, epsilons: Sequence) -> "Schedule":
        if len(epsilons) != self.T:
            raise ValueError(f"need {self.T} collar widths, got {len(epsilons)}")
        stages = tuple(replace(stage, epsilon=Fraction(eps)) for stage, eps in zip(self.stages, epsilons))
        return replace(self, stages=stages)

    def zero_epsilon(self) -> "Schedule":
        return self.with_epsilons([0] * self.T)

    @property
    def passed(self) -> bool:
        return all(certificate.ok for certificate in self.certificates)

    def failures(self) -> list[Certificate]:
        return [certificate for certificate in self.certificates if not certificate.ok]


@dataclass(frozen=True)
class LambdaChoice:
    lam: object
    p: int
    checks: tuple[Certificate, ...]

    @property
    def admissible(self) -> bool:
        return all(check.passed for check in self.checks)

    @property
    def failing(self) -> list[str]:
        return [check.name for check in self.checks if not check.passed]


@dataclass(frozen=True)
class EpsilonChoice:
    epsilon: Fraction
    bounds: dict


# -- helpers -------------------------------------------------------------

def _backend() -> FloatBackend:
    return FloatBackend()


def _log(value, backend: FloatBackend):
    return backend.log(backend.lift(value))


def _integer_root(n: int, p: int) -> int | None:
    """Exact p-th root of a nonnegative integer, or None."""
    if n < 2:
        return n
    x = 1 << ((n.bit_length() + p - 1) // p)
    while True:
        y = ((p - 1) * x + n // x ** (p - 1)) // p
        if y >= x:
            break
        x = y
    return x if x ** p == n else None


def _rational_root(value: Fraction, p: int) -> Fraction | None:
    top, bottom = _integer_root(value.numerator, p), _integer_root(value.denominator, p)
    if top is None or bottom is None:
        return None
    return Fraction(top, bottom)


def lambda_from_ratio(r):
    """Closed-form inverse of f: lambda = r / ((1 + phi) - phi r)."""
    if isinstance(r, (int, Fraction)):
        r = FieldElement.coerce(r)
        if not ONE < r < PHI:
            raise LatticeError(f"ratio {r} outside (1, phi)")
        return r / ((1 + PHI) - PHI * r)
    phi = float(PHI)
    if not 1.0 < r < phi:
        raise LatticeError(f"ratio {r} outside (1, phi)")
    return r / ((1 + phi) - phi * r)


def default_theta(exponent: int) -> Fraction:
    """1 + 1/(5000 * 2^E): keeps lambda_1 - 1 near 5e-4 whatever the depth."""
    return 1 + Fraction(1, 5000 * 2 ** exponent)


def band_budget() -> float:
    return math.log(float(PHI) / BAND_LOW)


def _cert(name: str, t: int, lhs, rhs, *, strict: bool = False, detail: str = "") -> Certificate:
    lhs, rhs = float(lhs), float(rhs)
    passed = lhs < rhs if strict else lhs <= rhs
    return Certificate(name, t, passed, rhs - lhs, detail=detail or f"{lhs:.6g} vs {rhs:.6g}")


def _waived(name: str, t: int, detail: str) -> Certificate:
    return Certificate(name, t, True, 0.0, waived=True, detail=detail)


# -- lambda --------------------------------------------------------------

def solve_lambda(prev, p: int, *, t: int, m_prev: int, N_prev: int, M_prev: int,
                 reserve: float = 0.0, drift=None, backend: FloatBackend | None = None) -> LambdaChoice:
    """lambda_t with f(lambda_t)^p = f(lambda_{t-1}), plus the checks it must pass.

    Exact whenever f(lambda_{t-1}) has a rational p-th root; a larger p is
    the caller's remedy for any failing check.
    """
    if p < 2:
        raise ValueError("lattice step p must be at least 2")
    backend = backend or _backend()
    if float(prev) <= 1:
        raise ValueError("previous lambda must exceed 1")

    ratio = distortion_ratio(prev)
    root = None
    if isinstance(ratio, FieldElement) and ratio.is_rational():
        root = _rational_root(ratio.a, p)
    if root is not None:
        lam = lambda_from_ratio(root)
    else:
        lam = lambda_from_ratio(float(backend.lift(ratio)) ** (1.0 / p))
    log_lam = _log(lam, backend)
    if log_lam <= 0:
        raise LatticeError(f"p={p} gives lambda={lam}, need lambda > 1")

    if isinstance(lam, FieldElement):
        pi_gap = sup_distance(stationary(matrix_q_lambda(lam)), stationary_q())
    else:
        native = FloatBackend(53)
        pi_gap = sup_distance(stationary(matrix_q_lambda(lam, native)),
                              [native.lift(p) for p in stationary_q()])
    if drift is None:
        drift = Fraction(1, 2 ** N_prev)
    checks = (
        _cert("block-drift", t, 2 * M_prev * log_lam, backend.lift(Fraction(drift)),
              detail=f"lambda^(2 M_{t-1}) <= exp(2^-N_{t-1})"),
        _cert("step-drift", t, 2 * m_prev * log_lam, backend.lift(Fraction(1, 2 ** t)), strict=True),
        _cert("stationary-gap", t, float(pi_gap), backend.lift(Fraction(1, 2 ** t)), strict=True),
        _cert("band-share", t, 2 * M_prev * log_lam, (band_budget() - reserve) / 2 ** t),
    )
    return LambdaChoice(lam, p, checks)


# -- n -------------------------------------------------------------------

def _frequency_certificates(t: int, n: int, lam, law, profile: RigorProfile) -> list[Certificate]:
    matrix = matrix_q_lambda(lam)
    tolerance = float(profile.frequency_tolerance(t))
    centre = float(1 / SQRT5)
    level = float(profile.frequency_level(t))
    ones = empirical_frequency_prob(matrix, law, n, SymbolFrequency("1", centre - tolerance, centre + tolerance))
    pairs = empirical_frequency_prob(matrix, law, n, PairFrequency("23", float(PAIR_THRESHOLD)))
    return [
        Certificate("symbol-frequency", t, ones.exceeds(level), ones.ci_low - level,
                    detail=f"{ones.method} p={ones.probability:.6g}"),
        Certificate("pair-frequency", t, pairs.exceeds(level), pairs.ci_low - level,
                    detail=f"{pairs.method} p={pairs.probability:.6g}"),
    ]


def _law_at(partial: Schedule, t: int) -> tuple:
    spec = MeasureSpec.from_schedule(partial, backend=FloatBackend(53))
    return spec.marginal(partial.M(t - 1))


def solve_n(t: int, partial: Schedule, lam, exponent: int) -> tuple[int, list[Certificate]]:
    """Smallest n_t meeting the lattice floor and the frequency events."""
    profile = partial.profile
    if t == 1:
        n = profile.base_n
        if profile.waive_base_case:
            return n, [_waived("symbol-frequency", 1, "base case"), _waived("pair-frequency", 1, "base case")]
        law = tuple(float(p) for p in (INV_PHI2, INV_PHI2, INV_PHI3))
        return n, _frequency_certificates(1, n, lam, law, profile)

    first = partial.stage(1).exponent
    floor = max(1, profile.lattice_factor * first // exponent)
    law = _law_at(partial, t)
    for n in range(floor, profile.max_n + 1):
        certificates = _frequency_certificates(t, n, lam, law, profile)
        if all(c.passed for c in certificates):
            lattice = _cert("lattice-floor", t, profile.lattice_factor * first // exponent, n)
            return n, [lattice, *certificates]
    raise InfeasibleScheduleError(
        "frequency",
        f"frequency events not certified for any n_{t} <= {profile.max_n}",
        "raise max_n or loosen the toy frequency tolerance",
    )


# -- epsilon -------------------------------------------------------------

def _collar_gap(depth: int) -> FieldElement:
    """phi^2 times the shortest depth-`depth` cylinder touching 0, 1/phi^3 or 1/phi^2 inside J1."""
    lengths = [
        adjacent_cylinder(ZERO, depth, "right").length,
        adjacent_cylinder(INV_PHI3, depth, "left").length,
        adjacent_cylinder(INV_PHI3, depth, "right").length,
        adjacent_cylinder(INV_PHI2, depth, "left").length,
    ]
    return PHI * PHI * min(lengths)


def _largest_dyadic_below(bound: float) -> Fraction:
    k = max(1, math.ceil(-math.log2(bound)))
    while Fraction(1, 2 ** k) > bound:
        k += 1
    return Fraction(1, 2 ** k)


def solve_epsilon(t: int, partial: Schedule, lam, n: int, N: int, *,
                  zero: bool = False) -> EpsilonChoice:
    """Largest dyadic collar width below half of every sub-bound."""
    first = 1 if t == 1 else partial.M(t - 1) + 1
    backend = _backend()
    lam_f = float(backend.lift(lam))
    phi = float(PHI)
    product = 1.0
    for stage in partial.stages:
        product *= float(backend.lift(stage.lam)) ** stage.n
    bounds = {
        "collar-gap": float(_collar_gap(N + 2 - first)),
        "corrector-collar": phi ** -(n + 1),
        "bad-set-separation": (phi * phi * lam_f * lam_f) ** -n / 4,
        "egorov-budget": 1 / (4 * n * 2 ** t * product * lam_f ** (2 * n)),
    }
    if zero:
        return EpsilonChoice(Fraction(0), bounds)
    return EpsilonChoice(_largest_dyadic_below(min(bounds.values()) / 2), bounds)


# -- m -------------------------------------------------------------------

def correction_flatness_bound(stage: StageParams, M: int | None = None) -> float:
    """Worst |log h'| proxy for the correction closing a block.

    A depth-M cylinder sitting inside a psi collar of width eps*phi^-(N+2)
    sees the psi profile vary by (15/4)(a-1)phi^(N+2)/eps relative to phi^-M.
    """
    if stage.epsilon == 0:
        return 0.0
    M = stage.M if M is None else M
    lam = float(stage.lam)
    phi = float(PHI)
    slope_gap = (lam - 1) / (1 + lam * phi)
    return 3.75 * slope_gap * phi ** (stage.N + 2) / float(stage.epsilon) * phi ** -M


def solve_m(t: int, partial: Schedule, lam, n: int, N: int, epsilon: Fraction,
            exponent: int) -> tuple[int, int, list[Certificate]]:
    """Smallest m_t meeting the mixing length, the derivative growth and correction flatness."""
    profile = partial.profile
    lam1 = lam if t == 1 else partial.stage(1).lam
    mixing = mixing_certificate(matrix_q(), profile.mixing_tolerance(N))
    k = mixing.steps
    if profile.is_strict:
        k = max(k, N + 1)

    if t == 1 and profile.base_m is not None:
        detail = "base case m_1 taken as listed"
        return profile.base_m, k, [
            _waived("mixing-length", 1, detail), _waived("derivative-growth", 1, detail), _waived("flatness", 1, detail),
        ]

    needs = {}
    delta = profile.ergodic_tolerance(N)
    if t > 1:
        # delta can be 9^-3N: the log1p needs a mantissa well below it
        wide = FloatBackend(max(96, 16 * N))
        need = 4 * k * wide.log(wide.lift(t)) / -wide.ctx.log1p(-wide.lift(delta))
        if need > profile.integer_budget:
            raise InfeasibleScheduleError(
                "mixing-length",
                f"m_{t} >= {float(need):.3g} exceeds the integer budget {profile.integer_budget}",
                "use the toy profile",
            )
        needs["mixing-length"] = int(wide.ctx.ceil(need))
    else:
        needs["mixing-length"] = 0

    lam1_f = float(lam1)
    needs["derivative-growth"] = N + math.ceil(lam1_f ** (2 * N))

    probe = StageParams(t, lam, n, N, 0, N, epsilon, exponent)
    tolerance = float(profile.flatness_tolerance(t, N))
    if epsilon == 0:
        needs["flatness"] = 0
    else:
        base = correction_flatness_bound(probe, M=0)
        needs["flatness"] = max(0, math.ceil(math.log(base / tolerance) / math.log(float(PHI))) - N)

    m = max(1, *needs.values())
    M = N + m
    certificates = [
        _cert("mixing-length", t, needs["mixing-length"], m, detail=f"k={k}"),
        _cert("derivative-growth", t, 1, (m - N) * lam1_f ** (-2 * N)),
    ]
    if epsilon == 0:
        certificates.append(_waived("flatness", t, "zero collar"))
    else:
        certificates.append(_cert("flatness", t, correction_flatness_bound(replace(probe, m=m, M=M)), tolerance))
    return m, k, certificates


# -- band ----------------------------------------------------------------

def band_product(schedule: Schedule) -> tuple[float, float]:
    """phi * prod lambda_t^(-/+ 2 M_{t-1}) * exp(-/+ sum eta_t), worst-case signs."""
    backend = _backend()
    spread = 0.0
    for stage in schedule.stages:
        log_lam = float(_log(stage.lam, backend))
        spread += 2 * schedule.M(stage.t - 1) * log_lam + float(schedule.profile.drift(stage.t, stage.N))
    phi = float(PHI)
    return phi * math.exp(-spread), phi * math.exp(spread)


def _band_certificate(schedule: Schedule) -> Certificate:
    low, high = band_product(schedule)
    margin = min(low - BAND_LOW, BAND_HIGH - high)
    return Certificate("band", schedule.T, margin >= 0, margin, detail=f"[{low:.6f}, {high:.6f}]")


def _lattice_certificates(schedule: Schedule) -> list[Certificate]:
    certificates = []
    for stage in schedule.stages:
        exact = distortion_ratio(stage.lam) == FieldElement(schedule.theta ** stage.exponent)
        certificates.append(Certificate("lattice", stage.t, exact, 0.0, detail=f"a_t={stage.exponent}"))
    for left, right in zip(schedule.stages, schedule.stages[1:]):
        ordered = left.lam > right.lam and left.N < right.N and left.M < right.M
        certificates.append(Certificate("monotone", right.t, ordered, 0.0))
    return certificates


# -- driver --------------------------------------------------------------

def _choose_lambda(t: int, partial: Schedule, reserve: float) -> tuple[LambdaChoice, int]:
    previous = partial.stage(t - 1)
    choice = None
    p = 2
    while p <= previous.exponent:
        choice = solve_lambda(
            previous.lam, p, t=t, m_prev=previous.m, N_prev=previous.N, M_prev=previous.M,
            reserve=reserve, drift=partial.profile.lattice_drift(t, previous.N),
        )
        if choice.admissible:
            return choice, previous.exponent // p
        p *= 2
    if choice is None:
        raise InfeasibleScheduleError(
            "lattice", f"exponent a_{t - 1} = {previous.exponent} leaves no room for block {t}",
            "raise the exponent E",
        )
    raise InfeasibleScheduleError(
        choice.failing[0],
        f"no lattice step p <= {previous.exponent} satisfies {', '.join(choice.failing)} at block {t}",
        "use the toy profile" if partial.profile.is_strict else "raise the exponent E",
    )


def build_schedule(stages: int, profile: RigorProfile | str = "toy", *, theta=None,
                   exponent: int | None = None, zero_epsilon: bool = False) -> Schedule:
    """Run the induction for `stages` blocks and certify the result."""
    if stages < 1:
        raise ValueError("a schedule needs at least one block")
    if isinstance(profile, str):
        profile = RigorProfile.named(profile)
    if exponent is None:
        exponent = 3 * (stages - 1)
    theta = default_theta(exponent) if theta is None else Fraction(theta)
    if theta <= 1:
        raise ValueError("theta must exceed 1")

    first_exponent = 2 ** exponent
    reserve = 2 * float(profile.drift(1, profile.base_n + 1))
    built: list[StageParams] = []
    certificates: list[Certificate] = []

    for t in range(1, stages + 1):
        partial = Schedule(profile, tuple(built), theta)
        if t == 1:
            lam = lambda_from_ratio(theta ** first_exponent)
            a_t = first_exponent
            certificates.append(_cert(
                "band-share", 1, 2 * float(_log(lam, _backend())), (band_budget() - reserve) / 2,
            ))
        else:
            choice, a_t = _choose_lambda(t, partial, reserve)
            lam = choice.lam
            certificates.extend(choice.checks)

        n, found = solve_n(t, partial, lam, a_t)
        certificates.extend(found)
        N = partial.M(t - 1) + n
        if t == 1 and profile.is_strict:
            certificates.append(_cert("n1-strict", 1, 20, N, strict=True))
        eps = solve_epsilon(t, partial, lam, n, N, zero=zero_epsilon).epsilon
        m, k, found = solve_m(t, partial, lam, n, N, eps, a_t)
        certificates.extend(found)
        stage = StageParams(t, lam, n, N, m, N + m, eps, a_t, k)
        built.append(stage)
        logger.info(
            "schedule_stage_built t=%s lambda=%.9f n=%s N=%s m=%s M=%s epsilon=%s",
            t, float(lam), n, N, m, stage.M, eps,
        )

    schedule = Schedule(profile, tuple(built), theta)
    certificates.extend(_lattice_certificates(schedule))
    certificates.append(_band_certificate(schedule))
    schedule = replace(schedule, certificates=tuple(certificates))
    if profile.is_strict and not schedule.passed:
        failed = schedule.failures()[0]
        raise InfeasibleScheduleError(failed.name, f"block {failed.stage} fails ({failed.detail})", "use the toy profile")
    logger.info("schedule_built profile=%s T=%s depth=%s passed=%s", profile.name, schedule.T, schedule.depth, schedule.passed)
    return schedule
