# markov/chains.py
"""
3x3 stochastic matrices over the golden-mean alphabet.

Rows and columns follow the symbol order 1, 2, 3. Entries are whatever
scalar type the caller works in: exact FieldElements by default, floats
or mpmath numbers after ``lift``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from numerics.backends import Backend, PrecisionBudgetError
from numerics.field import INV_PHI, INV_PHI2, ONE, PHI, SQRT5, ZERO, FieldElement
from symbolic.shift import SYMBOLS


logger = logging.getLogger(__name__)

INDEX = {symbol: i for i, symbol in enumerate(SYMBOLS)}

MAX_MIXING_STEPS = 10_000


class ReducibleChainError(ValueError):
    """Support of the matrix is not irreducible and aperiodic."""


def _is_zero(value) -> bool:
    return value == 0


@dataclass(frozen=True)
class StochasticMatrix:
    rows: tuple
    label: str = ""

    def __post_init__(self):
        if len(self.rows) != 3 or any(len(row) != 3 for row in self.rows):
            raise ValueError("stochastic matrices here are 3x3")

    def __call__(self, a: str, b: str):
        return self.rows[INDEX[a]][INDEX[b]]

    def __eq__(self, other):
        if not isinstance(other, StochasticMatrix):
            return NotImplemented
        return self.rows == other.rows

    def __hash__(self):
        return hash(self.rows)

    @property
    def exact(self) -> bool:
        return all(isinstance(entry, FieldElement) for row in self.rows for entry in row)

    def support(self) -> tuple:
        return tuple(tuple(int(not _is_zero(entry)) for entry in row) for row in self.rows)

    def row_sums(self) -> list:
        return [sum(row[1:], row[0]) for row in self.rows]

    def __matmul__(self, other: "StochasticMatrix") -> "StochasticMatrix":
        rows = tuple(
            tuple(
                sum((self.rows[i][k] * other.rows[k][j] for k in range(1, 3)),
                    self.rows[i][0] * other.rows[0][j])
                for j in range(3)
            )
            for i in range(3)
        )
        return StochasticMatrix(rows, self.label)

    def power(self, k: int) -> "StochasticMatrix":
        return _power(self, k)

    def apply(self, distribution: Sequence) -> tuple:
        """Row vector times matrix."""
        return tuple(
            sum((distribution[i] * self.rows[i][j] for i in range(1, 3)),
                distribution[0] * self.rows[0][j])
            for j in range(3)
        )

    def lift(self, backend: Backend) -> "StochasticMatrix":
        return StochasticMatrix(
            tuple(tuple(backend.lift(entry) for entry in row) for row in self.rows),
            self.label,
        )

    def to_numpy(self) -> np.ndarray:
        return np.array([[float(entry) for entry in row] for row in self.rows], dtype=np.float64)

    def describe(self) -> dict:
        return {"label": self.label, "rows": [[str(entry) for entry in row] for row in self.rows]}


@lru_cache(maxsize=1024)
def _power(matrix: StochasticMatrix, k: int) -> StochasticMatrix:
    if k < 0:
        raise ValueError("negative matrix power")
    if k == 0:
        one = matrix.rows[0][0] * 0 + 1
        zero = one - one
        return StochasticMatrix(
            tuple(tuple(one if i == j else zero for j in range(3)) for i in range(3)),
            matrix.label,
        )
    if k == 1:
        return matrix
    half = _power(matrix, k // 2)
    square = half @ half
    return square @ matrix if k % 2 else square


def distortion_ratio(lam):
    """f(lambda) = lambda (1 + phi) / (1 + phi lambda), the RN value a block creates."""
    return lam * (1 + PHI) / (1 + PHI * lam)


def matrix_q(backend: Backend | None = None) -> StochasticMatrix:
    """Transition matrix of the Parry (Lebesgue) measure."""
    rows = (
        (INV_PHI, ZERO, INV_PHI2),
        (INV_PHI, ZERO, INV_PHI2),
        (ZERO, ONE, ZERO),
    )
    matrix = StochasticMatrix(rows, "Q")
    return matrix.lift(backend) if backend is not None else matrix


def matrix_q_lambda(lam, backend: Backend | None = None) -> StochasticMatrix:
    """Q_lambda: the first row tilted towards 1 -> 1, the rest as in Q."""
    if isinstance(lam, (int, Fraction, str)):
        lam = FieldElement.coerce(lam)
    if lam < 1:
        raise ValueError(f"Q_lambda needs lambda >= 1, got {lam}")
    if backend is not None:
        lam = backend.lift(lam)
    q = matrix_q(backend)
    zero, one = q.rows[0][1], q.rows[2][1]
    denominator = one + (backend.lift(PHI) if backend is not None else PHI) * lam
    first = (one - one / denominator, zero, one / denominator)
    return StochasticMatrix((first, q.rows[1], q.rows[2]), f"Q[{lam}]")


# -- stationary laws ----------------------------------------------------

def _primitive(support: tuple) -> bool:
    power = support
    # Wielandt: a primitive 3x3 pattern has a positive power of order <= 5
    for _ in range(5):
        if all(all(row) for row in power):
            return True
        power = tuple(
            tuple(int(any(power[i][k] and support[k][j] for k in range(3))) for j in range(3))
            for i in range(3)
        )
    return all(all(row) for row in power)


def _solve(matrix: list, rhs: list) -> list:
    """Gaussian elimination in whatever field the entries live in."""
    n = len(rhs)
    a = [list(row) + [value] for row, value in zip(matrix, rhs)]
    for col in range(n):
        candidates = [r for r in range(col, n) if not _is_zero(a[r][col])]
        if not candidates:
            raise ReducibleChainError("singular stationarity system")
        pivot = max(candidates, key=lambda r: abs(a[r][col]))
        a[col], a[pivot] = a[pivot], a[col]
        for r in range(n):
            if r != col and not _is_zero(a[r][col]):
                factor = a[r][col] / a[col][col]
                a[r] = [x - factor * y for x, y in zip(a[r], a[col])]
    return [a[i][n] / a[i][i] for i in range(n)]


def stationary(matrix: StochasticMatrix) -> tuple:
    """The unique invariant probability row vector of a primitive matrix."""
    if not _primitive(matrix.support()):
        raise ReducibleChainError(f"matrix {matrix.label or matrix.rows} is not primitive")
    one = matrix.rows[0][0] * 0 + 1
    zero = one - one
    # pi (P - I) = 0 with the last equation replaced by sum(pi) = 1
    system = [[matrix.rows[i][j] - (one if i == j else zero) for i in range(3)] for j in range(3)]
    system[2] = [one, one, one]
    rhs = [zero, zero, one]
    return tuple(_solve(system, rhs))


def stationary_q() -> tuple:
    """pi_Q = (1/sqrt5, 1/(phi sqrt5), 1/(phi sqrt5)), written down exactly."""
    first = 1 / SQRT5
    other = 1 / (PHI * SQRT5)
    return (first, other, other)


def sup_distance(p: Sequence, q: Sequence):
    return max(abs(a - b) for a, b in zip(p, q))


# -- mixing --------------------------------------------------------------

@dataclass(frozen=True)
class MixingCertificate:
    steps: int
    ratio_gap: object
    distance: object
    tolerance: object


def _ratio_gap(power: StochasticMatrix, pi: Sequence):
    return max(abs(power.rows[i][j] / pi[j] - 1) for i in range(3) for j in range(3))


def _min_ratio(power: StochasticMatrix, pi: Sequence):
    return min(power.rows[i][j] / pi[j] for i in range(3) for j in range(3))


def mixing_certificate(matrix: StochasticMatrix, tolerance, backend: Backend | None = None) -> MixingCertificate:
    """Smallest k whose min-ratio coefficient min P^k(s, s')/pi(s') is >= 1 - delta.

    The one-sided bound P^k(s, .) >= (1 - delta) pi is the classical
    Doeblin form; it bounds every row of P^k within delta of pi in total
    variation. The two-sided ratio gap and the sup distance are reported
    alongside.
    """
    if tolerance <= 0:
        raise ValueError("mixing tolerance must be positive")
    if backend is not None and not backend.exact:
        if float(tolerance) < float(backend.resolution()):
            raise PrecisionBudgetError(
                f"tolerance {tolerance} below {backend.name} backend resolution "
                f"at {backend.precision} bits; needs higher precision"
            )
        matrix = matrix.lift(backend)
        tolerance = backend.lift(tolerance)
    elif matrix.exact:
        if isinstance(tolerance, float):
            tolerance = Fraction(tolerance)
        tolerance = FieldElement.coerce(tolerance)
    pi = stationary(matrix)
    power = matrix
    for k in range(1, MAX_MIXING_STEPS + 1):
        if 1 - _min_ratio(power, pi) <= tolerance:
            distance = max(sup_distance(row, pi) for row in power.rows)
            return MixingCertificate(k, _ratio_gap(power, pi), distance, tolerance)
        power = power @ matrix
    raise ValueError(f"no mixing within {MAX_MIXING_STEPS} steps at tolerance {tolerance}")


def mixing_time(matrix: StochasticMatrix, tolerance, backend: Backend | None = None) -> int:
    return mixing_certificate(matrix, tolerance, backend).steps
