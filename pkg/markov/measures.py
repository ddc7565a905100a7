# markov/measures.py
"""
Inhomogeneous Markov measures on the one-sided golden-mean shift.

Coordinates are numbered from 1. ``matrix(j)`` is the transition from
coordinate j to j + 1 and ``marginal(j)`` the law of coordinate j, so the
consistency relation reads marginal(j) @ matrix(j) = marginal(j + 1).
"""
from __future__ import annotations

import bisect
import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

from numerics.backends import Backend
from numerics.field import INV_PHI2, INV_PHI3
from symbolic.shift import check_word, enumerate_words, is_admissible

from .chains import (
    INDEX,
    StochasticMatrix,
    matrix_q,
    matrix_q_lambda,
    stationary_q,
    sup_distance,
)


logger = logging.getLogger(__name__)


class ZeroMassError(ValueError):
    """A cylinder whose measure vanishes was used as a denominator."""


@dataclass(frozen=True)
class Block:
    """Coordinates start <= j < end use ``matrix``."""

    start: int
    end: int
    matrix: StochasticMatrix
    lam: object = None

    def __contains__(self, j: int) -> bool:
        return self.start <= j < self.end


def lebesgue_law(backend: Backend | None = None) -> tuple:
    """(|J1|, |J2|, |J3|) in symbol order 1, 2, 3."""
    law = (INV_PHI2, INV_PHI2, INV_PHI3)
    return tuple(backend.lift(p) for p in law) if backend is not None else law


class MeasureSpec:
    """Blocks of tilted matrices on top of a base matrix Q.

    ``initial`` is the law of coordinate ``start``. When it is the
    stationary law of the base matrix the measure extends to all earlier
    coordinates with marginal pi_Q.
    """

    def __init__(
        self,
        blocks: Iterable[Block] = (),
        *,
        initial: Sequence | None = None,
        start: int = 1,
        backend: Backend | None = None,
        label: str = "",
    ):
        self.backend = backend
        self.base = matrix_q(backend)
        self.blocks = tuple(sorted(blocks, key=lambda block: block.start))
        for left, right in zip(self.blocks, self.blocks[1:]):
            if right.start < left.end:
                raise ValueError("measure blocks overlap")
        self.start = start
        pi_q = stationary_q()
        if backend is not None:
            pi_q = tuple(backend.lift(p) for p in pi_q)
        self.pi_q = pi_q
        self.initial = tuple(initial) if initial is not None else pi_q
        self.initial_stationary = initial is None or tuple(initial) == pi_q
        self.label = label
        self._starts = [block.start for block in self.blocks]

    # -- reference measures ------------------------------------------------
    @classmethod
    def lebesgue(cls, backend: Backend | None = None) -> "MeasureSpec":
        """All P = Q from the partition lengths: cylinder masses are lengths."""
        return cls(initial=lebesgue_law(backend), backend=backend, label="lebesgue")

    @classmethod
    def stationary(cls, backend: Backend | None = None) -> "MeasureSpec":
        """All P = Q from pi_Q: the shift-invariant Markov measure."""
        return cls(backend=backend, label="stationary")

    @classmethod
    def single_block(cls, lam, start: int, end: int, *, initial: str = "stationary",
                     backend: Backend | None = None) -> "MeasureSpec":
        block = Block(start, end, matrix_q_lambda(lam, backend), lam)
        law = lebesgue_law(backend) if initial == "lebesgue" else None
        return cls([block], initial=law, backend=backend, label=f"block[{start},{end})")

    @classmethod
    def from_schedule(cls, schedule, initial: str = "lebesgue",
                      backend: Backend | None = None) -> "MeasureSpec":
        """mu+ of a schedule: Q_{lambda_t} on every psi-stage of block t, Q elsewhere."""
        if initial not in ("lebesgue", "stationary"):
            raise ValueError(f"unknown initial law {initial!r}")
        blocks = []
        for stage in schedule.stages:
            first = 1 if stage.t == 1 else schedule.M(stage.t - 1) + 1
            blocks.append(Block(first, stage.N + 1, matrix_q_lambda(stage.lam, backend), stage.lam))
        law = lebesgue_law(backend) if initial == "lebesgue" else None
        return cls(blocks, initial=law, backend=backend, label=f"mu+({initial})")

    # -- structure ---------------------------------------------------------
    def block_at(self, j: int) -> Block | None:
        index = bisect.bisect_right(self._starts, j) - 1
        if index >= 0 and j in self.blocks[index]:
            return self.blocks[index]
        return None

    def matrix(self, j: int) -> StochasticMatrix:
        block = self.block_at(j)
        return block.matrix if block is not None else self.base

    @cached_property
    def _boundaries(self) -> list:
        points = {self.start}
        for block in self.blocks:
            points.update((block.start, block.end))
        return sorted(p for p in points if p >= self.start)

    @cached_property
    def _boundary_laws(self) -> dict:
        laws = {self.start: self.initial}
        bounds = self._boundaries
        for left, right in zip(bounds, bounds[1:]):
            laws[right] = self.matrix(left).power(right - left).apply(laws[left])
        return laws

    def marginal(self, j: int) -> tuple:
        """Law of coordinate j (cached at block boundaries, powers inside)."""
        if j < self.start:
            if self.initial_stationary and all(block.start >= self.start for block in self.blocks):
                return self.pi_q
            raise ValueError(f"coordinate {j} precedes the start {self.start} of a non-stationary law")
        bounds = self._boundaries
        left = bounds[bisect.bisect_right(bounds, j) - 1]
        law = self._boundary_laws[left]
        if j == left:
            return law
        return self.matrix(left).power(j - left).apply(law)

    def consistency_residual(self, j: int):
        """Sup-norm defect of marginal(j) @ P_j = marginal(j + 1)."""
        return sup_distance(self.matrix(j).apply(self.marginal(j)), self.marginal(j + 1))

    # -- masses ------------------------------------------------------------
    def cylinder_mass(self, word: str, k: int = 1):
        """mu([b]_k^{k+n-1}) = pi_k(b_1) * prod P_j(b_j, b_{j+1})."""
        check_word(word)
        mass = self.marginal(k)[INDEX[word[0]]]
        for offset, (a, b) in enumerate(zip(word, word[1:])):
            mass = mass * self.matrix(k + offset)(a, b)
        return mass

    def describe(self) -> dict:
        return {
            "label": self.label,
            "start": self.start,
            "initial": [str(p) for p in self.initial],
            "blocks": [
                {"start": block.start, "end": block.end, "lambda": str(block.lam)}
                for block in self.blocks
            ],
        }


def cylinder_mass(spec: MeasureSpec, word: str, k: int = 1):
    return spec.cylinder_mass(word, k)


def rn_shift(spec: MeasureSpec, word: str, k: int = 1, n: int = 1):
    """mu(T^-n [b]_k) / mu([b]_k): the n-step shift Radon-Nikodym value on a cylinder."""
    if n < 0:
        raise ValueError("power must be nonnegative")
    base = spec.cylinder_mass(word, k)
    if base == 0:
        raise ZeroMassError(f"cylinder {word} at {k} has zero mass")
    if n == 0:
        return base / base
    shifted = spec.cylinder_mass(word, k + n)
    if shifted == 0:
        raise ZeroMassError(f"cylinder {word} at {k + n} has zero mass")
    return shifted / base


@dataclass(frozen=True)
class Witness:
    cylinder: str
    power: int
    subword: str
    value: float
    mass: float


def _extensions(word: str, length: int) -> list[str]:
    words = [word]
    while len(words[0]) < length:
        words = [w + s for w in words for s in ("1", "2", "3") if is_admissible(w[-1] + s)]
    return words


def ratio_set_probe(spec: MeasureSpec, target, tolerance, depth: int, max_power: int) -> list[Witness]:
    """Cylinders A and powers n where the shift RN value on A & T^-n A is near ``target``.

    Diagnostic only: an empty list says nothing about the ratio set.
    """
    if target < 0:
        raise ValueError("ratio set values are nonnegative")
    if tolerance <= 0:
        raise ValueError("tolerance must be positive")
    witnesses = []
    for length in range(1, depth + 1):
        for cylinder in enumerate_words(length):
            for n in range(1, max_power + 1):
                for subword in _extensions(cylinder, length + n):
                    if subword[n:n + length] != cylinder:
                        continue
                    mass = spec.cylinder_mass(subword, 1)
                    if mass == 0:
                        continue
                    value = rn_shift(spec, subword, 1, n)
                    if abs(float(value) - float(target)) < float(tolerance):
                        witnesses.append(Witness(cylinder, n, subword, float(value), float(mass)))
    logger.debug("ratio_set_probe target=%s witnesses=%s", target, len(witnesses))
    return witnesses
