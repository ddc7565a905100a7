# schedule/profiles.py
"""
Rigor profiles: which tolerances the schedule engine certifies against.

The strict profile uses the constants the construction is stated with
(3^-3N mixing, 2^-t frequencies, 1 - 1/t probabilities, 2^-N drift). The
toy profile keeps the same inequalities with desk-scale tolerances so a
few stages can actually be built and audited.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass
from fractions import Fraction


STRICT = "strict"
TOY = "toy"


@dataclass(frozen=True)
class RigorProfile:
    name: str
    # lattice floor: n_t >= lattice_factor * a_1 / a_t
    lattice_factor: int
    # base stage (n_1, N_1 = 1 + n_1) and whether its m_1 is taken as listed
    base_n: int
    base_m: int | None
    waive_base_case: bool
    # symbol frequency tolerance is freq_tolerance * 2^-(t-1)
    freq_tolerance: Fraction | None
    mixing_delta: Fraction | None
    eta: Fraction | None
    integer_budget: int = 10 ** 6
    max_n: int = 4000

    @classmethod
    def strict(cls) -> "RigorProfile":
        return cls(
            name=STRICT,
            lattice_factor=20,
            base_n=20,
            base_m=None,
            waive_base_case=False,
            freq_tolerance=None,
            mixing_delta=None,
            eta=None,
        )

    @classmethod
    def toy(cls, delta=Fraction(1, 2), eta=Fraction(1, 500), freq_tolerance=Fraction(1, 4),
            lattice_factor: int = 1) -> "RigorProfile":
        delta, eta, freq_tolerance = Fraction(delta), Fraction(eta), Fraction(freq_tolerance)
        for name, value in (("delta", delta), ("eta", eta), ("freq_tolerance", freq_tolerance)):
            if not 0 < value < 1:
                raise ValueError(f"toy {name} must lie in (0, 1), got {value}")
        if lattice_factor < 1:
            raise ValueError("lattice factor must be positive")
        return cls(
            name=TOY,
            lattice_factor=lattice_factor,
            base_n=2,
            base_m=3,
            waive_base_case=True,
            freq_tolerance=freq_tolerance,
            mixing_delta=delta,
            eta=eta,
        )

    @classmethod
    def named(cls, name: str) -> "RigorProfile":
        if name == STRICT:
            return cls.strict()
        if name == TOY:
            return cls.toy()
        raise ValueError(f"unknown rigor profile {name!r}")

    @property
    def is_strict(self) -> bool:
        return self.name == STRICT

    # -- tolerances --------------------------------------------------------
    def frequency_tolerance(self, t: int) -> Fraction:
        if self.is_strict:
            return Fraction(1, 2 ** t)
        return self.freq_tolerance / 2 ** (t - 1)

    def frequency_level(self, t: int) -> Fraction:
        """Probability the frequency events of block t must exceed."""
        return 1 - Fraction(1, t)

    def mixing_tolerance(self, N: int) -> Fraction:
        """delta for the mixing time k_t."""
        if self.is_strict:
            return Fraction(1, 3 ** (3 * N))
        return self.mixing_delta

    def ergodic_tolerance(self, N: int) -> Fraction:
        """delta in (1 - delta)^(m / 4k) <= 1/t."""
        if self.is_strict:
            return Fraction(1, 9 ** (3 * N))
        return self.mixing_delta

    def drift(self, t: int, N: int) -> Fraction:
        """eta_t: the per-block allowance in the derivative band."""
        if self.is_strict:
            return Fraction(2) ** (4 - N)
        return self.eta / 2 ** (t - 1)

    def lattice_drift(self, t: int, N_prev: int) -> Fraction:
        """Right side of lambda_t^(2 M_{t-1}) <= exp(.)."""
        if self.is_strict:
            return Fraction(1, 2 ** N_prev)
        return self.drift(t - 1, N_prev)

    def flatness_tolerance(self, t: int, N: int) -> Fraction:
        """Allowed |log h'| of the correction stage ending block t."""
        if self.is_strict:
            return Fraction(1, 2 ** N)
        return self.drift(t, N)

    def to_dict(self) -> dict:
        data = asdict(self)
        for key in ("freq_tolerance", "mixing_delta", "eta"):
            if data[key] is not None:
                data[key] = str(data[key])
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "RigorProfile":
        data = dict(data)
        for key in ("freq_tolerance", "mixing_delta", "eta"):
            if data.get(key) is not None:
                data[key] = Fraction(data[key])
        return cls(**data)
