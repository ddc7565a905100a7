# homeo1d/profiles.py
"""
Interpolation profiles on [0, 1].

Every profile is a continuous, piecewise-polynomial density. ``evaluate``
returns the pair (integral from 0 to x, density at x), so a profile can be
used both as a derivative (the density) and as the map it integrates to.

* g_alpha: 1 at 0, alpha at 1, mean alpha; linear on [0, 1/3], flat at
  (5 alpha - 1)/4 on [1/3, 2/3], linear on [2/3, 1].
* psi(eps, lam): density of the circle map pushing the 1/phi point to
  lam phi / (1 + lam phi); slopes lam phi^2/(1 + lam phi) and
  phi^2/(1 + lam phi) off four collars of width eps.
* g_ab(a1, a2): a1 * g_(a2/a1), a C^1 bridge from slope a1 to slope a2
  whose integral over [0, 1] is a2.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from numerics.backends import Backend, ExactBackend
from numerics.field import PHI


G_ALPHA = "gAlpha"
PSI = "psi"
G_AB = "gAB"


def _one_third_pieces(alpha, x, third, two_thirds):
    """(integral, value) of g_alpha at x in whatever scalar type the inputs share."""
    plateau = (5 * alpha - 1) / 4
    rise = 3 * (plateau - 1)
    fall = 3 * (alpha - plateau)
    if x <= third:
        return x + rise * x * x / 2, 1 + rise * x
    head = third + rise * third * third / 2
    if x <= two_thirds:
        return head + plateau * (x - third), plateau
    u = x - two_thirds
    middle = head + plateau * third
    return middle + plateau * u + fall * u * u / 2, plateau + fall * u


@dataclass(frozen=True)
class Profile:
    kind: str
    params: tuple
    backend: Backend

    # -- constructors ------------------------------------------------------
    @classmethod
    def g_alpha(cls, alpha, backend: Backend | None = None) -> "Profile":
        backend = backend or ExactBackend()
        alpha = backend.lift(alpha)
        if alpha < backend.lift(Fraction(1, 4)):
            raise ValueError(f"g_alpha needs alpha >= 1/4, got {alpha}")
        return cls(G_ALPHA, (alpha,), backend)

    @classmethod
    def psi(cls, epsilon, lam, backend: Backend | None = None) -> "Profile":
        backend = backend or ExactBackend()
        epsilon, lam = backend.lift(epsilon), backend.lift(lam)
        phi = backend.lift(PHI)
        if epsilon < 0:
            raise ValueError("collar width must be nonnegative")
        if lam < 1:
            raise ValueError("psi needs lambda >= 1")
        if 2 * epsilon > 1 / (phi * phi):
            raise ValueError(f"collar {epsilon} does not fit twice into [1/phi, 1]")
        return cls(PSI, (epsilon, lam), backend)

    @classmethod
    def g_ab(cls, alpha1, alpha2, backend: Backend | None = None) -> "Profile":
        backend = backend or ExactBackend()
        alpha1, alpha2 = backend.lift(alpha1), backend.lift(alpha2)
        if not alpha1 > 0 or alpha2 < alpha1 / 4:
            raise ValueError(f"g_ab needs a1 > 0 and a2 >= a1/4, got {alpha1}, {alpha2}")
        return cls(G_AB, (alpha1, alpha2), backend)

    # -- evaluation ----------------------------------------------------------
    def _lift(self, value):
        return self.backend.lift(value)

    def _g(self, alpha, x):
        return _one_third_pieces(alpha, x, self._lift(Fraction(1, 3)), self._lift(Fraction(2, 3)))

    @property
    def slopes(self) -> tuple:
        """(left slope, right slope) of psi off its collars."""
        if self.kind != PSI:
            raise AttributeError("only psi has affine slopes")
        _, lam = self.params
        phi = self._lift(PHI)
        return lam * phi * phi / (1 + lam * phi), phi * phi / (1 + lam * phi)

    def evaluate(self, x) -> tuple:
        zero, one = self._lift(0), self._lift(1)
        if x < zero or x > one:
            raise ValueError(f"profile argument {x} outside [0, 1]")
        if self.kind == G_ALPHA:
            return self._g(self.params[0], x)
        if self.kind == G_AB:
            alpha1, alpha2 = self.params
            value, density = self._g(alpha2 / alpha1, x)
            return alpha1 * value, alpha1 * density
        return self._psi(x)

    def slope_partials(self, x) -> tuple:
        """(d/da1, d/da2) of the g_ab integral at x; it is affine in both slopes."""
        if self.kind != G_AB:
            raise AttributeError("only g_ab has slope parameters")
        rest, _ = self._g(self._lift(0), x)
        return rest, x - rest

    def _psi(self, x) -> tuple:
        epsilon, _ = self.params
        a, b = self.slopes
        inv_phi = self._lift(1 / PHI)
        one = self._lift(1)
        if epsilon == 0:
            if x < inv_phi:
                return a * x, a
            return a * inv_phi + b * (x - inv_phi), b
        if x <= epsilon:
            value, density = self._g(a, x / epsilon)
            return epsilon * value, density
        if x <= inv_phi - epsilon:
            return a * x, a
        if x <= inv_phi:
            value, density = self._g(a, (inv_phi - x) / epsilon)
            return a * inv_phi - epsilon * value, density
        base = a * inv_phi
        if x <= inv_phi + epsilon:
            value, density = self._g(b, (x - inv_phi) / epsilon)
            return base + epsilon * value, density
        if x <= one - epsilon:
            return base + b * (x - inv_phi), b
        value, density = self._g(b, (one - x) / epsilon)
        return one - epsilon * value, density

    def describe(self) -> dict:
        return {"kind": self.kind, "params": [str(p) for p in self.params]}


def profile_eval(profile: Profile, x) -> tuple:
    return profile.evaluate(profile.backend.lift(x))
