# anosov2d/diffeo.py
"""
The Anosov candidate Y_N on M.

Y_N conjugates f~ fiberwise by K_N:

    R1 u R3:  z = K_{N,y}^-1(x),  Y_N(x, y) = (K_{N,-y/phi}(phi z), -y/phi)
    R2:       z = K_{N,y}^-1(x),  Y_N(x, y) = (K_{N,y'}(phi z - 1), y'),  y' = (TOP - y)/phi

Its Jacobian is upper triangular with (2, 2) entry -1/phi; the (1, 1) entry
phi K'(s)/K'(z) plays the part of g_N' in the fibers.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from schedule.engine import Schedule

from .fibered import FiberedHomeo, fibered_homeo
from .manifold import constants, in_manifold, native_backend, normalize


logger = logging.getLogger(__name__)

FD_STEP = 1e-7
LAST_BELOW_ONE = float(np.nextafter(1.0, 0.0))


@dataclass(frozen=True)
class ZImage:
    point: tuple[float, float]
    jacobian: np.ndarray
    branch: str

    @property
    def determinant(self) -> float:
        return float(self.jacobian[0, 0] * self.jacobian[1, 1])

    @property
    def expansion(self) -> float:
        return abs(float(self.jacobian[0, 0]))


class AnosovMap:
    """Y_N for one schedule on native floats."""

    def __init__(self, schedule: Schedule, N: int, homeo: FiberedHomeo | None = None):
        self.schedule = schedule
        self.homeo = homeo or fibered_homeo(schedule, native_backend())
        if not 0 <= N <= self.homeo.construction.depth:
            raise ValueError(f"N = {N} outside 0..{self.homeo.construction.depth}")
        self.N = N
        c = constants(native_backend())
        self.phi = c.phi
        self.inv_phi = c.inv_phi
        self.top = c.top
        self.mid = c.mid

    def __repr__(self) -> str:
        return f"AnosovMap(N={self.N}, T={self.schedule.T})"

    def _point(self, x, y) -> tuple[float, float]:
        x, y = float(x), float(y)
        if not in_manifold(x, y, native_backend()):
            raise ValueError(f"({x}, {y}) lies outside M")
        return normalize(x, y, native_backend())

    def __call__(self, x, y) -> ZImage:
        x, y = self._point(x, y)
        homeo, N, phi = self.homeo, self.N, self.phi
        z = homeo.inverse(N, y, x)
        _, kx, ky = homeo.evaluate(N, y, z)
        if x < self.inv_phi:
            branch, y_new, s = "left", -y / phi, phi * z
        else:
            branch, y_new, s = "right", (self.top - y) / phi, phi * z - 1
        s = min(max(s, 0.0), LAST_BELOW_ONE)
        x_new, sx, sy = homeo.evaluate(N, y_new, s)
        kx, ky, sx, sy = float(kx), float(ky), float(sx), float(sy)
        jacobian = np.array([
            [phi * sx / kx, -sy / phi - sx * phi * ky / kx],
            [0.0, -1.0 / phi],
        ])
        return ZImage((float(x_new), y_new), jacobian, branch)

    def inverse(self, x, y) -> tuple[float, float]:
        x, y = self._point(x, y)
        homeo, N, phi = self.homeo, self.N, self.phi
        s = homeo.inverse(N, y, x)
        if y <= self.mid:
            y_prev, z = -phi * y, s / phi
        else:
            y_prev, z = self.top - phi * y, (s + 1) / phi
        if z >= 1:
            return normalize(1.0, y_prev, native_backend())
        return float(homeo.value(N, y_prev, z)), y_prev

    def jacobian_fd(self, x, y, step: float = FD_STEP) -> np.ndarray:
        """Central differences of Y_N in x and y."""
        columns = []
        for dx, dy in ((step, 0.0), (0.0, step)):
            ahead = self(x + dx, y + dy).point
            behind = self(x - dx, y - dy).point
            columns.append([(a - b) / (2 * step) for a, b in zip(ahead, behind)])
        return np.array(columns).T

    def orbit(self, x, y, steps: int) -> list[ZImage]:
        images = []
        for _ in range(steps):
            image = self(x, y)
            images.append(image)
            x, y = image.point
        return images


def eval_Z(schedule: Schedule, N: int, x, y) -> ZImage:
    return AnosovMap(schedule, N)(x, y)


def eval_Z_inverse(schedule: Schedule, N: int, x, y) -> tuple[float, float]:
    return AnosovMap(schedule, N).inverse(x, y)


def jacobian_fd(schedule: Schedule, N: int, x, y, step: float = FD_STEP) -> np.ndarray:
    return AnosovMap(schedule, N).jacobian_fd(x, y, step)


def orbit(schedule: Schedule, N: int, x, y, steps: int) -> list[ZImage]:
    return AnosovMap(schedule, N).orbit(x, y, steps)


def lyapunov_exponents(jacobians) -> np.ndarray:
    """Both exponents of a Jacobian cocycle by repeated QR factorisation."""
    basis = np.eye(2)
    sums = np.zeros(2)
    count = 0
    for jacobian in jacobians:
        basis, upper = linalg.qr(np.asarray(jacobian, dtype=float) @ basis)
        sums += np.log(np.abs(np.diag(upper)))
        count += 1
    if not count:
        raise ValueError("no Jacobians to average")
    return sums / count
