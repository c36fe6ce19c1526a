"""Two-dimensional polarization algebra.

States are stored as complex amplitude pairs.  Every transformation the
protocol uses is a real planar rotation

    U_y(a) = cos(a) I - i sin(a) sigma_y = [[cos a, -sin a], [sin a, cos a]]

so amplitudes stay real in practice, but nothing here assumes that.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

NORM_TOL = 1e-12
ANGLE_TOL = 1e-9
# Born probabilities this close to 0 or 1 are treated as certain.
CERTAIN_TOL = 1e-12


class InvariantViolation(RuntimeError):
    """An internal invariant of the simulation was broken."""


@dataclass(frozen=True)
class PolarizationState:
    amp0: complex
    amp1: complex

    @property
    def norm_sq(self) -> float:
        return abs(self.amp0) ** 2 + abs(self.amp1) ** 2

    def is_normalized(self, tol: float = NORM_TOL) -> bool:
        return abs(self.norm_sq - 1.0) <= tol

    def check(self) -> "PolarizationState":
        if not self.is_normalized():
            raise InvariantViolation(
                f"state not normalized: |amp0|^2+|amp1|^2 = {self.norm_sq!r}"
            )
        return self

    def as_array(self) -> np.ndarray:
        return np.array([self.amp0, self.amp1], dtype=complex)


ZERO = PolarizationState(1 + 0j, 0j)
ONE = PolarizationState(0j, 1 + 0j)


def normalize_angle(angle: float) -> float:
    """Map an angle into (-pi, pi]; values within ANGLE_TOL of -pi go to pi."""
    a = math.remainder(angle, 2 * math.pi)
    if a <= -math.pi + ANGLE_TOL:
        a += 2 * math.pi
    return a


def angles_close(a: float, b: float, tol: float = ANGLE_TOL) -> bool:
    return abs(normalize_angle(a - b)) <= tol


def rotate(state: PolarizationState, angle: float) -> PolarizationState:
    state.check()
    c, s = math.cos(angle), math.sin(angle)
    return PolarizationState(
        c * state.amp0 - s * state.amp1,
        s * state.amp0 + c * state.amp1,
    )


def prepare(theta: float) -> PolarizationState:
    """Return U_y(theta)|0>, i.e. cos(theta)|0> + sin(theta)|1>."""
    return rotate(ZERO, theta)


def overlap(a: PolarizationState, b: PolarizationState) -> float:
    """|<a|b>|^2, clamped to [0, 1]."""
    a.check()
    b.check()
    inner = a.amp0.conjugate() * b.amp0 + a.amp1.conjugate() * b.amp1
    return min(1.0, max(0.0, abs(inner) ** 2))


class RngStream:
    """Seeded counter-based random stream (numpy Philox).

    Child streams are derived from the parent seed plus integer keys, so a
    round's draws never depend on how many draws earlier rounds consumed.
    """

    def __init__(self, seed: int, *keys: int):
        self.seed = int(seed) & 0xFFFF_FFFF_FFFF_FFFF
        self.keys = tuple(int(k) for k in keys)
        ss = np.random.SeedSequence([self.seed, *self.keys])
        self._gen = np.random.Generator(np.random.Philox(ss))
        self.draws = 0

    def child(self, *keys: int) -> "RngStream":
        return RngStream(self.seed, *self.keys, *keys)

    def uniform(self) -> float:
        self.draws += 1
        return float(self._gen.random())

    def bit(self) -> int:
        return 1 if self.uniform() < 0.5 else 0

    def angle(self) -> float:
        """Uniform on [0, 2*pi)."""
        return 2 * math.pi * self.uniform()

    def sample_indices(self, n: int, k: int) -> list[int]:
        """k distinct indices from range(n), sorted."""
        self.draws += 1
        picked = self._gen.choice(n, size=k, replace=False)
        return sorted(int(i) for i in picked)


def measure(
    state: PolarizationState, basis: float, rng: RngStream
) -> tuple[int, PolarizationState]:
    """Projective measurement in the basis {U_y(basis)|0>, U_y(basis)|1>}.

    Always consumes exactly one uniform draw, even when the outcome is certain.
    """
    state.check()
    e0 = prepare(basis)
    e1 = rotate(ONE, basis)
    p0 = overlap(e0, state)
    u = rng.uniform()
    if p0 >= 1.0 - CERTAIN_TOL:
        outcome = 0
    elif p0 <= CERTAIN_TOL:
        outcome = 1
    else:
        outcome = 0 if u < p0 else 1
    return outcome, (e0 if outcome == 0 else e1)


def born_probabilities(state: PolarizationState, basis: float) -> Sequence[float]:
    p0 = overlap(prepare(basis), state)
    return (p0, 1.0 - p0)
