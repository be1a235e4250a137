"""Probability mass functions on bounded integer windows."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Pmf:
    """Mass on ``offset, offset+1, ...`` plus bookkeeping of mass outside the window.

    ``lost_mass`` is probability dropped by truncation (an approximation).
    ``absorbed`` is probability removed on purpose (absorption, clipping below a
    floor from which the quantity of interest is unreachable) and is exact.
    """

    offset: int
    mass: np.ndarray
    lost_mass: float = 0.0
    absorbed: float = 0.0

    def __post_init__(self):
        m = np.asarray(self.mass, dtype=float)
        m.setflags(write=False)
        object.__setattr__(self, "mass", m)

    @property
    def support(self) -> np.ndarray:
        return np.arange(self.offset, self.offset + len(self.mass))

    @property
    def hi(self) -> int:
        return self.offset + len(self.mass) - 1

    def __call__(self, k: int) -> float:
        i = int(k) - self.offset
        if 0 <= i < len(self.mass):
            return float(self.mass[i])
        return 0.0

    def total(self) -> float:
        return float(self.mass.sum())

    def mean(self) -> float:
        return float(np.dot(self.support, self.mass))

    def conservation_error(self) -> float:
        return abs(self.total() + self.lost_mass + self.absorbed - 1.0)
