"""Random-graph view of degree-two recovery: giant component and reduced distributions."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import binom

from ..dist import DegreeDistribution

SERIES_CUTOFF = 1e-16
SERIES_CAP = 10_000_000


def giant_component(m: float) -> float:
    """Fraction of nodes in the giant component of a random graph with mean degree ``m``."""
    if m <= 0:
        raise ValueError("mean degree must be positive")
    if m <= 1:
        return 0.0
    log_z = math.log(m) - m
    total = 0.0
    for i in range(1, SERIES_CAP):
        term = math.exp((i - 1) * math.log(i) - math.lgamma(i + 1) + i * log_z)
        total += term
        if term < SERIES_CUTOFF:
            break
    return 1.0 - total / m


@dataclass(frozen=True)
class ReducedDistribution:
    """Check degrees after a fraction phi of inputs is known; ``coeffs[i-1]`` is degree i."""

    released: float
    coeffs: np.ndarray

    def __getitem__(self, i: int) -> float:
        if i == 0:
            return self.released
        return float(self.coeffs[i - 1]) if 1 <= i <= self.coeffs.size else 0.0

    def conditional(self) -> DegreeDistribution:
        """Degree distribution of the checks that still carry unknowns."""
        mass = self.coeffs.sum()
        if mass <= 0:
            raise ValueError("every check was released")
        return DegreeDistribution(self.coeffs / mass, None, "reduced")


def modified_distribution(d: DegreeDistribution, phi: float) -> ReducedDistribution:
    """Coefficients of Omega((1 - phi) x + phi)."""
    if not 0 <= phi <= 1:
        raise ValueError("phi must lie in [0, 1]")
    degs = np.arange(1, d.dmax + 1)
    i = np.arange(0, d.dmax + 1)
    # table[i, d] = C(d, i) (1 - phi)^i phi^(d - i)
    table = binom.pmf(i[:, None], degs[None, :], 1.0 - phi)
    out = table @ d.probs
    return ReducedDistribution(float(out[0]), out[1:])
