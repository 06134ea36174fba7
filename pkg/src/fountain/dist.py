"""Check-node degree distributions: the named constructions, sampling, and file I/O."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

NORMALIZATION_TOL = 1e-9

RAPTOR_COEFFS = {
    1: 0.008, 2: 0.494, 3: 0.166, 4: 0.073, 5: 0.083,
    8: 0.056, 9: 0.037, 19: 0.056, 65: 0.025, 66: 0.003,
}

TABLE1_COEFFS = {
    4096: {
        1: 0.01206279868062, 2: 0.48618222931140, 3: 0.14486030215468,
        4: 0.11968155126998, 5: 0.03845536920060, 8: 0.03045905002768,
        9: 0.08718444024457, 32: 0.08111425911047,
    },
    8192: {
        1: 0.00859664884231, 2: 0.48800207839031, 3: 0.16243601073478,
        4: 0.06926848659608, 5: 0.09460770077248, 9: 0.03973381508374,
        10: 0.06397077147921, 34: 0.06652107350334, 35: 0.00686341459082,
    },
}


@dataclass(frozen=True, eq=False)
class DegreeDistribution:
    """Probability vector over degrees ``1..dmax``; ``probs[d-1]`` is the mass on degree ``d``.

    ``k`` is the message length the distribution was built for, or ``None``
    when it does not depend on one.
    """

    probs: np.ndarray
    k: int | None = None
    name: str = "custom"
    cdf: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        probs = np.asarray(self.probs, dtype=np.float64).copy()
        if probs.ndim != 1 or probs.size == 0:
            raise ValueError("probs must be a non-empty vector")
        if np.any(probs < 0) or not np.all(np.isfinite(probs)):
            raise ValueError("probabilities must be finite and non-negative")
        if abs(probs.sum() - 1.0) > NORMALIZATION_TOL:
            raise ValueError(f"probabilities sum to {probs.sum()!r}, not 1")
        nz = np.flatnonzero(probs)
        probs = probs[: nz[-1] + 1]
        if self.k is not None and probs.size > self.k:
            raise ValueError(f"dmax {probs.size} exceeds k = {self.k}")
        cdf = np.cumsum(probs)
        cdf = np.maximum.accumulate(np.minimum(cdf, 1.0))
        cdf[-1] = 1.0
        probs.setflags(write=False)
        cdf.setflags(write=False)
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "cdf", cdf)

    @property
    def dmax(self) -> int:
        return int(self.probs.size)

    def __getitem__(self, d: int) -> float:
        return float(self.probs[d - 1]) if 1 <= d <= self.dmax else 0.0

    def poly(self, x: float | np.ndarray) -> float | np.ndarray:
        """Omega(x)."""
        return np.polynomial.polynomial.polyval(x, np.concatenate(([0.0], self.probs)))

    def derivative(self, x: float | np.ndarray) -> float | np.ndarray:
        """Omega'(x)."""
        coeffs = self.probs * np.arange(1, self.dmax + 1)
        return np.polynomial.polynomial.polyval(x, coeffs)


def normalized(weights: dict[int, float] | np.ndarray, k: int | None, name: str) -> DegreeDistribution:
    if isinstance(weights, dict):
        vec = np.zeros(max(weights))
        for d, w in weights.items():
            vec[d - 1] = w
    else:
        vec = np.asarray(weights, dtype=np.float64)
    return DegreeDistribution(vec / vec.sum(), k, name)


def soliton(k: int) -> DegreeDistribution:
    if k < 2:
        raise ValueError("soliton needs k >= 2")
    d = np.arange(2, k + 1, dtype=np.float64)
    probs = np.concatenate(([1.0 / k], 1.0 / (d * (d - 1))))
    return DegreeDistribution(probs, k, f"soliton({k})")


@dataclass(frozen=True)
class RobustSolitonParts:
    R: float
    spike: int
    tau: np.ndarray
    beta: float


def robust_soliton_parts(k: int, c: float, delta: float) -> RobustSolitonParts:
    """Ripple constant R, spike position, unnormalised tau and normaliser beta."""
    if k < 2 or c <= 0 or not 0 < delta < 1:
        raise ValueError("robust soliton needs k >= 2, c > 0, 0 < delta < 1")
    R = c * math.log(k / delta) * math.sqrt(k)
    if k / R <= 1:
        raise ValueError(f"k/R = {k / R:.4g} must exceed 1")
    spike = int(round(k / R))
    if spike < 1 or spike > k:
        raise ValueError(f"spike index {spike} outside 1..{k}")
    tau = np.zeros(k)
    i = np.arange(1, spike)
    tau[: spike - 1] = R / (i * k)
    tau[spike - 1] = R * math.log(R / delta) / k
    if tau[spike - 1] < 0:
        raise ValueError("R < delta gives a negative spike weight")
    beta = float(soliton(k).probs.sum() + tau.sum())
    return RobustSolitonParts(R, spike, tau, beta)


def robust_soliton(k: int, c: float, delta: float) -> DegreeDistribution:
    parts = robust_soliton_parts(k, c, delta)
    base = np.zeros(k)
    base[: soliton(k).dmax] = soliton(k).probs
    return DegreeDistribution((base + parts.tau) / parts.beta, k, f"robust_soliton({k},{c},{delta})")


def raptor_reference() -> DegreeDistribution:
    return normalized(RAPTOR_COEFFS, None, "raptor_reference")


def table1_reference(k: int) -> DegreeDistribution:
    if k not in TABLE1_COEFFS:
        raise ValueError("table1_reference is tabulated for k = 4096 and 8192 only")
    return normalized(TABLE1_COEFFS[k], k, f"table1({k})")


def asymptotic_good_coeff(F: int, epsilon: float, variant: str) -> float:
    if variant == "online":
        return (epsilon * F - 1) / (1 + epsilon)
    if variant == "raptor":
        return epsilon * F / (1 + epsilon)
    raise ValueError(f"unknown variant {variant!r}; use 'online' or 'raptor'")


def asymptotic_good(F: int, epsilon: float, variant: str = "online") -> DegreeDistribution:
    """Truncated soliton reweighted so degree 1 gets ``c1 / F`` and the rest share the remainder."""
    if F < 2:
        raise ValueError("F must be at least 2")
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    c1 = asymptotic_good_coeff(F, epsilon, variant)
    if c1 <= 0:
        raise ValueError(f"c1 = {c1:.4g} is not positive (need epsilon*F > 1)")
    eta = soliton(F).probs
    c = np.full(F, (F - c1) / (F - 1))
    c[0] = c1
    return normalized(c * eta, None, f"asymptotic_good({F},{epsilon},{variant})")


def omega_star(d: DegreeDistribution) -> DegreeDistribution:
    """Drop the degree-one mass and renormalise what is left."""
    if d[1] >= 1.0:
        raise ValueError("omega_star is undefined when all mass sits on degree 1")
    probs = d.probs.copy()
    probs[0] = 0.0
    return DegreeDistribution(probs / (1.0 - d[1]), d.k, f"star({d.name})")


def sample_degree(d: DegreeDistribution, u: float) -> int:
    """Inverse-CDF draw: the smallest degree whose cumulative mass exceeds ``u``."""
    return int(np.searchsorted(d.cdf, u, side="right")) + 1


def sample_degrees(d: DegreeDistribution, u: np.ndarray) -> np.ndarray:
    return np.searchsorted(d.cdf, u, side="right") + 1


def avg_degree(d: DegreeDistribution) -> float:
    return float(np.dot(np.arange(1, d.dmax + 1), d.probs))


def format_distribution(d: DegreeDistribution) -> str:
    """``k=``, ``dmax=`` and one ``d prob`` line per nonzero degree; k-free distributions use ``k=0``."""
    lines = [f"k={d.k or 0}", f"dmax={d.dmax}"]
    lines += [f"{i + 1} {p!r}" for i, p in enumerate(d.probs.tolist()) if p > 0]
    return "\n".join(lines) + "\n"


def write_distribution(d: DegreeDistribution, path: str | Path) -> None:
    Path(path).write_text(format_distribution(d))


def read_distribution(path: str | Path) -> DegreeDistribution:
    lines = [ln.strip() for ln in Path(path).read_text().splitlines() if ln.strip()]
    if len(lines) < 3 or not lines[0].startswith("k=") or not lines[1].startswith("dmax="):
        raise ValueError(f"{path}: expected 'k=' and 'dmax=' header lines")
    k = int(lines[0][2:])
    dmax = int(lines[1][5:])
    probs = np.zeros(dmax)
    for ln in lines[2:]:
        deg, prob = ln.split()
        deg_i = int(deg)
        if not 1 <= deg_i <= dmax:
            raise ValueError(f"{path}: degree {deg_i} outside 1..{dmax}")
        probs[deg_i - 1] = float(prob)
    return DegreeDistribution(probs, k or None, Path(path).stem)
