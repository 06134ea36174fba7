"""And-or tree evolution, ripple-size targets and LP design of degree distributions."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..dist import DegreeDistribution, avg_degree
from .simplex import UnboundedError, maximize

EVOLUTION_TOL = 1e-12
EVOLUTION_CAP = 100_000
CHECK_TOL = 1e-9


@dataclass
class EvolutionTrace:
    y: np.ndarray
    fixed_point: float
    converged: bool


def and_or_evolution(d: DegreeDistribution, epsilon: float, max_iters: int = EVOLUTION_CAP) -> EvolutionTrace:
    """Iterate y <- exp(-(1 + eps) * Omega'(1 - y)) from y = 1.

    ``y_l`` is the probability an input symbol is still unrecovered after
    ``l`` rounds of peeling on an infinitely long code.
    """
    if avg_degree(d) <= 0:
        raise ValueError("distribution has zero average degree")
    ys = [1.0]
    y = 1.0
    converged = False
    for _ in range(max_iters):
        nxt = math.exp(-(1.0 + epsilon) * float(d.derivative(1.0 - y)))
        ys.append(nxt)
        if abs(nxt - y) < EVOLUTION_TOL:
            converged = True
            y = nxt
            break
        y = nxt
    return EvolutionTrace(np.array(ys), y, converged)


def expected_ripple(d: DegreeDistribution, epsilon: float, x: float | np.ndarray, k: int) -> float | np.ndarray:
    """Expected ripple size when a fraction ``x`` of input symbols is still unrecovered."""
    return k * (x - np.exp(-d.derivative(1.0 - np.asarray(x)) * (1.0 + epsilon)))


def design_grid(gamma: float, dgamma: float) -> np.ndarray:
    if not 0 < gamma < 1 or dgamma <= 0:
        raise ValueError("need 0 < gamma < 1 and dgamma > 0")
    count = int(math.floor((1.0 - gamma) / dgamma + 1e-9)) + 1
    return np.arange(count) * dgamma


def ripple_floor(x: np.ndarray, k: int, epsilon: float, radius: str = "unrecovered") -> np.ndarray:
    """Lower bound on Omega'(x) keeping the ripple one random-walk deviation above zero.

    ``x`` is the recovered fraction. The deviation is sqrt(2 u / (k pi)) with
    ``u`` the unrecovered fraction ``1 - x``; ``radius="printed"`` uses ``x``
    in its place instead. Points whose log argument is not positive map to
    ``inf`` (unsatisfiable).
    """
    x = np.asarray(x, dtype=np.float64)
    if radius == "unrecovered":
        spread = np.sqrt(2.0 * (1.0 - x) / (k * math.pi))
    elif radius == "printed":
        spread = np.sqrt(2.0 * x / (k * math.pi))
    else:
        raise ValueError(f"unknown radius {radius!r}")
    arg = 1.0 - x - spread
    out = np.full(x.shape, np.inf)
    ok = arg > 0
    out[ok] = -np.log(arg[ok]) / (1.0 + epsilon)
    return out


@dataclass
class CheckResult:
    passed: bool
    failing_index: int | None = None
    failing_x: float | None = None
    slack: np.ndarray | None = None


def check_distribution(
    d: DegreeDistribution,
    k: int,
    epsilon: float,
    gamma: float,
    dgamma: float,
    radius: str = "unrecovered",
    tol: float = CHECK_TOL,
) -> CheckResult:
    """Check Omega'(x) against the ripple floor on every grid point; report the first failure."""
    grid = design_grid(gamma, dgamma)
    slack = d.derivative(grid) - ripple_floor(grid, k, epsilon, radius)
    bad = np.flatnonzero(~(slack >= -tol))
    if bad.size == 0:
        return CheckResult(True, slack=slack)
    i = int(bad[0])
    return CheckResult(False, i, float(grid[i]), slack)


class InfeasibleLpError(ValueError):
    pass


@dataclass
class LpProblem:
    F: int
    M: int
    A: np.ndarray
    b: np.ndarray
    lower: np.ndarray
    c: np.ndarray
    objective: float
    pivots: int


def design_distribution(
    k: int,
    epsilon: float,
    gamma: float,
    dgamma: float,
    F: int,
    eq_tol: float = 0.0,
) -> tuple[DegreeDistribution, LpProblem]:
    """Minimum-average-degree distribution meeting the ripple floor on the grid.

    Variables are ``c_d = -d * Omega_d`` for d = 1..F; the program maximises
    ``sum(c)`` under ``A c <= b`` with ``A[i, j] = x_i ** j``, bounds
    ``-d <= c_d <= 0`` and ``sum(-c_d / d) = 1`` written as two inequalities.
    """
    if F < 2:
        raise ValueError("F must be at least 2")
    grid = design_grid(gamma, dgamma)
    A = grid[:, None] ** np.arange(F)[None, :]
    floor = ripple_floor(grid, k, epsilon)
    if not np.all(np.isfinite(floor)):
        bad = int(np.flatnonzero(~np.isfinite(floor))[0])
        raise InfeasibleLpError(f"grid row {bad} (x={grid[bad]:.6g}) has a non-positive log argument")
    b = -floor
    degrees = np.arange(1, F + 1, dtype=np.float64)
    # With u = -c >= 0 the program is: minimise sum(u) subject to G u >= h.
    # Its dual, maximise h @ y subject to G.T y <= 1 and y >= 0, has the
    # origin as a feasible start; u comes back as the dual's shadow prices.
    G = np.vstack([A, -np.eye(F), (1.0 / degrees)[None, :], -(1.0 / degrees)[None, :]])
    h = np.concatenate([-b, -degrees, [1.0 - eq_tol], [-(1.0 + eq_tol)]])
    try:
        sol = maximize(h, G.T, np.ones(F))
    except UnboundedError as exc:
        label = _row_label(exc.column, grid, F)
        raise InfeasibleLpError(f"design LP infeasible; binding constraint: {label}") from exc
    u = np.clip(sol.duals, 0.0, None)
    probs = u / degrees
    dist = DegreeDistribution(probs / probs.sum(), k, f"lp({k},{epsilon},F={F})")
    problem = LpProblem(F, grid.size, A, b, -degrees, -u, float(u.sum()), sol.pivots)
    return dist, problem


def _row_label(row: int, grid: np.ndarray, F: int) -> str:
    if row < grid.size:
        return f"grid row {row} (x={grid[row]:.6g})"
    row -= grid.size
    if row < F:
        return f"upper bound on degree {row + 1}"
    return "normalisation"
