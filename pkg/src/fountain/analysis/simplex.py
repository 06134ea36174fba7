"""Dense tableau simplex with Bland's anti-cycling rule."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PIVOT_TOL = 1e-12
REINVERT_ROUNDS = 5


class UnboundedError(ValueError):
    """The objective grows without bound along column ``column``."""

    def __init__(self, column: int) -> None:
        super().__init__(f"objective unbounded along column {column}")
        self.column = column


@dataclass
class LpSolution:
    x: np.ndarray
    duals: np.ndarray
    objective: float
    pivots: int


def maximize(c: np.ndarray, a: np.ndarray, b: np.ndarray, max_pivots: int = 100_000) -> LpSolution:
    """Maximise ``c @ x`` subject to ``a @ x <= b`` and ``x >= 0``, with ``b >= 0``.

    The origin is feasible, so the slack basis starts the tableau. ``duals``
    are the final shadow prices of the rows of ``a``, i.e. the solution of the
    dual program ``min b @ y`` with ``a.T @ y >= c``, ``y >= 0``.
    """
    c = np.asarray(c, dtype=np.float64)
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    m, n = a.shape
    if np.any(b < 0):
        raise ValueError("right-hand side must be non-negative")
    full = np.hstack([a, np.eye(m)])
    gains = np.concatenate([c, np.zeros(m)])
    tab = np.zeros((m + 1, n + m + 1))
    tab[:m, :-1] = full
    tab[:m, -1] = b
    tab[m, :-1] = -gains
    basis = list(range(n, n + m))
    pivots = 0
    for _ in range(REINVERT_ROUNDS):
        pivots += _run_pivots(tab, basis, m, max_pivots - pivots)
        # Rebuild the tableau from the basis to shed pivot round-off; stop
        # once the fresh reduced costs confirm optimality.
        basic = full[:, basis]
        try:
            body = np.linalg.solve(basic, np.hstack([full, b[:, None]]))
            duals = np.linalg.solve(basic.T, gains[basis])
        except np.linalg.LinAlgError:
            break
        tab[:m] = body
        tab[m, :-1] = duals @ full - gains
        tab[m, -1] = duals @ b
        if not np.any(tab[m, :-1] < -PIVOT_TOL):
            break
    x = np.zeros(n + m)
    x[basis] = tab[:m, -1]
    duals = tab[m, n: n + m].copy()
    return LpSolution(x[:n], duals, float(gains @ x), pivots)


def _run_pivots(tab: np.ndarray, basis: list[int], m: int, budget: int) -> int:
    pivots = 0
    while True:
        entering = np.flatnonzero(tab[m, :-1] < -PIVOT_TOL)
        if entering.size == 0:
            return pivots
        col = int(entering[0])
        column = tab[:m, col]
        ok = np.flatnonzero(column > PIVOT_TOL)
        if ok.size == 0:
            raise UnboundedError(col)
        ratios = tab[ok, -1] / column[ok]
        best = ratios.min()
        ties = ok[ratios <= best + 1e-12 * max(1.0, abs(best))]
        row = int(min(ties.tolist(), key=lambda r: basis[r]))
        tab[row] /= tab[row, col]
        factors = tab[:, col].copy()
        factors[row] = 0.0
        tab -= factors[:, None] * tab[row][None, :]
        basis[row] = col
        pivots += 1
        if pivots > budget:
            raise RuntimeError("simplex pivot limit reached")
