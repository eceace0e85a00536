"""
A small deterministic dense linear-program solver.

Problems have the form

    minimise c·x  subject to  A x ≤ b,  E x = f,  x free.

Least-core programs have few variables and very many inequality rows, so the
solver runs a two-phase tableau simplex with Bland's rule on the dual

    minimise d·w  subject to  M w = -c,  w ≥ 0,

where M = [Aᵀ | Eᵀ | -Eᵀ] and d = [b, f, -f]. The tableau is then only
(variables + 1) rows tall. The primal point is recovered as the simplex
multipliers of the optimal dual basis, which makes it a basic solution, and
is checked against every row before it is returned.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass
from enum import Enum

import numpy as np

from coalition_ledger.exceptions import NumericalBreakdown
from coalition_ledger.utils import logger

FEASIBILITY_TOLERANCE = 1e-9
OBJECTIVE_TOLERANCE = 1e-7
REDUCED_COST_TOLERANCE = 1e-10
PIVOT_TOLERANCE = 1e-9
RATIO_TOLERANCE = 1e-12
MIN_ITERATIONS = 10_000


class LpStatus(str, Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"


@dataclass(frozen=True)
class LinearProgram:
    """
    A linear program over free variables.

    Attributes:
        objective: The cost vector c.
        a_ub: Inequality rows, one per constraint a·x ≤ b.
        b_ub: Inequality bounds.
        a_eq: Equality rows, one per constraint e·x = f.
        b_eq: Equality bounds.
    """

    objective: np.ndarray
    a_ub: np.ndarray
    b_ub: np.ndarray
    a_eq: np.ndarray
    b_eq: np.ndarray

    def __post_init__(self) -> None:
        c = np.asarray(self.objective, dtype=float).reshape(-1)
        k = c.size
        if k < 1:
            raise ValueError("A linear program needs at least one variable")
        a_ub = np.asarray(self.a_ub, dtype=float).reshape(-1, k)
        b_ub = np.asarray(self.b_ub, dtype=float).reshape(-1)
        a_eq = np.asarray(self.a_eq, dtype=float).reshape(-1, k)
        b_eq = np.asarray(self.b_eq, dtype=float).reshape(-1)
        if a_ub.shape[0] != b_ub.size or a_eq.shape[0] != b_eq.size:
            raise ValueError("Each constraint row needs exactly one bound")
        for array in (c, a_ub, b_ub, a_eq, b_eq):
            if not np.isfinite(array).all():
                raise ValueError("Linear program coefficients must be finite")
        object.__setattr__(self, "objective", c)
        object.__setattr__(self, "a_ub", a_ub)
        object.__setattr__(self, "b_ub", b_ub)
        object.__setattr__(self, "a_eq", a_eq)
        object.__setattr__(self, "b_eq", b_eq)

    @classmethod
    def from_rows(
        cls,
        objective: Sequence[float],
        ineq: Sequence[tuple[Sequence[float], float]] = (),
        eq: Sequence[tuple[Sequence[float], float]] = (),
    ) -> LinearProgram:
        """Build a program from (row, bound) pairs."""
        k = len(objective)
        return cls(
            np.asarray(objective, dtype=float),
            np.array([row for row, _ in ineq], dtype=float).reshape(-1, k),
            np.array([bound for _, bound in ineq], dtype=float),
            np.array([row for row, _ in eq], dtype=float).reshape(-1, k),
            np.array([bound for _, bound in eq], dtype=float),
        )

    @property
    def num_vars(self) -> int:
        return self.objective.size

    @property
    def num_ineq(self) -> int:
        return self.a_ub.shape[0]

    @property
    def num_eq(self) -> int:
        return self.a_eq.shape[0]


@dataclass(frozen=True)
class LpSolution:
    """
    The outcome of a solve.

    Attributes:
        status: Optimal, Infeasible or Unbounded.
        x: The optimal point (only when optimal).
        objective_value: c·x at the optimum (only when optimal).
        dual_ineq: Non-negative multipliers y of the inequality rows.
        dual_eq: Multipliers z of the equality rows; c + Aᵀy + Eᵀz = 0 and
            c·x = -(b·y + f·z) at the optimum.
        iterations: Simplex pivots performed.
    """

    status: LpStatus
    x: np.ndarray | None = None
    objective_value: float | None = None
    dual_ineq: np.ndarray | None = None
    dual_eq: np.ndarray | None = None
    iterations: int = 0


def _scale_rows(
    a: np.ndarray, b: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Scale rows to unit max-norm; returns (rows, bounds, scales, kept index)."""
    scales = np.abs(a).max(axis=1) if a.size else np.zeros(a.shape[0])
    kept = np.flatnonzero(scales > 0)
    return a[kept] / scales[kept, None], b[kept] / scales[kept], scales, kept


class _Tableau:
    """Dense simplex tableau; the last row holds reduced costs and -objective."""

    def __init__(self, table: np.ndarray, basis: list[int]):
        self.table = table
        self.basis = basis
        self.iterations = 0

    def pivot(self, row: int, col: int) -> None:
        t = self.table
        t[row] /= t[row, col]
        factors = t[:, col].copy()
        factors[row] = 0.0
        t -= np.multiply.outer(factors, t[row])
        t[:, col] = 0.0
        t[row, col] = 1.0
        self.basis[row] = col
        self.iterations += 1

    def run(self, num_cols: int, max_iterations: int) -> bool:
        """Pivot with Bland's rule until optimal (True) or unbounded (False)."""
        t = self.table
        rows = t.shape[0] - 1
        for _ in range(max_iterations):
            entering = np.flatnonzero(t[-1, :num_cols] < -REDUCED_COST_TOLERANCE)
            if entering.size == 0:
                return True
            col = int(entering[0])
            column = t[:rows, col]
            positive = column > PIVOT_TOLERANCE
            if not positive.any():
                return False
            ratios = np.full(rows, np.inf)
            rhs = np.maximum(t[:rows, -1], 0.0)
            ratios[positive] = rhs[positive] / column[positive]
            best = ratios.min()
            ties = np.flatnonzero(ratios <= best + RATIO_TOLERANCE * (1.0 + best))
            basis = np.asarray(self.basis)
            self.pivot(int(ties[np.argmin(basis[ties])]), col)
        raise NumericalBreakdown(
            f"Simplex did not terminate within {max_iterations} pivots"
        )


def _solve_standard_form(
    m: np.ndarray, d: np.ndarray, rhs: np.ndarray
) -> tuple[LpStatus, np.ndarray, list[int], list[int], int]:
    """
    Solve min d·w s.t. m w = rhs, w ≥ 0 by the two-phase simplex.

    Returns:
        status, w, optimal basis, rows kept after dropping redundant ones, and
        the number of pivots.
    """
    k, num_cols = m.shape
    max_iterations = max(MIN_ITERATIONS, 50 * (num_cols + k))
    signs = np.where(rhs < 0, -1.0, 1.0)

    table = np.zeros((k + 1, num_cols + k + 1))
    table[:k, :num_cols] = m * signs[:, None]
    table[:k, num_cols : num_cols + k] = np.eye(k)
    table[:k, -1] = rhs * signs
    table[-1, :num_cols] = -table[:k, :num_cols].sum(axis=0)
    table[-1, -1] = -table[:k, -1].sum()
    tableau = _Tableau(table, [num_cols + i for i in range(k)])

    tableau.run(num_cols + k, max_iterations)
    infeasibility = -tableau.table[-1, -1]
    scale = 1.0 + float(np.abs(rhs).max(initial=0.0))
    if infeasibility > FEASIBILITY_TOLERANCE * scale:
        return LpStatus.INFEASIBLE, np.zeros(num_cols), [], [], tableau.iterations

    kept: list[int] = []
    for row in range(k):
        if tableau.basis[row] < num_cols:
            kept.append(row)
            continue
        candidates = np.flatnonzero(
            np.abs(tableau.table[row, :num_cols]) > PIVOT_TOLERANCE
        )
        if candidates.size:
            tableau.pivot(row, int(candidates[0]))
            kept.append(row)

    table = np.vstack([tableau.table[kept], tableau.table[-1:]])
    table = np.hstack([table[:, :num_cols], table[:, -1:]])
    basis = [tableau.basis[row] for row in kept]
    costs = d[basis]
    table[-1, :num_cols] = d - (costs[:, None] * table[:-1, :num_cols]).sum(axis=0)
    table[-1, -1] = -(costs * table[:-1, -1]).sum()
    phase_two = _Tableau(table, basis)
    bounded = phase_two.run(num_cols, max_iterations)
    iterations = tableau.iterations + phase_two.iterations
    if not bounded:
        return LpStatus.UNBOUNDED, np.zeros(num_cols), [], kept, iterations

    w = np.zeros(num_cols)
    w[phase_two.basis] = np.maximum(phase_two.table[:-1, -1], 0.0)
    return LpStatus.OPTIMAL, w, list(phase_two.basis), kept, iterations


def solve_lp(lp: LinearProgram) -> LpSolution:
    """
    Solves a linear program to a certified optimal basic solution.

    Identical input, including row order, always yields identical output.

    Args:
        lp: The program to solve.

    Returns:
        The solution, with status Infeasible or Unbounded when no optimum
        exists.
    """
    k = lp.num_vars
    a_ub, b_ub, s_ub, kept_ub = _scale_rows(lp.a_ub, lp.b_ub)
    a_eq, b_eq, s_eq, kept_eq = _scale_rows(lp.a_eq, lp.b_eq)

    # All-zero rows constrain nothing except the bound itself.
    zero_ub = np.setdiff1d(np.arange(lp.num_ineq), kept_ub)
    zero_eq = np.setdiff1d(np.arange(lp.num_eq), kept_eq)
    if (lp.b_ub[zero_ub] < -FEASIBILITY_TOLERANCE).any() or (
        np.abs(lp.b_eq[zero_eq]) > FEASIBILITY_TOLERANCE
    ).any():
        return LpSolution(LpStatus.INFEASIBLE)

    m = np.hstack([a_ub.T, a_eq.T, -a_eq.T]).reshape(k, -1)
    d = np.concatenate([b_ub, b_eq, -b_eq])
    status, w, basis, kept_rows, iterations = _solve_standard_form(
        m, d, -lp.objective
    )

    if status is not LpStatus.OPTIMAL:
        if status is LpStatus.UNBOUNDED:
            logger.debug(
                "Dual unbounded after %d pivots: primal infeasible", iterations
            )
            return LpSolution(LpStatus.INFEASIBLE, iterations=iterations)
        feasibility, *_ = _solve_standard_form(m, d, np.zeros(k))
        primal = (
            LpStatus.INFEASIBLE
            if feasibility is LpStatus.UNBOUNDED
            else LpStatus.UNBOUNDED
        )
        return LpSolution(primal, iterations=iterations)

    x = np.zeros(k)
    if basis:
        system = m[np.ix_(kept_rows, basis)].T
        try:
            x[kept_rows] = np.linalg.solve(system, d[basis])
        except np.linalg.LinAlgError as e:
            raise NumericalBreakdown(f"Optimal basis is singular: {e}") from e

    ub_residual = a_ub @ x - b_ub if a_ub.size else np.zeros(0)
    eq_residual = a_eq @ x - b_eq if a_eq.size else np.zeros(0)
    worst = max(
        float(ub_residual.max(initial=-np.inf)),
        float(np.abs(eq_residual).max(initial=0.0)),
        0.0,
    )
    objective_value = float(lp.objective @ x)
    dual_value = -float(d @ w)
    gap = abs(objective_value - dual_value)
    if worst > FEASIBILITY_TOLERANCE or gap > OBJECTIVE_TOLERANCE * max(
        1.0, abs(objective_value)
    ):
        raise NumericalBreakdown(
            f"Cannot certify optimum: max row violation {worst:.3e}, "
            f"duality gap {gap:.3e}"
        )

    n_ub, n_eq = kept_ub.size, kept_eq.size
    dual_ineq = np.zeros(lp.num_ineq)
    dual_ineq[kept_ub] = w[:n_ub] / s_ub[kept_ub]
    dual_eq = np.zeros(lp.num_eq)
    dual_eq[kept_eq] = (w[n_ub : n_ub + n_eq] - w[n_ub + n_eq :]) / s_eq[kept_eq]

    logger.debug(
        "LP solved: %d vars, %d rows, %d pivots, objective %r",
        k,
        lp.num_ineq + lp.num_eq,
        iterations,
        objective_value,
    )
    if not math.isfinite(objective_value):
        raise NumericalBreakdown("Objective value is not finite")
    return LpSolution(
        LpStatus.OPTIMAL, x, objective_value, dual_ineq, dual_eq, iterations
    )
