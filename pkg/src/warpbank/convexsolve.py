"""Small dense convex solvers used by the prototype-filter design pipeline.

Two problem shapes are needed: a linear program with a single affine
equality row plus elementwise inequality rows, and an equality-constrained
strictly convex quadratic program that has a closed-form solution.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
from scipy.optimize import linprog


class SolverFailure(RuntimeError):
    """Raised when an optimization problem cannot be solved as posed."""


@dataclass
class LinearProgram:
    """minimize cost @ v  s.t.  eq_row @ v == eq_rhs  and  ineq_matrix @ v >= ineq_rhs."""

    cost: np.ndarray
    eq_row: np.ndarray
    eq_rhs: float
    ineq_matrix: np.ndarray
    ineq_rhs: np.ndarray

    def __post_init__(self):
        self.cost = np.asarray(self.cost, dtype=float)
        self.eq_row = np.asarray(self.eq_row, dtype=float)
        self.ineq_matrix = np.asarray(self.ineq_matrix, dtype=float)
        self.ineq_rhs = np.asarray(self.ineq_rhs, dtype=float)
        n = self.cost.size
        if not np.all(np.isfinite(self.cost)):
            raise ValueError("cost vector must be finite")
        if self.eq_row.size != n or self.ineq_matrix.shape[1] != n:
            raise ValueError("inconsistent LP dimensions")
        if self.ineq_rhs.size != self.ineq_matrix.shape[0]:
            raise ValueError("inequality right-hand side has wrong length")


@dataclass
class LPResult:
    status: str  # "optimal" | "infeasible" | "unbounded" | "failed"
    x: np.ndarray = None
    objective: float = np.nan
    eq_residual: float = np.nan
    ineq_violation: float = np.nan
    kkt_residual: float = np.nan
    message: str = ""


def solve_lp(lp, method="highs"):
    """Solve a LinearProgram; `method` selects the scipy HiGHS backend.

    "highs" picks simplex/dual-simplex; "highs-ipm" requests the
    interior-point solver, which lands on the analytic-center face of a
    degenerate optimal set instead of a vertex.
    """
    res = linprog(
        lp.cost,
        A_ub=-lp.ineq_matrix,
        b_ub=-lp.ineq_rhs,
        A_eq=lp.eq_row[None, :],
        b_eq=[lp.eq_rhs],
        bounds=[(None, None)] * lp.cost.size,
        method=method,
    )
    if res.status == 2:
        return LPResult(status="infeasible", message=res.message)
    if res.status == 3:
        return LPResult(status="unbounded", message=res.message)
    if res.status != 0:
        return LPResult(status="failed", message=res.message)
    x = np.asarray(res.x, dtype=float)
    eq_res = abs(lp.eq_row @ x - lp.eq_rhs) / max(1.0, abs(lp.eq_rhs))
    viol = float(np.max(lp.ineq_rhs - lp.ineq_matrix @ x, initial=0.0))
    kkt = _lp_kkt_residual(lp, res)
    return LPResult(
        status="optimal",
        x=x,
        objective=float(lp.cost @ x),
        eq_residual=float(eq_res),
        ineq_violation=viol,
        kkt_residual=kkt,
        message=res.message,
    )


def _lp_kkt_residual(lp, res):
    """Relative stationarity residual from the returned dual variables."""
    try:
        y = float(res.eqlin.marginals[0])
        z = np.asarray(res.ineqlin.marginals, dtype=float)
    except (AttributeError, TypeError, IndexError):
        return np.nan
    # scipy reports marginals for the as-passed (<=) rows; our rows were
    # negated before the call, which flips the inequality duals relative to
    # the equality dual.  Check both orientations of that relative flip so
    # the residual stays meaningful across solver versions.
    scale = max(1.0, float(np.linalg.norm(lp.cost)))
    r1 = lp.cost - y * lp.eq_row + lp.ineq_matrix.T @ z
    r2 = lp.cost + y * lp.eq_row - lp.ineq_matrix.T @ z
    return float(min(np.linalg.norm(r1), np.linalg.norm(r2)) / scale)


@dataclass
class EqualityQP:
    """minimize v @ (quad + ridge*I) @ v  s.t.  lin_constraint @ v == rhs."""

    quad: np.ndarray
    lin_constraint: np.ndarray
    rhs: float = 1.0
    ridge: float = 0.0

    def __post_init__(self):
        self.quad = np.asarray(self.quad, dtype=float)
        self.lin_constraint = np.asarray(self.lin_constraint, dtype=float)
        if self.quad.shape[0] != self.quad.shape[1]:
            raise ValueError("quadratic term must be square")
        if np.max(np.abs(self.quad - self.quad.T)) > 1e-12 * max(1.0, np.max(np.abs(self.quad))):
            raise ValueError("quadratic term must be symmetric")
        if self.lin_constraint.size != self.quad.shape[0]:
            raise ValueError("constraint vector has wrong length")
        if self.ridge < 0:
            raise ValueError("ridge must be nonnegative")


def solve_eq_qp(qp):
    """Closed-form solution v = lam * (quad + ridge*I)^-1 @ h with h @ v = rhs."""
    h = qp.lin_constraint
    if not np.any(h):
        raise SolverFailure("equality constraint vector is zero")
    A = qp.quad + qp.ridge * np.eye(qp.quad.shape[0])
    try:
        cho = sla.cho_factor(0.5 * (A + A.T))
    except np.linalg.LinAlgError as exc:
        raise SolverFailure("quadratic term is singular; increase the ridge") from exc
    v = sla.cho_solve(cho, h)
    denom = float(h @ v)
    if denom <= 0 or not np.isfinite(denom):
        raise SolverFailure("constraint direction lies in the null space of the quadratic term")
    return qp.rhs * v / denom


def eq_qp_kkt_residual(qp, v):
    """Relative KKT residual ||(quad + ridge*I) v - lam*h|| / ||h|| of a candidate solution."""
    h = qp.lin_constraint
    A = qp.quad + qp.ridge * np.eye(qp.quad.shape[0])
    grad = A @ v
    lam = float(h @ grad) / float(h @ h)
    return float(np.linalg.norm(grad - lam * h) / np.linalg.norm(h))
