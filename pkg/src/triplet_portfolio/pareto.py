"""Closed-form constrained mean-variance-persistence optimum.

The program solved here maximizes w'R - gamma * w'Cw over weights that
spend the whole budget (1'w = 1) and keep the blended persistence at or
above the random-walk level (w'H >= 1/2). Activity of the persistence
constraint is resolved in two stages:

  (a) solve with the budget equality alone; if that optimum already has
      w'H >= 1/2 the constraint is slack and its multiplier is zero;
  (b) otherwise both constraints bind and the multipliers come from the
      2x2 system assembled from the quadratic forms H'C^-1 H, H'C^-1 1
      and 1'C^-1 1.

Nonnegativity of individual weights is deliberately not imposed: the
solution reports a `feasible_on_simplex` flag instead, and callers fall
back to a grid search when it is False.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError, SingularMatrixError
from .returns import StatisticsBundle
from .validation import SIMPLEX_TOL, as_readonly

MAX_CONDITION_NUMBER = 1e12


@dataclass(frozen=True)
class QMatrix:
    """2x2 matrix of the quadratic forms that price the two constraints."""

    entries: np.ndarray
    det: float

    def __post_init__(self):
        object.__setattr__(self, "entries", as_readonly(self.entries))

    @property
    def h_inv_h(self) -> float:
        return float(self.entries[0, 0])

    @property
    def h_inv_one(self) -> float:
        return float(self.entries[0, 1])

    @property
    def one_inv_one(self) -> float:
        return float(self.entries[1, 1])


@dataclass(frozen=True)
class KktReport:
    """Residual magnitudes of the first-order optimality conditions.

    stationarity: max-abs entry of R - 2*gamma*Cw + lambda1*H + lambda2*1.
    budget: |1'w - 1|.
    hurst_slack: w'H - 1/2 (feasible when >= -tol).
    complementary_slackness: |lambda1 * (w'H - 1/2)|.
    dual_feasibility: lambda1 (feasible when >= -tol).
    """

    stationarity: float
    budget: float
    hurst_slack: float
    complementary_slackness: float
    dual_feasibility: float
    tol: float

    @property
    def satisfied(self) -> bool:
        return (
            self.stationarity <= self.tol
            and self.budget <= self.tol
            and self.hurst_slack >= -self.tol
            and self.complementary_slackness <= self.tol
            and self.dual_feasibility >= -self.tol
        )

    @property
    def max_residual(self) -> float:
        return max(
            self.stationarity,
            self.budget,
            max(0.0, -self.hurst_slack),
            self.complementary_slackness,
            max(0.0, -self.dual_feasibility),
        )


@dataclass(frozen=True)
class ParetoSolution:
    """Closed-form optimal weight with multipliers and diagnostics.

    The raw weight may carry negative entries; `feasible_on_simplex`
    records whether it is usable as an actual allocation.
    """

    weight: np.ndarray
    lambda1: float
    lambda2: float
    constraint_active: bool
    kkt_residuals: KktReport
    feasible_on_simplex: bool
    objective: float
    risk_aversion: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "weight", as_readonly(self.weight))


def _solve_against(stats: StatisticsBundle, rhs: np.ndarray) -> np.ndarray:
    cond = np.linalg.cond(stats.covariance)
    if not np.isfinite(cond) or cond >= MAX_CONDITION_NUMBER:
        raise SingularMatrixError(
            f"covariance is singular or near-singular (condition number {cond:.3e})"
        )
    return np.linalg.solve(stats.covariance, rhs)


def assemble_q(stats: StatisticsBundle) -> QMatrix:
    """Quadratic forms H'C^-1 H, H'C^-1 1, 1'C^-1 H, 1'C^-1 1.

    Computed through linear solves, one per right-hand side; the
    covariance is never inverted explicitly.
    """
    ones = np.ones(stats.n_assets)
    solved = _solve_against(stats, np.column_stack([stats.hurst, ones]))
    x_h, x_1 = solved[:, 0], solved[:, 1]
    q = np.array(
        [
            [stats.hurst @ x_h, stats.hurst @ x_1],
            [ones @ x_h, ones @ x_1],
        ]
    )
    if abs(q[0, 1] - q[1, 0]) > 1e-10 * max(1.0, abs(q[0, 1])):
        raise SingularMatrixError(
            f"constraint matrix asymmetry {abs(q[0, 1] - q[1, 0]):.3e} signals "
            "an unstable covariance solve"
        )
    det = float(q[0, 0] * q[1, 1] - q[0, 1] * q[1, 0])
    scale = max(abs(q[0, 0] * q[1, 1]), abs(q[0, 1] * q[1, 0]), 1e-300)
    if abs(det) <= 1e-12 * scale:
        raise SingularMatrixError(
            "constraint matrix is singular (persistence vector is parallel to "
            "the budget vector); the binding-case multipliers are undefined"
        )
    return QMatrix(entries=q, det=det)


def lagrange_multipliers(
    stats: StatisticsBundle, q: QMatrix, risk_aversion: float = 1.0
) -> tuple[float, float]:
    """Multipliers of the fully binding case, by the explicit 2x2 adjugate."""
    gamma = float(risk_aversion)
    ones = np.ones(stats.n_assets)
    x_r = _solve_against(stats, stats.mean_returns)
    alpha = gamma - float(stats.hurst @ x_r)
    beta = 2.0 * gamma - float(ones @ x_r)
    lam1 = (alpha * q.one_inv_one - beta * q.h_inv_one) / q.det
    lam2 = (-alpha * q.h_inv_one + beta * q.h_inv_h) / q.det
    return float(lam1), float(lam2)


def pareto_weight(stats: StatisticsBundle, risk_aversion: float = 1.0) -> ParetoSolution:
    """Closed-form optimum of w'R - gamma*w'Cw under budget and persistence.

    Stage (a) tries the persistence constraint as slack; stage (b)
    solves the fully binding system. The returned solution always
    carries KKT residuals and a simplex-feasibility flag.
    """
    gamma = float(risk_aversion)
    if gamma <= 0.0:
        raise DataError(f"risk_aversion must be positive, got {risk_aversion}")
    n = stats.n_assets
    ones = np.ones(n)

    if n == 1:
        # The budget constraint pins the weight regardless of the data.
        weight = np.array([1.0])
        lam2 = float(2.0 * gamma * stats.covariance[0, 0] - stats.mean_returns[0])
        return _finalize(stats, weight, 0.0, lam2, active=False, gamma=gamma)

    x_r = _solve_against(stats, stats.mean_returns)
    x_1 = _solve_against(stats, ones)

    # Stage (a): persistence slack, budget pins lambda2.
    lam2 = (2.0 * gamma - float(ones @ x_r)) / float(ones @ x_1)
    weight = (x_r + lam2 * x_1) / (2.0 * gamma)
    if float(weight @ stats.hurst) >= 0.5:
        return _finalize(stats, weight, 0.0, lam2, active=False, gamma=gamma)

    # Stage (b): both constraints bind.
    q = assemble_q(stats)
    lam1, lam2 = lagrange_multipliers(stats, q, risk_aversion=gamma)
    x_h = _solve_against(stats, stats.hurst)
    weight = (x_r + lam1 * x_h + lam2 * x_1) / (2.0 * gamma)
    return _finalize(stats, weight, lam1, lam2, active=True, gamma=gamma)


def _finalize(
    stats: StatisticsBundle,
    weight: np.ndarray,
    lam1: float,
    lam2: float,
    active: bool,
    gamma: float,
) -> ParetoSolution:
    objective = float(weight @ stats.mean_returns - gamma * (weight @ stats.covariance @ weight))
    solution = ParetoSolution(
        weight=weight,
        lambda1=lam1,
        lambda2=lam2,
        constraint_active=active,
        kkt_residuals=_residuals(weight, lam1, lam2, stats, gamma, tol=SIMPLEX_TOL),
        feasible_on_simplex=bool(np.all(weight >= -SIMPLEX_TOL)),
        objective=objective,
        risk_aversion=gamma,
    )
    return solution


def _residuals(
    weight: np.ndarray,
    lam1: float,
    lam2: float,
    stats: StatisticsBundle,
    gamma: float,
    tol: float,
) -> KktReport:
    ones = np.ones(stats.n_assets)
    grad = (
        stats.mean_returns
        - 2.0 * gamma * (stats.covariance @ weight)
        + lam1 * stats.hurst
        + lam2 * ones
    )
    slack = float(weight @ stats.hurst) - 0.5
    return KktReport(
        stationarity=float(np.max(np.abs(grad))),
        budget=abs(float(weight @ ones) - 1.0),
        hurst_slack=slack,
        complementary_slackness=abs(lam1 * slack),
        dual_feasibility=lam1,
        tol=tol,
    )


def kkt_verify(solution: ParetoSolution, stats: StatisticsBundle, tol: float = 1e-9) -> KktReport:
    """Recompute first-order residuals for a solution against a bundle.

    Diagnostic only: a violated condition shows up as a residual, never
    as an exception.
    """
    weight = np.asarray(solution.weight, dtype=float)
    if weight.size != stats.n_assets:
        raise DataError(
            f"solution has {weight.size} weights for {stats.n_assets} assets"
        )
    return _residuals(
        weight, solution.lambda1, solution.lambda2, stats, solution.risk_aversion, tol
    )
