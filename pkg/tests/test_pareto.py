import numpy as np
import pytest

from triplet_portfolio import (
    DataError,
    SingularMatrixError,
    StatisticsBundle,
    assemble_q,
    enumerate_simplex,
    kkt_verify,
    lagrange_multipliers,
    pareto_weight,
)
from triplet_portfolio.pareto import ParetoSolution


def bundle(r, c, h, tau=1):
    return StatisticsBundle(
        mean_returns=np.asarray(r, dtype=float),
        covariance=np.asarray(c, dtype=float),
        hurst=np.asarray(h, dtype=float),
        interval_days=tau,
    )


def random_instance(rng, n=3, a_scale=1.0, r_scale=0.02):
    a = rng.normal(size=(n, n)) * a_scale
    return bundle(
        rng.normal(size=n) * r_scale,
        a.T @ a + 0.1 * np.eye(n),
        rng.uniform(0.3, 0.7, size=n),
    )


class TestAssembleQ:
    def test_hand_quadratic_forms(self):
        q = assemble_q(bundle([0.0, 0.0], np.eye(2), [0.4, 0.6]))
        np.testing.assert_allclose(q.entries, [[0.52, 1.0], [1.0, 2.0]], atol=1e-12)
        assert q.det == pytest.approx(0.04, abs=1e-12)

    def test_scaling_covariance_halves_entries(self):
        q = assemble_q(bundle([0.0, 0.0], 2.0 * np.eye(2), [0.4, 0.6]))
        np.testing.assert_allclose(q.entries, [[0.26, 0.5], [0.5, 1.0]], atol=1e-12)

    def test_persistence_parallel_to_budget_is_singular(self):
        with pytest.raises(SingularMatrixError, match="parallel"):
            assemble_q(bundle([0.0, 0.0, 0.0], np.eye(3), [1.0 - 1e-12] * 3))

    def test_near_singular_covariance_rejected(self):
        c = np.array([[1.0, 1.0 - 1e-14], [1.0 - 1e-14, 1.0]])
        with pytest.raises(SingularMatrixError, match="condition"):
            assemble_q(bundle([0.0, 0.0], c, [0.4, 0.6]))


class TestLagrangeMultipliers:
    def test_hand_cramer_solve(self):
        stats = bundle([0.2, 0.1], np.eye(2), [0.4, 0.6])
        lam1, lam2 = lagrange_multipliers(stats, assemble_q(stats))
        assert lam1 == pytest.approx(0.5, abs=1e-12)
        assert lam2 == pytest.approx(0.6, abs=1e-12)

    def test_zero_returns(self):
        stats = bundle([0.0, 0.0], np.eye(2), [0.4, 0.6])
        lam1, lam2 = lagrange_multipliers(stats, assemble_q(stats))
        assert lam1 == pytest.approx(0.0, abs=1e-12)
        assert lam2 == pytest.approx(1.0, abs=1e-12)

    def test_multipliers_scale_linearly_with_covariance(self):
        # With R = 0 the right-hand side (alpha, beta) is fixed, so
        # scaling C by c scales both multipliers by c.
        h = [0.35, 0.55, 0.62]
        base = bundle([0.0, 0.0, 0.0], np.diag([1.0, 2.0, 0.5]), h)
        doubled = bundle([0.0, 0.0, 0.0], 2.0 * np.diag([1.0, 2.0, 0.5]), h)
        l1a, l2a = lagrange_multipliers(base, assemble_q(base))
        l1b, l2b = lagrange_multipliers(doubled, assemble_q(doubled))
        assert l1b == pytest.approx(2.0 * l1a, rel=1e-10)
        assert l2b == pytest.approx(2.0 * l2a, rel=1e-10)


class TestParetoWeight:
    def test_binding_case(self):
        sol = pareto_weight(bundle([0.2, 0.1], np.eye(2), [0.4, 0.6]))
        np.testing.assert_allclose(sol.weight, [0.5, 0.5], atol=1e-12)
        assert sol.lambda1 == pytest.approx(0.5, abs=1e-12)
        assert sol.lambda2 == pytest.approx(0.6, abs=1e-12)
        assert sol.constraint_active
        assert sol.feasible_on_simplex
        assert sol.kkt_residuals.max_residual < 1e-10

    def test_slack_case(self):
        sol = pareto_weight(bundle([0.1, 0.2], np.eye(2), [0.6, 0.6]))
        # 1-D calculus on the substituted objective -0.8 + 1.9a - 2a^2
        # puts the optimum at a = 1.9/4.
        a_star = 1.9 / 4.0
        np.testing.assert_allclose(sol.weight, [a_star, 1.0 - a_star], atol=1e-12)
        assert sol.lambda1 == 0.0
        assert sol.lambda2 == pytest.approx(0.85, abs=1e-12)
        assert not sol.constraint_active
        assert sol.kkt_residuals.complementary_slackness == 0.0

    def test_single_asset_budget_dominates(self):
        for h in (0.3, 0.7):
            sol = pareto_weight(bundle([0.4], [[2.0]], [h]))
            np.testing.assert_allclose(sol.weight, [1.0])
            assert sol.lambda1 == 0.0
            assert not sol.constraint_active
            assert sol.kkt_residuals.stationarity < 1e-12

    def test_single_asset_reports_unreachable_constraint(self):
        sol = pareto_weight(bundle([0.1], [[1.0]], [0.3]))
        np.testing.assert_allclose(sol.weight, [1.0])
        assert sol.kkt_residuals.hurst_slack == pytest.approx(-0.2)

    def test_objective_value(self):
        stats = bundle([0.2, 0.1], np.eye(2), [0.4, 0.6])
        sol = pareto_weight(stats)
        assert sol.objective == pytest.approx(0.15 - 0.5, abs=1e-12)

    def test_risk_aversion_changes_tradeoff(self):
        stats = bundle([0.1, 0.2], np.eye(2), [0.6, 0.6])
        mild = pareto_weight(stats, risk_aversion=1.0)
        harsh = pareto_weight(stats, risk_aversion=10.0)
        spread = lambda w: abs(w[0] - w[1])
        assert spread(harsh.weight) < spread(mild.weight)
        assert harsh.kkt_residuals.stationarity < 1e-10

    def test_invalid_risk_aversion(self):
        with pytest.raises(DataError, match="positive"):
            pareto_weight(bundle([0.1], [[1.0]], [0.5]), risk_aversion=0.0)


class TestKktVerify:
    def test_perturbed_weight_reports_residual(self):
        stats = bundle([0.2, 0.1], np.eye(2), [0.4, 0.6])
        good = pareto_weight(stats)
        perturbed = ParetoSolution(
            weight=np.array([0.6, 0.4]),
            lambda1=good.lambda1,
            lambda2=good.lambda2,
            constraint_active=True,
            kkt_residuals=good.kkt_residuals,
            feasible_on_simplex=True,
            objective=0.0,
        )
        report = kkt_verify(perturbed, stats, tol=1e-9)
        assert report.stationarity > 0.0
        assert not report.satisfied

    def test_solution_passes_its_own_verification(self):
        stats = bundle([0.2, 0.1], np.eye(2), [0.4, 0.6])
        sol = pareto_weight(stats)
        report = kkt_verify(sol, stats, tol=1e-9)
        assert report.satisfied

    def test_dimension_mismatch(self):
        stats = bundle([0.2, 0.1, 0.3], np.eye(3), [0.4, 0.6, 0.5])
        sol = pareto_weight(bundle([0.2, 0.1], np.eye(2), [0.4, 0.6]))
        with pytest.raises(DataError, match="weights"):
            kkt_verify(sol, stats)


class TestSolverProperties:
    def test_budget_exactness(self):
        rng = np.random.default_rng(7)
        for _ in range(25):
            sol = pareto_weight(random_instance(rng))
            assert abs(sol.weight.sum() - 1.0) <= 1e-9

    def test_complementary_slackness(self):
        rng = np.random.default_rng(8)
        for _ in range(25):
            sol = pareto_weight(random_instance(rng))
            assert sol.kkt_residuals.complementary_slackness < 1e-9

    def test_dual_feasibility(self):
        rng = np.random.default_rng(9)
        for _ in range(25):
            sol = pareto_weight(random_instance(rng))
            assert sol.lambda1 >= -1e-12

    def test_equal_slack_hurst_reduces_to_mean_variance(self):
        # Independent oracle: assemble the equality-constrained KKT system
        # [2C 1; 1' 0] and solve it directly.
        rng = np.random.default_rng(10)
        for _ in range(10):
            a = rng.normal(size=(3, 3))
            c = a.T @ a + 0.1 * np.eye(3)
            r = rng.normal(size=3) * 0.05
            stats = bundle(r, c, [0.6, 0.6, 0.6])
            sol = pareto_weight(stats)
            assert not sol.constraint_active
            system = np.zeros((4, 4))
            system[:3, :3] = 2.0 * c
            system[:3, 3] = -1.0
            system[3, :3] = 1.0
            rhs = np.concatenate([r, [1.0]])
            direct = np.linalg.solve(system, rhs)[:3]
            np.testing.assert_allclose(sol.weight, direct, atol=1e-12)

    def test_weight_invariant_to_uniform_return_shift(self):
        rng = np.random.default_rng(11)
        for _ in range(10):
            stats = random_instance(rng)
            shifted = bundle(
                stats.mean_returns + 0.37, stats.covariance, stats.hurst
            )
            w0 = pareto_weight(stats).weight
            w1 = pareto_weight(shifted).weight
            np.testing.assert_allclose(w0, w1, atol=1e-10)

    def test_scipy_oracle_agreement(self):
        # Cross-check against an entirely different algorithm (SLSQP) on
        # instances whose closed form stays on the simplex.
        from scipy.optimize import minimize

        rng = np.random.default_rng(12)
        checked = 0
        while checked < 10:
            stats = random_instance(rng)
            sol = pareto_weight(stats)
            if not sol.feasible_on_simplex:
                continue
            checked += 1
            r, c, h = stats.mean_returns, stats.covariance, stats.hurst
            res = minimize(
                lambda x: -(r @ x - x @ c @ x),
                np.full(3, 1 / 3),
                method="SLSQP",
                constraints=[
                    {"type": "eq", "fun": lambda x: x.sum() - 1.0},
                    {"type": "ineq", "fun": lambda x: h @ x - 0.5},
                ],
                bounds=[(0.0, 1.0)] * 3,
                options={"ftol": 1e-14, "maxiter": 500},
            )
            assert res.success
            np.testing.assert_allclose(sol.weight, res.x, atol=5e-6)

    def test_closed_form_dominates_feasible_grid(self):
        # Optimality certificate: no grid point satisfying the persistence
        # constraint scores above the closed form.
        grid = enumerate_simplex(3, 100)
        rng = np.random.default_rng(13)
        checked = 0
        while checked < 25:
            stats = random_instance(rng)
            sol = pareto_weight(stats)
            if not sol.feasible_on_simplex:
                continue
            feasible = grid.points @ stats.hurst >= 0.5 - 1e-12
            if not feasible.any():
                continue
            checked += 1
            objective = grid.points @ stats.mean_returns - np.einsum(
                "ij,jk,ik->i", grid.points, stats.covariance, grid.points
            )
            assert objective[feasible].max() <= sol.objective + 1e-9

    def test_grid_location_within_conditioning_bound_when_slack(self):
        # With the constraint slack the optimum is interior, and the grid
        # argmax can drift along the objective's flat valley by at most
        # about sqrt(cond(C)) grid steps: the nearest lattice point loses
        # at most lam_max * step^2 while a point at distance d loses at
        # least lam_min * d^2.
        grid = enumerate_simplex(3, 100)
        rng = np.random.default_rng(14)
        checked = 0
        while checked < 15:
            stats = random_instance(rng)
            sol = pareto_weight(stats)
            if sol.constraint_active or not sol.feasible_on_simplex:
                continue
            feasible = grid.points @ stats.hurst >= 0.5 - 1e-12
            if not feasible.any():
                continue
            checked += 1
            objective = grid.points @ stats.mean_returns - np.einsum(
                "ij,jk,ik->i", grid.points, stats.covariance, grid.points
            )
            best = grid.points[np.argmax(np.where(feasible, objective, -np.inf))]
            eigs = np.linalg.eigvalsh(stats.covariance)
            bound = grid.step * (1.0 + np.sqrt(eigs[-1] / eigs[0]))
            assert np.linalg.norm(best - sol.weight) <= bound
