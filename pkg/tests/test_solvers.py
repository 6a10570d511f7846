"""Conic solvers against independent optimizers and closed forms."""

import numpy as np
import pytest

from _oracles import (
    bp_linprog,
    box_ls_grid,
    box_ls_reference,
    pos_p1_nlp,
    pos_p1_single_grid,
    socl1_penalized_bisect,
)
from perturbcs import (
    ROLE_ENSEMBLE,
    BoxLsProblem,
    SocL1Problem,
    SolverOptions,
    gen_gaussian_ensemble,
    gen_signal,
    solve_box_ls,
    solve_pos_p1,
    solve_relaxed,
    solve_socl1,
)


def _instance(master, i, m=8, n=12, k=2, r=0.1, kind="unit-spikes"):
    ens = gen_gaussian_ensemble(m, n, r, (master, i, ROLE_ENSEMBLE))
    x_o = gen_signal(n, k, kind=kind, seed=(master, i, 1))
    return ens, x_o


class TestSocL1:
    def test_matches_lp_noise_free(self):
        for i in range(12):
            ens, x_o = _instance(21, i)
            y = ens.A @ x_o
            res = solve_socl1(SocL1Problem(ens.A, y, 0.0))
            assert res.status == "optimal"
            ref = bp_linprog(ens.A, y)
            assert np.max(np.abs(res.x - ref)) < 1e-7

    def test_matches_penalized_reference_noisy(self):
        for i in range(6):
            ens, x_o = _instance(22, i, m=10, n=14, k=3)
            rng = np.random.default_rng(100 + i)
            e = rng.standard_normal(10)
            e *= 0.3 / np.linalg.norm(e)
            y = ens.A @ x_o + e
            res = solve_socl1(SocL1Problem(ens.A, y, 0.3))
            ref = socl1_penalized_bisect(ens.A, y, 0.3)
            ref_l1 = float(np.sum(np.abs(ref)))
            assert abs(res.objective - ref_l1) < 1e-5
            assert np.max(np.abs(res.x - ref)) < 1e-4
            assert np.linalg.norm(y - ens.A @ res.x) <= 0.3 * (1 + 1e-8) + 1e-8

    def test_zero_data_short_circuit(self):
        ens, _ = _instance(23, 0)
        y = np.zeros(8)
        res = solve_socl1(SocL1Problem(ens.A, y, 0.5))
        assert res.status == "optimal"
        assert np.array_equal(res.x, np.zeros(12))
        assert res.iterations == 0

    def test_small_data_inside_ball(self):
        ens, _ = _instance(23, 1)
        y = np.full(8, 1e-3)
        res = solve_socl1(SocL1Problem(ens.A, y, 0.5))
        assert np.array_equal(res.x, np.zeros(12))

    def test_infeasible_status(self):
        # y outside the range of a rank-1 matrix and epsilon too small
        M = np.zeros((4, 3))
        M[0, :] = 1.0
        y = np.array([0.0, 2.0, 0.0, 0.0])
        res = solve_socl1(SocL1Problem(M, y, 0.5))
        assert res.status == "infeasible"

    def test_feasibility_at_epsilon(self):
        ens, x_o = _instance(24, 0, m=10, n=15, k=3)
        y = ens.A @ x_o
        for eps in (0.05, 0.2, 0.8):
            res = solve_socl1(SocL1Problem(ens.A, y, eps))
            resid = float(np.linalg.norm(y - ens.A @ res.x))
            assert resid <= eps * (1 + 1e-6) + 1e-9
            assert res.objective <= np.sum(np.abs(x_o)) + 1e-8

    def test_objective_decreases_with_epsilon(self):
        ens, x_o = _instance(24, 1, m=10, n=15, k=3)
        y = ens.A @ x_o
        values = [
            solve_socl1(SocL1Problem(ens.A, y, eps)).objective
            for eps in (0.0, 0.1, 0.5, 1.0)
        ]
        assert all(a >= b - 1e-9 for a, b in zip(values, values[1:]))

    def test_complex_data(self):
        rng = np.random.default_rng(9)
        M = rng.standard_normal((8, 12)) + 1j * rng.standard_normal((8, 12))
        M /= np.linalg.norm(M, axis=0, keepdims=True)
        x_o = np.zeros(12, dtype=complex)
        x_o[[2, 7]] = [1.0 + 1.0j, -2.0j]
        y = M @ x_o
        res = solve_socl1(SocL1Problem(M, y, 1e-6))
        assert np.linalg.norm(y - M @ res.x) <= 1e-6 * (1 + 1e-8) + 1e-8
        assert res.objective <= np.sum(np.abs(x_o)) + 1e-6

    def test_orthonormal_square_exact(self):
        rng = np.random.default_rng(14)
        Q, _ = np.linalg.qr(rng.standard_normal((9, 9)))
        y = rng.standard_normal(9)
        res = solve_socl1(SocL1Problem(Q, y, 0.0))
        assert np.max(np.abs(res.x - Q.T @ y)) < 1e-8

    def test_constraint_active_at_optimum(self):
        # with ||y|| > epsilon the ball constraint binds at the optimum
        ens, x_o = _instance(26, 0, m=10, n=15, k=3)
        y = ens.A @ x_o
        res = solve_socl1(SocL1Problem(ens.A, y, 0.4))
        resid = float(np.linalg.norm(y - ens.A @ res.x))
        assert resid == pytest.approx(0.4, abs=1e-6)

    def test_warm_start_agrees(self):
        ens, x_o = _instance(25, 0)
        y = ens.A @ x_o
        cold = solve_socl1(SocL1Problem(ens.A, y, 0.1))
        warm = solve_socl1(SocL1Problem(ens.A, y, 0.1), x0=cold.x,
                           uw0=cold.diagnostics.get("uw"))
        assert abs(warm.objective - cold.objective) < 1e-7

    def test_negative_epsilon_rejected(self):
        ens, _ = _instance(25, 1)
        with pytest.raises(ValueError):
            SocL1Problem(ens.A, np.zeros(8), -0.1)


class TestSolveBoxLs:
    def test_matches_grid_search_scalar(self):
        rng = np.random.default_rng(31)
        for i in range(50):
            column = rng.standard_normal((5, 1))
            radius = float(rng.uniform(0.05, 1.0))
            target = column[:, 0] * rng.uniform(-2, 2) + \
                0.1 * rng.standard_normal(5)
            res = solve_box_ls(BoxLsProblem(column, target, radius))
            ref = box_ls_grid(column, target, radius)
            assert abs(float(res.x[0]) - ref) < 1e-4

    def test_matches_bounded_least_squares(self):
        rng = np.random.default_rng(32)
        for i in range(8):
            M = rng.standard_normal((12, 5))
            target = rng.standard_normal(12)
            res = solve_box_ls(BoxLsProblem(M, target, 0.4))
            ref = box_ls_reference(M, target, 0.4)
            assert np.max(np.abs(res.x - ref)) < 1e-6

    def test_interior_solution_is_least_squares(self):
        rng = np.random.default_rng(33)
        M = rng.standard_normal((10, 3))
        beta_true = np.array([0.05, -0.1, 0.02])
        target = M @ beta_true
        res = solve_box_ls(BoxLsProblem(M, target, 1.0))
        assert np.max(np.abs(res.x - beta_true)) < 1e-8

    def test_clamps_to_box(self):
        M = np.eye(3)
        target = np.array([5.0, -5.0, 0.1])
        res = solve_box_ls(BoxLsProblem(M, target, 0.5))
        assert np.array_equal(np.abs(res.x) <= 0.5 + 1e-15, [True] * 3)
        assert res.x[0] == pytest.approx(0.5, abs=1e-10)
        assert res.x[1] == pytest.approx(-0.5, abs=1e-10)
        assert res.x[2] == pytest.approx(0.1, abs=1e-10)

    def test_zero_column_convention(self):
        M = np.zeros((4, 2))
        M[:, 1] = [1.0, 0.0, 0.0, 0.0]
        target = np.array([1.0, 0.0, 0.0, 0.0])
        res = solve_box_ls(BoxLsProblem(M, target, 0.5))
        assert res.x[0] == 0.0
        assert res.x[1] == pytest.approx(0.5, abs=1e-10)

    def test_objective_is_squared_residual(self):
        rng = np.random.default_rng(34)
        M = rng.standard_normal((6, 2))
        target = rng.standard_normal(6)
        res = solve_box_ls(BoxLsProblem(M, target, 0.3))
        assert res.objective == pytest.approx(
            float(np.linalg.norm(target - M @ res.x)) ** 2, rel=1e-10
        )

    def test_single_column_clamp_formula(self):
        rng = np.random.default_rng(35)
        for i in range(10):
            col = rng.standard_normal((7, 1))
            target = rng.standard_normal(7)
            radius = float(rng.uniform(0.05, 0.8))
            res = solve_box_ls(BoxLsProblem(col, target, radius))
            closed = float(np.clip(col[:, 0] @ target / (col[:, 0] @ col[:, 0]),
                                   -radius, radius))
            assert abs(float(res.x[0]) - closed) < 1e-8

    def test_negative_radius_rejected(self):
        with pytest.raises(ValueError):
            BoxLsProblem(np.eye(2), np.zeros(2), -0.1)

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ValueError):
            BoxLsProblem(np.eye(2), np.zeros(3), 0.1)


class TestSolvePosP1:
    def test_matches_nlp(self):
        for i in range(4):
            ens, x_o = _instance(41, i, m=10, n=12, k=2,
                                 kind="positive-spikes")
            rng = np.random.default_rng(200 + i)
            beta_o = rng.uniform(-0.1, 0.1, 12)
            e = rng.standard_normal(10)
            e *= 0.2 / np.linalg.norm(e)
            y = ens.perturbed(beta_o) @ x_o + e
            res = solve_pos_p1(ens, y, 0.2)
            x_ref, _ = pos_p1_nlp(ens, y, 0.2)
            assert res.objective <= float(np.sum(x_ref)) + 1e-5
            assert np.min(res.x) >= -1e-12
            assert np.max(np.abs(res.p) - 0.1 * np.abs(res.x)) <= 1e-9

    def test_exact_recovery_noise_free(self):
        ens, x_o = _instance(42, 0, m=10, n=14, k=2, kind="positive-spikes")
        rng = np.random.default_rng(77)
        beta_o = rng.uniform(-0.1, 0.1, 14)
        y = ens.perturbed(beta_o) @ x_o
        res = solve_pos_p1(ens, y, 0.0)
        assert np.max(np.abs(res.x - x_o)) < 1e-6
        support = x_o > 0
        assert np.max(np.abs(res.p[support] - beta_o[support] * x_o[support])) < 1e-5

    def test_cone_constraint_enforced(self):
        ens, x_o = _instance(43, 0, m=8, n=10, k=2, kind="positive-spikes")
        y = ens.A @ x_o
        res = solve_pos_p1(ens, y, 0.1)
        assert np.all(np.abs(res.p) <= 0.1 * res.x + 1e-12)

    def test_complex_rejected(self):
        ens, x_o = _instance(43, 1, m=8, n=10, k=2, kind="positive-spikes")
        y = (ens.A @ x_o).astype(complex)
        y[0] += 1j
        with pytest.raises(ValueError):
            solve_pos_p1(ens, y, 0.1)

    def test_zero_data_zero_solution(self):
        ens, _ = _instance(44, 0, m=8, n=10, k=2, kind="positive-spikes")
        res = solve_pos_p1(ens, np.zeros(8), 0.0)
        assert np.array_equal(res.x, np.zeros(10))
        assert np.array_equal(res.p, np.zeros(10))

    def test_single_support_grid_oracle(self):
        # instance chosen so the optimum is supported on one coordinate,
        # which is the regime the 1-sparse grid reference covers
        ens, _ = _instance(57, 0, m=4, n=6, k=1, kind="positive-spikes")
        x_o = np.zeros(6)
        x_o[3] = 1.5
        rng = np.random.default_rng(300)
        beta_o = rng.uniform(-0.1, 0.1, 6)
        y = ens.perturbed(beta_o) @ x_o
        res = solve_pos_p1(ens, y, 0.05)
        assert int(np.sum(res.x > 1e-6)) == 1
        ref = pos_p1_single_grid(ens, y, 0.05, points=1201)
        assert res.objective <= ref + 1e-9
        assert abs(res.objective - ref) < 2e-3


class TestSolveRelaxed:
    def test_returns_difference_of_parts(self):
        ens, x_o = _instance(51, 0, m=10, n=14, k=2)
        rng = np.random.default_rng(88)
        beta_o = rng.uniform(-0.1, 0.1, 14)
        e = rng.standard_normal(10)
        e *= 0.1 / np.linalg.norm(e)
        y = ens.perturbed(beta_o) @ x_o + e
        res = solve_relaxed(ens, y, 0.1)
        assert np.allclose(res.x, res.x_pos - res.x_neg, atol=1e-12)
        assert np.min(res.x_pos) >= -1e-12
        assert np.min(res.x_neg) >= -1e-12
        assert "complementarity_defect" in res.diagnostics

    def test_positive_instance_small_defect(self):
        ens, x_o = _instance(52, 0, m=12, n=14, k=2, kind="positive-spikes")
        rng = np.random.default_rng(89)
        beta_o = rng.uniform(-0.1, 0.1, 14)
        y = ens.perturbed(beta_o) @ x_o
        res = solve_relaxed(ens, y, 1e-8)
        assert res.diagnostics["complementarity_defect"] < 1e-6

    def test_zero_radius_reduces_to_bpdn(self):
        ens, x_o = _instance(53, 0, m=10, n=14, k=2, r=0.0)
        rng = np.random.default_rng(91)
        e = rng.standard_normal(10)
        e *= 0.2 / np.linalg.norm(e)
        y = ens.A @ x_o + e
        relaxed = solve_relaxed(ens, y, 0.2)
        plain = solve_socl1(SocL1Problem(ens.A, y, 0.2))
        assert abs(relaxed.objective - plain.objective) < 1e-6

    def test_zero_data_zero_solution(self):
        ens, _ = _instance(54, 0, m=8, n=10, k=2)
        res = solve_relaxed(ens, np.zeros(8), 0.0)
        assert np.array_equal(res.x, np.zeros(10))


class TestSolverOptions:
    def test_defaults(self):
        opts = SolverOptions()
        assert opts.abs_tol == 1e-8
        assert opts.rel_tol == 1e-8
        assert opts.max_iter == 20000
        assert opts.polish is True

    def test_invalid_rejected(self):
        with pytest.raises(ValueError):
            SolverOptions(max_iter=0)
        with pytest.raises(ValueError):
            SolverOptions(abs_tol=-1.0)

    def test_max_iter_status(self):
        ens, x_o = _instance(53, 0, m=10, n=15, k=3)
        rng = np.random.default_rng(90)
        e = rng.standard_normal(10)
        e *= 0.2 / np.linalg.norm(e)
        y = ens.A @ x_o + e
        opts = SolverOptions(max_iter=3, polish=False)
        res = solve_socl1(SocL1Problem(ens.A, y, 0.2), opts)
        assert res.status == "max-iter"
        assert res.iterations == 3
