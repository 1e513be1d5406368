import numpy as np
import pytest

from pdlp.fishnet import PointBatch, cull_points, repopulate, run_fishnet, spectral_cast
from pdlp.kkt import convergence_info
from pdlp.linalg import proj_box

from oracles import make_problem


# Column counts after the cast and after each cull/repopulate, traced by
# hand from the loop contract: every pass culls to half, and odd passes that
# began with more than two columns double the survivors back up.
EXPECTED_TRAJECTORY = {
    1: [2, 1],
    2: [4, 2, 1],
    3: [8, 4, 2, 4, 2, 1],
    4: [16, 8, 4, 8, 4, 2, 4, 2, 1],
    5: [32, 16, 8, 16, 8, 4, 8, 4, 2, 4, 2, 1],
}


class TestSpectralCast:
    def test_column_count_is_two_to_p(self, toy_problem):
        batch = spectral_cast(toy_problem, p=5, seed=0)
        assert batch.ncols == 32

    def test_deterministic_for_fixed_seed(self, toy_problem):
        a = spectral_cast(toy_problem, p=3, seed=123)
        b = spectral_cast(toy_problem, p=3, seed=123)
        assert np.array_equal(a.X, b.X)
        assert np.array_equal(a.Y, b.Y)

    def test_all_columns_inside_box(self, toy_problem):
        batch = spectral_cast(toy_problem, p=4, seed=9)
        assert np.all(batch.X >= toy_problem.l[:, None])
        assert np.all(batch.X <= toy_problem.u[:, None])

    def test_degenerate_box_collapses_columns(self):
        p = make_problem(c=[1.0], G=[[1.0]], h=[0.0], l=[2.0], u=[2.0])
        batch = spectral_cast(p, p=3, seed=4)
        assert np.all(batch.X == 2.0)

    def test_origin_seeded_in_column_zero(self, toy_problem):
        batch = spectral_cast(toy_problem, p=3, seed=2)
        origin = proj_box(np.zeros(2), toy_problem.l, toy_problem.u)
        assert np.array_equal(batch.X[:, 0], origin)

    def test_y_is_k_times_x(self, toy_problem):
        batch = spectral_cast(toy_problem, p=2, seed=5)
        K = np.vstack([toy_problem.G.toarray(), toy_problem.A.toarray()])
        assert np.allclose(batch.Y, K @ batch.X)

    def test_rejects_p_below_one(self, toy_problem):
        with pytest.raises(ValueError):
            spectral_cast(toy_problem, p=0, seed=0)


class TestCullPoints:
    def test_keeps_smaller_gap_half(self, toy_problem):
        # construct 4 columns with known gap ordering
        xs = np.array([[0.0, 1.0, 0.3, 0.9], [0.0, 1.0, 0.3, 0.9]])
        K = np.vstack([toy_problem.G.toarray(), toy_problem.A.toarray()])
        ys = K @ xs
        batch = PointBatch(X=xs, Y=ys, rng_seed=0)
        gaps = [
            convergence_info(toy_problem, xs[:, j], ys[:, j]).gap_abs for j in range(4)
        ]
        culled = cull_points(batch, toy_problem)
        assert culled.ncols == 2
        kept_order = np.argsort(gaps, kind="stable")[:2]
        expected_cols = xs[:, np.sort(kept_order)]
        assert np.allclose(culled.X, expected_cols)

    def test_ties_keep_lowest_indices(self, toy_problem):
        xs = np.tile(np.array([[0.4], [0.4]]), (1, 4))
        K = np.vstack([toy_problem.G.toarray(), toy_problem.A.toarray()])
        batch = PointBatch(X=xs.copy(), Y=K @ xs, rng_seed=0)
        culled = cull_points(batch, toy_problem)
        assert culled.ncols == 2
        assert np.allclose(culled.X, xs[:, :2])

    def test_two_columns_keep_smaller_gap(self, toy_problem):
        xs = np.array([[0.5, 0.0], [0.5, 0.0]])
        K = np.vstack([toy_problem.G.toarray(), toy_problem.A.toarray()])
        batch = PointBatch(X=xs, Y=K @ xs, rng_seed=0)
        culled = cull_points(batch, toy_problem)
        assert culled.ncols == 1
        assert np.allclose(culled.X[:, 0], [0.5, 0.5])

    def test_single_column_unchanged(self, toy_problem):
        xs = np.array([[0.1], [0.1]])
        K = np.vstack([toy_problem.G.toarray(), toy_problem.A.toarray()])
        batch = PointBatch(X=xs, Y=K @ xs, rng_seed=0)
        assert cull_points(batch, toy_problem) is batch

    def test_odd_count_keeps_ceil_half(self, toy_problem):
        xs = np.random.default_rng(0).uniform(0, 1, size=(2, 5))
        K = np.vstack([toy_problem.G.toarray(), toy_problem.A.toarray()])
        batch = PointBatch(X=xs, Y=K @ xs, rng_seed=0)
        assert cull_points(batch, toy_problem).ncols == 3


class TestRepopulate:
    def test_column_count_doubles(self, toy_problem):
        batch = spectral_cast(toy_problem, p=2, seed=1)
        assert repopulate(batch, 7).ncols == 8

    def test_identical_parents_give_identical_children(self, toy_problem):
        xs = np.tile(np.array([[0.3], [0.7]]), (1, 4))
        K = np.vstack([toy_problem.G.toarray(), toy_problem.A.toarray()])
        batch = PointBatch(X=xs.copy(), Y=K @ xs, rng_seed=0)
        out = repopulate(batch, 3)
        assert np.allclose(out.X, 0.3 * np.ones((1, 8)) * np.array([[1.0], [7.0 / 3.0]]))

    def test_children_are_convex_combinations(self, toy_problem):
        batch = spectral_cast(toy_problem, p=3, seed=11)
        out = repopulate(batch, 5)
        parents, children = out.X[:, :8], out.X[:, 8:]
        lo = parents.min(axis=1, keepdims=True)
        hi = parents.max(axis=1, keepdims=True)
        assert np.all(children >= lo - 1e-12) and np.all(children <= hi + 1e-12)

    def test_same_weights_applied_to_duals(self):
        # scalar columns 0 and 4 with weights (0.5, 0.5) give child 2
        X = np.array([[0.0, 4.0]])
        Y = np.array([[0.0, 8.0]])
        batch = PointBatch(X=X, Y=Y, rng_seed=0)
        # force deterministic equal weights by using identical parents trick:
        # draw until both weights positive-equal is fragile, so check the
        # linear relation instead: child_y = 2 * child_x for all children.
        out = repopulate(batch, 42)
        children_x = out.X[:, 2:]
        children_y = out.Y[:, 2:]
        assert np.allclose(children_y, 2.0 * children_x)


class TestRunFishnet:
    @pytest.mark.parametrize("p", [1, 2, 3, 4, 5])
    def test_column_count_trajectory(self, toy_problem, p):
        log: list[int] = []
        run_fishnet(toy_problem, p=p, k=3, seed=0, count_log=log)
        assert log == expected_trajectory(p)
        assert log[-1] == 1

    def test_p1_single_cull_no_repopulation(self, toy_problem):
        log: list[int] = []
        run_fishnet(toy_problem, p=1, k=2, seed=0, count_log=log)
        assert log == [2, 1]

    def test_deterministic_output(self, toy_problem):
        a = run_fishnet(toy_problem, p=3, k=5, seed=99)
        b = run_fishnet(toy_problem, p=3, k=5, seed=99)
        assert np.array_equal(a.x, b.x)
        assert np.array_equal(a.y, b.y)

    def test_warm_start_feasible(self, toy_problem):
        out = run_fishnet(toy_problem, p=3, k=4, seed=1)
        assert np.all(out.x >= toy_problem.l) and np.all(out.x <= toy_problem.u)
        assert np.all(out.y[: toy_problem.m1] >= 0.0)

    def test_gap_no_worse_than_projected_origin(self, toy_problem, one_d_problem):
        for problem in (toy_problem, one_d_problem):
            origin_x = proj_box(np.zeros(problem.n), problem.l, problem.u)
            origin_y = problem.stacked_k.apply(origin_x)
            origin_gap = convergence_info(problem, origin_x, origin_y).gap_abs
            for seed in range(5):
                out = run_fishnet(problem, p=3, k=5, seed=seed)
                out_gap = convergence_info(problem, out.x, out.y).gap_abs
                assert out_gap <= origin_gap + 1e-12

    def test_gap_no_worse_than_worst_initial_column(self, one_d_problem):
        seed = 3
        initial = spectral_cast(one_d_problem, p=3, seed=seed)
        worst = max(
            convergence_info(one_d_problem, initial.X[:, j], initial.Y[:, j]).gap_abs
            for j in range(initial.ncols)
        )
        out = run_fishnet(one_d_problem, p=3, k=5, seed=seed)
        out_gap = convergence_info(one_d_problem, out.x, out.y).gap_abs
        assert out_gap <= worst + 1e-12
