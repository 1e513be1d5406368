import numpy as np
import pytest

from pdlp.kkt import check_termination, convergence_info
from pdlp.linalg import omega_norm, spectral_norm_estimate
from pdlp.pdhg import NumericalError, PrimalDualIterate, StepSizes, adaptive_step, pdhg_step
from pdlp.restart import initialize_primal_weight

from oracles import make_problem, scalar_adaptive_step


class TestStepSizes:
    def test_tau_sigma_product(self):
        s = StepSizes(eta=0.5, omega=4.0)
        assert s.tau == pytest.approx(0.125)
        assert s.sigma == pytest.approx(2.0)
        assert s.tau * s.sigma == pytest.approx(s.eta**2)

    def test_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            StepSizes(eta=0.0, omega=1.0)
        with pytest.raises(ValueError):
            StepSizes(eta=1.0, omega=-1.0)


class TestPdhgStep:
    def test_hand_executed_first_step(self):
        # min x s.t. x >= 1, x >= 0: from (0, 0) with eta=0.5, omega=1,
        # theta=1 the primal clamps at 0 and the dual moves to 0.5.
        p = make_problem(c=[1.0], G=[[1.0]], h=[1.0], l=[0.0], u=[np.inf])
        out = pdhg_step(
            PrimalDualIterate(np.zeros(1), np.zeros(1)),
            StepSizes(eta=0.5, omega=1.0),
            1.0,
            p,
        )
        assert out.x[0] == pytest.approx(0.0)
        assert out.y[0] == pytest.approx(0.5)

    def test_saddle_point_is_fixed(self, one_d_problem):
        it = PrimalDualIterate(np.array([1.0]), np.array([1.0]))
        out = pdhg_step(it, StepSizes(eta=0.4, omega=1.0), 1.0, one_d_problem)
        assert np.allclose(out.x, it.x, atol=1e-14)
        assert np.allclose(out.y, it.y, atol=1e-14)

    def test_theta_irrelevant_when_x_unchanged(self, one_d_problem):
        # start at the primal fixed point so x+ == x and only theta-paths differ
        it = PrimalDualIterate(np.array([1.0]), np.array([1.0]))
        s = StepSizes(eta=0.3, omega=1.0)
        out0 = pdhg_step(it, s, 0.0, one_d_problem)
        out1 = pdhg_step(it, s, 1.0, one_d_problem)
        assert np.allclose(out0.x, out1.x) and np.allclose(out0.y, out1.y)

    def test_iterates_stay_feasible(self):
        rng = np.random.default_rng(2)
        p = make_problem(
            c=rng.normal(size=3),
            G=rng.normal(size=(2, 3)),
            h=rng.normal(size=2),
            l=[0.0, -1.0, -np.inf],
            u=[2.0, 1.0, np.inf],
        )
        it = PrimalDualIterate(np.zeros(3), np.zeros(2))
        s = StepSizes(eta=0.9 / spectral_norm_estimate(p.stacked_k), omega=1.0)
        for _ in range(50):
            it = pdhg_step(it, s, 1.0, p)
            assert np.all(it.x >= p.l) and np.all(it.x <= p.u)
            assert np.all(it.y[: p.m1] >= 0.0)

    def test_fixed_step_converges_on_one_d_instance(self, one_d_problem):
        norm = spectral_norm_estimate(one_d_problem.stacked_k)
        eta = 0.9 / norm
        omega = initialize_primal_weight(one_d_problem.c, one_d_problem.q)
        s = StepSizes(eta=eta, omega=omega)
        it = PrimalDualIterate(np.zeros(1), np.zeros(1))
        q_norm = float(np.linalg.norm(one_d_problem.q))
        c_norm = float(np.linalg.norm(one_d_problem.c))
        for k in range(10_000):
            it = pdhg_step(it, s, 1.0, one_d_problem)
            if k % 50 == 0:
                info = convergence_info(one_d_problem, it.x, it.y)
                if check_termination(info, q_norm, c_norm, 1e-4):
                    break
        else:
            pytest.fail("fixed-step PDHG did not reach 1e-4 within 10^4 iterations")

    def test_batched_step_matches_per_column(self, toy_problem):
        rng = np.random.default_rng(8)
        cols = 6
        X = rng.uniform(0, 1, size=(2, cols))
        Y = np.abs(rng.normal(size=(1, cols)))
        s = StepSizes(eta=0.3, omega=1.5)
        batched = pdhg_step(PrimalDualIterate(X, Y), s, 1.0, toy_problem)
        for j in range(cols):
            single = pdhg_step(PrimalDualIterate(X[:, j], Y[:, j]), s, 1.0, toy_problem)
            assert np.allclose(batched.x[:, j], single.x, atol=1e-12)
            assert np.allclose(batched.y[:, j], single.y, atol=1e-12)


class TestAdaptiveStep:
    def test_zero_denominator_accepts_and_grows(self):
        # with c = 0 and h = 0 from the origin nothing moves, the safe step
        # is infinite, and eta grows by the schedule factor
        p = make_problem(c=[0.0], G=[[1.0]], h=[0.0], l=[0.0], u=[1.0])
        it = PrimalDualIterate(np.zeros(1), np.zeros(1))
        out, eta_used, eta_next = adaptive_step(it, 1.0, 0.25, 3, p)
        assert eta_used == 0.25
        assert eta_next == pytest.approx((1.0 + 4.0 ** (-0.6)) * 0.25)

    def test_accept_path_costs_one_application_pair(self, one_d_problem):
        K = one_d_problem.stacked_k
        warm = PrimalDualIterate(np.array([0.5]), np.array([0.2]), kx=K.apply(np.array([0.5])))
        eta = 0.9 / spectral_norm_estimate(K)
        before = K.ops_count
        adaptive_step(warm, 1.0, eta, 0, one_d_problem)
        assert K.ops_count - before == 2

    def test_matches_scalar_transcription_with_inflated_eta(self, one_d_problem):
        # start from a deliberately oversized eta so the retry loop engages
        x0, y0 = 0.0, 0.0
        omega, eta, k = 1.0, 10.0, 0
        it = PrimalDualIterate(np.array([x0]), np.array([y0]))
        out, eta_used, eta_next = adaptive_step(it, omega, eta, k, one_d_problem)
        ref_x, ref_y, ref_eta, ref_eta_next = scalar_adaptive_step(
            x0, y0, c=1.0, g=1.0, h_val=1.0, l=0.0, u=10.0, omega=omega, eta=eta, k=k
        )
        assert out.x[0] == pytest.approx(ref_x, abs=1e-12)
        assert out.y[0] == pytest.approx(ref_y, abs=1e-12)
        assert eta_used == pytest.approx(ref_eta, rel=1e-12)
        assert eta_next == pytest.approx(ref_eta_next, rel=1e-12)

    def test_accepted_steps_satisfy_safeguard(self, toy_problem):
        # trace a full adaptive solve (to termination) on the toy instance
        K_dense = np.vstack([toy_problem.G.toarray(), toy_problem.A.toarray()])
        q_norm = float(np.linalg.norm(toy_problem.q))
        c_norm = float(np.linalg.norm(toy_problem.c))
        it = PrimalDualIterate(np.zeros(2), np.zeros(1))
        eta = 0.9 / spectral_norm_estimate(toy_problem.stacked_k)
        omega = 1.0
        for k in range(2000):
            new_it, eta_used, eta = adaptive_step(it, omega, eta, k, toy_problem)
            dx = new_it.x - it.x
            dy = new_it.y - it.y
            denom = 2.0 * abs(float(dy @ (K_dense @ dx)))
            if denom > 0:
                bound = omega_norm(dx, dy, omega) ** 2 / denom
                assert eta_used <= bound * (1.0 + 1e-9)
            it = new_it
            info = convergence_info(toy_problem, it.x, it.y)
            if check_termination(info, q_norm, c_norm, 1e-4):
                break
        else:
            pytest.fail("adaptive trace did not terminate")

    def test_retry_cap_raises_numerical_error(self, toy_problem):
        # after two accepted steps the grown eta gets rejected on the first
        # trial, so a cap of one retry cannot reach acceptance
        it = PrimalDualIterate(np.zeros(2), np.zeros(1))
        eta = 0.9 / spectral_norm_estimate(toy_problem.stacked_k)
        for k in range(2):
            it, _, eta = adaptive_step(it, 1.0, eta, k, toy_problem)
        accepted, eta_used, _ = adaptive_step(it, 1.0, eta, 2, toy_problem)
        assert eta_used < eta  # the unlimited call had to shrink
        with pytest.raises(NumericalError):
            adaptive_step(it, 1.0, eta, 2, toy_problem, max_retries=1)

    def test_cached_kx_returned_consistent(self, toy_problem):
        it = PrimalDualIterate(np.zeros(2), np.zeros(1))
        out, _, _ = adaptive_step(it, 1.0, 0.3, 0, toy_problem)
        K = toy_problem.stacked_k
        assert out.kx is not None
        assert np.allclose(out.kx, K.toarray() @ out.x, atol=1e-12)
