import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from robust_ma.csi_error import worst_case_error
from robust_ma.errors import DegenerateChannelError, InvalidParameterError
from robust_ma.robust import (
    RHO_THRESHOLD,
    Beamformer,
    Branch,
    bernstein_lhs,
    bernstein_r0,
    f_of_y,
    f_prime,
    f_second,
    mrt,
    orthogonal_beamformer,
    received_power,
    worst_case_objective,
    worst_case_power,
    y_extreme,
    y_zero,
)
from robust_ma.validation import sample_ball

from conftest import crandn

rhos = st.floats(1e-6, 0.999)
sigma2s = st.floats(1e-3, 1e2)
p_maxes = st.floats(1e-2, 1e4)


def bisect(f, lo, hi, tol=1e-14):
    flo = f(lo)
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
        if hi - lo <= tol * max(1.0, abs(hi)):
            break
    return 0.5 * (lo + hi)


class TestMRT:
    def test_simple(self):
        w = mrt([1, 0, 0], 4.0)
        np.testing.assert_allclose(w.weights, [2, 0, 0])
        assert w.power == pytest.approx(4.0)

    def test_cauchy_schwarz_equality(self, rng):
        h = crandn(rng, 5)
        w = mrt(h, 3.0)
        assert received_power(w, h) == pytest.approx(3.0 * np.vdot(h, h).real, rel=1e-12)

    def test_beats_random_beamformers(self, rng):
        h = crandn(rng, 6)
        w = mrt(h, 1.0)
        v = crandn(rng, 10_000, 6)
        v /= np.linalg.norm(v, axis=1, keepdims=True)
        assert np.abs(v.conj() @ h).max() <= abs(np.vdot(w.weights, h)) * (1 + 1e-12)

    def test_zero_channel(self):
        with pytest.raises(DegenerateChannelError):
            mrt([0, 0], 1.0)

    def test_power_budget_enforced(self):
        with pytest.raises(InvalidParameterError):
            Beamformer([2.0, 0.0], 1.0)


class TestReceivedPower:
    def test_orthogonal(self):
        assert received_power([1, 0], [0, 5]) == 0.0

    def test_expansion(self, rng):
        h_bar, e = crandn(rng, 6), 0.3 * crandn(rng, 6)
        w = crandn(rng, 6)
        W = np.outer(w, w.conj())
        expansion = (np.vdot(e, W @ e) + 2 * np.vdot(e, W @ h_bar).real + np.vdot(h_bar, W @ h_bar)).real
        assert received_power(w, h_bar + e) == pytest.approx(expansion, rel=1e-10)

    def test_dimension_mismatch(self):
        with pytest.raises(InvalidParameterError):
            received_power([1, 0], [1, 0, 0])


class TestWorstCasePower:
    def test_no_error_is_perfect_csi(self, rng):
        h = crandn(rng, 4)
        res = worst_case_power(h, 0.0, 2.0)
        assert res.power == pytest.approx(2.0 * np.vdot(h, h).real, rel=1e-12)
        assert not res.nulled

    def test_boundary_nulls(self):
        res = worst_case_power([3.0, 4.0], 5.0, 1.0)
        assert res.power == 0.0 and res.nulled and res.margin == 0.0

    def test_zero_channel_nulled(self):
        res = worst_case_power([0, 0], 0.1, 1.0)
        assert res.nulled and res.power == 0.0

    def test_against_ball_sampling(self, rng):
        h = crandn(rng, 4)
        delta = 0.3 * np.linalg.norm(h)
        w = mrt(h, 1.0)
        closed = worst_case_power(h, delta, 1.0).power
        sampled = (np.abs((h + sample_ball(rng, 4, 100_000, delta)) @ w.weights.conj()) ** 2).min()
        assert sampled >= closed

    def test_against_local_minimization(self, rng):
        # ball sampling alone cannot reach the boundary minimizer in 8 real
        # dimensions; refine sampled starts with a constrained local solver
        from scipy.optimize import minimize

        h = crandn(rng, 4)
        delta = 0.3 * np.linalg.norm(h)
        w = mrt(h, 1.0).weights

        def power(x):
            e = x[:4] + 1j * x[4:]
            return abs(np.vdot(w, h + e)) ** 2

        ball = {"type": "ineq", "fun": lambda x: delta**2 - x @ x}
        best = math.inf
        for start in sample_ball(rng, 4, 20, delta):
            x0 = np.concatenate([start.real, start.imag])
            best = min(best, minimize(power, x0, constraints=[ball], method="SLSQP", tol=1e-12).fun)
        closed = worst_case_power(h, delta, 1.0).power
        assert best == pytest.approx(closed, rel=1e-3)

    def test_attained_by_worst_case_error(self, rng):
        for _ in range(20):
            h = crandn(rng, 5)
            delta = rng.uniform(0, 0.9) * np.linalg.norm(h)
            attained = received_power(mrt(h, 2.5), h + worst_case_error(h, delta))
            assert attained == pytest.approx(worst_case_power(h, delta, 2.5).power, rel=1e-9)

    def test_objective_matches_closed_form_under_mrt(self, rng):
        h = crandn(rng, 4)
        assert worst_case_objective(mrt(h, 2.0), h, 0.2) == pytest.approx(worst_case_power(h, 0.2, 2.0).power)

    def test_mrt_dominates_feasible_beamformers(self, rng):
        h = crandn(rng, 4)
        delta = 0.4 * np.linalg.norm(h)
        best = worst_case_power(h, delta, 1.0).power
        for _ in range(2000):
            v = crandn(rng, 4)
            v *= math.sqrt(rng.random()) / np.linalg.norm(v)
            assert worst_case_objective(v, h, delta) <= best * (1 + 1e-12)

    @settings(max_examples=100, deadline=None)
    @given(st.floats(0.01, 100), st.floats(0, 2), st.integers(0, 10_000))
    def test_scale_covariance(self, c, frac, seed):
        h = crandn(np.random.default_rng(seed), 3)
        delta = frac * np.linalg.norm(h)
        a = worst_case_power(h, delta, 1.5)
        b = worst_case_power(c * h, c * delta, 1.5)
        assert b.margin == pytest.approx(c * a.margin, rel=1e-9, abs=1e-12 * c)
        assert b.power == pytest.approx(c * c * a.power, rel=1e-9, abs=1e-12)


class TestBernsteinLHS:
    def test_degenerate(self):
        assert bernstein_lhs(0.0, 0.0, 0.0, 1.25, 0.1) == 1.25

    def test_rho_one_limit(self):
        assert bernstein_lhs(2.0, 5.0, 3.0, -0.5, 1.0) == 1.5

    def test_identity_covariance(self):
        # Q = sigma2 * I_2 with sigma2 = 1, r = 0, s = 0, rho = 0.1
        Q = np.eye(2)
        oracle = np.trace(Q) - math.sqrt(2 * math.log(10) * (np.linalg.norm(Q, "fro") ** 2 + 0.0))
        value = bernstein_lhs(2.0, 2.0, 0.0, 0.0, 0.1)
        assert value == pytest.approx(oracle, rel=1e-12)
        assert value == pytest.approx(-1.034854258770293, rel=1e-12)

    @pytest.mark.parametrize("rho", [0.0, -0.1, 1.5])
    def test_invalid_rho(self, rho):
        with pytest.raises(InvalidParameterError):
            bernstein_lhs(1.0, 1.0, 1.0, 0.0, rho)

    def test_matrix_form_matches_scalar_bound(self, rng):
        # with MRT, W = w w^H; the constraint is tight at R0 = F(y_max)
        h = crandn(rng, 5)
        sigma2, p, rho = 0.05, 2.0, 0.05
        res = bernstein_r0(h, sigma2, p, rho)
        w = res.beamformer.weights
        W = np.outer(w, w.conj())
        Q = sigma2 * W
        r = math.sqrt(sigma2) * W @ h
        s = np.vdot(h, W @ h).real - res.r0
        lhs = bernstein_lhs(np.trace(Q).real, np.linalg.norm(Q, "fro") ** 2, np.vdot(r, r).real, s, rho)
        assert abs(lhs) <= 1e-9 * p * np.vdot(h, h).real


class TestF:
    def test_error_free(self):
        assert f_of_y(3.0, 0.0, 2.0, 0.01) == 6.0

    def test_threshold_origin(self):
        assert f_of_y(0.0, 1.7, 2.0, RHO_THRESHOLD) == pytest.approx(0.0, abs=1e-12)

    def test_value(self):
        assert f_of_y(2.0, 1.0, 1.0, 0.01) == pytest.approx(-3.7861404244151124, rel=1e-12)

    def test_derivative_at_threshold(self):
        assert f_prime(0.0, 1.3, 2.0, RHO_THRESHOLD) == pytest.approx(0.0, abs=1e-12)

    def test_derivative_limit(self):
        assert f_prime(1e12, 1.0, 2.0, 0.01) == pytest.approx(2.0, rel=1e-5)
        assert f_prime(0.0, 0.0, 2.0, 0.01) == 2.0

    def test_central_differences(self, rng):
        for _ in range(100):
            sigma2, p, rho = rng.uniform(0.01, 5), rng.uniform(0.1, 10), rng.uniform(1e-4, 0.99)
            y = rng.uniform(0.01, 50)
            h = 1e-6 * max(1.0, y)
            fd = (f_of_y(y + h, sigma2, p, rho) - f_of_y(y - h, sigma2, p, rho)) / (2 * h)
            assert abs(f_prime(y, sigma2, p, rho) - fd) <= 1e-6 * p

    def test_second_derivative_formula(self):
        sigma2, p, rho, y = 0.7, 3.0, 0.02, 1.1
        h = 1e-4
        fd = (f_prime(y + h, sigma2, p, rho) - f_prime(y - h, sigma2, p, rho)) / (2 * h)
        assert f_second(y, sigma2, p, rho) == pytest.approx(fd, rel=1e-6)

    @settings(max_examples=100, deadline=None)
    @given(sigma2s, p_maxes, rhos, st.floats(0, 100))
    def test_convex(self, sigma2, p, rho, y):
        h = 1e-3 * max(1.0, y) + 1e-3 * sigma2
        d2 = f_of_y(y + 2 * h, sigma2, p, rho) - 2 * f_of_y(y + h, sigma2, p, rho) + f_of_y(y, sigma2, p, rho)
        scale = max(abs(f_of_y(y, sigma2, p, rho)), p * (y + sigma2))
        assert d2 >= -1e-8 * p - 1e-12 * scale

    @settings(max_examples=100, deadline=None)
    @given(sigma2s, p_maxes, rhos)
    def test_derivative_nondecreasing(self, sigma2, p, rho):
        ys = np.linspace(0, 20 * sigma2, 50)
        d = [f_prime(y, sigma2, p, rho) for y in ys]
        assert all(b >= a - 1e-12 * p for a, b in zip(d, d[1:]))


class TestExtremeAndZero:
    def test_extreme_at_threshold(self):
        assert y_extreme(1.0, RHO_THRESHOLD) == pytest.approx(0.0, abs=1e-15)

    def test_extreme_value(self):
        assert y_extreme(2.0, 0.01) == pytest.approx(8.210340371976184, rel=1e-12)

    def test_extreme_clamped(self):
        assert y_extreme(1.0, 0.9) == 0.0

    def test_extreme_zeroes_derivative(self, rng):
        for _ in range(100):
            sigma2, p, rho = rng.uniform(0.01, 5), rng.uniform(0.1, 10), rng.uniform(1e-6, RHO_THRESHOLD - 1e-3)
            assert abs(f_prime(y_extreme(sigma2, rho), sigma2, p, rho)) <= 1e-9 * p

    def test_zero_at_threshold(self):
        assert y_zero(1.0, 1.0, RHO_THRESHOLD) == 0.0
        assert y_zero(1.0, 1.0, 0.8) == 0.0

    def test_zero_matches_bisection(self):
        sigma2, p, rho = 1.0, 1.0, 0.01
        y0 = y_extreme(sigma2, rho)
        ref = bisect(lambda y: f_of_y(y, sigma2, p, rho), y0, y0 + 1e3 * sigma2)
        assert y_zero(sigma2, p, rho) == pytest.approx(ref, abs=1e-9)

    def test_zero_residual(self, rng):
        for _ in range(100):
            sigma2, p, rho = rng.uniform(0.01, 10), rng.uniform(0.1, 100), rng.uniform(1e-8, RHO_THRESHOLD - 1e-6)
            y1 = y_zero(sigma2, p, rho)
            assert y1 > y_extreme(sigma2, rho)
            assert abs(f_of_y(y1, sigma2, p, rho)) <= 1e-9 * sigma2 * p


class TestBernsteinR0:
    def test_perfect_csi(self, rng):
        h = crandn(rng, 4)
        res = bernstein_r0(h, 0.0, 3.0, 0.05)
        assert res.r0 == pytest.approx(3.0 * np.vdot(h, h).real, rel=1e-12)
        assert res.branch.is_mrt

    def test_monotone_branch(self, rng):
        h = crandn(rng, 4)
        res = bernstein_r0(h, 1.0, 1.0, 0.7)
        assert res.branch is Branch.MRT_MONOTONE
        assert res.y_star == res.y_max and res.y1 is None

    @pytest.mark.parametrize("eps", [1e-6, -1e-6])
    def test_branch_flip_at_threshold(self, rng, eps):
        h = crandn(rng, 4)
        res = bernstein_r0(h, 0.01, 1.0, RHO_THRESHOLD + eps)
        expected = Branch.MRT_MONOTONE if eps > 0 else Branch.MRT_PAST_ZERO
        assert res.branch is expected

    def test_grid_maximization_oracle(self, rng):
        sigma2, p, rho = 1.0, 1.0, 0.05
        y1 = y_zero(sigma2, p, rho)
        h = crandn(rng, 6)
        h *= math.sqrt(10 * y1) / np.linalg.norm(h)
        res = bernstein_r0(h, sigma2, p, rho)
        assert res.branch is Branch.MRT_PAST_ZERO
        assert res.r0 == f_of_y(res.y_max, sigma2, p, rho)
        grid = np.linspace(0, res.y_max, 10_000)
        assert max(f_of_y(y, sigma2, p, rho) for y in grid) <= res.r0 + 1e-9

    def test_fallback_orthogonal(self, rng):
        sigma2, p, rho = 1.0, 2.0, 0.01
        h = crandn(rng, 4)
        # just past the stationary point: F(y_max) < F(0) < 0
        h *= math.sqrt(0.5 * y_extreme(sigma2, rho)) / np.linalg.norm(h)
        res = bernstein_r0(h, sigma2, p, rho)
        assert res.branch is Branch.FALLBACK_Y2
        assert res.y_star == 0.0 and res.r0 <= 0 and res.r0_clamped == 0.0
        assert abs(np.vdot(h, res.beamformer.weights)) <= 1e-12
        assert res.beamformer.power == pytest.approx(p)

    def test_fallback_prefers_mrt_endpoint(self, rng):
        sigma2, p, rho = 1.0, 1.0, 0.01
        h = crandn(rng, 4)
        y1 = y_zero(sigma2, p, rho)
        h *= math.sqrt(0.99 * y1) / np.linalg.norm(h)
        res = bernstein_r0(h, sigma2, p, rho)
        assert res.branch is Branch.FALLBACK_Y2 and res.y_star == res.y_max

    def test_single_antenna_fallback(self):
        res = bernstein_r0([0.1], 1.0, 1.0, 0.01)
        assert res.branch is Branch.FALLBACK_Y2 and res.y_star == res.y_max

    def test_orthogonal_beamformer_requires_two_antennas(self):
        with pytest.raises(InvalidParameterError):
            orthogonal_beamformer([1.0], 1.0)
        w = orthogonal_beamformer([1.0, 0.0, 0.0], 4.0)
        assert abs(w.weights[0]) == 0 and w.power == pytest.approx(4.0)

    @settings(max_examples=200, deadline=None)
    @given(sigma2s, p_maxes, rhos, st.floats(1e-3, 1e3), st.integers(0, 1000))
    def test_result_invariants(self, sigma2, p, rho, scale, seed):
        h = crandn(np.random.default_rng(seed), 3)
        assume(np.linalg.norm(h) > 1e-3)
        h *= math.sqrt(scale * sigma2) / np.linalg.norm(h)
        res = bernstein_r0(h, sigma2, p, rho)
        assert res.r0 == f_of_y(res.y_star, sigma2, p, rho)
        if res.branch is Branch.MRT_MONOTONE:
            assert rho >= RHO_THRESHOLD and res.y_star == res.y_max
        elif res.branch is Branch.MRT_PAST_ZERO:
            assert rho < RHO_THRESHOLD and res.y_max >= res.y1 and res.y_star == res.y_max
        else:
            assert rho < RHO_THRESHOLD and res.y_max < res.y1
            assert res.y_star in (0.0, res.y_max) and res.r0 <= 1e-9 * sigma2 * p
        y = abs(np.vdot(h, res.beamformer.normalized)) ** 2
        assert y == pytest.approx(res.y_star, rel=1e-9, abs=1e-12 * res.y_max)

    def test_invalid(self):
        with pytest.raises(DegenerateChannelError):
            bernstein_r0([0, 0], 1.0, 1.0, 0.1)
        with pytest.raises(InvalidParameterError):
            bernstein_r0([1, 0], 1.0, 1.0, 0.0)
