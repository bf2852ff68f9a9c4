import numpy as np
import pytest

from jelk.data import pairwise_distances, pooled_from_arrays
from jelk.errors import DegenerateDataError, DomainError, FeasibilityError, InfeasibleThetaError
from jelk.jackknife import PseudoValues, all_pseudo_values
from jelk.jel import (
    JelSolution,
    SolverConfig,
    equation_residuals,
    inner_lambda,
    jel_test,
    neg2_log_likelihood,
    solve_system,
    weights,
)
from jelk.stats import RngStream, chi_square_quantile, sample_mvnormal

from oracles import bisect_lambda, grid_profile_oracle


class TestInnerLambda:
    @pytest.mark.parametrize("v, theta", [((-1.0, 1.0), 0.0), ((2.0, 0.0, 4.0), 2.0)])
    def test_zero_when_mean_matches(self, v, theta):
        assert inner_lambda(np.array(v), theta) == pytest.approx(0.0, abs=1e-14)

    def test_against_bisection(self):
        v = np.array([2.0, 0.0, 4.0])
        lam = inner_lambda(v, 3.0)
        ref = bisect_lambda(v - 3.0, tol=1e-15)[0]
        assert -1.0 < lam < 0.0
        assert lam == pytest.approx(ref, abs=1e-12)
        d = v - 3.0
        assert abs(np.sum(d / (1 + lam * d))) <= 1e-12 * v.size

    def test_random_against_bisection(self):
        gen = np.random.default_rng(5)
        for _ in range(200):
            v = gen.normal(size=int(gen.integers(2, 40)))
            theta = gen.uniform(v.min(), v.max())
            assert inner_lambda(v, theta) == pytest.approx(bisect_lambda(v - theta)[0], abs=1e-9)

    @pytest.mark.parametrize("theta", [-0.5, 0.0, 4.0, 7.0])
    def test_infeasible_theta(self, theta):
        with pytest.raises(InfeasibleThetaError):
            inner_lambda(np.array([0.0, 2.0, 4.0]), theta)


def _pv(vectors):
    vectors = [np.asarray(v, float) for v in vectors]
    return PseudoValues(vectors[0], tuple(vectors[1:]), float(vectors[0].mean()),
                        np.array([v.mean() for v in vectors[1:]]))


def test_equal_means_give_zero_statistic():
    pv = _pv([[1.0, 2.0, 3.0, 2.0], [0.0, 4.0], [1.5, 2.5, 2.0]])
    sol = solve_system(pv)
    assert sol.theta == pytest.approx(2.0, abs=1e-10)
    assert np.allclose(sol.lambdas, 0.0, atol=1e-10)
    assert sol.neg2logR == pytest.approx(0.0, abs=1e-12)
    p, groups = weights(pv, sol)
    assert np.allclose(p, 1 / 4) and np.allclose(groups[1], 1 / 3)


def _null_pooled(seed, sizes=(50, 50, 50), dim=1):
    gen = np.random.default_rng(seed)
    return pooled_from_arrays([gen.standard_normal((n, dim)) for n in sizes])


def test_matches_grid_oracle_moderate_n():
    pooled = _null_pooled(1)
    pv = all_pseudo_values(pooled)
    sol = solve_system(pv)
    theta, stat = grid_profile_oracle(pv.vectors)
    assert sol.neg2logR == pytest.approx(stat, abs=1e-4)
    assert sol.theta == pytest.approx(theta, abs=1e-4)


def test_residual_certificate_and_weights():
    cfg = SolverConfig()
    for seed in range(40):
        pooled = _null_pooled(seed, sizes=(20, 35, 15), dim=2)
        pv = all_pseudo_values(pooled)
        sol = solve_system(pv, pooled.alpha_hat, cfg)
        assert sol.converged
        res = equation_residuals(pv.vectors, sol.theta, sol.lambdas)
        assert np.max(np.abs(res)) <= cfg.outer_tol
        assert np.allclose(res, sol.residuals)
        p, groups = weights(pv, sol)
        for w, v in zip([p, *groups], pv.vectors):
            assert np.all(w > 0)
            assert w.sum() == pytest.approx(1.0, abs=1e-9)
            assert w @ v == pytest.approx(sol.theta, abs=1e-8)
        via_weights = -2 * (np.log(pooled.n * p).sum()
                            + sum(np.log(v.size * w).sum() for w, v in zip(groups, pv.groups)))
        assert via_weights == pytest.approx(sol.neg2logR, abs=1e-10)
        assert neg2_log_likelihood(pv, sol) == pytest.approx(sol.neg2logR, abs=1e-12)
        assert sol.neg2logR >= 0


def test_zero_multipliers_give_zero_statistic():
    pv = all_pseudo_values(_null_pooled(3))
    sol = JelSolution(1.0, 0.0, np.zeros(3), 0.0, np.zeros(5), True, 0)
    assert neg2_log_likelihood(pv, sol) == 0.0
    p, groups = weights(pv, sol)
    assert np.allclose(p, 1 / 150) and all(np.allclose(g, 1 / 50) for g in groups)


def test_infeasible_solution_detected():
    pv = _pv([[0.0, 1.0, 2.0], [0.0, 2.0], [0.0, 2.0]])
    bad = JelSolution(1.0, -5.0, np.zeros(2), 0.0, np.zeros(4), False, 0)
    with pytest.raises(FeasibilityError):
        neg2_log_likelihood(pv, bad)
    with pytest.raises(FeasibilityError):
        weights(pv, bad)


def test_constant_group_is_degenerate(rng):
    pooled = pooled_from_arrays([rng.normal(size=(10, 1)), np.full((3, 1), 2.0)])
    with pytest.raises(DegenerateDataError):
        jel_test(pooled)


def test_alpha_hat_checked():
    pv = all_pseudo_values(_null_pooled(4))
    with pytest.raises(DomainError):
        solve_system(pv, alpha_hat=[0.5, 0.25, 0.25])


def test_affine_equivariance():
    gen = np.random.default_rng(17)
    for _ in range(10):
        groups = [gen.normal(size=(n, 3)) * s for n, s in ((15, 1.0), (20, 1.5), (12, 0.8))]
        a = gen.uniform(0.01, 100.0)
        b = gen.normal(size=3) * 50
        base = jel_test(pooled_from_arrays(groups)).statistic
        moved = jel_test(pooled_from_arrays([a * g + b for g in groups])).statistic
        assert moved == pytest.approx(base, abs=1e-8)


def test_decision_rule_consistent():
    for seed in range(30):
        res = jel_test(_null_pooled(seed, sizes=(15, 15)), alpha=0.1)
        crit = chi_square_quantile(0.9, 1)
        assert res.reject == (res.statistic > crit) == (res.p_value < 0.1)
        assert res.df == 1
        assert res.details["critical_value"] == pytest.approx(crit)


def test_alpha_validated():
    with pytest.raises(DomainError):
        jel_test(_null_pooled(0), alpha=1.5)


def test_config_validated():
    with pytest.raises(DomainError):
        SolverConfig(bracket_margin=0.7)
    with pytest.raises(DomainError):
        SolverConfig(inner_tol=0.0)


def test_distance_matrix_reuse():
    pooled = _null_pooled(8)
    dm = pairwise_distances(pooled.points)
    assert jel_test(pooled, dm=dm).statistic == jel_test(pooled).statistic


@pytest.mark.slow
def test_consistency_power_grows_with_n():
    rates = []
    for n in (25, 50, 100):
        rejections = 0
        for r in range(1000):
            gen = RngStream(404, r).generator()
            groups = [sample_mvnormal([0.0], s, n, gen) for s in (1.0, 2.0, 3.0)]
            rejections += jel_test(pooled_from_arrays(groups)).reject
        rates.append(rejections / 1000)
    assert rates[0] <= rates[1] <= rates[2], rates
    assert rates[2] > 0.99, rates
