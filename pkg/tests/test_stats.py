import math

import numpy as np
import pytest
from scipy import stats as sps

from jelk.errors import DomainError
from jelk.rootfind import brentq
from jelk.stats import (
    RngStream,
    chi_square_cdf,
    chi_square_quantile,
    chi_square_sf,
    sample_mvexp,
    sample_mvnormal,
    sample_mvt,
)


class TestChiSquare:
    @pytest.mark.parametrize(
        "x, df, expected",
        [(0.0, 3, 1.0), (5.991465, 2, 0.05), (3.841459, 1, 0.05)],
    )
    def test_sf_examples(self, x, df, expected):
        assert chi_square_sf(x, df) == pytest.approx(expected, abs=1e-6)

    def test_sf_against_reference(self):
        xs = np.r_[np.linspace(0.0, 60.0, 241), [1e-8, 1e-3, 100.0, 200.0]]
        for df in range(1, 31):
            for x in xs:
                assert abs(chi_square_sf(x, df) - sps.chi2.sf(x, df)) <= 1e-10

    def test_df2_closed_form(self):
        for x in np.linspace(0.0, 80.0, 401):
            assert abs(chi_square_sf(x, 2) - math.exp(-x / 2)) <= 1e-12

    def test_sf_monotone_and_limits(self):
        for df in (1, 2, 5, 10):
            vals = [chi_square_sf(x, df) for x in np.linspace(0, 50, 200)]
            assert all(a >= b for a, b in zip(vals, vals[1:]))
            assert chi_square_sf(0.0, df) == 1.0
            assert chi_square_sf(1e4, df) < 1e-300 or chi_square_sf(1e4, df) == 0.0

    def test_cdf_complements_sf(self):
        for df in (1, 3, 7):
            for x in (0.1, 2.0, 9.0):
                assert chi_square_cdf(x, df) + chi_square_sf(x, df) == pytest.approx(1.0, abs=1e-14)

    @pytest.mark.parametrize("x, df", [(-1.0, 2), (1.0, 0), (1.0, -3)])
    def test_sf_domain(self, x, df):
        with pytest.raises(DomainError):
            chi_square_sf(x, df)

    @pytest.mark.parametrize(
        "p, df, expected",
        [(0.95, 2, 5.991465), (0.95, 1, 3.841459), (0.5, 2, 1.386294)],
    )
    def test_quantile_examples(self, p, df, expected):
        assert chi_square_quantile(p, df) == pytest.approx(expected, abs=1e-6)

    def test_quantile_against_reference(self):
        for df in range(1, 21):
            for p in (1e-6, 0.01, 0.05, 0.5, 0.9, 0.95, 0.99, 1 - 1e-9):
                assert chi_square_quantile(p, df) == pytest.approx(sps.chi2.ppf(p, df), abs=1e-8, rel=1e-10)

    @pytest.mark.parametrize("p", [0.0, 1.0, -0.1, 1.5])
    def test_quantile_domain(self, p):
        with pytest.raises(DomainError):
            chi_square_quantile(p, 2)

    # Points where 1 - sf(x) carries fewer correct digits than 1e-6 / x
    # needs: tiny x with many degrees of freedom puts the cdf near 1e-14,
    # so the round trip through 1 - sf loses the value (see the ledger).
    _ILL = {(k, x) for k in range(1, 11) for x in np.round(np.linspace(0.01, 30, 60), 6)
            if sps.chi2.cdf(x, k) < 1e-6}

    @pytest.mark.parametrize("k", range(1, 11))
    def test_quantile_inverts_sf(self, k):
        for x in np.round(np.linspace(0.01, 30, 60), 6):
            if (k, x) in self._ILL:
                continue
            assert abs(chi_square_quantile(1 - chi_square_sf(x, k), k) - x) <= 1e-6, (k, x)

    @pytest.mark.xfail(reason="1 - sf(x) underflows the relative precision needed near x=0 "
                              "for large df; the cdf form below passes", strict=True)
    def test_quantile_inverts_sf_ill_conditioned(self):
        for k, x in sorted(self._ILL):
            assert abs(chi_square_quantile(1 - chi_square_sf(x, k), k) - x) <= 1e-6

    def test_quantile_inverts_cdf_everywhere(self):
        for k in range(1, 11):
            for x in np.round(np.linspace(0.01, 30, 60), 6):
                assert abs(chi_square_quantile(chi_square_cdf(x, k), k) - x) <= 1e-6, (k, x)


class TestBrent:
    def test_finds_root(self):
        root, it = brentq(lambda x: x**3 - 2, 0.0, 2.0)
        assert root == pytest.approx(2 ** (1 / 3), abs=1e-12)
        assert it < 50

    def test_no_sign_change(self):
        with pytest.raises(DomainError):
            brentq(lambda x: x * x + 1, -1.0, 1.0)


class TestRngStream:
    def test_identical_streams_are_byte_identical(self):
        a = RngStream(2024, 5).generator().random(1_000_000)
        b = RngStream(2024, 5).generator().random(1_000_000)
        assert a.tobytes() == b.tobytes()

    def test_distinct_indices_differ_and_are_uncorrelated(self):
        a = RngStream(2024, 0).generator().standard_normal(100_000)
        b = RngStream(2024, 1).generator().standard_normal(100_000)
        assert not np.array_equal(a, b)
        assert abs(np.corrcoef(a, b)[0, 1]) < 4 / math.sqrt(a.size)

    def test_children_are_distinct(self):
        s = RngStream(1, 3)
        x = s.child(0).generator().random(5)
        y = s.child(1).generator().random(5)
        assert not np.array_equal(x, y)
        assert np.array_equal(x, RngStream(1, 3, (0,)).generator().random(5))

    @pytest.mark.parametrize("seed, index", [(-1, 0), (2**64, 0), (0, -1)])
    def test_invalid(self, seed, index):
        with pytest.raises(DomainError):
            RngStream(seed, index)


class TestSamplers:
    def test_normal_mean(self):
        x = sample_mvnormal(np.zeros(3), 1.0, 100_000, RngStream(1))
        assert x.shape == (100_000, 3)
        assert np.all(np.abs(x.mean(axis=0)) <= 0.02)

    def test_normal_variance_is_scale(self):
        x = sample_mvnormal(np.zeros(2), 2.0, 100_000, RngStream(2))
        assert np.all(np.abs(x.var(axis=0, ddof=1) - 2.0) <= 0.06)

    def test_normal_deterministic(self):
        a = sample_mvnormal([0.0], 1.5, 1, RngStream(9, 4))
        b = sample_mvnormal([0.0], 1.5, 1, RngStream(9, 4))
        assert a.shape == (1, 1) and a[0, 0] == b[0, 0]

    def test_normal_bad_scale(self):
        with pytest.raises(DomainError):
            sample_mvnormal([0.0], 0.0, 10, RngStream(0))

    def test_t_moments(self):
        x = sample_mvt(5, 1.0, 2, 200_000, RngStream(3))
        assert np.all(np.abs(x.var(axis=0) - 5 / 3) <= 0.05)
        assert np.all(np.abs(x.mean(axis=0)) <= 0.02)

    def test_t_shares_mixing_variable(self):
        # coordinates of one row are uncorrelated but dependent through W
        x = sample_mvt(5, 1.0, 2, 200_000, RngStream(4))
        assert abs(np.corrcoef(x[:, 0] ** 2, x[:, 1] ** 2)[0, 1]) > 0.05

    def test_t_low_df(self):
        with pytest.raises(DomainError):
            sample_mvt(2, 1.0, 1, 10, RngStream(0))

    def test_exp_rate(self):
        x = sample_mvexp(1.0, 2, 200_000, RngStream(5))
        assert np.all(x > 0)
        assert np.all(np.abs(x.mean(axis=0) - 1.0) <= 0.01)
        y = sample_mvexp(2.0, 1, 200_000, RngStream(6))
        assert abs(y.mean() - 0.5) <= 0.01

    def test_exp_bad_rate(self):
        with pytest.raises(DomainError):
            sample_mvexp(-1.0, 1, 10, RngStream(0))
