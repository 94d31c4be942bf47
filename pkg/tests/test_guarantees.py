import math

import numpy as np
import pytest
from scipy import optimize, special

from evpricing import (
    BoundedPower,
    DomainError,
    Exponential,
    Pareto,
    adaptivity_gap,
    guarantee_value,
    kennedy_kertz_nu,
    minimize_phi_1,
    phi_1_closed,
    phi_k,
    phi_k_alpha2_closed,
    sqrt_bound,
    u_star,
    x_k_root,
)
from evpricing.guarantees import Method


def objective_series_oracle(x: float, alpha: float, k: int, terms: int = 200) -> float:
    """Truncated direct double series x e^{-y} sum_{j<=k} sum_{s>=j} y^s/s!."""
    y = x ** -alpha
    total = 0.0
    for j in range(1, k + 1):
        for s in range(j, terms + 1):
            total += math.exp(s * math.log(y) - y - math.lgamma(s + 1))
    return x * total


class TestPhiK:
    def test_worst_case_value(self):
        res = phi_k(1.656, 1)
        assert res.value == pytest.approx(0.712773812, abs=1e-6)
        assert res.value >= 0.712

    def test_closed_matches_numeric_at_two(self):
        closed = phi_k(2.0, 1)
        numeric = phi_k(2.0, 1, numeric=True)
        assert closed.method is Method.CLOSED_FORM
        assert numeric.method is Method.NUMERIC_MAX
        assert closed.value == pytest.approx(numeric.value, abs=1e-8)

    def test_large_k_approaches_floor(self):
        for k in (100, 1000):
            val = phi_k(2.0, k).value
            floor = sqrt_bound(k)
            assert floor <= val <= floor + 0.02

    def test_rejects_heavy_shape(self):
        with pytest.raises(DomainError):
            phi_k(1.0, 1)
        with pytest.raises(DomainError):
            phi_k(0.8, 3)

    @pytest.mark.parametrize("alpha", [1.2, 1.656, 2.0, 3.0, 8.0])
    @pytest.mark.parametrize("k", [1, 2, 5, 10])
    def test_value_in_unit_interval(self, alpha, k):
        val = phi_k(alpha, k).value
        assert 0.0 < val < 1.0
        assert val >= sqrt_bound(k) - 1e-9

    def test_series_rewrite_equals_direct_summation(self):
        # brute-force equivalence of the Poisson-tail rewrite on a 5x5x5 grid
        alphas = (1.2, 1.6, 2.0, 3.0, 5.0)
        ks = (1, 2, 3, 5, 8)
        xs = (0.5, 0.8, 1.0, 1.5, 2.5)
        for alpha in alphas:
            for k in ks:
                for x in xs:
                    direct = objective_series_oracle(x, alpha, k)
                    y = x ** -alpha
                    rewrite = x * float(special.gammainc(np.arange(1, k + 1), y).sum())
                    assert rewrite == pytest.approx(direct, abs=1e-9)


class TestUStar:
    def test_first_order_condition(self):
        u = u_star(2.0)
        assert abs(u ** 2 + 2.0 - u ** 2 * math.exp(u ** -2.0)) <= 1e-9

    def test_case_study_shape(self):
        assert u_star(2.24) == pytest.approx(0.849, abs=5e-4)

    def test_find_root_oracle(self):
        # oracle: bracketed root of the first-order condition over (0, 10)
        from evpricing import find_root
        g = lambda u: u ** 2 + 2.0 - u ** 2 * math.exp(u ** -2.0)
        root = find_root(g, 0.5, 5.0, tol=1e-13)
        assert u_star(2.0) == pytest.approx(root, abs=1e-9)

    def test_large_alpha_against_numeric_max(self):
        res = phi_k(200.0, 1, numeric=True)
        assert u_star(200.0) == pytest.approx(res.argmax_x, abs=1e-6)


class TestPhi1Closed:
    def test_worst_point(self):
        assert phi_1_closed(1.656) == pytest.approx(0.712773812, abs=1e-6)

    @pytest.mark.parametrize("alpha", [1.01, 1.2, 1.656, 2.0, 3.0, 10.0, 25.0])
    def test_matches_numeric_max(self, alpha):
        numeric = phi_k(alpha, 1, numeric=True).value
        assert phi_1_closed(alpha) == pytest.approx(numeric, abs=1e-8)

    def test_closed_numeric_agreement_along_grid(self):
        for alpha in np.linspace(1.05, 40.0, 50):
            assert phi_1_closed(float(alpha)) == pytest.approx(
                phi_k(float(alpha), 1, numeric=True).value, abs=1e-8)

    def test_limits_toward_one(self):
        # the guarantee rises back toward 1 on both ends of the shape range
        assert phi_1_closed(1.01) > 0.9
        assert phi_1_closed(1000.0) > 0.98


class TestMinimizePhi1:
    def test_location_and_value(self):
        alpha_star, value = minimize_phi_1()
        # oracle: bounded scalar minimization of the closed form
        res = optimize.minimize_scalar(phi_1_closed, bounds=(1.01, 50.0),
                                       method="bounded", options={"xatol": 1e-12})
        assert alpha_star == pytest.approx(res.x, abs=1e-5)
        assert value == pytest.approx(res.fun, abs=1e-10)

    def test_local_minimum_certificate(self):
        alpha_star, value = minimize_phi_1()
        assert phi_1_closed(alpha_star - 0.01) > value
        assert phi_1_closed(alpha_star + 0.01) > value
        assert value >= 0.712 - 5e-4


class TestSqrtBound:
    def test_values(self):
        assert sqrt_bound(1) == pytest.approx(1.0 - 1.0 / math.sqrt(2 * math.pi), rel=1e-14)
        assert sqrt_bound(4) == pytest.approx(1.0 - 1.0 / math.sqrt(8 * math.pi), rel=1e-14)
        assert sqrt_bound(100) == pytest.approx(0.96011, abs=5e-6)


class TestKennedyKertzNu:
    def test_minimum_near(self):
        grid = np.linspace(1.05, 49.0, 500)
        vals = [kennedy_kertz_nu(float(a)) for a in grid]
        assert min(vals) == pytest.approx(0.776, abs=5e-4)

    def test_limit_toward_one(self):
        assert kennedy_kertz_nu(1e4) == pytest.approx(1.0, abs=1e-3)

    def test_alpha_two_closed_value(self):
        assert kennedy_kertz_nu(2.0) == pytest.approx(math.sqrt(2.0 / math.pi), rel=1e-12)

    def test_dominates_fixed_price_guarantee(self):
        for alpha in np.linspace(1.02, 45.0, 100):
            assert kennedy_kertz_nu(float(alpha)) / phi_1_closed(float(alpha)) >= 1.0


class TestAdaptivityGap:
    def test_against_scalar_optimizer_oracle(self):
        alpha, gap = adaptivity_gap()
        res = optimize.minimize_scalar(
            lambda a: -kennedy_kertz_nu(a) / phi_1_closed(a),
            bounds=(1.01, 50.0), method="bounded", options={"xatol": 1e-12})
        assert alpha == pytest.approx(res.x, abs=1e-4)
        assert gap == pytest.approx(-res.fun, abs=1e-9)

    def test_gap_at_least_one(self):
        _, gap = adaptivity_gap()
        assert gap >= 1.0

    def test_interior_maximum_certificate(self):
        alpha, gap = adaptivity_gap()
        probe = kennedy_kertz_nu(1.01) / phi_1_closed(1.01)
        assert probe < gap
        assert kennedy_kertz_nu(alpha + 0.01) / phi_1_closed(alpha + 0.01) < gap


class TestXkRoot:
    def test_bracket_k1(self):
        x1 = x_k_root(1)
        assert 2 ** -0.5 <= x1 <= 1.0

    def test_matches_numeric_argmax(self):
        res = phi_k(2.0, 1, numeric=True)
        assert x_k_root(1) == pytest.approx(res.argmax_x, abs=1e-6)

    def test_bracket_k25(self):
        x25 = x_k_root(25)
        assert 25.0 <= x25 ** -2.0 <= 26.0

    @pytest.mark.parametrize("k", [1, 2, 5, 25, 200])
    def test_stationarity_residual(self, k):
        x = x_k_root(k)
        m = x ** -2.0
        from evpricing import poisson_cdf
        resid = k * (1.0 - poisson_cdf(m, k)) - m * poisson_cdf(m, k - 1)
        assert abs(resid) <= 1e-10


class TestPhiKAlpha2Closed:
    def test_matches_single_unit_closed_form(self):
        assert phi_k_alpha2_closed(1) == pytest.approx(phi_1_closed(2.0), abs=1e-7)

    def test_dominates_floor_through_200(self):
        for k in range(1, 201):
            assert phi_k_alpha2_closed(k) >= sqrt_bound(k)

    def test_deficit_normalization_tightens(self):
        deficits = []
        for k in (100, 1000, 10000):
            v = phi_k_alpha2_closed(k)
            deficits.append((1.0 - v) * math.sqrt(2.0 * math.pi * k))
        assert all(0.85 <= d <= 1.15 for d in deficits)
        assert deficits == sorted(deficits)  # approaching 1 from below

    def test_matches_numeric_max(self):
        for k in (2, 7, 31, 500):
            numeric = phi_k(2.0, k, numeric=True).value
            assert phi_k_alpha2_closed(k) == pytest.approx(numeric, abs=1e-7)


class TestGuaranteeValue:
    def test_frechet_routes_to_phi_k(self):
        assert guarantee_value(Pareto(2.0), 3) == pytest.approx(
            phi_k(2.0, 3).value, rel=1e-12)

    def test_light_tails_get_one(self):
        assert guarantee_value(Exponential(1.0), 5) == 1.0
        assert guarantee_value(BoundedPower(1.0, 2.0), 2) == 1.0
