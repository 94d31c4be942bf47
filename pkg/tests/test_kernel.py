import math

import numpy as np
import pytest

from evpricing import (
    BracketError,
    ConvergenceError,
    DomainError,
    FlatObjectiveError,
    Interval,
    find_root,
    integrate,
    lambert_w_minus1,
    ln_gamma,
    maximize_1d,
    poisson_cdf,
)


class TestInterval:
    def test_ordering_enforced(self):
        with pytest.raises(DomainError):
            Interval(2.0, 1.0)
        with pytest.raises(DomainError):
            Interval(1.0, 1.0)

    def test_unbounded_flag(self):
        assert Interval(0.0, math.inf).unbounded
        assert not Interval(0.0, 1.0).unbounded

    def test_lower_endpoint_finite(self):
        with pytest.raises(DomainError):
            Interval(-math.inf, 0.0)


class TestLnGamma:
    def test_known_values(self):
        assert ln_gamma(1.0) == pytest.approx(0.0, abs=1e-15)
        assert ln_gamma(0.5) == pytest.approx(math.log(math.sqrt(math.pi)), rel=1e-14)
        assert ln_gamma(7.0) == pytest.approx(math.log(720.0), rel=1e-14)

    @pytest.mark.parametrize("x", [0.5, 1.3, 7.7, 42.0])
    def test_recurrence(self, x):
        lhs = math.exp(ln_gamma(x + 1.0))
        rhs = x * math.exp(ln_gamma(x))
        assert lhs == pytest.approx(rhs, rel=1e-10)

    @pytest.mark.parametrize("x", [0.0, -1.0, -0.5])
    def test_domain(self, x):
        with pytest.raises(DomainError):
            ln_gamma(x)


class TestPoissonCdf:
    def test_single_term(self):
        assert poisson_cdf(1.0, 0) == pytest.approx(math.exp(-1.0), rel=1e-14)

    def test_zero_mean(self):
        assert poisson_cdf(0.0, 5) == 1.0

    def test_direct_summation_oracle(self):
        # independent oracle: six explicit terms
        y = 5.0
        expected = sum(math.exp(-y) * y ** j / math.factorial(j) for j in range(6))
        assert poisson_cdf(5.0, 5) == pytest.approx(expected, rel=1e-13)

    def test_monotone_in_mean_and_count(self):
        ys = np.linspace(0.0, 50.0, 26)
        ks = range(0, 61, 6)
        for k in ks:
            vals = [poisson_cdf(float(y), k) for y in ys]
            assert all(a >= b - 1e-13 for a, b in zip(vals, vals[1:]))
        for y in ys:
            vals = [poisson_cdf(float(y), k) for k in ks]
            assert all(b >= a - 1e-13 for a, b in zip(vals, vals[1:]))

    def test_increment_is_pmf(self):
        for k in range(1, 31, 3):
            for y in (0.5, 3.0, 11.0, 30.0):
                pmf = math.exp(k * math.log(y) - y - math.lgamma(k + 1))
                diff = poisson_cdf(y, k) - poisson_cdf(y, k - 1)
                assert diff == pytest.approx(pmf, rel=1e-10)

    def test_large_arguments_stable(self):
        val = poisson_cdf(1e6, 10 ** 6)
        assert 0.0 < val < 1.0

    def test_domain(self):
        with pytest.raises(DomainError):
            poisson_cdf(-0.1, 3)
        with pytest.raises(DomainError):
            poisson_cdf(1.0, -1)


class TestLambertW:
    def test_branch_point(self):
        assert lambert_w_minus1(-1.0 / math.e) == -1.0

    def test_bisection_oracle(self):
        # oracle: bisection on w*exp(w) = z over [-50, -1]
        for z in (-0.1, -0.3):
            lo, hi = -50.0, -1.0
            for _ in range(200):
                mid = 0.5 * (lo + hi)
                if (mid * math.exp(mid) - z) * (lo * math.exp(lo) - z) <= 0:
                    hi = mid
                else:
                    lo = mid
            assert lambert_w_minus1(z) == pytest.approx(0.5 * (lo + hi), abs=1e-12)

    def test_residual_along_domain(self):
        zs = -np.exp(np.linspace(math.log(1.0 / math.e), math.log(1e-8), 100))
        for z in zs:
            w = lambert_w_minus1(float(z))
            assert w <= -1.0
            assert abs(w * math.exp(w) - z) <= 1e-12

    @pytest.mark.parametrize("z", [0.0, 0.5, -0.5, -1.0])
    def test_domain(self, z):
        with pytest.raises(DomainError):
            lambert_w_minus1(z)


class TestIntegrate:
    def test_exponential_tail(self):
        val = integrate(lambda x: math.exp(-x), Interval(0.0, math.inf), tol=1e-10)
        assert val == pytest.approx(1.0, abs=1e-10)

    def test_constant(self):
        assert integrate(lambda x: 1.0, Interval(0.0, 1.0)) == pytest.approx(1.0, abs=1e-12)

    def test_inverse_square_tail(self):
        val = integrate(lambda x: x ** -2.0, Interval(1.0, math.inf))
        assert val == pytest.approx(1.0, abs=1e-10)

    @pytest.mark.parametrize("coeffs", [(1.0, 0.0, 0.0, 0.0, 0.0, 0.0),
                                        (0.0, 2.0, -1.0, 0.5, 0.0, 3.0),
                                        (1.0, -1.0, 1.0, -1.0, 1.0, -1.0)])
    def test_polynomials_exact(self, coeffs):
        def poly(x):
            return sum(c * x ** i for i, c in enumerate(coeffs))

        def antideriv(x):
            return sum(c * x ** (i + 1) / (i + 1) for i, c in enumerate(coeffs))

        a, b = -1.5, 2.5
        val = integrate(poly, Interval(a, b), tol=1e-10)
        assert val == pytest.approx(antideriv(b) - antideriv(a), abs=1e-9)

    def test_nonconvergence_carries_best_estimate(self):
        # a tolerance below the machine error floor can never be reached
        with pytest.raises(ConvergenceError) as info:
            integrate(lambda x: math.exp(-x), Interval(0.0, 1.0), tol=1e-18)
        assert info.value.best_estimate == pytest.approx(1.0 - math.exp(-1.0), rel=1e-12)
        assert info.value.estimated_error > 1e-18

    def test_bad_tolerance(self):
        with pytest.raises(DomainError):
            integrate(lambda x: x, Interval(0.0, 1.0), tol=0.0)

    def test_non_finite_integrand_rejected(self):
        with pytest.raises(DomainError, match="non-finite"):
            integrate(lambda x: float("nan"), Interval(0.0, 1.0))

    @pytest.mark.parametrize("f,lo,hi", [
        (lambda x: math.exp(-0.7 * x) * (1 + math.sin(x) ** 2), 0.0, math.inf),
        (lambda x: x ** -1.8, 2.0, math.inf),
        (lambda x: 1.0 / (1.0 + x * x), 0.0, math.inf),
        (lambda x: math.sqrt(x) * math.exp(-x), 0.0, math.inf),
        (lambda x: math.cos(3 * x) * math.exp(x), -1.0, 2.0),
        (lambda x: 1.0 / (1.0 + abs(x - 0.3)), 0.0, 1.0),
    ])
    def test_parity_with_library_quadrature(self, f, lo, hi):
        # independent oracle: a different adaptive quadrature implementation
        from scipy.integrate import quad
        expected, _ = quad(f, lo, hi if math.isfinite(hi) else np.inf, limit=200)
        got = integrate(f, Interval(lo, hi), tol=1e-10)
        assert got == pytest.approx(expected, abs=1e-8)


class TestMaximize1d:
    def test_parabola(self):
        x, fx = maximize_1d(lambda x: -(x - 2.0) ** 2, Interval(0.0, 10.0))
        assert x == pytest.approx(2.0, abs=1e-8)
        assert fx == pytest.approx(0.0, abs=1e-12)

    def test_x_exp_minus_x(self):
        # argmax of a smooth interior max is resolvable to ~sqrt(eps) only
        x, fx = maximize_1d(lambda x: x * math.exp(-x), Interval(0.0, math.inf))
        assert x == pytest.approx(1.0, abs=1e-7)
        assert fx == pytest.approx(math.exp(-1.0), rel=1e-12)

    def test_guarantee_objective_vs_dense_grid(self):
        # oracle: dense grid of 1e6 points on (0, 10)
        f = lambda x: x * (1.0 - math.exp(-x ** -2.0))
        xs = np.linspace(1e-6, 10.0, 10 ** 6)
        fs = xs * (1.0 - np.exp(-xs ** -2.0))
        i = int(np.argmax(fs))
        x, fx = maximize_1d(f, Interval(0.0, math.inf), tol=1e-10)
        assert x == pytest.approx(float(xs[i]), abs=2e-5)
        assert fx == pytest.approx(float(fs[i]), abs=1e-9)

    def test_flat_objective_reported(self):
        with pytest.raises(FlatObjectiveError):
            maximize_1d(lambda x: 1.0, Interval(0.0, 1.0))


class TestFindRoot:
    def test_linear(self):
        assert find_root(lambda x: x - 1.0, 0.0, 2.0) == pytest.approx(1.0, abs=1e-10)

    def test_sqrt2(self):
        root = find_root(lambda x: x * x - 2.0, 1.0, 2.0)
        assert root == pytest.approx(math.sqrt(2.0), abs=1e-10)

    def test_poisson_derivative_vs_sign_change_oracle(self):
        # k = 1 objective derivative; oracle: dense-grid sign change
        def fprime(y):
            m = y ** -2.0
            return 1.0 - poisson_cdf(m, 1) - m * poisson_cdf(m, 0)

        ys = np.linspace(2 ** -0.5, 1.0, 200001)
        vals = np.array([fprime(float(y)) for y in ys])
        flips = np.nonzero(np.sign(vals[:-1]) != np.sign(vals[1:]))[0]
        assert len(flips) == 1
        bracket_mid = 0.5 * (ys[flips[0]] + ys[flips[0] + 1])
        root = find_root(fprime, 2 ** -0.5, 1.0, tol=1e-12)
        assert root == pytest.approx(float(bracket_mid), abs=1e-5)

    def test_no_sign_change(self):
        with pytest.raises(BracketError):
            find_root(lambda x: x * x + 1.0, -1.0, 1.0)
