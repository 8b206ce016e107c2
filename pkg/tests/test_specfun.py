"""Tests for the incomplete-gamma kernel.

Reference values were frozen from a 40-digit mpmath evaluation and,
where marked, cross-checked against adaptive quadrature of the
defining integral at 1e-14 tolerance before this module was written.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from thintail.specfun import (
    Accuracy,
    log_gamma,
    regularized_upper_gamma,
    upper_inc_gamma,
)

# mpmath, 40 digits
GAMMA_QUARTER = 3.625609908221908311931
LN_GAMMA_QUARTER = 1.288022524698077457371
UIG_QUARTER_HALF = 0.5565804140094271343879  # Gamma(1/4, 1/2), quadrature-checked
Q_QUARTER_FIVE = 0.0004920251244463400829434  # Q(1/4, 5)


class TestLogGamma:
    def test_at_one_and_two(self):
        assert log_gamma(1.0) == 0.0
        assert log_gamma(2.0) == 0.0

    def test_quarter(self):
        assert log_gamma(0.25) == pytest.approx(LN_GAMMA_QUARTER, rel=1e-14)

    @pytest.mark.parametrize("a", [1e-3, 0.1, 1.5, 100.0, 1e6])
    def test_wide_range_against_math(self, a):
        # relative error target 1e-13 across [1e-3, 1e6]
        assert log_gamma(a) == pytest.approx(math.lgamma(a), rel=1e-13)

    @pytest.mark.parametrize("a", [0.0, -1.0, float("nan"), float("inf")])
    def test_domain_errors(self, a):
        with pytest.raises(ValueError):
            log_gamma(a)


class TestUpperIncGamma:
    def test_exponential_identity(self):
        assert upper_inc_gamma(1.0, 2.0) == pytest.approx(math.exp(-2.0), rel=1e-13)

    def test_at_zero_is_complete_gamma(self):
        assert upper_inc_gamma(0.25, 0.0) == pytest.approx(GAMMA_QUARTER, rel=1e-14)

    def test_quarter_half_frozen(self):
        assert upper_inc_gamma(0.25, 0.5) == pytest.approx(UIG_QUARTER_HALF, rel=1e-12)

    def test_quarter_half_quadrature_oracle(self):
        oracle, err = quad(lambda t: t ** (-0.75) * math.exp(-t), 0.5, np.inf, epsabs=1e-14, epsrel=1e-13)
        assert err < 1e-12
        assert upper_inc_gamma(0.25, 0.5) == pytest.approx(oracle, rel=1e-12)

    @pytest.mark.parametrize(
        "a,x",
        [(0.25, 5.0), (0.5, 2.0), (2.0, 3.0), (0.01, 1.0), (10.0, 25.0), (0.05, 0.2)],
    )
    def test_grid_against_quadrature(self, a, x):
        oracle, err = quad(lambda t: t ** (a - 1.0) * math.exp(-t), x, np.inf, epsabs=1e-15, epsrel=1e-13)
        assert upper_inc_gamma(a, x) == pytest.approx(oracle, rel=1e-12)

    def test_strictly_decreasing_in_x(self):
        xs = np.linspace(0.0, 30.0, 400)
        vals = upper_inc_gamma(0.25, xs)
        assert (np.diff(vals) < 0.0).all()

    @pytest.mark.parametrize("a", [0.25, 0.5, 1.0, 2.0])
    @pytest.mark.parametrize("x", [0.01, 0.1, 1.0, 10.0])
    def test_recurrence(self, a, x):
        # Gamma(a+1, x) = a*Gamma(a, x) + x^a * exp(-x)
        lhs = upper_inc_gamma(a + 1.0, x)
        rhs = a * upper_inc_gamma(a, x) + x**a * math.exp(-x)
        assert lhs == pytest.approx(rhs, rel=1e-12)

    def test_analytic_identity_a_one(self):
        xs = np.linspace(0.0, 50.0, 101)
        assert upper_inc_gamma(1.0, xs) == pytest.approx(np.exp(-xs), rel=1e-12)

    @pytest.mark.parametrize("a,x", [(-1.0, 1.0), (0.0, 1.0), (1.0, -0.5), (float("nan"), 1.0)])
    def test_domain_errors(self, a, x):
        with pytest.raises(ValueError):
            upper_inc_gamma(a, x)

    def test_no_convergence_failure_on_required_region(self):
        for a in (0.01, 0.1, 1.0, 5.0, 10.0):
            xs = np.array([0.0, 1e-8, 0.5, 1.0, 10.0, 100.0, 700.0])
            vals = upper_inc_gamma(a, xs)
            assert np.isfinite(vals).all()


class TestRegularizedUpper:
    def test_at_zero_is_one(self):
        assert regularized_upper_gamma(0.25, 0.0) == 1.0

    def test_half_at_log_two(self):
        assert regularized_upper_gamma(1.0, math.log(2.0)) == pytest.approx(0.5, rel=1e-14)

    def test_quarter_five_frozen(self):
        assert regularized_upper_gamma(0.25, 5.0) == pytest.approx(Q_QUARTER_FIVE, rel=1e-12)

    def test_bounds_everywhere(self):
        xs = np.concatenate((np.geomspace(1e-12, 700.0, 80), [0.0, np.inf]))
        for a in (0.01, 0.25, 1.0, 3.0, 10.0):
            q = regularized_upper_gamma(a, xs)
            assert ((q >= 0.0) & (q <= 1.0)).all()

    def test_underflow_flushes_to_zero(self):
        assert regularized_upper_gamma(0.25, 750.0) == 0.0
        assert regularized_upper_gamma(0.25, np.inf) == 0.0

    def test_scalar_and_array_shapes(self):
        scalar = regularized_upper_gamma(0.5, 1.0)
        assert isinstance(scalar, float)
        arr = regularized_upper_gamma(0.5, np.array([[0.5, 1.0], [2.0, 3.0]]))
        assert arr.shape == (2, 2)

    @given(
        a=st.floats(min_value=0.02, max_value=10.0),
        x1=st.floats(min_value=0.0, max_value=50.0),
        dx=st.floats(min_value=1e-3, max_value=10.0),
    )
    @settings(max_examples=150, deadline=None)
    def test_monotone_decreasing_property(self, a, x1, dx):
        q1 = regularized_upper_gamma(a, x1)
        q2 = regularized_upper_gamma(a, x1 + dx)
        assert q2 <= q1
        # strict where the decrease is representable in float64
        if 1e-12 < q1 < 1.0 - 1e-12:
            assert q2 < q1


class TestAccuracy:
    def test_defaults_valid(self):
        acc = Accuracy()
        assert 0.0 < acc.rel_tol < 1e-6
        assert acc.max_iter >= 100

    @pytest.mark.parametrize("rel_tol", [0.0, -1e-9, 1e-6, 1.0])
    def test_rel_tol_invariant(self, rel_tol):
        with pytest.raises(ValueError):
            Accuracy(rel_tol=rel_tol)

    def test_max_iter_invariant(self):
        with pytest.raises(ValueError):
            Accuracy(max_iter=99)

    def test_custom_accuracy_is_used(self):
        loose = Accuracy(rel_tol=1e-7, max_iter=100)
        assert regularized_upper_gamma(0.25, 2.0, loose) == pytest.approx(
            regularized_upper_gamma(0.25, 2.0), rel=1e-6
        )
