"""Special-function accuracy against independent oracles.

Oracles: the defining power series accumulated in 40-digit arithmetic for
the Bessel function, and adaptive integration of the defining integral
(scipy QUADPACK with scipy's own scaled Bessel) for the Marcum Q value.
Neither shares code with the implementations under test.
"""

import math

import mpmath
import numpy as np
import pytest
from scipy import special as sps
from scipy.integrate import quad

from uavplace.analysis import marcum_upper_bound
from uavplace.special import bessel_i0, bessel_i0e, marcum_q1


def i0_series_oracle(t: float) -> mpmath.mpf:
    """Sum (t/2)^{2k} / (k!)^2 in high precision."""
    with mpmath.workdps(40):
        t = mpmath.mpf(t)
        total = mpmath.mpf(1)
        term = mpmath.mpf(1)
        k = 0
        while True:
            k += 1
            term *= (t / 2) ** 2 / k**2
            total += term
            if term < mpmath.mpf(10) ** -38 * total:
                return total


def marcum_quad_oracle(a: float, b: float) -> float:
    """Adaptive integration of x exp(-(x^2+a^2)/2) I0(ax) from b upward."""

    def integrand(x):
        return x * sps.i0e(a * x) * math.exp(-0.5 * (x - a) ** 2)

    hi = max(a, b) + 14.0
    if hi <= b:
        return 0.0
    val, _ = quad(integrand, b, hi, limit=300, epsabs=1e-13, epsrel=1e-13)
    return val


class TestBesselI0:
    def test_at_zero(self):
        assert bessel_i0(0.0) == 1.0

    def test_frozen_values(self):
        assert bessel_i0(1.0) == pytest.approx(1.2660658777520084, rel=1e-12)
        assert bessel_i0(10.0) == pytest.approx(2815.7166284662544, rel=1e-12)

    @pytest.mark.parametrize("t", [0.1, 0.5, 1.0, 3.0, 7.5, 15.0, 19.9, 20.1, 30.0, 60.0, 120.0])
    def test_against_series_oracle(self, t):
        ref = float(i0_series_oracle(t))
        assert bessel_i0(t) == pytest.approx(ref, rel=1e-12)

    def test_scaled_against_series_oracle(self):
        for t in (0.0, 0.7, 12.0, 25.0, 200.0, 700.0):
            with mpmath.workdps(40):
                ref = float(i0_series_oracle(t) * mpmath.exp(-mpmath.mpf(t))) if t < 600 else None
            if ref is not None:
                assert bessel_i0e(t) == pytest.approx(ref, rel=1e-12)

    def test_no_overflow_up_to_700(self):
        vals = bessel_i0(np.linspace(0.0, 700.0, 200))
        assert np.all(np.isfinite(vals))
        assert vals[-1] > 1e300

    def test_ge_one(self):
        assert np.all(bessel_i0(np.linspace(0, 50, 100)) >= 1.0)

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            bessel_i0(-1.0)


class TestMarcumQ:
    def test_b_zero_is_one(self):
        assert marcum_q1(1.0, 0.0) == 1.0
        assert marcum_q1(0.0, 0.0) == 1.0

    def test_a_zero_closed_form(self):
        b = np.linspace(0.0, 12.0, 40)
        assert np.allclose(marcum_q1(np.zeros_like(b), b), np.exp(-0.5 * b * b), rtol=0, atol=1e-15)

    def test_frozen_value(self):
        # independent quadrature oracle gives 0.7328798037968...
        assert marcum_q1(1.0, 1.0) == pytest.approx(0.7328798037968199, abs=1e-10)

    def test_grid_against_quad_oracle(self):
        a = np.linspace(0.0, 8.0, 20)
        b = np.linspace(0.0, 8.0, 20)
        worst = 0.0
        for ai in a:
            for bi in b:
                if bi == 0.0:
                    continue
                ref = marcum_quad_oracle(float(ai), float(bi))
                worst = max(worst, abs(marcum_q1(float(ai), float(bi)) - ref))
        assert worst < 1e-10

    def test_quadrature_branch_large_ab(self):
        for a, b in [(20.0, 15.0), (15.0, 20.0), (25.0, 24.0), (18.0, 30.0)]:
            ref = marcum_quad_oracle(a, b)
            assert marcum_q1(a, b) == pytest.approx(ref, abs=1e-10)

    def test_monotone_decreasing_in_b(self):
        b = np.linspace(0.0, 10.0, 60)
        for a in (0.0, 0.5, 2.0, 5.0):
            q = marcum_q1(np.full_like(b, a), b)
            assert np.all(np.diff(q) <= 1e-14)

    def test_monotone_increasing_in_a(self):
        a = np.linspace(0.0, 10.0, 60)
        for b in (0.5, 2.0, 5.0):
            q = marcum_q1(a, np.full_like(a, b))
            assert np.all(np.diff(q) >= -1e-14)

    def test_in_unit_interval(self):
        rng = np.random.default_rng(0)
        a = rng.uniform(0, 30, 500)
        b = rng.uniform(0, 30, 500)
        q = marcum_q1(a, b)
        assert np.all((q >= 0.0) & (q <= 1.0))

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            marcum_q1(-0.1, 1.0)


class TestMarcumUpperBound:
    def test_tight_at_a_zero(self):
        for b in (0.0, 0.5, 2.0, 7.0):
            assert marcum_upper_bound(0.0, b) == pytest.approx(marcum_q1(0.0, b), rel=1e-14)

    def test_holds_on_grid(self):
        a = np.linspace(0.0, 10.0, 41)
        b = np.linspace(0.0, 10.0, 41)
        A, B = np.meshgrid(a, b)
        q = marcum_q1(A, B)
        bound = np.exp(np.minimum(-0.5 * B**2 + A * B, 700.0))
        assert np.all(q <= bound + 1e-12)

    def test_raw_value_and_clip(self):
        assert marcum_upper_bound(1.0, 1.0) == pytest.approx(math.exp(0.5), rel=1e-14)
        assert marcum_upper_bound(1.0, 1.0, clip=True) == 1.0
