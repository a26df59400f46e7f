import math

import numpy as np
import pytest

from uavplace.channel import (
    RayleighParams,
    RicianParams,
    elevation_laws,
    lambda_from_link,
    rayleigh_success,
    rician_success,
    simulate_outage_mc,
)


class TestLambdaFromLink:
    def test_unit_ratio(self):
        assert lambda_from_link(0.0, 1.0) == 1.0

    def test_75db(self):
        assert lambda_from_link(75.0, 1.0) == pytest.approx(10.0**-7.5, rel=1e-12)

    def test_rate_two(self):
        assert lambda_from_link(10.0, 2.0) == pytest.approx(0.3, rel=1e-12)

    def test_bad_rate(self):
        with pytest.raises(ValueError):
            lambda_from_link(10.0, 0.0)


class TestRayleighSuccess:
    def test_zero_distance_zero_altitude(self):
        p = RayleighParams(lam=1.0, r=2.0, h=0.0)
        assert rayleigh_success(np.array([0.3]), np.array([0.3]), p) == 1.0

    def test_altitude_only(self):
        p = RayleighParams(lam=1.0, r=2.0, h=1.0)
        assert rayleigh_success(np.array([0.3]), np.array([0.3]), p) == pytest.approx(math.exp(-1.0), rel=1e-14)

    def test_formula_value(self):
        p = RayleighParams(lam=1.0, r=3.0, h=1.0)
        got = rayleigh_success(np.array([0.0]), np.array([1.0]), p)
        assert got == pytest.approx(math.exp(-(2.0**1.5)), rel=1e-14)

    def test_decreasing_in_distance_and_altitude(self):
        d = np.linspace(0.0, 3.0, 30)
        p = RayleighParams(lam=0.7, r=2.5, h=0.4)
        vals = rayleigh_success(np.zeros((30, 1)), d.reshape(-1, 1), p)
        assert np.all(np.diff(vals) < 0)
        hs = np.linspace(0.0, 3.0, 30)
        vh = [rayleigh_success(np.array([0.0]), np.array([1.0]), RayleighParams(0.7, 2.5, h)) for h in hs]
        assert np.all(np.diff(vh) < 0)

    def test_dimension_mismatch(self):
        p = RayleighParams(lam=1.0, r=2.0, h=0.0)
        with pytest.raises(ValueError):
            rayleigh_success(np.array([0.0, 0.0]), np.array([1.0]), p)

    def test_param_validation(self):
        with pytest.raises(ValueError):
            RayleighParams(lam=-1.0, r=2.0, h=0.0)
        with pytest.raises(ValueError):
            RayleighParams(lam=1.0, r=0.0, h=0.0)
        with pytest.raises(ValueError):
            RayleighParams(lam=1.0, r=2.0, h=-0.1)


class TestElevationLaws:
    def test_k_factor_at_zenith(self):
        p = RicianParams.suburban(lam=1.0, h=1.0)
        _, K, _ = elevation_laws(math.pi / 2, p)
        assert K == pytest.approx(15.0, rel=1e-12)  # a3 * e^{b3 pi/2} = 3 a3

    def test_k_factor_at_horizon(self):
        p = RicianParams.suburban(lam=1.0, h=1.0)
        _, K, _ = elevation_laws(0.0, p)
        assert K == pytest.approx(5.0, rel=1e-12)

    def test_pathloss_at_zenith(self):
        # direct evaluation of r = b1 + a1 / (1 + a2 exp(-b2 (theta - a2)))
        p = RicianParams.suburban(lam=1.0, h=1.0)
        theta = math.pi / 2
        plos = 1.0 / (1.0 + 4.88 * math.exp(-0.43 * (theta - 4.88)))
        r, _, got_plos = elevation_laws(theta, p)
        assert got_plos == pytest.approx(plos, rel=1e-14)
        assert r == pytest.approx(3.5 - 1.5 * plos, rel=1e-14)
        assert r == pytest.approx(3.4294082671583634, rel=1e-12)

    def test_plos_in_unit_interval(self):
        p = RicianParams.suburban(lam=1.0, h=1.0)
        th = np.linspace(0.0, math.pi / 2, 50)
        _, _, plos = elevation_laws(th, p)
        assert np.all((plos > 0.0) & (plos < 1.0))

    def test_theta_domain(self):
        p = RicianParams.suburban(lam=1.0, h=1.0)
        with pytest.raises(ValueError):
            elevation_laws(-0.1, p)
        with pytest.raises(ValueError):
            elevation_laws(2.0, p)


class TestRicianSuccess:
    def test_zero_threshold(self):
        p = RicianParams.suburban(lam=0.0, h=1.0)
        assert rician_success(np.array([0.0]), np.array([5.0]), p) == 1.0

    def test_zero_distance_zero_altitude(self):
        # zenith convention at the h = 0, x = u corner
        p = RicianParams.suburban(lam=1.0, h=0.0)
        assert rician_success(np.array([0.2]), np.array([0.2]), p) == 1.0

    def test_radial_symmetry_exact(self):
        p = RicianParams.suburban(lam=1.0, h=0.7)
        x = np.array([0.3, -0.4])
        u = np.array([0.0, 0.0])
        base = rician_success(x, u, p)
        for transform in (
            np.array([-0.3, -0.4]),
            np.array([0.3, 0.4]),
            np.array([-0.4, 0.3]),  # coordinate swap: same distance exactly
            np.array([0.4, -0.3]),
        ):
            assert rician_success(transform, u, p) == base

    def test_monotone_in_distance(self):
        p = RicianParams.suburban(lam=1.0, h=0.5)
        d = np.linspace(0.0, 2.0, 40).reshape(-1, 1)
        vals = rician_success(d, np.zeros((40, 1)), p)
        assert np.all(np.diff(vals) < 1e-12)

    def test_param_validation(self):
        with pytest.raises(ValueError):
            RicianParams(lam=1.0, h=0.0, a1=-1.5, b1=3.5, a2=4.88, b2=0.43, a3=0.0, b3=0.7)
        with pytest.raises(ValueError):
            # path-loss law dips below zero at the zenith
            RicianParams(lam=1.0, h=0.0, a1=-10.0, b1=0.1, a2=4.88, b2=0.43, a3=5.0, b3=0.7)


class TestRadialSymmetryRayleigh:
    def test_exact_under_reflection(self):
        p = RayleighParams(lam=0.8, r=2.7, h=0.3)
        x = np.array([0.25, -0.65])
        base = rayleigh_success(x, np.zeros(2), p)
        assert rayleigh_success(np.array([-0.25, 0.65]), np.zeros(2), p) == base
        assert rayleigh_success(np.array([-0.65, 0.25]), np.zeros(2), p) == base


class TestMonteCarloOracle:
    def test_rayleigh_vs_analytic(self, rng):
        p = RayleighParams(lam=1.0, r=2.0, h=1.0)
        x = u = np.array([0.0])
        trials = 1_000_000
        emp = simulate_outage_mc(x, u, p, trials, rng)
        analytic = 1.0 - math.exp(-1.0)
        sigma = math.sqrt(analytic * (1 - analytic) / trials)
        assert abs(emp - analytic) < 3 * sigma

    def test_zero_threshold_exact(self, rng):
        p = RayleighParams(lam=0.0, r=2.0, h=1.0)
        assert simulate_outage_mc(np.array([0.0]), np.array([2.0]), p, 1000, rng) == 0.0

    def test_rician_low_k_approaches_rayleigh(self, rng):
        # a3 -> 0 forces K -> 0 where the Rician gain degenerates to Rayleigh
        lam, h = 0.9, 0.8
        prr = RicianParams(lam=lam, h=h, a1=-1.5, b1=3.5, a2=4.88, b2=0.43, a3=1e-9, b3=0.7)
        pray = RayleighParams(lam=lam, r=elevation_laws(math.pi / 2, prr)[0], h=h)
        x = u = np.array([0.0])
        trials = 400_000
        emp = simulate_outage_mc(x, u, prr, trials, rng)
        analytic = 1.0 - rayleigh_success(x, u, pray)
        sigma = math.sqrt(analytic * (1 - analytic) / trials)
        assert abs(emp - analytic) < 3.5 * sigma

    def test_rician_vs_marcum_kernel(self, rng):
        p = RicianParams.suburban(lam=1.0, h=0.6)
        x, u = np.array([0.4]), np.array([0.0])
        trials = 400_000
        emp = simulate_outage_mc(x, u, p, trials, rng)
        analytic = 1.0 - rician_success(x, u, p)
        sigma = math.sqrt(analytic * (1 - analytic) / trials)
        assert abs(emp - analytic) < 3.5 * sigma

    def test_trials_validation(self, rng):
        p = RayleighParams(lam=1.0, r=2.0, h=0.0)
        with pytest.raises(ValueError):
            simulate_outage_mc(np.array([0.0]), np.array([1.0]), p, 0, rng)
