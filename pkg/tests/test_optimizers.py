import math

import numpy as np
import pytest

from uavplace.channel import RayleighParams, RicianParams
from uavplace.density import GaussianDensity, Uniform1D, UniformBox2D
from uavplace.errors import OptimizerAbort
from uavplace.objective import Deployment, gradient, outage
from uavplace.optimizers import GdConfig, PsoConfig, gd_distributed, pso_optimize, random_deployment
from uavplace.quadrature import QuadratureSpec


class TestPsoMechanics:
    def test_single_particle_single_step(self, unit_interval, default_q):
        # N=1, T=1, zero inertia: the particle moves once (toward its own
        # PB and GB, both equal to the start, so it stays) and the global
        # best is the better of the evaluated positions
        ch = RayleighParams(1.0, 2.0, 0.3)
        cfg = PsoConfig(n_uavs=1, n_particles=1, iterations=1, inertia=(0.0, 0.0), seed=9)
        rec = pso_optimize(cfg, unit_interval, ch, default_q)
        assert rec.objective_trace[1] <= rec.objective_trace[0]
        assert rec.final_objective == rec.objective_trace.min()

    def test_gb_trace_monotone(self, unit_interval, default_q):
        ch = RayleighParams(1.0, 2.0, 0.2)
        cfg = PsoConfig(n_uavs=3, n_particles=12, iterations=40, seed=1)
        rec = pso_optimize(cfg, unit_interval, ch, default_q)
        assert np.all(np.diff(rec.objective_trace) <= 0)

    def test_bit_identical_given_seed(self, unit_interval, default_q):
        ch = RayleighParams(1.0, 2.0, 0.2)
        cfg = PsoConfig(n_uavs=2, n_particles=10, iterations=25, seed=42)
        a = pso_optimize(cfg, unit_interval, ch, default_q)
        b = pso_optimize(cfg, unit_interval, ch, default_q)
        assert np.array_equal(a.positions_trace, b.positions_trace)
        assert np.array_equal(a.objective_trace, b.objective_trace)
        assert a.final_objective == b.final_objective
        assert a.config_hash == b.config_hash
        assert a.to_dict() == b.to_dict()

    def test_seed_changes_run(self, unit_interval, default_q):
        ch = RayleighParams(1.0, 2.0, 0.2)
        a = pso_optimize(PsoConfig(n_uavs=2, n_particles=10, iterations=5, seed=1), unit_interval, ch, default_q)
        b = pso_optimize(PsoConfig(n_uavs=2, n_particles=10, iterations=5, seed=2), unit_interval, ch, default_q)
        assert not np.array_equal(a.positions_trace, b.positions_trace)

    def test_positions_stay_in_box(self, unit_interval, default_q):
        ch = RayleighParams(1.0, 2.0, 0.0)
        cfg = PsoConfig(n_uavs=2, n_particles=8, iterations=30, seed=3)
        rec = pso_optimize(cfg, unit_interval, ch, default_q)
        assert np.all(rec.final_positions >= 0.0) and np.all(rec.final_positions <= 1.0)

    def test_progress_stream(self, unit_interval, default_q):
        ch = RayleighParams(1.0, 2.0, 0.2)
        seen = []
        cfg = PsoConfig(n_uavs=1, n_particles=4, iterations=6, seed=0)
        pso_optimize(cfg, unit_interval, ch, default_q, progress=lambda t, v: seen.append((t, v)))
        assert [t for t, _ in seen] == list(range(1, 7))

    def test_config_validation(self):
        with pytest.raises(ValueError):
            PsoConfig(n_uavs=0)
        with pytest.raises(ValueError):
            PsoConfig(n_uavs=1, inertia=(0.4, 0.9))
        with pytest.raises(ValueError):
            PsoConfig(n_uavs=1, velocity_clamp=0.0)


class TestPsoFindsKnownOptima:
    def test_collapse_at_high_altitude(self, unit_interval, default_q):
        ch = RayleighParams(1.0, 2.0, 0.5)
        cfg = PsoConfig(n_uavs=4, n_particles=36, iterations=140, seed=5)
        rec = pso_optimize(cfg, unit_interval, ch, default_q)
        assert np.abs(rec.final_positions - 0.5).max() < 0.02

    def test_spread_at_ground_level(self, unit_interval, default_q):
        ch = RayleighParams(1.0, 2.0, 0.0)
        cfg = PsoConfig(n_uavs=4, n_particles=40, iterations=200, seed=5)
        rec = pso_optimize(cfg, unit_interval, ch, default_q)
        got = np.sort(rec.final_positions[:, 0])
        assert np.abs(got - np.array([0.08, 0.33, 0.66, 0.92])).max() < 0.03


class TestGd:
    def test_single_uav_converges_to_center_rayleigh(self, unit_interval, default_q):
        ch = RayleighParams(1.0, 2.0, 0.5)
        rec = gd_distributed(GdConfig(n_uavs=1, iterations=300, seed=2), unit_interval, ch, default_q)
        assert rec.converged
        assert abs(rec.final_positions[0, 0] - 0.5) < 1e-4

    def test_single_uav_converges_to_center_rician(self, unit_interval, default_q):
        ch = RicianParams.suburban(lam=1.0, h=0.5)
        rec = gd_distributed(GdConfig(n_uavs=1, iterations=300, seed=2), unit_interval, ch, default_q)
        assert rec.converged
        assert abs(rec.final_positions[0, 0] - 0.5) < 1e-4

    def test_single_uav_converges_to_gaussian_mean(self, std_normal, default_q):
        ch = RayleighParams(1.0, 2.0, 1.0)
        rec = gd_distributed(GdConfig(n_uavs=1, iterations=300, seed=3), std_normal, ch, default_q)
        assert rec.converged
        assert abs(rec.final_positions[0, 0]) < 1e-3

    def test_convergence_implies_small_exact_gradient(self, unit_interval, default_q):
        ch = RayleighParams(1.0, 2.0, 0.4)
        rec = gd_distributed(GdConfig(n_uavs=2, iterations=400, seed=4), unit_interval, ch, default_q)
        if rec.converged:
            G = gradient(rec.deployment, unit_interval, ch, default_q)
            assert np.linalg.norm(G, axis=1).max() <= 1e-4

    def test_bit_identical_given_seed(self, unit_interval, default_q):
        ch = RayleighParams(1.0, 2.0, 0.3)
        cfg = GdConfig(n_uavs=3, iterations=40, seed=11)
        a = gd_distributed(cfg, unit_interval, ch, default_q)
        b = gd_distributed(cfg, unit_interval, ch, default_q)
        assert np.array_equal(a.positions_trace, b.positions_trace)
        assert a.to_dict() == b.to_dict()

    def test_objective_decreases_overall(self, unit_square, coarse_q2d):
        ch = RayleighParams(1.0, 2.0, 0.4)
        rec = gd_distributed(GdConfig(n_uavs=3, iterations=60, seed=8), unit_square, ch, coarse_q2d)
        assert rec.final_objective <= rec.objective_trace[0]

    def test_sequential_variant_also_descends(self, unit_interval, default_q):
        ch = RayleighParams(1.0, 2.0, 0.3)
        rec = gd_distributed(GdConfig(n_uavs=3, iterations=60, seed=8, sequential=True),
                             unit_interval, ch, default_q)
        assert rec.final_objective <= rec.objective_trace[0]
        assert rec.status == "complete"

    def test_explicit_init(self, unit_interval, default_q):
        ch = RayleighParams(1.0, 2.0, 0.5)
        U0 = np.array([[0.2], [0.8]])
        rec = gd_distributed(GdConfig(n_uavs=2, iterations=5, seed=0), unit_interval, ch,
                             default_q, U_init=U0)
        assert np.array_equal(rec.positions_trace[0], U0)

    def test_divergence_abort_constant_eta(self, unit_interval, default_q):
        # a grossly oversized constant step oscillates and must abort
        ch = RayleighParams(1.0, 2.0, 0.1)
        cfg = GdConfig(n_uavs=1, iterations=100, eta=500.0, eta_policy="constant", seed=0)
        with pytest.raises(OptimizerAbort) as ei:
            gd_distributed(cfg, unit_interval, ch, default_q, U_init=np.array([[0.3]]))
        assert ei.value.partial_record is not None
        assert ei.value.partial_record.status.startswith("aborted")

    def test_halving_recovers_from_large_eta(self, unit_interval, default_q):
        ch = RayleighParams(1.0, 2.0, 0.5)
        cfg = GdConfig(n_uavs=1, iterations=200, eta=50.0, seed=0)
        rec = gd_distributed(cfg, unit_interval, ch, default_q, U_init=np.array([[0.3]]))
        assert abs(rec.final_positions[0, 0] - 0.5) < 0.01

    def test_range_limited_blind_run_stays_put(self, default_q):
        # flat density within the sensing disk and no visible neighbors:
        # the gradient is numerically zero and nothing moves
        f = Uniform1D(0.0, 1000.0)
        ch = RayleighParams(lam=1e-7, r=3.0, h=500.0)
        U0 = np.array([[300.0], [700.0]])
        cfg = GdConfig(n_uavs=2, iterations=30, eta=1e6, d_sense=10.0, d_comm=10.0, seed=0)
        rec = gd_distributed(cfg, f, ch, default_q, U_init=U0)
        assert np.abs(rec.final_positions - U0).max() < 1.0


class TestRandomDeployment:
    def test_support(self, unit_interval, rng):
        dep = random_deployment(unit_interval, 3, rng)
        assert dep.n == 3
        assert np.all((dep.positions >= 0) & (dep.positions <= 1))

    def test_point_mass_law(self, rng):
        # a grid with one hot cell concentrates all draws there
        from uavplace.density import GridDensity

        vals = np.zeros(100)
        vals[37] = 1.0
        law = GridDensity(vals, [[0.0, 1.0]], normalize=True)
        dep = random_deployment(law, 5, rng)
        assert np.all(np.abs(dep.positions - 0.375) <= 0.005 + 1e-12)

    def test_mean_random_outage_dominates_optimized(self, unit_interval, default_q, rng):
        ch = RayleighParams(1.0, 2.0, 0.3)
        vals = [
            outage(random_deployment(unit_interval, 2, rng), unit_interval, ch, default_q)
            for _ in range(300)
        ]
        mean, se = np.mean(vals), np.std(vals, ddof=1) / math.sqrt(len(vals))
        cfg = PsoConfig(n_uavs=2, n_particles=24, iterations=80, seed=0)
        best = pso_optimize(cfg, unit_interval, ch, default_q).final_objective
        assert best <= mean + 3 * se

    def test_n_validation(self, unit_interval, rng):
        with pytest.raises(ValueError):
            random_deployment(unit_interval, 0, rng)
