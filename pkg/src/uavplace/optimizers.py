"""UAV placement optimizers.

Two algorithms: a centralized particle swarm (one particle position is an
entire deployment) and a distributed gradient descent where each UAV moves
against its own range-limited gradient. Both are fully deterministic given
(config, seed): random numbers come from per-(iteration, particle) streams
derived from the master seed, so execution order can never change a result.
A random-deployment baseline completes the trio.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channel import ChannelParams
from .density import DensityModel
from .errors import OptimizerAbort
from .objective import Deployment, local_gradient, outage, outage_batch
from .provenance import config_hash, to_jsonable
from .quadrature import QuadratureSpec

__all__ = ["PsoConfig", "GdConfig", "RunRecord", "pso_optimize", "gd_distributed", "random_deployment"]


@dataclass(frozen=True)
class PsoConfig:
    """Particle swarm hyperparameters.

    The swarm searches deployment space, so a particle has n_uavs * d
    coordinates. The inertia weight decays linearly from inertia[0] to
    inertia[1]; r1 and r2 are fresh uniform scalars per particle and
    iteration; velocities are clamped to velocity_clamp times the box
    extent per coordinate, and positions are clamped into the box.
    """

    n_uavs: int
    n_particles: int = 40
    iterations: int = 200
    inertia: tuple[float, float] = (0.9, 0.4)
    c1: float = 2.0
    c2: float = 2.0
    velocity_clamp: float = 0.2
    search_box: tuple | None = None  # ((lo, hi), ...) per axis; density support if None
    seed: int = 0
    init_deployments: tuple = ()  # deployments injected into the initial swarm

    def __post_init__(self):
        if self.n_uavs < 1 or self.n_particles < 1 or self.iterations < 1:
            raise ValueError("n_uavs, n_particles, iterations must be >= 1")
        if self.inertia[0] < self.inertia[1]:
            raise ValueError("inertia schedule must be non-increasing")
        if not 0 < self.velocity_clamp <= 1:
            raise ValueError("velocity_clamp must lie in (0, 1]")


@dataclass(frozen=True)
class GdConfig:
    """Distributed gradient descent hyperparameters.

    eta=None picks the initial learning rate from the first iteration's
    gradients so that the largest UAV step is eta_step_fraction of the box
    extent. The halve-on-increase policy halves eta whenever the objective
    rises; the constant policy keeps it fixed and aborts after 10
    consecutive increases. d_sense / d_comm are the sensing and
    communication radii (math.inf allowed for either).
    """

    n_uavs: int
    iterations: int = 200
    eta: float | None = None
    eta_policy: str = "halve-on-increase"  # or "constant"
    eta_step_fraction: float = 0.1
    d_sense: float = math.inf
    d_comm: float = math.inf
    seed: int = 0
    sequential: bool = False  # update UAVs in index order within an iteration
    grad_tol_rel: float = 1e-6

    def __post_init__(self):
        if self.n_uavs < 1 or self.iterations < 1:
            raise ValueError("n_uavs and iterations must be >= 1")
        if self.eta is not None and self.eta <= 0:
            raise ValueError("eta must be positive")
        if self.eta_policy not in ("halve-on-increase", "constant"):
            raise ValueError("eta_policy must be 'halve-on-increase' or 'constant'")
        if self.d_sense <= 0 or self.d_comm <= 0:
            raise ValueError("d_sense and d_comm must be positive")


@dataclass
class RunRecord:
    """Per-iteration trace plus final result and provenance of one run."""

    algorithm: str
    seed: int
    config: dict
    config_hash: str
    quadrature: dict
    objective_trace: np.ndarray
    positions_trace: np.ndarray
    final_positions: np.ndarray
    final_objective: float
    converged: bool
    status: str
    n_iterations: int
    grad_norm_trace: np.ndarray | None = None
    eta_trace: np.ndarray | None = None
    extras: dict = field(default_factory=dict)

    @property
    def deployment(self) -> Deployment:
        return Deployment(self.final_positions)

    def to_dict(self) -> dict:
        return to_jsonable(
            {
                "algorithm": self.algorithm,
                "seed": self.seed,
                "config": self.config,
                "config_hash": self.config_hash,
                "quadrature": self.quadrature,
                "objective_trace": self.objective_trace,
                "positions_trace": self.positions_trace,
                "final_positions": self.final_positions,
                "final_objective": self.final_objective,
                "converged": self.converged,
                "status": self.status,
                "n_iterations": self.n_iterations,
                "grad_norm_trace": self.grad_norm_trace,
                "eta_trace": self.eta_trace,
                "extras": self.extras,
            }
        )


def _iter_stream(seed: int, iteration: int, particle: int) -> np.random.Generator:
    """Independent stream per (iteration, particle); order-insensitive."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(iteration, particle))))


def _provenance(algorithm, cfg, f, ch, q, seed):
    payload = {
        "algorithm": algorithm,
        "config": to_jsonable(cfg),
        "density": str(f.cache_key()),
        "channel": to_jsonable(ch),
        "quadrature": to_jsonable(q),
        "seed": seed,
    }
    return payload, config_hash(payload)


def _resolve_box(cfg_box, f: DensityModel) -> np.ndarray:
    if cfg_box is None:
        return f.support_bounds()
    box = np.asarray(cfg_box, dtype=float).reshape(-1, 2)
    if box.shape[0] != f.dim:
        raise ValueError("search box dimension does not match the density")
    return box


def pso_optimize(cfg: PsoConfig, f: DensityModel, ch: ChannelParams,
                 q: QuadratureSpec | None = None, progress=None) -> RunRecord:
    """Particle swarm search for a minimum-outage deployment.

    Velocity update: V <- w V + c1 r1 (PB - U) + c2 r2 (GB - U), then
    U <- U + V; personal bests replace on strict improvement, the global
    best is the best personal best (lowest particle index wins ties), so
    its objective trace is monotone non-increasing.

    ``progress``, if given, is called with (iteration, best_objective)
    after every iteration.
    """
    q = q or QuadratureSpec()
    box = _resolve_box(cfg.search_box, f)
    n, d = cfg.n_uavs, f.dim
    lb = np.tile(box[:, 0], n)
    ub = np.tile(box[:, 1], n)
    vmax = cfg.velocity_clamp * (ub - lb)
    P = cfg.n_particles

    pos = np.empty((P, n * d))
    for i in range(P):
        pos[i] = _iter_stream(cfg.seed, 0, i).uniform(lb, ub)
    for k, dep in enumerate(cfg.init_deployments[:P]):
        pos[k] = np.asarray(dep, dtype=float).reshape(n * d)
    vel = np.zeros_like(pos)

    payload, digest = _provenance("pso", cfg, f, ch, q, cfg.seed)

    def evaluate(positions):
        try:
            return outage_batch(positions.reshape(P, n, d), f, ch, q)
        except Exception as exc:  # objective failure: abort with partial trace
            raise OptimizerAbort(f"objective evaluation failed: {exc}") from exc

    pb = pos.copy()
    pb_val = evaluate(pos)
    gb_idx = int(np.argmin(pb_val))
    gb = pb[gb_idx].copy()
    gb_val = float(pb_val[gb_idx])

    T = cfg.iterations
    gb_trace = np.empty(T + 1)
    gb_pos_trace = np.empty((T + 1, n, d))
    gb_trace[0] = gb_val
    gb_pos_trace[0] = gb.reshape(n, d)

    w0, w1 = cfg.inertia
    for t in range(1, T + 1):
        w = w0 if T == 1 else w0 + (w1 - w0) * (t - 1) / (T - 1)
        r = np.empty((P, 2))
        for i in range(P):
            r[i] = _iter_stream(cfg.seed, t, i).uniform(0.0, 1.0, 2)
        vel = (
            w * vel
            + cfg.c1 * r[:, :1] * (pb - pos)
            + cfg.c2 * r[:, 1:] * (gb[None, :] - pos)
        )
        np.clip(vel, -vmax, vmax, out=vel)
        pos = np.clip(pos + vel, lb, ub)
        val = evaluate(pos)
        improved = val < pb_val
        pb[improved] = pos[improved]
        pb_val[improved] = val[improved]
        gb_idx = int(np.argmin(pb_val))  # argmin returns the lowest tied index
        if pb_val[gb_idx] < gb_val:
            gb_val = float(pb_val[gb_idx])
            gb = pb[gb_idx].copy()
        gb_trace[t] = gb_val
        gb_pos_trace[t] = gb.reshape(n, d)
        if progress is not None:
            progress(t, gb_val)

    return RunRecord(
        algorithm="pso",
        seed=cfg.seed,
        config=payload["config"],
        config_hash=digest,
        quadrature=payload["quadrature"],
        objective_trace=gb_trace,
        positions_trace=gb_pos_trace,
        final_positions=gb.reshape(n, d).copy(),
        final_objective=gb_val,
        converged=True,
        status="complete",
        n_iterations=T,
    )


def gd_distributed(cfg: GdConfig, f: DensityModel, ch: ChannelParams,
                   q: QuadratureSpec | None = None, U_init=None, progress=None) -> RunRecord:
    """Distributed range-limited gradient descent.

    Every iteration each UAV computes its local gradient with sensing
    radius d_sense and communication radius d_comm and steps against it.
    By default updates are synchronous (neighbor sets and positions are
    frozen at the iteration start); ``sequential=True`` updates UAVs in
    index order so later UAVs see earlier moves within the iteration.
    """
    q = q or QuadratureSpec()
    n, d = cfg.n_uavs, f.dim
    box = f.support_bounds()
    length = float(np.max(box[:, 1] - box[:, 0]))

    if U_init is not None:
        U = np.asarray(U_init, dtype=float).reshape(n, d).copy()
    else:
        rng = _iter_stream(cfg.seed, 0, 0)
        U = rng.uniform(box[:, 0], box[:, 1], size=(n, d))

    payload, digest = _provenance("gd", cfg, f, ch, q, cfg.seed)

    def grads(positions):
        dep = Deployment(positions)
        return np.stack(
            [local_gradient(i, dep, f, ch, cfg.d_sense, cfg.d_comm, q) for i in range(n)]
        )

    T = cfg.iterations
    obj_trace = [outage(Deployment(U), f, ch, q)]
    pos_trace = [U.copy()]
    gnorm_trace = []
    eta_trace = []
    eta = cfg.eta
    eta0 = None
    g0max = None
    converged = False
    status = "complete"
    increases = 0

    def make_record(n_done):
        return RunRecord(
            algorithm="gd",
            seed=cfg.seed,
            config=payload["config"],
            config_hash=digest,
            quadrature=payload["quadrature"],
            objective_trace=np.asarray(obj_trace),
            positions_trace=np.asarray(pos_trace),
            final_positions=U.copy(),
            final_objective=float(obj_trace[-1]),
            converged=converged,
            status=status,
            n_iterations=n_done,
            grad_norm_trace=np.asarray(gnorm_trace) if gnorm_trace else None,
            eta_trace=np.asarray(eta_trace) if eta_trace else None,
        )

    for t in range(1, T + 1):
        if eta is None:
            # calibrate the step so the steepest UAV moves a set fraction
            # of the box extent on the first move
            G0 = grads(U)
            gmax = float(np.linalg.norm(G0, axis=1).max())
            if gmax == 0.0:
                converged = True
                return make_record(0)
            eta = cfg.eta_step_fraction * length / gmax
            eta0, g0max = eta, gmax
        if cfg.sequential:
            G = np.empty((n, d))
            for i in range(n):
                G[i] = local_gradient(i, Deployment(U), f, ch, cfg.d_sense, cfg.d_comm, q)
                U[i] = U[i] - eta * G[i]
            norms = np.linalg.norm(G, axis=1)
            if g0max is None:
                g0max = float(norms.max())
            if float(norms.max()) <= cfg.grad_tol_rel * max(g0max, 1e-300):
                converged = True
        else:
            G = grads(U)
            norms = np.linalg.norm(G, axis=1)
            if g0max is None:
                g0max = float(norms.max())
            if float(norms.max()) <= cfg.grad_tol_rel * max(g0max, 1e-300):
                converged = True
                break
            U = U - eta * G
        gnorm_trace.append(np.linalg.norm(G, axis=1))
        eta_trace.append(eta)
        obj = outage(Deployment(U), f, ch, q)
        obj_trace.append(obj)
        pos_trace.append(U.copy())
        if progress is not None:
            progress(t, obj)
        if obj > obj_trace[-2] + 1e-300:
            increases += 1
            if cfg.eta_policy == "halve-on-increase":
                eta = eta / 2.0
                if eta0 is not None and eta < 1e-15 * eta0:
                    status = "aborted: eta underflow"
                    raise OptimizerAbort(status, partial_record=make_record(t))
            elif increases >= 10:
                status = "aborted: diverging under constant eta"
                raise OptimizerAbort(status, partial_record=make_record(t))
        else:
            increases = 0
        if converged:
            break

    return make_record(len(obj_trace) - 1)


def random_deployment(law: DensityModel, n: int, rng: np.random.Generator) -> Deployment:
    """n independent UAV positions drawn from a placement law."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return Deployment(law.sample(rng, size=n))
