"""Sweep execution: run the configured optimizer over the (n, h) grid."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from ..errors import UavPlaceError
from ..objective import Deployment, outage
from ..optimizers import GdConfig, PsoConfig, gd_distributed, pso_optimize
from .artifacts import write_csv, write_manifest
from .config import ExperimentSpec

__all__ = ["run", "run_point"]


def run_point(spec: ExperimentSpec, n: int, h: float, point_seed: int):
    """One sweep point: returns (record_or_None, outage_value, positions)."""
    ch = spec.channel_at(h)
    opt = spec.optimizer
    kind = opt.get("kind", "pso")
    if kind == "pso":
        cfg = PsoConfig(
            n_uavs=n,
            n_particles=int(opt.get("particles", 40)),
            iterations=int(opt.get("iterations", 150)),
            inertia=tuple(opt.get("inertia", (0.9, 0.4))),
            c1=float(opt.get("c1", 2.0)),
            c2=float(opt.get("c2", 2.0)),
            velocity_clamp=float(opt.get("velocity_clamp", 0.2)),
            seed=point_seed,
        )
        rec = pso_optimize(cfg, spec.density, ch, spec.quadrature)
        return rec, rec.final_objective, rec.final_positions
    if kind == "gd":
        ds = opt.get("d_sense", "inf")
        dc = opt.get("d_comm", "inf")
        cfg = GdConfig(
            n_uavs=n,
            iterations=int(opt.get("iterations", 150)),
            eta=opt.get("eta"),
            eta_policy=opt.get("eta_policy", "halve-on-increase"),
            d_sense=float("inf") if ds in ("inf", None) else float(ds),
            d_comm=float("inf") if dc in ("inf", None) else float(dc),
            seed=point_seed,
            sequential=bool(opt.get("sequential", False)),
        )
        rec = gd_distributed(cfg, spec.density, ch, spec.quadrature)
        return rec, rec.final_objective, rec.final_positions
    # kind == "none": evaluate the all-at-center reference deployment
    center = spec.density.center()
    if center is None:
        box = spec.density.support_bounds()
        center = 0.5 * (box[:, 0] + box[:, 1])
    dep = Deployment(np.tile(center, (n, 1)))
    return None, outage(dep, spec.density, ch, spec.quadrature), dep.positions


def _positions_cell(pos: np.ndarray) -> str:
    return ";".join("|".join(repr(float(c)) for c in row) for row in np.asarray(pos))


def run(spec: ExperimentSpec, out_dir=None):
    """Execute the sweep; persist one CSV plus a manifest when out_dir given.

    Returns (records, columns). Reruns with an identical spec and seed
    write byte-identical CSVs.
    """
    cols = {"n": [], "h": [], "outage": [], "algorithm": [], "converged": [], "positions": []}
    records = []
    status, error = "complete", None
    out_dir = out_dir or spec.out_dir
    try:
        idx = 0
        for n in spec.n_values:
            for h in spec.h_values:
                rec, val, pos = run_point(spec, n, h, spec.seed * 1_000_003 + idx)
                records.append(rec)
                cols["n"].append(n)
                cols["h"].append(float(h))
                cols["outage"].append(float(val))
                cols["algorithm"].append(spec.optimizer.get("kind", "pso"))
                cols["converged"].append(int(rec.converged) if rec is not None else 1)
                cols["positions"].append(_positions_cell(pos))
                idx += 1
    except UavPlaceError as exc:
        status, error = "incomplete", str(exc)
        if out_dir is None:
            raise
    if out_dir is not None:
        out = Path(out_dir)
        csv_path = out / f"{spec.name}.csv"
        write_csv(csv_path, cols, spec.document(), spec.seed, spec.length_unit)
        write_manifest(out, spec.document(), spec.seed, [str(csv_path)], status=status, error=error)
    return records, cols
