"""Experiment specification: a JSON-compatible document, validated whole.

Validation collects every violation before failing so a bad spec is fixed
in one round trip. CLI flags override document fields after parsing.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from ..channel import RayleighParams, RicianParams, lambda_from_link
from ..density import DensityModel, density_from_dict
from ..errors import SpecValidationError
from ..quadrature import QuadratureSpec

__all__ = ["ExperimentSpec"]

_QUAD_FIELDS = {
    "method", "target_rel_tol", "max_evals", "abs_floor", "nodes_2d",
    "min_panels_1d", "qmc_log2_points", "disk_radial", "disk_angular",
}


@dataclass
class ExperimentSpec:
    """Validated experiment description.

    Sweeps: ``n_values`` and ``h_values`` enumerate the grid; a single
    ``n`` / channel ``h`` is a one-point sweep. The channel's threshold
    coefficient comes either from ``lam`` directly or from a ``link``
    budget (ap_over_n0_db, rho).
    """

    density: DensityModel
    channel_kind: str
    channel_params: dict
    n_values: list[int]
    h_values: list[float]
    optimizer: dict
    quadrature: QuadratureSpec
    seed: int
    out_dir: str | None
    length_unit: str
    name: str
    raw: dict = field(repr=False, default_factory=dict)

    # ------------------------------------------------------------------
    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentSpec":
        violations: list[str] = []

        density = None
        try:
            density = density_from_dict(doc.get("density", {}))
        except (KeyError, ValueError, TypeError) as exc:
            violations.append(f"density: {exc}")

        ch = doc.get("channel", {})
        kind = str(ch.get("model", "")).lower()
        params: dict = {}
        if kind not in ("rayleigh", "rician"):
            violations.append(f"channel.model must be 'rayleigh' or 'rician', got {ch.get('model')!r}")
        else:
            lam = ch.get("lam")
            link = ch.get("link")
            if (lam is None) == (link is None):
                violations.append("channel needs exactly one of 'lam' or 'link'")
            elif link is not None:
                try:
                    lam = lambda_from_link(float(link["ap_over_n0_db"]), float(link["rho"]))
                except (KeyError, ValueError, TypeError) as exc:
                    violations.append(f"channel.link: {exc}")
                    lam = None
            if lam is not None and float(lam) < 0:
                violations.append("channel threshold coefficient must be nonnegative")
            h = ch.get("h", 0.0)
            try:
                h = float(h)
                if h < 0:
                    violations.append("channel.h must be nonnegative")
            except (TypeError, ValueError):
                violations.append(f"channel.h must be a number, got {h!r}")
                h = 0.0
            params = {"lam": None if lam is None else float(lam), "h": h}
            if kind == "rayleigh":
                try:
                    params["r"] = float(ch.get("r", 2.0))
                    if params["r"] <= 0:
                        violations.append("channel.r must be positive")
                except (TypeError, ValueError):
                    violations.append("channel.r must be a number")
            else:
                if str(ch.get("preset", "")).lower() == "suburban":
                    base = RicianParams.suburban(lam=0.0 if lam is None else float(lam), h=h)
                    params.update(a1=base.a1, b1=base.b1, a2=base.a2, b2=base.b2, a3=base.a3, b3=base.b3)
                else:
                    for key in ("a1", "b1", "a2", "b2", "a3", "b3"):
                        if key not in ch:
                            violations.append(f"rician channel missing '{key}' (or use preset: suburban)")
                        else:
                            params[key] = float(ch[key])

        n_values = doc.get("n_values", [doc.get("n", 1)])
        if not isinstance(n_values, (list, tuple)) or not n_values:
            violations.append("n_values must be a non-empty list")
            n_values = [1]
        else:
            bad = [v for v in n_values if not (isinstance(v, int) and v >= 1)]
            if bad:
                violations.append(f"n values must be integers >= 1, got {bad}")
            n_values = [int(v) for v in n_values if isinstance(v, int) and v >= 1] or [1]

        h_values = doc.get("h_values")
        if h_values is None:
            h_values = [params.get("h", 0.0)]
        if not isinstance(h_values, (list, tuple)) or not h_values:
            violations.append("h_values must be a non-empty list")
            h_values = [0.0]
        else:
            try:
                h_values = [float(v) for v in h_values]
                if any((not math.isfinite(v)) or v < 0 for v in h_values):
                    violations.append("h values must be finite and nonnegative")
            except (TypeError, ValueError):
                violations.append("h values must be numbers")
                h_values = [0.0]

        opt = dict(doc.get("optimizer", {"kind": "pso"}))
        okind = str(opt.get("kind", "pso")).lower()
        if okind not in ("pso", "gd", "none"):
            violations.append(f"optimizer.kind must be 'pso', 'gd', or 'none', got {opt.get('kind')!r}")
        opt["kind"] = okind

        qdoc = dict(doc.get("quadrature", {}))
        unknown = set(qdoc) - _QUAD_FIELDS
        if unknown:
            violations.append(f"unknown quadrature fields: {sorted(unknown)}")
        quadrature = QuadratureSpec()
        try:
            quadrature = QuadratureSpec(**{k: v for k, v in qdoc.items() if k in _QUAD_FIELDS})
        except (TypeError, ValueError) as exc:
            violations.append(f"quadrature: {exc}")

        seed = doc.get("seed", 0)
        if not isinstance(seed, int):
            violations.append(f"seed must be an integer, got {seed!r}")
            seed = 0

        if violations:
            raise SpecValidationError(violations)

        return cls(
            density=density,
            channel_kind=kind,
            channel_params=params,
            n_values=list(n_values),
            h_values=list(h_values),
            optimizer=opt,
            quadrature=quadrature,
            seed=seed,
            out_dir=doc.get("out_dir"),
            length_unit=str(doc.get("length_unit", "unitless")),
            name=str(doc.get("name", "experiment")),
            raw=doc,
        )

    @classmethod
    def from_json(cls, path) -> "ExperimentSpec":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    # ------------------------------------------------------------------
    def channel_at(self, h: float | None = None):
        """Channel params, optionally with the altitude replaced (h sweeps)."""
        p = dict(self.channel_params)
        if h is not None:
            p["h"] = float(h)
        if self.channel_kind == "rayleigh":
            return RayleighParams(lam=p["lam"], r=p["r"], h=p["h"])
        return RicianParams(
            lam=p["lam"], h=p["h"], a1=p["a1"], b1=p["b1"],
            a2=p["a2"], b2=p["b2"], a3=p["a3"], b3=p["b3"],
        )

    def document(self) -> dict:
        """Canonical JSON-compatible description (hashed into artifacts)."""
        return {
            "name": self.name,
            "length_unit": self.length_unit,
            "density": str(self.density.cache_key()),
            "channel_kind": self.channel_kind,
            "channel_params": self.channel_params,
            "n_values": self.n_values,
            "h_values": self.h_values,
            "optimizer": self.optimizer,
            "quadrature": self.quadrature.__dict__ | {},
            "seed": self.seed,
        }
