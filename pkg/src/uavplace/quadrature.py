"""Numerical integration against a ground-terminal density.

Node sets are built once per (density, spec) pair and then frozen, so every
integral against the same density reuses identical nodes; downstream tests
rely on that bit-stability. The density value is folded into the node
weights, so integrating the constant 1 returns the density mass.

Error estimates come from an embedded lower-order rule evaluated on the
same (or a nested coarse) node set: 7-point Gauss inside 15-point Kronrod
panels in 1-D, a half-resolution tensor grid in 2-D, and batch scatter for
the quasi-Monte Carlo cross-check rule.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .density import DensityModel, GridDensity, MixtureDensity
from .errors import QuadratureError
from .special import _gk15_rule

__all__ = ["QuadratureSpec", "QuadratureResult", "NodeSet", "get_nodeset", "density_mass"]

_QMC_SCRAMBLE_SEED = 20231115  # fixed: node sets are deterministic constants


@dataclass(frozen=True)
class QuadratureSpec:
    """Integration method and budget.

    method: 'auto' picks adaptive panels in 1-D and a tensor Gauss-Legendre
    grid in 2-D; 'qmc-2d' selects the scrambled low-discrepancy cross-check
    rule. target_rel_tol is checked against the estimated error at every
    integral evaluation; abs_floor suppresses the relative check for values
    that are genuinely tiny.
    """

    method: str = "auto"
    target_rel_tol: float = 1e-6
    max_evals: int = 200_000
    abs_floor: float = 1e-8
    nodes_2d: int = 96
    min_panels_1d: int = 16
    qmc_log2_points: int = 16
    disk_radial: int = 48
    disk_angular: int = 64

    def __post_init__(self):
        if self.target_rel_tol <= 0:
            raise ValueError("target_rel_tol must be positive")
        if self.method not in ("auto", "adaptive-1d", "tensor-gl-2d", "qmc-2d"):
            raise ValueError(f"unknown quadrature method {self.method!r}")


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    error_abs: float
    n_evals: int

    @property
    def rel_error(self) -> float:
        return self.error_abs / abs(self.value) if self.value != 0 else 0.0


class _Block:
    """One homogeneous group of nodes plus its error machinery."""

    __slots__ = ("points", "weights", "low_weights", "panel_size", "cpoints", "cweights", "qmc_batches")

    def __init__(self, points, weights, low_weights=None, panel_size=0,
                 cpoints=None, cweights=None, qmc_batches=0):
        self.points = points
        self.weights = weights
        self.low_weights = low_weights
        self.panel_size = panel_size
        self.cpoints = cpoints
        self.cweights = cweights
        self.qmc_batches = qmc_batches

    def integrate(self, fn):
        v = np.asarray(fn(self.points))
        value = self.weights @ v
        evals = self.points.shape[0]
        if self.panel_size:
            contrib_hi = (self.weights[:, None] * v.reshape(v.shape[0], -1))
            contrib_lo = (self.low_weights[:, None] * v.reshape(v.shape[0], -1))
            P = self.panel_size
            hi = contrib_hi.reshape(-1, P, contrib_hi.shape[1]).sum(axis=1)
            lo = contrib_lo.reshape(-1, P, contrib_lo.shape[1]).sum(axis=1)
            err = np.abs(hi - lo).sum(axis=0)
            err = err.reshape(np.shape(value)) if np.ndim(value) else float(err[0])
        elif self.cpoints is not None:
            vc = np.asarray(fn(self.cpoints))
            err = np.abs(value - self.cweights @ vc)
            evals += self.cpoints.shape[0]
        elif self.qmc_batches:
            contrib = self.weights[:, None] * v.reshape(v.shape[0], -1)
            B = self.qmc_batches
            per = contrib.reshape(B, -1, contrib.shape[1]).sum(axis=1) * B
            err = per.std(axis=0, ddof=1) / np.sqrt(B)
            err = err.reshape(np.shape(value)) if np.ndim(value) else float(err[0])
        else:
            err = np.zeros_like(value)
        return value, err, evals


class NodeSet:
    """Frozen integration nodes for one density under one spec."""

    def __init__(self, dim: int, blocks: list[_Block]):
        self.dim = dim
        self.blocks = blocks

    @property
    def points(self) -> np.ndarray:
        return np.concatenate([b.points for b in self.blocks], axis=0)

    @property
    def weights(self) -> np.ndarray:
        return np.concatenate([b.weights for b in self.blocks], axis=0)

    @property
    def n_nodes(self) -> int:
        return sum(b.points.shape[0] for b in self.blocks)

    def integrate(self, fn):
        """Integrate fn(x) f(x) dx; fn maps (N, d) to (N,) or (N, P).

        Returns (value, error_abs, n_evals) with value/error shaped like
        fn's trailing axes.
        """
        value = err = None
        evals = 0
        for b in self.blocks:
            v, e, n = b.integrate(fn)
            value = v if value is None else value + v
            err = e if err is None else err + e
            evals += n
        return value, err, evals

    def integrate_checked(self, fn, spec: QuadratureSpec) -> QuadratureResult:
        value, err, evals = self.integrate(fn)
        value = float(value)
        err = float(err)
        if err > spec.abs_floor and err > spec.target_rel_tol * abs(value):
            raise QuadratureError(
                f"quadrature error estimate {err:.3e} exceeds tolerance for value {value:.6e}",
                partial=value,
                error_estimate=err,
            )
        return QuadratureResult(value, err, evals)


# --------------------------------------------------------------------------
# builders

@lru_cache(maxsize=64)
def _gl_cache(n: int):
    return np.polynomial.legendre.leggauss(n)


def _panel_block(density, panels) -> _Block:
    """GK15 nodes over a list of (lo, hi) panels, density folded in."""
    xg, wk, wg7 = _gk15_rule()
    low = np.zeros(15)
    low[1::2] = wg7
    pts_list, w_list, wl_list = [], [], []
    for lo, hi in panels:
        mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        x = mid + half * xg
        pts_list.append(x)
        w_list.append(half * wk)
        wl_list.append(half * low)
    pts = np.concatenate(pts_list).reshape(-1, 1)
    f = density.pdf(pts)
    return _Block(
        points=pts,
        weights=np.concatenate(w_list) * f,
        low_weights=np.concatenate(wl_list) * f,
        panel_size=15,
    )


def _build_1d(density: DensityModel, spec: QuadratureSpec) -> NodeSet:
    lo, hi = density.support_bounds()[0]
    cuts = {lo, hi}
    cuts.update(float(v) for v in density.breakpoints()[0])
    cuts = sorted(cuts)
    max_width = (hi - lo) / spec.min_panels_1d
    panels = []
    for a, b in zip(cuts[:-1], cuts[1:]):
        k = max(1, int(np.ceil((b - a) / max_width)))
        edges = np.linspace(a, b, k + 1)
        panels.extend(zip(edges[:-1], edges[1:]))

    xg, wk, wg7 = _gk15_rule()

    def f_panel_err(a, b):
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        y = density.pdf((mid + half * xg).reshape(-1, 1))
        k15 = half * float(wk @ y)
        g7 = half * float(wg7 @ y[1::2])
        return abs(k15 - g7)

    # refine panels against the density itself until its own integral is tight
    tol = max(1e-13, 1e-3 * spec.target_rel_tol)
    budget = max(spec.min_panels_1d, spec.max_evals // 15)
    errs = [f_panel_err(a, b) for a, b in panels]
    while len(panels) < budget and sum(errs) > tol:
        i = int(np.argmax(errs))
        a, b = panels[i]
        m = 0.5 * (a + b)
        panels[i : i + 1] = [(a, m), (m, b)]
        errs[i : i + 1] = [f_panel_err(a, m), f_panel_err(m, b)]
    panels.sort()
    return NodeSet(1, [_panel_block(density, panels)])


def _tensor_block(density, box, m: int) -> tuple[np.ndarray, np.ndarray]:
    xg, wg = _gl_cache(m)
    xs = 0.5 * (box[0, 1] - box[0, 0]) * xg + 0.5 * (box[0, 0] + box[0, 1])
    ys = 0.5 * (box[1, 1] - box[1, 0]) * xg + 0.5 * (box[1, 0] + box[1, 1])
    wx = 0.5 * (box[0, 1] - box[0, 0]) * wg
    wy = 0.5 * (box[1, 1] - box[1, 0]) * wg
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    pts = np.column_stack([X.ravel(), Y.ravel()])
    w = np.outer(wx, wy).ravel() * density.pdf(pts)
    return pts, w


def _build_2d_tensor(density: DensityModel, spec: QuadratureSpec) -> NodeSet:
    box = density.support_bounds()
    m = spec.nodes_2d
    while m > 8 and m * m + (m // 2) ** 2 > spec.max_evals:
        m -= 8
    pts, w = _tensor_block(density, box, m)
    cpts, cw = _tensor_block(density, box, max(4, m // 2))
    return NodeSet(2, [_Block(points=pts, weights=w, cpoints=cpts, cweights=cw)])


def _build_2d_grid(density: GridDensity, spec: QuadratureSpec) -> NodeSet:
    # piecewise-constant cells: integrate cell by cell so panel edges line
    # up with the discontinuities
    mx, my = density.values.shape
    budget = min(spec.max_evals, 120_000)
    p = int(np.sqrt(budget / (2.0 * mx * my)))
    p = max(2, min(8, p))
    pc = max(1, p // 2)
    ex = np.linspace(density.box[0, 0], density.box[0, 1], mx + 1)
    ey = np.linspace(density.box[1, 0], density.box[1, 1], my + 1)

    def cells_block(order):
        xg, wg = _gl_cache(order)
        # per-cell tensor nodes, vectorized across the cell lattice
        cx = 0.5 * np.diff(ex)[:, None] * (xg[None, :] + 1.0) + ex[:-1, None]  # (mx, p)
        cy = 0.5 * np.diff(ey)[:, None] * (xg[None, :] + 1.0) + ey[:-1, None]
        wxc = 0.5 * np.diff(ex)[:, None] * wg[None, :]
        wyc = 0.5 * np.diff(ey)[:, None] * wg[None, :]
        X = cx[:, None, :, None]
        Y = cy[None, :, None, :]
        pts = np.stack(np.broadcast_arrays(X, Y), axis=-1).reshape(-1, 2)
        W = (wxc[:, None, :, None] * wyc[None, :, None, :]).ravel()
        vals = np.repeat(density.values.ravel(), order * order)
        return pts, W * vals

    pts, w = cells_block(p)
    cpts, cw = cells_block(pc)
    return NodeSet(2, [_Block(points=pts, weights=w, cpoints=cpts, cweights=cw)])


def _build_2d_qmc(density: DensityModel, spec: QuadratureSpec) -> NodeSet:
    from scipy.stats import qmc

    box = density.support_bounds()
    m = spec.qmc_log2_points
    while m > 8 and 2**m > spec.max_evals:
        m -= 1
    sob = qmc.Sobol(d=2, scramble=True, seed=_QMC_SCRAMBLE_SEED)
    u = sob.random_base2(m=m)
    lo = box[:, 0]
    span = box[:, 1] - box[:, 0]
    pts = lo + u * span
    vol = float(np.prod(span))
    w = np.full(pts.shape[0], vol / pts.shape[0]) * density.pdf(pts)
    return NodeSet(2, [_Block(points=pts, weights=w, qmc_batches=16)])


def _scaled_mixture(nodeset: NodeSet, w: float) -> list[_Block]:
    out = []
    for b in nodeset.blocks:
        out.append(
            _Block(
                points=b.points,
                weights=w * b.weights,
                low_weights=None if b.low_weights is None else w * b.low_weights,
                panel_size=b.panel_size,
                cpoints=b.cpoints,
                cweights=None if b.cweights is None else w * b.cweights,
                qmc_batches=b.qmc_batches,
            )
        )
    return out


_CACHE: dict = {}


def get_nodeset(density: DensityModel, spec: QuadratureSpec) -> NodeSet:
    """Frozen node set for (density, spec); cached so nodes never vary."""
    key = (density.cache_key(), spec)
    ns = _CACHE.get(key)
    if ns is not None:
        return ns

    method = spec.method
    if method == "auto":
        method = "adaptive-1d" if density.dim == 1 else "tensor-gl-2d"
    if method == "adaptive-1d" and density.dim != 1:
        raise ValueError("adaptive-1d quadrature needs a 1-D density")
    if method in ("tensor-gl-2d", "qmc-2d") and density.dim != 2:
        raise ValueError(f"{method} quadrature needs a 2-D density")

    if density.dim == 2 and isinstance(density, MixtureDensity) and method != "qmc-2d":
        # integrate component by component: keeps panel/cell alignment exact
        blocks = []
        for w, comp in density.components:
            blocks.extend(_scaled_mixture(get_nodeset(comp, spec), w))
        ns = NodeSet(2, blocks)
    elif method == "adaptive-1d":
        ns = _build_1d(density, spec)
    elif method == "qmc-2d":
        ns = _build_2d_qmc(density, spec)
    elif isinstance(density, GridDensity):
        ns = _build_2d_grid(density, spec)
    else:
        ns = _build_2d_tensor(density, spec)
    _CACHE[key] = ns
    return ns


def density_mass(density: DensityModel, spec: QuadratureSpec | None = None) -> QuadratureResult:
    """Integral of the density over its support under the module quadrature."""
    spec = spec or QuadratureSpec()
    ns = get_nodeset(density, spec)
    value, err, evals = ns.integrate(lambda pts: np.ones(pts.shape[0]))
    return QuadratureResult(float(value), float(err), evals)


# --------------------------------------------------------------------------
# local node sets for disk-restricted integrals (built per call; the center
# moves every optimizer iteration, so these are not cached)

def disk_nodeset(density: DensityModel, spec: QuadratureSpec, center: np.ndarray, radius: float) -> NodeSet:
    """Nodes over the sensing region B(center, radius).

    2-D uses a polar rule (radial Gauss-Legendre times a uniform angular
    grid with an even point count, so odd integrands cancel exactly); 1-D
    uses mirrored Gauss panels on [c - R, c + R]. Density values are folded
    into the weights, so regions outside the support contribute nothing.
    """
    center = np.asarray(center, dtype=float)
    if density.dim == 2:
        nr, na = spec.disk_radial, spec.disk_angular
        if na % 2:
            na += 1

        def polar(nr_):
            xg, wg = _gl_cache(nr_)
            rr = 0.5 * radius * (xg + 1.0)
            wr = 0.5 * radius * wg
            ang = (np.arange(na) + 0.5) * (2.0 * np.pi / na)
            ca, sa = np.cos(ang), np.sin(ang)
            pts = center[None, None, :] + rr[:, None, None] * np.stack([ca, sa], axis=-1)[None, :, :]
            pts = pts.reshape(-1, 2)
            w = (wr * rr)[:, None] * (2.0 * np.pi / na)
            w = np.broadcast_to(w, (nr_, na)).ravel() * density.pdf(pts)
            return pts, w

        pts, w = polar(nr)
        cpts, cw = polar(max(6, nr // 2))
        return NodeSet(2, [_Block(points=pts, weights=w, cpoints=cpts, cweights=cw)])

    c = float(center[0])

    def mirrored(m):
        xg, wg = _gl_cache(m)
        right = c + 0.5 * radius * (xg + 1.0)
        wr = 0.5 * radius * wg
        pts = np.concatenate([2 * c - right[::-1], right]).reshape(-1, 1)
        w = np.concatenate([wr[::-1], wr]) * density.pdf(pts)
        return pts, w

    pts, w = mirrored(48)
    cpts, cw = mirrored(24)
    return NodeSet(1, [_Block(points=pts, weights=w, cpoints=cpts, cweights=cw)])
