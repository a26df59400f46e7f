"""Ground-terminal density models.

All densities live on R^d with d in {1, 2}. Points are numpy arrays of
shape (d,) for a single point or (N, d) for a batch; this convention is
shared with the rest of the package (1-D points are shape (1,), not bare
floats).

A density is *unimodal with center mu* when it is non-decreasing up to mu,
non-increasing after, and mirror-symmetric about mu; in 2-D the property
must hold coordinate-wise (in x for every fixed y and in y for every fixed
x, with a common center). Analytic kinds answer from closed-form knowledge;
grids are scanned cell-by-cell; mixtures are rendered to a grid and scanned.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

__all__ = [
    "DensityModel",
    "Uniform1D",
    "UniformBox2D",
    "GaussianDensity",
    "MixtureDensity",
    "GridDensity",
    "density_from_dict",
    "load_grid_csv",
]

# Gaussian supports are truncated at +/- 8 sigma: the excluded tail mass is
# below 1e-15, which is under every tolerance used by the numeric layers.
GAUSSIAN_SUPPORT_SIGMAS = 8.0

_MASS_TOL = 1e-9


def _as_points(x, dim: int) -> np.ndarray:
    """Coerce to an (N, dim) float array, validating the dimension."""
    a = np.asarray(x, dtype=float)
    if a.ndim == 1:
        if a.shape[0] != dim:
            raise ValueError(f"point has dimension {a.shape[0]}, expected {dim}")
        return a.reshape(1, dim)
    if a.ndim == 2:
        if a.shape[1] != dim:
            raise ValueError(f"points have dimension {a.shape[1]}, expected {dim}")
        return a
    raise ValueError(f"expected a (d,) or (N, d) array, got shape {a.shape}")


class DensityModel:
    """Base interface for ground-terminal densities."""

    dim: int

    def pdf(self, points: np.ndarray) -> np.ndarray:
        """Density values at an (N, d) batch of points (0 outside support)."""
        raise NotImplementedError

    def eval(self, x) -> float:
        """Density at a single point given as a (d,) array-like."""
        return float(self.pdf(_as_points(x, self.dim))[0])

    def sample(self, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
        """Draw points; returns (d,) for size=None, else (size, d)."""
        raise NotImplementedError

    def support_bounds(self) -> np.ndarray:
        """Axis-aligned box [[lo, hi], ...] of shape (d, 2) containing the mass."""
        raise NotImplementedError

    def is_unimodal(self) -> bool:
        raise NotImplementedError

    def center(self) -> np.ndarray | None:
        """Center of symmetry when the density is unimodal, else None."""
        raise NotImplementedError

    def breakpoints(self) -> list[np.ndarray]:
        """Interior axis-aligned discontinuity coordinates, one array per axis.

        Used by the quadrature layer to align integration panels with kinks.
        """
        return [np.empty(0) for _ in range(self.dim)]

    def cache_key(self) -> tuple:
        """Hashable identity used to reuse frozen quadrature node sets."""
        raise NotImplementedError


@dataclass(frozen=True)
class Uniform1D(DensityModel):
    """Uniform density on the interval [a, b]."""

    a: float
    b: float

    def __post_init__(self):
        if not self.b > self.a:
            raise ValueError("Uniform1D requires b > a")

    @property
    def dim(self) -> int:
        return 1

    def pdf(self, points):
        p = _as_points(points, 1)[:, 0]
        inside = (p >= self.a) & (p <= self.b)
        return np.where(inside, 1.0 / (self.b - self.a), 0.0)

    def sample(self, rng, size=None):
        n = 1 if size is None else size
        out = rng.uniform(self.a, self.b, size=(n, 1))
        return out[0] if size is None else out

    def support_bounds(self):
        return np.array([[self.a, self.b]])

    def is_unimodal(self):
        return True

    def center(self):
        return np.array([0.5 * (self.a + self.b)])

    def cache_key(self):
        return ("uniform1d", self.a, self.b)


@dataclass(frozen=True)
class UniformBox2D(DensityModel):
    """Uniform density on the box [ax, bx] x [ay, by]."""

    ax: float
    bx: float
    ay: float
    by: float

    def __post_init__(self):
        if not (self.bx > self.ax and self.by > self.ay):
            raise ValueError("UniformBox2D requires bx > ax and by > ay")

    @property
    def dim(self) -> int:
        return 2

    def pdf(self, points):
        p = _as_points(points, 2)
        inside = (
            (p[:, 0] >= self.ax)
            & (p[:, 0] <= self.bx)
            & (p[:, 1] >= self.ay)
            & (p[:, 1] <= self.by)
        )
        val = 1.0 / ((self.bx - self.ax) * (self.by - self.ay))
        return np.where(inside, val, 0.0)

    def sample(self, rng, size=None):
        n = 1 if size is None else size
        out = np.column_stack(
            [rng.uniform(self.ax, self.bx, n), rng.uniform(self.ay, self.by, n)]
        )
        return out[0] if size is None else out

    def support_bounds(self):
        return np.array([[self.ax, self.bx], [self.ay, self.by]])

    def is_unimodal(self):
        return True

    def center(self):
        return np.array([0.5 * (self.ax + self.bx), 0.5 * (self.ay + self.by)])

    def cache_key(self):
        return ("uniformbox2d", self.ax, self.bx, self.ay, self.by)


class GaussianDensity(DensityModel):
    """Gaussian with diagonal covariance in 1-D or 2-D.

    Parameters
    ----------
    mean : float or length-d sequence
    variance : float (isotropic) or length-d sequence of per-axis variances
    """

    def __init__(self, mean, variance):
        mean = np.atleast_1d(np.asarray(mean, dtype=float))
        if mean.ndim != 1 or mean.size not in (1, 2):
            raise ValueError("mean must be a scalar or length-2 vector")
        var = np.asarray(variance, dtype=float)
        if var.ndim == 0:
            var = np.full(mean.size, float(var))
        if var.shape != mean.shape:
            raise ValueError("variance must be scalar or match the mean's length")
        if np.any(var <= 0):
            raise ValueError("variances must be positive")
        self.mean = mean
        self.var = var

    @property
    def dim(self) -> int:
        return self.mean.size

    def pdf(self, points):
        p = _as_points(points, self.dim)
        z = (p - self.mean) ** 2 / self.var
        norm = np.prod(np.sqrt(2.0 * np.pi * self.var))
        return np.exp(-0.5 * z.sum(axis=1)) / norm

    def sample(self, rng, size=None):
        n = 1 if size is None else size
        out = rng.normal(self.mean, np.sqrt(self.var), size=(n, self.dim))
        return out[0] if size is None else out

    def support_bounds(self):
        half = GAUSSIAN_SUPPORT_SIGMAS * np.sqrt(self.var)
        return np.column_stack([self.mean - half, self.mean + half])

    def is_unimodal(self):
        return True

    def center(self):
        return self.mean.copy()

    def cache_key(self):
        return ("gaussian", tuple(self.mean), tuple(self.var))


class MixtureDensity(DensityModel):
    """Convex combination of same-dimension component densities.

    Unimodality is decided by rendering the mixture onto a grid over its
    support and scanning it: the property is checkable pointwise but is not
    closed under mixing, so no analytic shortcut is attempted.
    """

    _SCAN_CELLS_1D = 1024
    _SCAN_CELLS_2D = 129

    def __init__(self, components):
        comps = [(float(w), m) for w, m in components]
        if not comps:
            raise ValueError("mixture needs at least one component")
        if any(w < 0 for w, _ in comps):
            raise ValueError("mixture weights must be nonnegative")
        if abs(sum(w for w, _ in comps) - 1.0) > _MASS_TOL:
            raise ValueError("mixture weights must sum to 1")
        d = comps[0][1].dim
        if any(m.dim != d for _, m in comps):
            raise ValueError("mixture components must share a dimension")
        self.components = tuple(comps)

    @property
    def dim(self) -> int:
        return self.components[0][1].dim

    def pdf(self, points):
        p = _as_points(points, self.dim)
        out = np.zeros(p.shape[0])
        for w, m in self.components:
            out += w * m.pdf(p)
        return out

    def sample(self, rng, size=None):
        n = 1 if size is None else size
        weights = np.array([w for w, _ in self.components])
        idx = rng.choice(len(self.components), size=n, p=weights)
        out = np.empty((n, self.dim))
        for k, (_, m) in enumerate(self.components):
            sel = idx == k
            cnt = int(sel.sum())
            if cnt:
                out[sel] = m.sample(rng, cnt)
        return out[0] if size is None else out

    def support_bounds(self):
        boxes = np.stack([m.support_bounds() for _, m in self.components])
        return np.column_stack([boxes[:, :, 0].min(axis=0), boxes[:, :, 1].max(axis=0)])

    def _render_grid(self) -> "GridDensity":
        box = self.support_bounds()
        if self.dim == 1:
            edges = np.linspace(box[0, 0], box[0, 1], self._SCAN_CELLS_1D + 1)
            mids = 0.5 * (edges[:-1] + edges[1:])
            vals = self.pdf(mids.reshape(-1, 1))
        else:
            m = self._SCAN_CELLS_2D
            ex = np.linspace(box[0, 0], box[0, 1], m + 1)
            ey = np.linspace(box[1, 0], box[1, 1], m + 1)
            mx = 0.5 * (ex[:-1] + ex[1:])
            my = 0.5 * (ey[:-1] + ey[1:])
            X, Y = np.meshgrid(mx, my, indexing="ij")
            vals = self.pdf(np.column_stack([X.ravel(), Y.ravel()])).reshape(m, m)
        return GridDensity(vals, box, normalize=True)

    def is_unimodal(self):
        return self._render_grid().is_unimodal()

    def center(self):
        if not self.is_unimodal():
            return None
        box = self.support_bounds()
        return 0.5 * (box[:, 0] + box[:, 1])

    def breakpoints(self):
        pts = [[] for _ in range(self.dim)]
        box = self.support_bounds()
        for _, m in self.components:
            b = m.support_bounds()
            for ax in range(self.dim):
                for v in (b[ax, 0], b[ax, 1]):
                    if box[ax, 0] < v < box[ax, 1]:
                        pts[ax].append(v)
                for v in m.breakpoints()[ax]:
                    pts[ax].append(v)
        return [np.unique(np.asarray(p)) for p in pts]

    def cache_key(self):
        return ("mixture",) + tuple(
            (w, m.cache_key()) for w, m in self.components
        )


class GridDensity(DensityModel):
    """Piecewise-constant density over a regular cell grid.

    Cell values are interpreted as the density inside each cell (the way a
    UAV would sense a discretized density map). 1-D grids use a (m,) value
    array over [a, b]; 2-D grids use (mx, my) values over the box, indexed
    values[ix, iy].
    """

    def __init__(self, values, box, normalize: bool = False):
        values = np.asarray(values, dtype=float)
        if values.ndim not in (1, 2):
            raise ValueError("grid values must be a 1-D or 2-D array")
        if np.any(values < 0):
            raise ValueError("grid values must be nonnegative")
        box = np.asarray(box, dtype=float).reshape(values.ndim, 2)
        if np.any(box[:, 1] <= box[:, 0]):
            raise ValueError("grid box must have positive extent on every axis")
        cell = np.prod((box[:, 1] - box[:, 0]) / np.array(values.shape))
        mass = float(values.sum() * cell)
        if normalize:
            if mass <= 0:
                raise ValueError("grid has no mass to normalize")
            values = values / mass
        elif abs(mass - 1.0) > _MASS_TOL:
            raise ValueError(f"grid mass is {mass!r}, expected 1 within {_MASS_TOL}")
        self.values = values
        self.box = box
        self.values.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.values.ndim

    def _cell_index(self, coords, axis):
        lo, hi = self.box[axis]
        m = self.values.shape[axis]
        idx = np.floor((coords - lo) / (hi - lo) * m).astype(int)
        return np.clip(idx, 0, m - 1)

    def pdf(self, points):
        p = _as_points(points, self.dim)
        inside = np.ones(p.shape[0], dtype=bool)
        for ax in range(self.dim):
            inside &= (p[:, ax] >= self.box[ax, 0]) & (p[:, ax] <= self.box[ax, 1])
        out = np.zeros(p.shape[0])
        if self.dim == 1:
            out[inside] = self.values[self._cell_index(p[inside, 0], 0)]
        else:
            ix = self._cell_index(p[inside, 0], 0)
            iy = self._cell_index(p[inside, 1], 1)
            out[inside] = self.values[ix, iy]
        return out

    def sample(self, rng, size=None):
        n = 1 if size is None else size
        cell_sizes = (self.box[:, 1] - self.box[:, 0]) / np.array(self.values.shape)
        masses = self.values.ravel() * np.prod(cell_sizes)
        masses = masses / masses.sum()
        flat = rng.choice(masses.size, size=n, p=masses)
        idx = np.column_stack(np.unravel_index(flat, self.values.shape))
        lo = self.box[:, 0] + idx * cell_sizes
        out = lo + rng.uniform(0.0, 1.0, size=(n, self.dim)) * cell_sizes
        return out[0] if size is None else out

    def support_bounds(self):
        return self.box.copy()

    def breakpoints(self):
        pts = []
        for ax in range(self.dim):
            m = self.values.shape[ax]
            edges = np.linspace(self.box[ax, 0], self.box[ax, 1], m + 1)[1:-1]
            pts.append(edges)
        return pts

    def is_unimodal(self):
        if self.dim == 1:
            return _scan_unimodal_1d(self.values)
        # coordinate-wise: every x-slice and every y-slice must pass
        ok_rows = all(_scan_unimodal_1d(self.values[:, j]) for j in range(self.values.shape[1]))
        ok_cols = all(_scan_unimodal_1d(self.values[i, :]) for i in range(self.values.shape[0]))
        return ok_rows and ok_cols

    def center(self):
        if not self.is_unimodal():
            return None
        return 0.5 * (self.box[:, 0] + self.box[:, 1])

    def cache_key(self):
        digest = hashlib.sha256(self.values.tobytes()).hexdigest()[:16]
        return ("grid", self.values.shape, tuple(self.box.ravel()), digest)


def _scan_unimodal_1d(v: np.ndarray) -> bool:
    """Monotone-then-mirror scan of a sampled 1-D profile."""
    v = np.asarray(v, dtype=float)
    tol = 1e-9 * max(1.0, float(v.max(initial=0.0)))
    m = v.size
    if not np.all(np.abs(v - v[::-1]) <= tol):
        return False
    half = v[: (m + 1) // 2]
    return bool(np.all(np.diff(half) >= -tol))


def density_from_dict(spec: dict) -> DensityModel:
    """Build a density from a JSON-compatible mapping.

    Recognized kinds: ``uniform1d`` (a, b), ``uniformbox2d`` (ax, bx, ay, by),
    ``gaussian`` (mean, variance), ``mixture`` (components: [{weight, ...}]),
    ``grid`` (values, box) or (csv: path).
    """
    kind = str(spec.get("kind", "")).lower()
    if kind == "uniform1d":
        return Uniform1D(float(spec["a"]), float(spec["b"]))
    if kind == "uniformbox2d":
        return UniformBox2D(
            float(spec["ax"]), float(spec["bx"]), float(spec["ay"]), float(spec["by"])
        )
    if kind == "gaussian":
        return GaussianDensity(spec["mean"], spec["variance"])
    if kind == "mixture":
        comps = [
            (float(c["weight"]), density_from_dict(c)) for c in spec["components"]
        ]
        return MixtureDensity(comps)
    if kind == "grid":
        if "csv" in spec:
            return load_grid_csv(spec["csv"])
        return GridDensity(
            np.asarray(spec["values"], dtype=float),
            np.asarray(spec["box"], dtype=float),
            normalize=bool(spec.get("normalize", False)),
        )
    raise ValueError(f"unknown density kind {spec.get('kind')!r}")


def load_grid_csv(path) -> GridDensity:
    """Load a grid density from CSV.

    The first non-comment line holds the bounding box as ``a,b`` (1-D) or
    ``ax,bx,ay,by`` (2-D); each following line is one row of cell values
    (a single row means a 1-D grid). Values are normalized to unit mass.
    """
    rows = []
    header = None
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            nums = [float(tok) for tok in line.split(",")]
            if header is None:
                header = nums
            else:
                rows.append(nums)
    if header is None or not rows:
        raise ValueError("grid CSV needs a box header line and at least one value row")
    if len(header) == 2:
        if len(rows) != 1:
            raise ValueError("1-D grid CSV must have exactly one value row")
        return GridDensity(np.asarray(rows[0]), [header], normalize=True)
    if len(header) == 4:
        values = np.asarray(rows)  # row i is x-cell i
        box = [[header[0], header[1]], [header[2], header[3]]]
        return GridDensity(values, box, normalize=True)
    raise ValueError("grid CSV header must have 2 (1-D) or 4 (2-D) numbers")
