"""Closed-form outage values, bounds, and asymptotic placement predictions.

The closed forms expand (1 - g)^n binomially and integrate term by term,
so they are alternating sums: they are accumulated with exact compensated
summation and fall back to direct quadrature once the terms grow large
enough to threaten the result's precision.

Bounds: a random-deployment argument gives an upper bound on the optimal
outage (any deployment distribution's average is achievable); replacing
every link's distance with the altitude alone gives a lower bound
(1 - e^{-lam h^r})^n; and a Jensen-type argument on interval partitions
gives a ground-level (h = 0) lower bound for the normalized uniform
density. Together they pin the optimal outage to an exponential decay in
the number of UAVs.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .channel import ChannelParams, RayleighParams, success_probability
from .density import DensityModel, GaussianDensity, UniformBox2D
from .errors import AscentError
from .objective import Deployment, outage
from .optimizers import random_deployment
from .quadrature import QuadratureSpec, get_nodeset

__all__ = [
    "BoundReport",
    "MonteCarloBound",
    "lower_bound_altitude",
    "lower_bound_ground_uniform",
    "upper_bound_random",
    "upper_bound_random_exact",
    "closed_form_gaussian",
    "closed_form_uniform_square",
    "asymptotic_optimum",
    "marcum_upper_bound",
    "fit_exponential_decay",
]

_CANCELLATION_N = 60  # binomial sums above this switch to quadrature


@dataclass(frozen=True)
class MonteCarloBound:
    """A Monte Carlo estimate with its standard error."""

    value: float
    stderr: float
    samples: int


@dataclass(frozen=True)
class BoundReport:
    """Lower/upper bounds bracketing an achieved outage value."""

    lower: float
    upper: float
    achieved: float
    witnesses: dict

    def is_consistent(self, tol: float = 1e-9) -> bool:
        return self.lower <= self.achieved + tol and self.achieved <= self.upper + tol


def lower_bound_altitude(lam: float, h: float, r: float, n: int) -> float:
    """(1 - e^{-lam h^r})^n: no deployment can beat pure altitude loss."""
    if h < 0 or lam < 0 or n < 0:
        raise ValueError("lam, h, n must be nonnegative")
    return (1.0 - math.exp(-lam * h**r)) ** n


def lower_bound_ground_uniform(r: float, n: int) -> float:
    """Ground-level (h = 0) lower bound for the unit uniform density.

    Valid for path-loss exponent r > 1; normalized to a unit interval and
    unit threshold coefficient: (1/3) (1 - e^{-3^{-r}})^n.
    """
    if r <= 1:
        raise ValueError("the ground-level bound needs r > 1")
    return (1.0 / 3.0) * (1.0 - math.exp(-(3.0**-r))) ** n


def upper_bound_random(f: DensityModel, ch: ChannelParams, n: int,
                       placement_law: DensityModel, samples: int,
                       rng: np.random.Generator,
                       q: QuadratureSpec | None = None) -> MonteCarloBound:
    """Monte Carlo upper bound on the optimal outage.

    Draws ``samples`` random deployments (n i.i.d. positions from the
    placement law), evaluates each one's outage by quadrature, and returns
    the mean with its standard error. Some deployment achieves its own
    distribution's average, so the mean bounds the optimum from above.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    q = q or QuadratureSpec()
    vals = np.empty(samples)
    for s in range(samples):
        dep = random_deployment(placement_law, n, rng)
        vals[s] = outage(dep, f, ch, q)
    se = float(vals.std(ddof=1) / math.sqrt(samples)) if samples > 1 else 0.0
    return MonteCarloBound(float(vals.mean()), se, samples)


def upper_bound_random_exact(f: DensityModel, ch: ChannelParams, n: int,
                             placement_law: DensityModel,
                             q: QuadratureSpec | None = None) -> float:
    """Deterministic version of the random-deployment bound.

    Computes integral of (E_U[1 - s(x, U)])^n f(x) dx with the inner
    expectation taken by quadrature over the placement law.
    """
    q = q or QuadratureSpec()
    ns_x = get_nodeset(f, q)
    ns_u = get_nodeset(placement_law, q)
    u_pts, u_w = ns_u.points, ns_u.weights
    u_mass = float(u_w.sum())

    def fn(pts):
        out = np.empty(pts.shape[0])
        chunk = max(1, 2_000_000 // max(1, u_pts.shape[0]))
        for lo in range(0, pts.shape[0], chunk):
            block = pts[lo : lo + chunk]
            s = success_probability(block[:, None, :], u_pts[None, :, :], ch)
            out[lo : lo + chunk] = ((1.0 - s) @ u_w) / u_mass
        return out**n

    value, _, _ = ns_x.integrate(fn)
    return float(value)


def _binomial_sum(terms) -> tuple[float, float]:
    """fsum of the terms plus the largest magnitude seen (for a loss gauge)."""
    ts = list(terms)
    return math.fsum(ts), max(abs(t) for t in ts)


def closed_form_gaussian(n: int, h: float, sigma: float,
                         q: QuadratureSpec | None = None) -> float:
    """Outage with all n UAVs at the mean of a 1-D Gaussian density.

    Unit threshold coefficient and quadratic path loss:
    sum_k C(n,k) (-1)^k e^{-k h^2} / sqrt(1 + 2 k sigma^2).
    Compensated summation; falls back to quadrature (with a warning) when
    the alternating terms are large enough to wash out the result.
    """
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n == 0:
        return 1.0
    value, biggest = _binomial_sum(
        math.comb(n, k) * (-1.0) ** k * math.exp(-k * h * h) / math.sqrt(1.0 + 2.0 * k * sigma**2)
        for k in range(n + 1)
    )
    if n > _CANCELLATION_N or biggest * 5e-16 > 1e-7:
        warnings.warn(
            f"alternating closed form unstable at n={n}; using quadrature fallback",
            RuntimeWarning,
            stacklevel=2,
        )
        f = GaussianDensity(0.0, sigma**2)
        dep = Deployment(np.zeros((n, 1)))
        return outage(dep, f, RayleighParams(lam=1.0, r=2.0, h=h), q)
    return value


def closed_form_uniform_square(n: int, h: float,
                               q: QuadratureSpec | None = None) -> float:
    """Outage with all n UAVs at the center of the uniform unit square.

    Unit threshold coefficient and quadratic path loss:
    1 + sum_{k>=1} C(n,k) (-1)^k e^{-k h^2} (pi/k) erf(sqrt(k)/2)^2.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    if n == 0:
        return 1.0
    value, biggest = _binomial_sum(
        [1.0]
        + [
            math.comb(n, k)
            * (-1.0) ** k
            * math.exp(-k * h * h)
            * (math.pi / k)
            * math.erf(math.sqrt(k) / 2.0) ** 2
            for k in range(1, n + 1)
        ]
    )
    if n > _CANCELLATION_N or biggest * 5e-16 > 1e-7:
        warnings.warn(
            f"alternating closed form unstable at n={n}; using quadrature fallback",
            RuntimeWarning,
            stacklevel=2,
        )
        f = UniformBox2D(0.0, 1.0, 0.0, 1.0)
        dep = Deployment(np.tile([0.5, 0.5], (n, 1)))
        return outage(dep, f, RayleighParams(lam=1.0, r=2.0, h=h), q)
    return value


def asymptotic_optimum(f: DensityModel, ch: ChannelParams, n: int,
                       q: QuadratureSpec | None = None):
    """Single-site optimum and the high-altitude outage prediction.

    Returns (u_star, prediction): u_star maximizes the mean per-link
    success S(u) = integral s(x, u) f(x) dx, and prediction = n * S(u_star)
    estimates 1 - P(optimal) at large altitude, where the optimal
    deployment collapses onto u_star. For unimodal densities u_star is the
    density center exactly.
    """
    q = q or QuadratureSpec()
    ns = get_nodeset(f, q)
    pts, w = ns.points, ns.weights

    def S(u):
        u = np.asarray(u, dtype=float).reshape(1, -1)
        return float(w @ success_probability(pts[:, None, :], u[None, :, :], ch)[:, 0])

    if f.is_unimodal():
        u_star = f.center()
        return u_star, n * S(u_star)

    from scipy.optimize import minimize

    box = f.support_bounds()
    starts = [0.5 * (box[:, 0] + box[:, 1])]
    grid = [np.linspace(lo, hi, 3) for lo, hi in box]
    mesh = np.stack(np.meshgrid(*grid, indexing="ij"), axis=-1).reshape(-1, f.dim)
    starts.extend(mesh)
    rng = np.random.default_rng(0)  # fixed: the op takes no rng by contract
    starts.extend(rng.uniform(box[:, 0], box[:, 1], size=(8, f.dim)))

    best_x, best_v, any_ok = None, np.inf, False
    for x0 in starts:
        res = minimize(lambda u: -S(u), x0, method="L-BFGS-B",
                       bounds=[tuple(b) for b in box])
        any_ok = any_ok or bool(res.success)
        if res.fun < best_v:
            best_v, best_x = float(res.fun), np.asarray(res.x)
    if not any_ok or best_x is None:
        raise AscentError("ascent over the support box failed to converge",
                          best_point=best_x, best_value=-best_v)
    return best_x, n * (-best_v)


def marcum_upper_bound(a: float, b: float, clip: bool = False) -> float:
    """exp(-b^2/2 + a b), an upper bound on the first-order Marcum Q value.

    The raw bound can exceed 1; pass clip=True to cap it when reporting it
    as a probability.
    """
    if a < 0 or b < 0:
        raise ValueError("a and b must be nonnegative")
    val = math.exp(min(-0.5 * b * b + a * b, 709.0))
    return min(1.0, val) if clip else val


def fit_exponential_decay(ns, values):
    """Least-squares line fit of ln(values) vs ns.

    Returns (slope, intercept, r_squared); used to check that outage decays
    exponentially in the number of UAVs.
    """
    ns = np.asarray(ns, dtype=float)
    y = np.log(np.asarray(values, dtype=float))
    A = np.column_stack([ns, np.ones_like(ns)])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    ss_res = float(resid @ resid)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return float(coef[0]), float(coef[1]), r2
