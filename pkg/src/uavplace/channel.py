"""Fading channel models: per-link success probabilities and a Monte Carlo
fading oracle.

Both channels share the threshold form: a transmission from a ground
terminal at ``x`` to a UAV whose ground projection is ``u`` (altitude ``h``)
succeeds when the squared fading gain exceeds
``lambda * (||x-u||^2 + h^2)^(r/2)``. Under Rayleigh fading the gain is
exponential, giving the closed-form kernel ``exp(-lambda * (...)^(r/2))``.
The Rician variant uses elevation-angle-dependent path loss and K factor,
and its success probability is a first-order Marcum Q value.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .special import marcum_q1

__all__ = [
    "RayleighParams",
    "RicianParams",
    "lambda_from_link",
    "rayleigh_success",
    "elevation_laws",
    "rician_success",
    "success_probability",
    "simulate_outage_mc",
]


@dataclass(frozen=True)
class RayleighParams:
    """Rayleigh channel: threshold coefficient, path-loss exponent, altitude.

    ``lam`` folds rate, noise, power, and antenna/frequency constants into a
    single coefficient (see :func:`lambda_from_link`); distances are in
    whatever length unit ``lam`` was computed for.
    """

    lam: float
    r: float
    h: float

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError("lambda must be nonnegative")
        if self.r <= 0:
            raise ValueError("path-loss exponent must be positive")
        if self.h < 0:
            raise ValueError("altitude must be nonnegative")


@dataclass(frozen=True)
class RicianParams:
    """Angle-dependent Rician channel.

    Elevation laws (theta in radians, theta in [0, pi/2]):
      path loss      r(theta) = a1 * P_los(theta) + b1
      LOS probability P_los(theta) = 1 / (1 + a2 * exp(-b2 * (theta - a2)))
      K factor       K(theta) = a3 * exp(b3 * theta)
    """

    lam: float
    h: float
    a1: float
    b1: float
    a2: float
    b2: float
    a3: float
    b3: float

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError("lambda must be nonnegative")
        if self.h < 0:
            raise ValueError("altitude must be nonnegative")
        if self.a3 <= 0:
            raise ValueError("a3 must be positive so K(theta) > 0")
        if self.a2 <= 0:
            raise ValueError("a2 must be positive so P_los(theta) lies in (0,1)")
        for theta in (0.0, math.pi / 2):
            r, _, _ = elevation_laws(theta, self)
            if r <= 0:
                raise ValueError("path-loss law must stay positive on [0, pi/2]")

    @classmethod
    def suburban(cls, lam: float, h: float) -> "RicianParams":
        """Suburban 2.4 GHz parameter set with K rising from a3 to 3*a3 at zenith."""
        return cls(
            lam=lam,
            h=h,
            a1=-1.5,
            b1=3.5,
            a2=4.88,
            b2=0.43,
            a3=5.0,
            b3=(2.0 / math.pi) * math.log(3.0),
        )


ChannelParams = RayleighParams | RicianParams


def lambda_from_link(ap_over_n0_db: float, rho: float) -> float:
    """Threshold coefficient from a link budget.

    ``lambda = (2**rho - 1) * 10**(-ap_over_n0_db / 10)`` where ``rho`` is
    the target rate in bits/s/Hz and ``ap_over_n0_db`` is the combined
    antenna-gain x power over noise ratio in dB.
    """
    if rho <= 0:
        raise ValueError("rate rho must be positive")
    return (2.0**rho - 1.0) * 10.0 ** (-ap_over_n0_db / 10.0)


def _pair_distances_sq(x, u, dim_check: bool = True) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    if dim_check and x.shape[-1] != u.shape[-1]:
        raise ValueError("x and u must have the same dimension")
    return ((x - u) ** 2).sum(axis=-1)


def rayleigh_success(x, u, p: RayleighParams):
    """Probability that a single Rayleigh link from x to the UAV at u succeeds.

    Equals ``exp(-lam * (||x-u||^2 + h^2)^(r/2))``; strictly decreasing in
    the horizontal distance and in the altitude. Accepts broadcastable
    point batches; returns a scalar for single points.
    """
    d2 = _pair_distances_sq(x, u)
    val = np.exp(-p.lam * (d2 + p.h * p.h) ** (0.5 * p.r))
    return float(val) if np.ndim(val) == 0 else val


def elevation_laws(theta, p: RicianParams):
    """Path-loss exponent, K factor, and LOS probability at elevation theta.

    theta is in radians within [0, pi/2]. Returns (r, K, P_los) with the
    same shape as theta.
    """
    theta = np.asarray(theta, dtype=float)
    if np.any((theta < 0) | (theta > math.pi / 2 + 1e-12)):
        raise ValueError("theta must lie in [0, pi/2]")
    plos = 1.0 / (1.0 + p.a2 * np.exp(-p.b2 * (theta - p.a2)))
    r = p.a1 * plos + p.b1
    K = p.a3 * np.exp(p.b3 * theta)
    if theta.ndim == 0:
        return float(r), float(K), float(plos)
    return r, K, plos


def _elevation_angle(d2: np.ndarray, h: float) -> np.ndarray:
    """Elevation angle from horizontal distance^2 and altitude.

    At zero horizontal distance the angle is pi/2; the h = 0, x = u corner
    keeps that zenith convention (limit of the h > 0 case).
    """
    d = np.sqrt(d2)
    theta = np.arctan2(h, d)
    if h == 0.0:
        theta = np.where(d == 0.0, math.pi / 2, theta)
    return theta


def rician_success(x, u, p: RicianParams):
    """Marcum-Q success probability of a single Rician link.

    ``Q1(sqrt(2 K), sqrt(2 lam (K+1) (||x-u||^2 + h^2)^(r/2)))`` with r and
    K evaluated at the link's elevation angle.
    """
    d2 = _pair_distances_sq(x, u)
    scalar = np.ndim(d2) == 0
    d2 = np.atleast_1d(d2)
    theta = _elevation_angle(d2, p.h)
    r, K, _ = elevation_laws(theta, p)
    a = np.sqrt(2.0 * K)
    b = np.sqrt(2.0 * p.lam * (K + 1.0) * (d2 + p.h * p.h) ** (0.5 * r))
    w = marcum_q1(a, b)
    return float(w[0]) if scalar else w


def success_probability(x, u, params: ChannelParams):
    """Dispatch to the Rayleigh or Rician per-link success kernel."""
    if isinstance(params, RayleighParams):
        return rayleigh_success(x, u, params)
    if isinstance(params, RicianParams):
        return rician_success(x, u, params)
    raise TypeError(f"unsupported channel params {type(params).__name__}")


def simulate_outage_mc(x, u, params: ChannelParams, trials: int, rng: np.random.Generator) -> float:
    """Empirical outage probability of one link by sampling the fading gain.

    Draws ``trials`` squared channel gains (exponential for Rayleigh; the
    unit-mean Rician construction with the angle-dependent K otherwise) and
    returns the fraction below the distance threshold. Serves as the
    independent oracle for the analytic kernels.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    d2 = float(_pair_distances_sq(x, u))
    if isinstance(params, RayleighParams):
        thr = params.lam * (d2 + params.h**2) ** (0.5 * params.r)
        if thr == 0.0:
            return 0.0
        gains = rng.exponential(1.0, size=trials)
    elif isinstance(params, RicianParams):
        theta = float(_elevation_angle(np.atleast_1d(d2), params.h)[0])
        r, K, _ = elevation_laws(theta, params)
        thr = params.lam * (d2 + params.h**2) ** (0.5 * r)
        if thr == 0.0:
            return 0.0
        # unit-mean Rician power: LOS amplitude sqrt(K/(K+1)), complex
        # scatter with per-component variance 1/(2(K+1))
        g1 = rng.standard_normal(trials)
        g2 = rng.standard_normal(trials)
        los = math.sqrt(K / (K + 1.0))
        s = 1.0 / math.sqrt(2.0 * (K + 1.0))
        gains = (los + s * g1) ** 2 + (s * g2) ** 2
    else:
        raise TypeError(f"unsupported channel params {type(params).__name__}")
    return float(np.count_nonzero(gains <= thr)) / trials
