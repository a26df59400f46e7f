"""System outage probability of a UAV deployment and its gradients.

The objective is P(U) = integral of prod_i (1 - s(x, u_i)) f(x) dx, where s
is the per-link success kernel: the system is in outage at x only when
every UAV fails simultaneously (selection diversity). The per-node factor
product is taken in sorted order, which makes the evaluated value exactly
invariant under permutations of the deployment.

Gradients under Rayleigh fading are analytic; under the Rician model they
fall back to central finite differences of the success kernel inside the
integrand, which keeps the distributed optimizer usable there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .channel import ChannelParams, RayleighParams, RicianParams, rician_success
from .density import DensityModel
from .quadrature import NodeSet, QuadratureResult, QuadratureSpec, disk_nodeset, get_nodeset

__all__ = [
    "Deployment",
    "outage",
    "outage_estimate",
    "outage_batch",
    "gradient",
    "local_gradient",
]

_RICIAN_FD_FRACTION = 1e-6  # step for in-integrand kernel differences


@dataclass(frozen=True)
class Deployment:
    """Ground projections of n UAVs sharing a common altitude.

    positions has shape (n, d); the altitude lives in the channel params.
    """

    positions: np.ndarray

    def __post_init__(self):
        pos = np.atleast_2d(np.asarray(self.positions, dtype=float))
        if pos.ndim != 2 or pos.shape[0] < 1 or pos.shape[1] not in (1, 2):
            raise ValueError("positions must be an (n, d) array with d in {1, 2}")
        pos = pos.copy()
        pos.setflags(write=False)
        object.__setattr__(self, "positions", pos)

    @property
    def n(self) -> int:
        return self.positions.shape[0]

    @property
    def dim(self) -> int:
        return self.positions.shape[1]

    @classmethod
    def single(cls, point) -> "Deployment":
        return cls(np.atleast_1d(np.asarray(point, dtype=float)).reshape(1, -1))


def _success_matrix(points: np.ndarray, U: np.ndarray, ch: ChannelParams) -> np.ndarray:
    """Per-link success probabilities, shape (N, n)."""
    d2 = ((points[:, None, :] - U[None, :, :]) ** 2).sum(axis=-1)
    if isinstance(ch, RayleighParams):
        return np.exp(-ch.lam * (d2 + ch.h * ch.h) ** (0.5 * ch.r))
    if isinstance(ch, RicianParams):
        from .channel import _elevation_angle, elevation_laws
        from .special import marcum_q1

        theta = _elevation_angle(d2, ch.h)
        r, K, _ = elevation_laws(theta, ch)
        a = np.sqrt(2.0 * K)
        b = np.sqrt(2.0 * ch.lam * (K + 1.0) * (d2 + ch.h * ch.h) ** (0.5 * r))
        return marcum_q1(a, b)
    raise TypeError(f"unsupported channel params {type(ch).__name__}")


def _sorted_outage_factors(points, U, ch):
    fac = 1.0 - _success_matrix(points, U, ch)
    fac.sort(axis=1)  # deterministic product order: permutation invariance
    return np.prod(fac, axis=1)


def _check_dims(U: Deployment, f: DensityModel):
    if U.dim != f.dim:
        raise ValueError(f"deployment dimension {U.dim} != density dimension {f.dim}")


def outage_estimate(U: Deployment, f: DensityModel, ch: ChannelParams,
                    q: QuadratureSpec | None = None) -> QuadratureResult:
    """Outage probability with its quadrature error estimate.

    Raises QuadratureError (carrying the partial value) when the estimated
    error exceeds the spec's tolerance.
    """
    _check_dims(U, f)
    q = q or QuadratureSpec()
    ns = get_nodeset(f, q)
    pos = U.positions
    return ns.integrate_checked(lambda pts: _sorted_outage_factors(pts, pos, ch), q)


def outage(U: Deployment, f: DensityModel, ch: ChannelParams,
           q: QuadratureSpec | None = None) -> float:
    """Outage probability of a deployment (see outage_estimate for errors)."""
    return outage_estimate(U, f, ch, q).value


def outage_batch(deployments: np.ndarray, f: DensityModel, ch: ChannelParams,
                 q: QuadratureSpec | None = None) -> np.ndarray:
    """Outage of many deployments at once; input shape (P, n, d), output (P,).

    Shares one pass over the quadrature nodes across all P deployments,
    which is what makes population-based optimizers cheap.
    """
    q = q or QuadratureSpec()
    deployments = np.asarray(deployments, dtype=float)
    P, n, d = deployments.shape
    if d != f.dim:
        raise ValueError("deployment dimension does not match the density")
    ns = get_nodeset(f, q)

    def fn(pts):
        stacked = deployments.reshape(P * n, d)
        fac = 1.0 - _success_matrix(pts, stacked, ch)
        fac = fac.reshape(pts.shape[0], P, n)
        fac.sort(axis=2)
        return np.prod(fac, axis=2)

    value, _, _ = ns.integrate(fn)
    return np.asarray(value, dtype=float)


def _rayleigh_descent_kernel(points, U, ch: RayleighParams):
    """d(success)/du made negative: (N, n, d) array; row i is -dg/du_i sign
    flipped so that the outage gradient is assembled by plain summation.

    The integrand factor for UAV i is lam * r * (u_i - x) *
    (||x-u_i||^2 + h^2)^(r/2 - 1) * g(x, u_i): pointing from the mass toward
    the UAV, so stepping against the assembled gradient moves UAVs toward
    uncovered mass.
    """
    diff = U[None, :, :] - points[:, None, :]
    d2 = (diff**2).sum(axis=-1)
    base = d2 + ch.h * ch.h
    g = np.exp(-ch.lam * base ** (0.5 * ch.r))
    scale = ch.lam * ch.r * base ** (0.5 * ch.r - 1.0) * g
    return diff * scale[:, :, None]


def _rician_descent_kernel(points, U, ch: RicianParams, step: float):
    """Central finite differences of the Rician success kernel in u."""
    N, n, d = points.shape[0], U.shape[0], U.shape[1]
    out = np.empty((N, n, d))
    for i in range(n):
        for k in range(d):
            up = U[i].copy()
            up[k] += step
            dn = U[i].copy()
            dn[k] -= step
            w_up = rician_success(points, up[None, :], ch)
            w_dn = rician_success(points, dn[None, :], ch)
            out[:, i, k] = -(w_up - w_dn) / (2.0 * step)
    return out


def _descent_kernel(points, U, ch, length_scale):
    if isinstance(ch, RayleighParams):
        return _rayleigh_descent_kernel(points, U, ch)
    if isinstance(ch, RicianParams):
        return _rician_descent_kernel(points, U, ch, _RICIAN_FD_FRACTION * length_scale)
    raise TypeError(f"unsupported channel params {type(ch).__name__}")


def _length_scale(f: DensityModel) -> float:
    box = f.support_bounds()
    return float(np.max(box[:, 1] - box[:, 0]))


def gradient(U: Deployment, f: DensityModel, ch: ChannelParams,
             q: QuadratureSpec | None = None) -> np.ndarray:
    """Gradient of the outage probability with respect to each UAV, (n, d).

    The update u_i <- u_i - eta * G_i descends the outage. Analytic under
    Rayleigh; kernel-level finite differences under Rician.
    """
    _check_dims(U, f)
    q = q or QuadratureSpec()
    ns = get_nodeset(f, q)
    pos = U.positions
    n, d = pos.shape
    ls = _length_scale(f)

    def fn(pts):
        S = _success_matrix(pts, pos, ch)
        fac = 1.0 - S
        # prefix/suffix products give prod_{j != i} without dividing by
        # factors that may be exactly zero
        N = fac.shape[0]
        pref = np.ones((N, n + 1))
        pref[:, 1:] = np.cumprod(fac, axis=1)
        suff = np.ones((N, n + 1))
        suff[:, 1:] = np.cumprod(fac[:, ::-1], axis=1)
        others = pref[:, :n] * suff[:, :n][:, ::-1]
        H = _descent_kernel(pts, pos, ch, ls)
        return (H * others[:, :, None]).reshape(N, n * d)

    value, _, _ = ns.integrate(fn)
    return np.asarray(value).reshape(n, d)


def local_gradient(i: int, U: Deployment, f: DensityModel, ch: ChannelParams,
                   d_sense: float, d_comm: float,
                   q: QuadratureSpec | None = None) -> np.ndarray:
    """Range-limited gradient of UAV i, shape (d,).

    The integral runs only over the sensing region B(u_i, d_sense) and the
    outage product only over UAVs within communication range d_comm of u_i.
    With both radii infinite this equals the exact gradient component.
    """
    _check_dims(U, f)
    if d_sense <= 0 or d_comm <= 0:
        raise ValueError("sensing and communication radii must be positive")
    q = q or QuadratureSpec()
    pos = U.positions
    n, d = pos.shape
    if not 0 <= i < n:
        raise IndexError(f"UAV index {i} out of range for n={n}")
    ls = _length_scale(f)

    dist = np.sqrt(((pos - pos[i]) ** 2).sum(axis=1))
    nbr = (dist <= d_comm) & (np.arange(n) != i)
    members = np.concatenate([[i], np.flatnonzero(nbr)])
    sub = pos[members]

    ns = _sensing_nodeset(f, q, pos[i], d_sense)

    def fn(pts):
        S = _success_matrix(pts, sub, ch)
        others = np.prod(1.0 - S[:, 1:], axis=1) if S.shape[1] > 1 else np.ones(S.shape[0])
        H = _descent_kernel(pts, sub[:1], ch, ls)[:, 0, :]
        return H * others[:, None]

    value, _, _ = ns.integrate(fn)
    return np.asarray(value).reshape(d)


def _sensing_nodeset(f: DensityModel, q: QuadratureSpec, center: np.ndarray, radius: float) -> NodeSet:
    """Disk nodes, or the standard frozen nodes when the disk covers the support."""
    if math.isinf(radius):
        return get_nodeset(f, q)
    box = f.support_bounds()
    corners = box[0].reshape(-1, 1) if f.dim == 1 else np.array(
        [[box[0, a], box[1, b]] for a in (0, 1) for b in (0, 1)]
    )
    far = float(np.sqrt(((corners - center[None, :]) ** 2).sum(axis=1)).max())
    if radius >= far:
        return get_nodeset(f, q)
    return disk_nodeset(f, q, center, radius)
