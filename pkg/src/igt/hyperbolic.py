"""Restricted totally geodesic Radon transform on H^n (hyperboloid model).

[x, y] = -x_1 y_1 - ... - x_n y_n + x_{n+1} y_{n+1}.  H^n is the sheet
[x, x] = 1, x_{n+1} > 0, and the one-sheeted hyperboloid [y, y] = -1
indexes the hyperplanes xi_y = {x : [x, y] = 0}.

For the restricted transform the coordinates split as in the spherical
case: x' holds the first n-k entries, v lies on S^{n-k-1}, and elements
(v, w) have w on the one-sheeted hyperboloid inside R v + R^{k+1}.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import interpolate

from . import numkit as nk
from .errors import (
    DegeneratePointError,
    DivergenceWarning,
    InvalidArgumentError,
    PreconditionError,
    TruncationError,
    UnsupportedDimensionError,
)
from .funk import make_block_rotation, rotate_slice


def _canonical_sign(x):
    nz = np.flatnonzero(np.abs(x) > 1e-15)
    return x if len(nz) == 0 or x[nz[0]] > 0 else -x


# ---------------------------------------------------------------------------
# Lorentz geometry


def lorentz_inner(x, y) -> np.ndarray:
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    if x.shape[-1] != y.shape[-1]:
        raise InvalidArgumentError("vectors must have the same dimension")
    return x[..., -1] * y[..., -1] - np.sum(x[..., :-1] * y[..., :-1], axis=-1)


def geodesic_distance(x, y, clamp_tol: float = 1e-12) -> np.ndarray:
    """arccosh [x, y] for points of H^n."""
    c = lorentz_inner(x, y)
    if np.any(c < 1 - 1e-8):
        raise InvalidArgumentError("[x, y] < 1: points are not on the upper sheet")
    return np.arccosh(np.maximum(c, 1.0))


def hpoint(theta, r) -> np.ndarray:
    """theta sinh r + e_{n+1} cosh r."""
    theta = np.asarray(theta, float)
    r = np.asarray(r, float)[..., None]
    space = theta * np.sinh(r)
    return np.concatenate([space, np.broadcast_to(np.cosh(r), space.shape[:-1] + (1,))],
                          axis=-1)


def hpolar(x):
    """(theta, r) with x = theta sinh r + e_{n+1} cosh r; theta = e_1 at the origin."""
    x = np.asarray(x, float)
    sp = np.linalg.norm(x[..., :-1], axis=-1)
    r = np.arcsinh(sp)
    theta = np.where(sp[..., None] > 0, x[..., :-1] / np.where(sp > 0, sp, 1.0)[..., None],
                     np.eye(x.shape[-1] - 1)[0])
    return theta, r


def one_sheet_point(sigma, rho) -> np.ndarray:
    """sigma cosh rho + e_{n+1} sinh rho, a point with [y, y] = -1."""
    sigma = np.asarray(sigma, float)
    rho = np.asarray(rho, float)[..., None]
    return np.concatenate([sigma * np.cosh(rho), np.sinh(rho)], axis=-1)


def one_sheet_params(y):
    y = np.asarray(y, float)
    rho = np.arcsinh(y[..., -1])
    return y[..., :-1] / np.cosh(rho)[..., None], rho


def lorentz_frame(y) -> np.ndarray:
    """Lorentz-orthonormal frame whose (m)-th column is y and last column is
    timelike and future pointing; maps {x_m = 0} onto xi_y.

    Built by Gram-Schmidt in the Lorentz form with pivots e_1, e_2, ... .
    """
    y = np.asarray(y, float)
    d = y.size
    if abs(lorentz_inner(y, y) + 1) > 1e-10 * (y @ y):
        raise InvalidArgumentError("y must satisfy [y, y] = -1")
    e_t = np.eye(d)[-1]
    t = e_t + lorentz_inner(e_t, y) * y
    t = t / math.sqrt(lorentz_inner(t, t))
    cols, signs = [y, t], [-1.0, 1.0]
    space = []
    for e in np.eye(d)[:-1]:
        u = e.copy()
        for c, s in zip(cols + space, signs + [-1.0] * len(space)):
            u = u - s * lorentz_inner(u, c) * c
        nrm2 = -lorentz_inner(u, u)
        if nrm2 > 1e-10:
            space.append(u / math.sqrt(nrm2))
        if len(space) == d - 2:
            break
    return np.column_stack(space + [y, t])


# ---------------------------------------------------------------------------
# fields


class HField:
    n: int

    def __add__(self, other):
        return SumHField([(1.0, self), (1.0, other)])

    def __mul__(self, c):
        return SumHField([(float(c), self)])

    __rmul__ = __mul__


@dataclass(eq=False)
class ExpDecayField(HField):
    """exp(a (1 - x_{n+1}))."""

    n: int
    a: float = 1.0

    def __post_init__(self):
        if self.a <= 0:
            raise InvalidArgumentError("decay rate must be positive")

    def __call__(self, x):
        return np.exp(self.a * (1.0 - np.asarray(x)[..., -1]))


@dataclass(eq=False)
class PowerDecayField(HField):
    """x_{n+1}^{-a}."""

    n: int
    a: float = 1.0

    def __post_init__(self):
        if self.a <= 0:
            raise InvalidArgumentError("decay exponent must be positive")

    def __call__(self, x):
        return np.asarray(x)[..., -1] ** (-self.a)


@dataclass(eq=False)
class SampledHField(HField):
    """Samples on a polar grid (r_j, theta_i): cubic spline in r, harmonic
    interpolation in theta; zero beyond the last radius."""

    n: int
    r: np.ndarray
    directions: nk.SphereQuadrature
    values: np.ndarray  # (len(r), len(directions))

    def __post_init__(self):
        self.r = np.asarray(self.r, float)
        self.values = np.asarray(self.values, float)
        if self.directions.dim != self.n - 1:
            raise InvalidArgumentError("directions must lie on S^{n-1}")
        if self.values.shape != (len(self.r), len(self.directions)):
            raise InvalidArgumentError("values must have shape (len(r), len(directions))")
        self._deg = self.directions.order // 2
        spec = nk.harmonic_analyze(self.values.T, self.directions, self._deg)
        self._spline = [interpolate.CubicSpline(self.r, c, axis=-1) for c in spec.coeffs]

    def __call__(self, x):
        x = np.asarray(x, float)
        flat = x.reshape(-1, x.shape[-1])
        theta, r = hpolar(flat)
        basis = nk.harmonic_basis(theta, self.n - 1, self._deg)
        out = sum(np.sum(Y * s(r).T, axis=1) for Y, s in zip(basis, self._spline))
        out = np.where(r <= self.r[-1], out, 0.0)
        return out.reshape(x.shape[:-1])


@dataclass(eq=False)
class SumHField(HField):
    terms: list

    def __post_init__(self):
        self.n = self.terms[0][1].n

    def __call__(self, x):
        return sum(c * f(x) for c, f in self.terms)


# ---------------------------------------------------------------------------
# quadrature on H^n


@dataclass(frozen=True)
class HOrders:
    """Quadrature resolution: sphere order for directions, Gauss points per
    unit radial panel."""

    directions: int = 16
    radial: int = 16
    panel: float = 1.0


@dataclass(frozen=True, eq=False)
class HQuadrature:
    points: np.ndarray  # (N, n+1)
    weights: np.ndarray
    radius: np.ndarray  # outer radial coordinate of each node, for tail checks
    r_max: float

    def integrate(self, f, weight=None, tail_tol: float | None = nk.EPS_TAIL,
                  on_tail: str = "raise") -> float:
        vals = f(self.points) * self.weights
        if weight is not None:
            vals = vals * weight(self.points)
        total = float(nk.dsum(vals))
        if tail_tol is not None:
            shell = self.radius > self.r_max - 1.0
            tail = float(np.sum(np.abs(vals[shell])))
            if tail > tail_tol * max(abs(total), 1e-300):
                msg = f"outer radial shell carries {tail:.2e} of the integral"
                if on_tail == "warn":
                    warnings.warn(msg + "; returning the truncated value", DivergenceWarning,
                                  stacklevel=3)
                else:
                    raise TruncationError(msg)
        return total


def _radial_rule(r_max, orders: HOrders, lo=0.0):
    edges = np.arange(lo, r_max, orders.panel).tolist() + [r_max]
    return nk.composite_gauss_legendre(np.unique(edges), orders.radial)


def _sphere_rule(d, orders):
    """Unnormalized rule on S^d (two points on S^0)."""
    return nk.make_sphere_quadrature(d, orders.directions, normalized=False)


def hpolar_quadrature(n: int, k: int = 0, r_max: float = 12.0,
                      orders: HOrders = HOrders()) -> HQuadrature:
    """Nodes x = v sinh r + u cosh r with v on S^{n-k-1}, u on H^k, r in [0, r_max].

    Weights are dv du sinh^{n-k-1} r cosh^k r dr; the H^k factor is itself
    built from this rule with k = 0.  k = 0 is the plain polar form and
    k = n-1 the form with v = +-e_1.
    """
    if not 0 <= k <= n - 1 or n < 1:
        raise UnsupportedDimensionError(f"need 0 <= k <= n-1, got n={n}, k={k}")
    rad = _radial_rule(r_max, orders)
    sv = _sphere_rule(n - k - 1, orders)
    V = np.zeros((len(sv), n + 1))
    V[:, : n - k] = sv.points
    if k == 0:
        U = np.zeros((1, n + 1))
        U[0, -1] = 1.0
        uw, urad = np.ones(1), np.zeros(1)
    else:
        sub = hpolar_quadrature(k, 0, r_max, orders)
        U = np.zeros((len(sub.weights), n + 1))
        U[:, n - k:] = sub.points
        uw, urad = sub.weights, sub.radius
    r = rad.nodes
    wr = rad.weights * np.sinh(r) ** (n - k - 1) * np.cosh(r) ** k
    pts = (np.sinh(r)[:, None, None, None] * V[None, :, None, :]
           + np.cosh(r)[:, None, None, None] * U[None, None, :, :])
    w = wr[:, None, None] * sv.weights[None, :, None] * uw[None, None, :]
    radius = np.maximum(r[:, None, None], urad[None, None, :]) + 0 * w
    return HQuadrature(pts.reshape(-1, n + 1), w.ravel(), radius.ravel(), float(r_max))


def integrate_h(f, n: int, k: int = 0, r_max: float = 12.0, orders: HOrders = HOrders(),
                weight=None) -> float:
    return hpolar_quadrature(n, k, r_max, orders).integrate(f, weight)


# ---------------------------------------------------------------------------
# Radon transforms


def hyperbolic_radon(f, y, r_max: float = 12.0, orders: HOrders = HOrders()) -> float:
    """(H f)(y) = integral of f over xi_y = {x in H^m : [x, y] = 0}.

    The reference hyperplane {x_m = 0} is a copy of H^{m-1}; it is carried
    to xi_y by :func:`lorentz_frame`, which preserves the measure.
    """
    y = np.asarray(y, float)
    m = y.size - 1
    frame = lorentz_frame(y)
    q = hpolar_quadrature(m - 1, 0, r_max, orders)
    ref = np.zeros((len(q.weights), m + 1))
    ref[:, : m - 1] = q.points[:, :-1]
    ref[:, -1] = q.points[:, -1]
    pts = ref @ frame.T
    return HQuadrature(pts, q.weights, q.radius, q.r_max).integrate(f, on_tail="warn")


@dataclass(frozen=True, eq=False)
class HyperbolicComplexElement:
    """(v, w): v on S^{n-k-1}, w with [w, w] = -1 inside R v + R^{k+1}."""

    n: int
    k: int
    v: np.ndarray
    w: np.ndarray

    def __post_init__(self):
        if not 1 <= self.k <= self.n - 1:
            raise UnsupportedDimensionError("need 1 <= k <= n-1")
        v = np.asarray(self.v, float)
        w = np.asarray(self.w, float)
        if v.shape != (self.n - self.k,) or w.shape != (self.n + 1,):
            raise InvalidArgumentError("v needs n-k entries and w needs n+1 entries")
        if abs(np.linalg.norm(v) - 1) > 1e-12:
            raise InvalidArgumentError("v must be a unit vector")
        wp = w[: self.n - self.k]
        if np.max(np.abs(wp - (wp @ v) * v)) > 1e-12:
            raise InvalidArgumentError("w must lie in R v + R^{k+1}")
        if abs(lorentz_inner(w, w) + 1) > 1e-10 * (w @ w):
            raise InvalidArgumentError("w must satisfy [w, w] = -1")
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "w", w)

    def slice_coords(self) -> np.ndarray:
        return np.concatenate([[self.w[: self.n - self.k] @ self.v], self.w[self.n - self.k:]])


def hradon_forward_restricted(f, element: HyperbolicComplexElement, r_max: float = 12.0,
                              orders: HOrders = HOrders()) -> float:
    """Integral of f over {x in H^{k+1}_v : [x, w] = 0}, computed as the
    Radon transform on H^{k+1} of f_v = f o block_rotation(v) at zeta."""
    n, k = element.n, element.k
    v = _canonical_sign(element.v)
    zeta = element.slice_coords()
    if not np.array_equal(v, element.v):
        zeta[0] = -zeta[0]
    zeta = _canonical_sign(zeta)

    def fv(eta):
        return f(rotate_slice(v, eta, n, k))

    return hyperbolic_radon(fv, zeta, r_max, orders)


# ---------------------------------------------------------------------------
# identities


@dataclass(frozen=True)
class IdentityCheck:
    lhs: float
    rhs: float

    @property
    def rel_error(self) -> float:
        scale = max(abs(self.lhs), abs(self.rhs))
        return abs(self.lhs - self.rhs) / scale if scale > 0 else 0.0


def duality_identity_h(f, n: int, sigma=None, rho_max: float = 10.0, r_max: float = 12.0,
                       orders: HOrders = HOrders()) -> IdentityCheck:
    """int (H f)(sigma cosh rho + e_{n+1} sinh rho) d rho / cosh rho  against
    int f(x) dx / x_{n+1}."""
    sigma = np.eye(n)[0] if sigma is None else np.asarray(sigma, float)
    rho = nk.composite_gauss_legendre(np.arange(-rho_max, rho_max + 0.5, 1.0), orders.radial)
    vals = np.array([hyperbolic_radon(f, one_sheet_point(sigma, p), r_max, orders)
                     for p in rho.nodes])
    lhs = float(rho.integrate(vals / np.cosh(rho.nodes)))
    rhs = integrate_h(f, n, 0, r_max, orders, weight=lambda x: 1.0 / x[..., -1])
    return IdentityCheck(lhs, rhs)


def _bispherical_weighted(f, n, k, r_max, orders):
    """int f(x) |x'|^{-(n-k-1)} dx with polar coordinates in r and
    bi-spherical coordinates theta = v cos psi + omega sin psi on S^{n-1}."""
    rad = _radial_rule(r_max, orders)
    sv = _sphere_rule(n - k - 1, orders)
    so = _sphere_rule(k - 1, orders)
    psi = nk.gauss_legendre(0.0, math.pi / 2, 2 * orders.directions)
    V = np.zeros((len(sv), n + 1))
    V[:, : n - k] = sv.points
    W = np.zeros((len(so), n + 1))
    W[:, n - k: n] = so.points
    total = 0.0
    parts = []
    for r, wr in zip(rad.nodes, rad.weights):
        th = (np.cos(psi.nodes)[:, None, None, None] * V[None, :, None, :]
              + np.sin(psi.nodes)[:, None, None, None] * W[None, None, :, :])
        x = np.sinh(r) * th
        x[..., -1] = np.cosh(r)
        ang = nk.dsum(f(x) * so.weights, axis=-1) @ sv.weights
        parts.append(psi.integrate(ang * np.sin(psi.nodes) ** (k - 1)))
    parts = np.array(parts) * rad.weights * np.sinh(rad.nodes) ** k
    total = float(nk.dsum(parts))
    tail = float(np.sum(np.abs(parts[rad.nodes > r_max - 1.0])))
    if tail > nk.EPS_TAIL * max(abs(total), 1e-300):
        raise TruncationError(f"outer radial shell carries {tail:.2e} of the integral")
    return total


def slice_identity_check(f, n: int, k: int, r_max: float = 12.0,
                         orders: HOrders = HOrders()) -> IdentityCheck:
    """int_{S^{n-k-1}} dv int_{H^{k+1}} f(block_rotation(v) eta) d eta
    against 2 int_{H^n} f(x) |x'|^{-(n-k-1)} dx."""
    if not 1 <= k <= n - 1:
        raise UnsupportedDimensionError("need 1 <= k <= n-1")
    sv = _sphere_rule(n - k - 1, orders)
    q = hpolar_quadrature(k + 1, 0, r_max, orders)
    try:
        parts = [q.integrate(lambda eta, v=v: f(rotate_slice(v, eta, n, k))) for v in sv.points]
        rhs = 2.0 * _bispherical_weighted(f, n, k, r_max, orders)
    except TruncationError as exc:
        raise PreconditionError(f"field is not integrable on the slices: {exc}") from exc
    lhs = float(nk.dsum(np.array(parts) * sv.weights))
    return IdentityCheck(lhs, rhs)


@dataclass(frozen=True)
class MeasureCheck:
    values: dict  # label -> integral

    @property
    def max_rel_spread(self) -> float:
        v = np.array(list(self.values.values()))
        return float(np.ptp(v) / np.max(np.abs(v))) if np.any(v) else 0.0


def measure_decompositions(f, n: int, r_max: float = 12.0, orders: HOrders = HOrders()
                           ) -> MeasureCheck:
    """int_{H^n} f dx through the polar form (k = 0), every intermediate
    split x = v sinh r + u cosh r, and the k = n-1 form."""
    vals = {f"k={k}": integrate_h(f, n, k, r_max, orders) for k in range(n)}
    return MeasureCheck(vals)


def reconstruct_coordinates(x, n: int, k: int):
    """(v, eta, M) with v = x'/|x'|, eta = (0, ..., 0, |x'|, x'') and M eta = x."""
    x = np.asarray(x, float)
    if x.shape != (n + 1,) or abs(lorentz_inner(x, x) - 1) > 1e-10 or x[-1] <= 0:
        raise InvalidArgumentError("x must be a point of H^n")
    xp = x[: n - k]
    r = np.linalg.norm(xp)
    if r == 0:
        raise DegeneratePointError("x' = 0: no slice is singled out")
    v = xp / r
    eta = np.zeros(n + 1)
    eta[n - k - 1] = r
    eta[n - k:] = x[n - k:]
    M = make_block_rotation(v, n)
    if np.max(np.abs(M @ eta - x)) > 1e-10:
        raise DegeneratePointError("block rotation does not reproduce x")
    return v, eta, M
