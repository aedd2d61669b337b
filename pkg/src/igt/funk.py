"""Restricted Funk transform on S^n.

Coordinates on R^{n+1} split as theta = (theta', theta'') with theta' the
first n-k entries.  For v on S^{n-k-1} the slice sphere S^{k+1}_v lives in
R v + span(e_{n-k+1}, ..., e_{n+1}); an element (v, w) of the complex names
the great k-subsphere of S^{k+1}_v orthogonal to w.  The transform is the
normalized average of f over that subsphere.

Slice coordinates: zeta in S^{k+1} subset R^{k+2} is embedded as
(0, ..., 0, zeta_0, zeta_1, ..., zeta_{k+1}), and the block rotation
diag(gamma_v, I) carries it to (v zeta_0, zeta_1, ..., zeta_{k+1}).
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import special

from . import numkit as nk
from .errors import (
    DegeneratePointError,
    DivergenceWarning,
    InvalidArgumentError,
    NotAFunkImageError,
    PreconditionError,
    UnsupportedDimensionError,
)


def _check_nk(n, k):
    if not (2 <= n and 1 <= k <= n - 1):
        raise UnsupportedDimensionError(f"need n >= 2 and 1 <= k <= n-1, got n={n}, k={k}")


def _unit(x, name, tol=1e-10):
    x = np.asarray(x, float)
    if abs(np.linalg.norm(x) - 1) > tol:
        raise InvalidArgumentError(f"{name} must be a unit vector")
    return x


def _canonical_sign(x):
    nz = np.flatnonzero(np.abs(x) > 1e-15)
    return x if len(nz) == 0 or x[nz[0]] > 0 else -x


# ---------------------------------------------------------------------------
# complex elements and block rotations


@dataclass(frozen=True, eq=False)
class SphericalComplexElement:
    """(v, w) with v on S^{n-k-1} and w on the slice sphere S^{k+1}_v."""

    n: int
    k: int
    v: np.ndarray
    w: np.ndarray

    def __post_init__(self):
        _check_nk(self.n, self.k)
        v = _unit(self.v, "v", 1e-12)
        w = _unit(self.w, "w", 1e-12)
        if v.shape != (self.n - self.k,) or w.shape != (self.n + 1,):
            raise InvalidArgumentError("v needs n-k entries and w needs n+1 entries")
        wp = w[: self.n - self.k]
        if np.max(np.abs(wp - (wp @ v) * v)) > 1e-12:
            raise InvalidArgumentError("w must lie in R v + R^{k+1}")
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "w", w)

    @classmethod
    def from_slice(cls, n, k, v, zeta):
        """Element (v, block_rotation(v) zeta) for zeta on S^{k+1} in slice coordinates."""
        v = np.asarray(v, float)
        zeta = np.asarray(zeta, float)
        return cls(n, k, v, np.concatenate([v * zeta[0], zeta[1:]]))

    def slice_coords(self) -> np.ndarray:
        """w written in the basis (v, e_{n-k+1}, ..., e_{n+1})."""
        return np.concatenate([[self.w[: self.n - self.k] @ self.v], self.w[self.n - self.k:]])


def make_block_rotation(v, n: int) -> np.ndarray:
    """diag(gamma_v, I_{k+1}) with gamma_v the Householder reflection sending
    e_{n-k} to v (identity when v = e_{n-k})."""
    v = _unit(v, "v")
    m = v.size
    if not 1 <= m <= n:
        raise InvalidArgumentError("v must have between 1 and n entries")
    e = np.zeros(m)
    e[-1] = 1.0
    u = e - v
    g = np.eye(m)
    if np.linalg.norm(u) > 1e-15:
        g = g - 2 * np.outer(u, u) / (u @ u)
    M = np.eye(n + 1)
    M[:m, :m] = g
    return M


def embed_slice(zeta, n: int, k: int) -> np.ndarray:
    """Place slice coordinates zeta (..., k+2) into R^{n+1}."""
    zeta = np.asarray(zeta, float)
    out = np.zeros(zeta.shape[:-1] + (n + 1,))
    out[..., n - k - 1:] = zeta
    return out


def rotate_slice(v, zeta, n: int, k: int) -> np.ndarray:
    """block_rotation(v) applied to embedded zeta, without forming the matrix."""
    v = np.asarray(v, float)
    zeta = np.asarray(zeta, float)
    return np.concatenate([zeta[..., :1] * v, zeta[..., 1:]], axis=-1)


# ---------------------------------------------------------------------------
# fields on S^n


class SphereField:
    n: int
    singular_on_pole = False  # unbounded near theta' = 0

    def __add__(self, other):
        return SumSphereField([(1.0, self), (1.0, other)])

    def __mul__(self, c):
        return SumSphereField([(float(c), self)])

    __rmul__ = __mul__


@dataclass(eq=False)
class ConstantSphereField(SphereField):
    n: int
    c: float = 1.0

    def __call__(self, theta):
        return np.full(np.shape(theta)[:-1], float(self.c))


@dataclass(eq=False)
class ZonalLegendreField(SphereField):
    """P_degree(theta . axis)."""

    n: int
    degree: int
    axis: np.ndarray = None

    def __post_init__(self):
        if self.axis is None:
            self.axis = np.eye(self.n + 1)[-1]
        self.axis = _unit(self.axis, "axis")

    def __call__(self, theta):
        return special.eval_legendre(self.degree, np.asarray(theta) @ self.axis)


@dataclass(eq=False)
class ZonalProfileField(SphereField):
    """profile(theta . axis); the default profile exp(a t^2) is even."""

    n: int
    axis: np.ndarray = None
    a: float = 1.0
    profile: Callable | None = None

    def __post_init__(self):
        if self.axis is None:
            self.axis = np.eye(self.n + 1)[-1]
        self.axis = _unit(self.axis, "axis")

    def __call__(self, theta):
        t = np.asarray(theta) @ self.axis
        return self.profile(t) if self.profile is not None else np.exp(self.a * t * t)


@dataclass(eq=False)
class FTildeField(SphereField):
    """|theta'|^{-1} (1 - log|theta'|)^{-1}, theta' the first n-k entries.

    In L^p(S^n) for p <= n-k, yet its restricted Funk transform is infinite.
    """

    n: int
    k: int
    singular_on_pole = True

    def __call__(self, theta):
        r = np.linalg.norm(np.asarray(theta)[..., : self.n - self.k], axis=-1)
        with np.errstate(divide="ignore"):
            return 1.0 / (r * (1.0 - np.log(r)))


@dataclass(eq=False)
class SpectralSphereField(SphereField):
    """Field on S^d (n = d) given by a harmonic expansion."""

    spectrum: nk.HarmonicSpectrum

    @property
    def n(self):
        return self.spectrum.sphere_dim

    def __call__(self, theta):
        theta = np.asarray(theta, float)
        flat = theta.reshape(-1, theta.shape[-1])
        return nk.harmonic_synthesize(self.spectrum, flat).reshape(theta.shape[:-1])

    def sample(self, quad: nk.SphereQuadrature) -> np.ndarray:
        return self(quad.points)


@dataclass(eq=False)
class SumSphereField(SphereField):
    terms: list

    def __post_init__(self):
        self.n = self.terms[0][1].n
        self.singular_on_pole = any(f.singular_on_pole for _, f in self.terms)

    def __call__(self, theta):
        return sum(c * f(theta) for c, f in self.terms)


def spherical_harmonic_field(d: int, m: int, index: int = 0) -> SpectralSphereField:
    """Single orthonormal harmonic of degree m on S^d (index 0 is zonal on S^2)."""
    coeffs = [np.zeros(nk.harmonic_dimension(d, j)) for j in range(m + 1)]
    coeffs[m][index] = 1.0
    return SpectralSphereField(nk.HarmonicSpectrum(d, m, coeffs))


# ---------------------------------------------------------------------------
# forward transforms


def _complement_rows(x):
    """Orthonormal rows spanning x-perp (x a unit vector)."""
    m = x.size
    q, _ = np.linalg.qr(np.column_stack([x, np.eye(m)]))
    return q[:, 1:m].T


def _subsphere_points(basis, order):
    quad = nk.make_sphere_quadrature(basis.shape[0] - 1, order)
    return quad.points @ basis, quad.weights


def _warn_if_singular(f):
    if f.singular_on_pole:
        warnings.warn("integrand is unbounded on the subsphere; value is a truncated estimate",
                      DivergenceWarning, stacklevel=3)


def funk_forward_restricted(f: SphereField, element: SphericalComplexElement,
                            order: int = 32) -> float:
    """Normalized average of f over {theta in S^{k+1}_v : theta . w = 0}.

    (v, w) are first put in canonical sign so the four sign choices give
    identical results.
    """
    n, k = element.n, element.k
    v = _canonical_sign(element.v)
    omega = element.slice_coords()
    if element.v[np.flatnonzero(np.abs(element.v) > 1e-15)[0]] < 0:
        omega[0] = -omega[0]
    omega = _canonical_sign(omega)
    frame = np.zeros((k + 2, n + 1))
    frame[0, : n - k] = v
    frame[1:, n - k:] = np.eye(k + 1)
    basis = _complement_rows(omega) @ frame
    pts, w = _subsphere_points(basis, order)
    _warn_if_singular(f)
    return float(nk.dsum(w * f(pts)))


def funk_forward_conjugated(f: SphereField, element: SphericalComplexElement,
                            order: int = 32) -> float:
    """Same value computed on the standard slice sphere: (F f_v)(zeta) with
    f_v = f o block_rotation(v) and zeta = block_rotation(v)^{-1} w."""
    n, k = element.n, element.k
    M = make_block_rotation(element.v, n)
    zeta = (M.T @ element.w)[n - k - 1:]
    basis = embed_slice(_complement_rows(_canonical_sign(zeta)), n, k) @ M.T
    pts, w = _subsphere_points(basis, order)
    _warn_if_singular(f)
    return float(nk.dsum(w * f(pts)))


def sphere_funk_transform(func: Callable, zetas, order: int = 64) -> np.ndarray:
    """Classical Funk transform on S^d at points ``zetas`` (N, d+1): the
    normalized average of ``func`` over each great subsphere zeta-perp."""
    zetas = np.atleast_2d(np.asarray(zetas, float))
    d = zetas.shape[1] - 1
    quad = nk.make_sphere_quadrature(d - 1, order)
    out = np.empty(len(zetas))
    for i, z in enumerate(zetas):
        pts = quad.points @ _complement_rows(_canonical_sign(z))
        out[i] = nk.dsum(quad.weights * func(pts))
    return out


@dataclass(eq=False)
class FunkImage:
    """phi(v, W) = restricted Funk transform of ``f`` at (v, w) for each row w of W."""

    f: SphereField
    n: int
    k: int
    order: int = 32

    def __call__(self, v, ws) -> np.ndarray:
        return np.array([funk_forward_restricted(self.f, SphericalComplexElement(
            self.n, self.k, v, w), self.order) for w in np.atleast_2d(ws)])


@dataclass(eq=False)
class FunkSinogram:
    """phi(v_i, block_rotation(v_i) zeta_j) on a (v, zeta) product grid."""

    n: int
    k: int
    v_points: np.ndarray
    zeta: nk.SphereQuadrature
    values: np.ndarray


def funk_sinogram(f: SphereField, n: int, k: int, v_points, zeta_order: int = 24,
                  order: int = 32, threads: int = 1) -> FunkSinogram:
    v_points = np.atleast_2d(np.asarray(v_points, float))
    zq = nk.make_sphere_quadrature(k + 1, zeta_order)
    img = FunkImage(f, n, k, order)

    def row(v):
        return img(v, rotate_slice(v, zq.points, n, k))

    vals = np.stack(nk.parallel_map(row, list(v_points), threads))
    return FunkSinogram(n, k, v_points, zq, vals)


# ---------------------------------------------------------------------------
# duality


def weighted_mean(f: SphereField, n: int, k: int, psi_order: int = 64, v_order: int = 32,
                  omega_order: int = 32) -> float:
    """int f(theta) |theta'|^{-(n-k-1)} d_*theta in bi-spherical coordinates,
    theta = v cos(psi) + omega sin(psi), where the singular weight cancels."""
    qv = nk.make_sphere_quadrature(n - k - 1, v_order)
    qw = nk.make_sphere_quadrature(k, omega_order)
    psi = nk.gauss_legendre(0.0, math.pi / 2, psi_order)
    V = np.zeros((len(qv), n + 1))
    V[:, : n - k] = qv.points
    W = np.zeros((len(qw), n + 1))
    W[:, n - k:] = qw.points
    total = []
    for p in psi.nodes:
        pts = math.cos(p) * V[:, None, :] + math.sin(p) * W[None, :, :]
        vals = f(pts)
        total.append(nk.dsum(qv.weights * nk.dsum(vals * qw.weights, axis=-1)))
    inner = psi.integrate(np.array(total) * np.sin(psi.nodes) ** k)
    s = nk.sphere_surface_area
    return float(s(n - k - 1) * s(k) / s(n) * inner)


def duality_constant(n: int, k: int) -> float:
    s = nk.sphere_surface_area
    return 2 * s(n) / (s(k + 1) * s(n - k - 1))


@dataclass(frozen=True)
class IdentityCheck:
    lhs: float
    rhs: float

    @property
    def rel_error(self) -> float:
        scale = max(abs(self.lhs), abs(self.rhs))
        return abs(self.lhs - self.rhs) / scale if scale > 0 else 0.0


def duality_identity_check(f: SphereField, n: int, k: int, v_order: int = 16,
                           zeta_order: int = 16, sub_order: int = 32,
                           psi_order: int = 64) -> IdentityCheck:
    """Mean of the restricted Funk transform over the complex versus the
    |theta'|-weighted mean of f times 2 sigma_n / (sigma_{k+1} sigma_{n-k-1})."""
    _check_nk(n, k)
    if f.singular_on_pole:
        raise PreconditionError("the |theta'|-weighted integral of this field diverges")
    rhs_lo = weighted_mean(f, n, k, psi_order // 2)
    rhs_w = weighted_mean(f, n, k, psi_order)
    if abs(rhs_w - rhs_lo) > 1e-2 * max(abs(rhs_w), 1e-300):
        raise PreconditionError("weighted integral does not settle under refinement")
    rhs = duality_constant(n, k) * rhs_w

    qv = nk.make_sphere_quadrature(n - k - 1, v_order)
    qz = nk.make_sphere_quadrature(k + 1, zeta_order)
    qs = nk.make_sphere_quadrature(k, sub_order)
    per_v = []
    for v in qv.points:
        # f_v = f o block_rotation(v) on the slice sphere, then the classical Funk transform
        def fv(eta, v=v):
            return f(rotate_slice(v, eta, n, k))
        vals = np.array([nk.dsum(qs.weights * fv(qs.points @ _complement_rows(_canonical_sign(z))))
                         for z in qz.points])
        per_v.append(nk.dsum(qz.weights * vals))
    lhs = float(nk.dsum(qv.weights * np.array(per_v)))
    return IdentityCheck(lhs, float(rhs))


# ---------------------------------------------------------------------------
# inversion on S^2 slices


def funk_multiplier(m: int) -> float:
    """Eigenvalue of the Funk transform on S^2 at degree m: P_m(0)."""
    return nk.legendre_p_at_zero(m)


def funk_invert_slice(values, quad: nk.SphereQuadrature, max_degree: int,
                      odd_tol: float = 1e-8) -> SpectralSphereField:
    """Invert the Funk transform on S^2 from samples on ``quad``.

    Even-degree coefficients are divided by P_m(0); odd degrees are dropped
    after checking their relative energy is below ``odd_tol``.
    """
    if quad.dim != 2:
        raise UnsupportedDimensionError("slice inversion is implemented on S^2 (k = 1)")
    spec = nk.harmonic_analyze(np.asarray(values, float), quad, max_degree)
    total = spec.energy()
    odd = sum(spec.degree_energy(m) for m in range(1, max_degree + 1, 2))
    if total > 0 and math.sqrt(odd / total) > odd_tol:
        raise NotAFunkImageError(f"odd harmonic content {math.sqrt(odd / total):.2e}")
    coeffs = []
    for m, c in enumerate(spec.coeffs):
        mu = funk_multiplier(m)
        coeffs.append(np.zeros_like(c) if m % 2 else c / mu)
    return SpectralSphereField(nk.HarmonicSpectrum(2, max_degree, coeffs))


def slice_point(theta, n: int, k: int):
    """(v, eta) with v = theta'/|theta'| and eta = (|theta'|, theta'') in slice coordinates."""
    theta = np.asarray(theta, float)
    tp = theta[: n - k]
    r = np.linalg.norm(tp)
    if r == 0:
        raise DegeneratePointError("theta' = 0: every slice contains this point")
    return tp / r, np.concatenate([[r], theta[n - k:]])


def _cap_directions(d: int) -> np.ndarray:
    """Eight (or two, on S^0) spread directions on S^d."""
    if d == 0:
        return np.array([[1.0], [-1.0]])
    if d == 1:
        a = 2 * np.pi * np.arange(8) / 8
        return np.stack([np.cos(a), np.sin(a)], axis=1)
    if d == 2:
        c = np.array([[i, j, l] for i in (-1, 1) for j in (-1, 1) for l in (-1, 1)], float)
        return c / math.sqrt(3)
    e = np.eye(d + 1)[:4]
    return np.concatenate([e, -e])


def reconstruct_point(phi: Callable, theta, n: int, k: int = 1, max_degree: int = 10,
                      zeta_order: int | None = None, theta_min: float = 1e-3,
                      continuity: bool = True, cap_radius: float = 1e-2) -> float:
    """f(theta) from its restricted Funk image ``phi(v, W)``.

    The slice sinogram zeta -> phi(v, block_rotation(v) zeta) is inverted on
    S^2 and evaluated at eta, where block_rotation(v) eta = theta.  Points
    with |theta'| < theta_min are handled by averaging over eight nearby
    points at angular distance ``cap_radius`` (or rejected if
    ``continuity`` is off).
    """
    if k != 1:
        raise UnsupportedDimensionError("pointwise reconstruction needs S^2 slices (k = 1)")
    theta = _unit(theta, "theta")
    zeta_order = zeta_order or 2 * max_degree + 2
    r = np.linalg.norm(theta[: n - k])
    if r < theta_min:
        if not continuity:
            raise DegeneratePointError(f"|theta'| = {r:.2e} below {theta_min:g}")
        pole = np.concatenate([np.zeros(n - k), theta[n - k:]])
        pole /= np.linalg.norm(pole)
        vals = []
        for d in _cap_directions(n - k - 1):
            off = np.concatenate([d, np.zeros(k + 1)])
            pt = math.cos(cap_radius) * pole + math.sin(cap_radius) * off
            vals.append(reconstruct_point(phi, pt, n, k, max_degree, zeta_order, 0.0, False))
        return float(np.mean(vals))
    v, eta = slice_point(theta, n, k)
    zq = nk.make_sphere_quadrature(k + 1, zeta_order)
    sino = np.asarray(phi(v, rotate_slice(v, zq.points, n, k)), float)
    fv = funk_invert_slice(sino, zq, max_degree)
    return float(fv(eta[None])[0])


# ---------------------------------------------------------------------------
# sharpness scan for the counterexample


@dataclass
class FTildeScan:
    norm_cutoffs: np.ndarray  # U_j in u = -log s
    norm_values: np.ndarray  # truncated integrals of |f~|^p (1-D form)
    norm_closed_form: float | None
    norm_cauchy: float
    eps: np.ndarray
    funk_values: np.ndarray  # truncated Funk integrals
    funk_closed_form: np.ndarray | None

    @property
    def funk_increments(self):
        return np.diff(self.funk_values)


def _panel_integral(g, edges, order=32):
    q = nk.gauss_legendre(-1.0, 1.0, order)
    a, b = np.asarray(edges[:-1]), np.asarray(edges[1:])
    x = 0.5 * (b - a)[:, None] * q.nodes + 0.5 * (a + b)[:, None]
    return nk.dsum(0.5 * (b - a)[:, None] * q.weights * g(x), axis=-1)


def ftilde_norm_truncations(n: int, k: int, p: float, cutoffs=None) -> np.ndarray:
    """int_{e^{-U}}^1 (1-log s)^{-p} (1-s^2)^{(k-1)/2} s^{n-k-1-p} ds for each U,
    evaluated in u = -log s on dyadic panels."""
    U = 2.0 ** np.arange(0, 21) if cutoffs is None else np.asarray(cutoffs, float)

    def g(u):
        s2 = np.exp(-2 * u)
        return (1 + u) ** (-p) * (1 - s2) ** ((k - 1) / 2) * np.exp(-u * (n - k - p))

    inner = 2.0 ** np.arange(-12, 0)
    edges = np.unique(np.concatenate([[0.0], inner[inner < U[-1]], U]))
    cum = np.cumsum(_panel_integral(g, edges))
    return cum[np.searchsorted(edges, U) - 1]


def funk_truncations(eps, h: float = 0.5, profile: Callable | None = None) -> np.ndarray:
    """int_eps^{1/2} h g(t h) dt with g the radial profile of the field in |theta'|.

    The default profile g(r) = 1/(r (1 - log r)) is that of f~, giving the
    integrand 1/(t (1 - log(t h))).
    """
    eps = np.asarray(eps, float)
    if profile is None:
        def profile(r):
            return 1.0 / (r * (1.0 - np.log(r)))
    # t = e^{-u}
    U = -np.log(eps)
    lo = math.log(2.0)
    steps = np.arange(lo, U.max(), 0.5)
    edges = np.unique(np.concatenate([steps, U]))

    def g(u):
        t = np.exp(-u)
        return h * profile(t * h) * t

    cum = np.concatenate([[0.0], np.cumsum(_panel_integral(g, edges))])
    return cum[np.searchsorted(edges, U)]


def counterexample_scan_ftilde(n: int, k: int, p: float | None = None, eps=None,
                               h: float = 0.5, norm_cutoffs=None) -> FTildeScan:
    """Finite L^p norm of f~ next to a Funk integral that keeps growing.

    Defaults: p = n-k, eps_j = 2^{-j} for j = 4..20.
    """
    if not 1 <= k < n - 1:
        raise InvalidArgumentError("the counterexample needs 1 <= k < n-1")
    p = float(n - k) if p is None else float(p)
    eps = 2.0 ** -np.arange(4, 21) if eps is None else np.asarray(eps, float)
    U = 2.0 ** np.arange(0, 21) if norm_cutoffs is None else np.asarray(norm_cutoffs, float)
    norms = ftilde_norm_truncations(n, k, p, U)
    closed = 1.0 / (p - 1) if (k == 1 and p == n - k and p > 1) else None
    funk = funk_truncations(eps, h)
    funk_exact = np.log(1 - np.log(eps * h)) - math.log(1 - math.log(h / 2))
    return FTildeScan(U, norms, closed, float(abs(norms[-1] - norms[-2])), eps, funk, funk_exact)
