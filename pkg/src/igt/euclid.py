"""Restricted k-plane transform on R^n.

Planes are parallel to R^{k+1} = span(e_1..e_{k+1}); a plane is indexed by
(theta, s, x'') with theta on S^k, s the signed offset and x'' the
remaining n-k-1 coordinates.  A point is split as x = (x', x'').

The sinogram of a field is its hyperplane Radon transform in x', taken
slice by slice in x''.  Inversion goes through the Fourier transform in s
(projection-slice) or, for k = 1, through the 1/t^2 dual-transform formula.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from . import numkit as nk
from .errors import (
    DivergenceError,
    GridError,
    InvalidArgumentError,
    NoConvergenceError,
    OffsetRangeError,
    ResolutionError,
    TruncationWarning,
    UnsupportedDimensionError,
)

TAIL_RADIUS = math.sqrt(math.log(1.0 / nk.EPS_TAIL))


def _check_nk(n, k):
    if not (2 <= n and 1 <= k <= n - 1):
        raise UnsupportedDimensionError(f"need n >= 2 and 1 <= k <= n-1, got n={n}, k={k}")


# ---------------------------------------------------------------------------
# fields on R^n


class FieldRn:
    """Base for scalar fields on R^n; subclasses implement ``__call__``."""

    n: int
    k: int

    def plane_halfwidth(self) -> float | None:
        """Half-width of a box in the plane that holds the field's support,
        or None for fields with unbounded support."""
        return None

    def __add__(self, other):
        return CombinedField([(1.0, self), (1.0, other)])

    def __mul__(self, c):
        return CombinedField([(float(c), self)])

    __rmul__ = __mul__

    def __sub__(self, other):
        return self + (-1.0) * other


@dataclass(eq=False)
class GaussianField(FieldRn):
    """exp(-|x - center|^2 / width^2)."""

    n: int
    k: int
    center: np.ndarray = None
    width: float = 1.0

    def __post_init__(self):
        _check_nk(self.n, self.k)
        self.center = np.zeros(self.n) if self.center is None else np.asarray(self.center, float)
        if self.center.shape != (self.n,) or self.width <= 0:
            raise InvalidArgumentError("center must have length n and width must be positive")

    def __call__(self, x):
        d = np.asarray(x) - self.center
        return np.exp(-np.sum(d * d, axis=-1) / self.width ** 2)

    def plane_halfwidth(self):
        return float(np.linalg.norm(self.center[: self.k + 1]) + self.width * TAIL_RADIUS)

    def sinogram(self, theta, s, xpp):
        """Closed-form restricted transform at broadcastable (theta, s, x'')."""
        theta = np.asarray(theta)
        c1, c2 = self.center[: self.k + 1], self.center[self.k + 1:]
        a = theta @ c1
        d2 = np.sum((np.asarray(xpp) - c2) ** 2, axis=-1) if c2.size else 0.0
        return ((math.sqrt(math.pi) * self.width) ** self.k
                * np.exp(-((s - a) ** 2) / self.width ** 2) * np.exp(-d2 / self.width ** 2))

    def partial_fourier(self, xi, xpp):
        """Fourier transform in x' (kernel e^{+i x'.xi}) at fixed x''."""
        xi = np.asarray(xi)
        c1, c2 = self.center[: self.k + 1], self.center[self.k + 1:]
        d2 = np.sum((np.asarray(xpp) - c2) ** 2, axis=-1) if c2.size else 0.0
        amp = (math.sqrt(math.pi) * self.width) ** (self.k + 1)
        return (amp * np.exp(-self.width ** 2 * np.sum(xi * xi, axis=-1) / 4)
                * np.exp(1j * (xi @ c1)) * np.exp(-d2 / self.width ** 2))


@dataclass(eq=False)
class CounterexampleF0(FieldRn):
    """(2+|x'|)^{-(k+1)/p} exp(-|x''|^2) / log^{1/p+delta}(2+|x'|).

    Lies in L^p(R^n); its plane integrals diverge when p >= (k+1)/k.
    """

    n: int
    k: int
    p: float
    delta: float

    def __post_init__(self):
        _check_nk(self.n, self.k)
        if self.p < 1:
            raise InvalidArgumentError("p must be >= 1")
        conj = 1.0 - 1.0 / self.p  # 1/p'
        if not 0 < self.delta < conj:
            raise InvalidArgumentError(f"need 0 < delta < 1/p' = {conj:g}")

    def __call__(self, x):
        x = np.asarray(x)
        r = np.linalg.norm(x[..., : self.k + 1], axis=-1)
        xpp2 = np.sum(x[..., self.k + 1:] ** 2, axis=-1)
        return ((2 + r) ** (-(self.k + 1) / self.p) * np.exp(-xpp2)
                / np.log(2 + r) ** (1 / self.p + self.delta))


@dataclass(eq=False)
class SampledField(FieldRn):
    """Field sampled on a box grid, evaluated by cubic spline; zero outside."""

    n: int
    k: int
    axes: tuple
    values: np.ndarray
    spline_order: int = 3

    def __post_init__(self):
        _check_nk(self.n, self.k)
        self.axes = tuple(np.asarray(a, float) for a in self.axes)
        self.values = np.asarray(self.values, float)
        if len(self.axes) != self.n or self.values.shape != tuple(len(a) for a in self.axes):
            raise InvalidArgumentError("values shape must match the box axes")
        for a in self.axes:
            if a.size > 1 and not np.allclose(np.diff(a), a[1] - a[0], rtol=1e-9, atol=0):
                raise GridError("sampled-field axes must be uniform")
        self._coeffs = (ndimage.spline_filter(self.values, order=self.spline_order, mode="mirror")
                        if self.spline_order > 1 else self.values)

    def __call__(self, x):
        x = np.asarray(x, float)
        shape = x.shape[:-1]
        pts = x.reshape(-1, self.n)
        idx = np.empty_like(pts)
        inside = np.ones(len(pts), bool)
        for i, a in enumerate(self.axes):
            h = a[1] - a[0] if a.size > 1 else 1.0
            idx[:, i] = (pts[:, i] - a[0]) / h
            inside &= (pts[:, i] >= a[0] - 1e-12 * abs(h)) & (pts[:, i] <= a[-1] + 1e-12 * abs(h))
        out = np.zeros(len(pts))
        if inside.any():
            out[inside] = ndimage.map_coordinates(
                self._coeffs, idx[inside].T, order=self.spline_order, mode="mirror",
                prefilter=False)
        return out.reshape(shape)

    def plane_halfwidth(self):
        corner = [max(abs(a[0]), abs(a[-1])) for a in self.axes[: self.k + 1]]
        return float(np.linalg.norm(corner))


@dataclass(eq=False)
class CombinedField(FieldRn):
    terms: list

    def __post_init__(self):
        first = self.terms[0][1]
        self.n, self.k = first.n, first.k
        flat = []
        for c, f in self.terms:
            if isinstance(f, CombinedField):
                flat.extend((c * c2, f2) for c2, f2 in f.terms)
            else:
                flat.append((c, f))
        self.terms = flat

    def __call__(self, x):
        return sum(c * f(x) for c, f in self.terms)

    def plane_halfwidth(self):
        widths = [f.plane_halfwidth() for _, f in self.terms]
        return None if any(w is None for w in widths) else max(widths)


@dataclass(eq=False)
class ShiftedField(FieldRn):
    """f(x', x'' - shift)."""

    base: FieldRn
    shift: np.ndarray

    def __post_init__(self):
        self.n, self.k = self.base.n, self.base.k
        self.shift = np.asarray(self.shift, float)

    def __call__(self, x):
        x = np.array(x, float, copy=True)
        x[..., self.k + 1:] -= self.shift
        return self.base(x)

    def plane_halfwidth(self):
        return self.base.plane_halfwidth()


# ---------------------------------------------------------------------------
# sinogram containers


@dataclass(frozen=True, eq=False)
class SinogramGrid:
    n: int
    k: int
    theta: nk.SphereQuadrature
    s: nk.Grid1D
    xpp: tuple = ()

    def __post_init__(self):
        _check_nk(self.n, self.k)
        if self.theta.dim != self.k:
            raise GridError("theta quadrature must live on S^k")
        if len(self.xpp) != self.n - self.k - 1:
            raise GridError("need one x'' axis per coordinate of R^{n-k-1}")

    @property
    def shape(self):
        return (len(self.theta), len(self.s)) + tuple(len(g) for g in self.xpp)

    def xpp_points(self) -> np.ndarray:
        """x'' nodes as an array of shape (*xpp_shape, n-k-1)."""
        if not self.xpp:
            return np.zeros((0,))
        mesh = np.meshgrid(*[g.nodes for g in self.xpp], indexing="ij")
        return np.stack(mesh, axis=-1)

    @property
    def antipodally_closed(self) -> bool:
        return self.theta.antipodes is not None and self.s.is_symmetric


def make_sinogram_grid(n: int = 3, k: int = 1, theta_points: int = 64, s_points: int = 128,
                       s_max: float = 8.0, xpp_points: int = 17, xpp_max: float = 4.0,
                       theta_order: int | None = None) -> SinogramGrid:
    """Default desk-scale grid: equispaced circle (k=1) or product rule (k>=2)
    in theta, symmetric trapezoid in s, uniform axes in x''."""
    _check_nk(n, k)
    if k == 1:
        theta = nk.circle_quadrature(theta_points)
    else:
        theta = nk.make_sphere_quadrature(k, theta_order or (16 if k == 2 else 8))
    s = nk.uniform_trapezoid(-s_max, s_max, s_points)
    xpp = tuple(nk.uniform_trapezoid(-xpp_max, xpp_max, xpp_points) for _ in range(n - k - 1))
    return SinogramGrid(n, k, theta, s, xpp)


@dataclass(eq=False)
class RestrictedSinogram:
    grid: SinogramGrid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, float)
        if self.values.shape != self.grid.shape:
            raise GridError(f"values shape {self.values.shape} != grid shape {self.grid.shape}")
        if not np.all(np.isfinite(self.values)):
            raise InvalidArgumentError("sinogram values must be finite")

    @property
    def n(self):
        return self.grid.n

    @property
    def k(self):
        return self.grid.k

    def xpp_index(self, xpp) -> tuple:
        """Grid index of an x'' value (must coincide with grid nodes)."""
        xpp = np.atleast_1d(np.asarray(xpp, float))
        if xpp.size != len(self.grid.xpp):
            raise InvalidArgumentError("x'' has the wrong length")
        idx = []
        for v, g in zip(xpp, self.grid.xpp):
            j = int(np.argmin(np.abs(g.nodes - v)))
            if abs(g.nodes[j] - v) > 1e-12 * max(1.0, abs(v)):
                raise GridError(f"x'' value {v} is not a grid node")
            idx.append(j)
        return tuple(idx)


# ---------------------------------------------------------------------------
# forward transform


def orthonormal_complement(theta) -> np.ndarray:
    """Rows spanning theta-perp, from a QR factorisation with fixed pivots."""
    theta = np.asarray(theta, float)
    m = theta.size
    q, _ = np.linalg.qr(np.column_stack([theta, np.eye(m)[:, : m]]))
    return q[:, 1:m].T


def _canonical(theta):
    nz = np.flatnonzero(theta)
    return theta if theta[nz[0]] > 0 else -theta


def _plane_rule(k, halfwidth, order):
    g = nk.gauss_legendre(-halfwidth, halfwidth, order)
    mesh = np.meshgrid(*([g.nodes] * k), indexing="ij")
    t = np.stack([m.ravel() for m in mesh], axis=-1)
    w = np.ones(t.shape[0])
    for wm in np.meshgrid(*([g.weights] * k), indexing="ij"):
        w = w * wm.ravel()
    return t, w


def _truncated_plane_values(f, theta, s, xpp_pts, t, w):
    basis = orthonormal_complement(_canonical(theta))
    u = t @ basis  # (nu, k+1)
    xp = s[:, None, None] * theta + u[None, :, :]  # (ns, nu, k+1)
    npp = xpp_pts.reshape(-1, xpp_pts.shape[-1]) if xpp_pts.size else np.zeros((1, 0))
    pts = np.concatenate([
        np.broadcast_to(xp[:, None], (len(s), len(npp)) + xp.shape[1:]),
        np.broadcast_to(npp[None, :, None, :], (len(s), len(npp), len(u), npp.shape[-1])),
    ], axis=-1)
    vals = f(pts)
    return nk.dsum(vals * w, axis=-1)  # (ns, nxpp)


def forward_restricted(f: FieldRn, grid: SinogramGrid, plane_order: int = 64,
                       threads: int = 1, max_doublings: int = 12,
                       cauchy_tol: float = 1e-10) -> RestrictedSinogram:
    """Integrate ``f`` over every plane of ``grid``.

    Each plane integral is a tensor Gauss-Legendre rule over a box in
    theta-perp.  For antipodally closed grids only one of each pair
    (theta, -theta) is integrated and the partner is filled by s -> -s,
    so the output is exactly even.  Fields without a declared support are
    integrated over doubling boxes until successive values agree.
    """
    if f.n != grid.n or f.k != grid.k:
        raise InvalidArgumentError("field and grid disagree on (n, k)")
    s = grid.s.nodes
    xpp_pts = grid.xpp_points()
    halfwidth = f.plane_halfwidth()
    closed = grid.antipodally_closed
    antip = grid.theta.antipodes if closed else None
    todo = [j for j in range(len(grid.theta)) if antip is None or j <= antip[j]]

    def one(j):
        theta = grid.theta.points[j]
        if halfwidth is not None:
            t, w = _plane_rule(grid.k, halfwidth, plane_order)
            return _truncated_plane_values(f, theta, s, xpp_pts, t, w)
        prev = None
        L = 1.0
        for _ in range(max_doublings + 1):
            t, w = _plane_rule(grid.k, L, plane_order)
            cur = _truncated_plane_values(f, theta, s, xpp_pts, t, w)
            if prev is not None and np.max(np.abs(cur - prev)) <= cauchy_tol * np.max(np.abs(cur)):
                return cur
            prev, L = cur, 2 * L
        raise DivergenceError(
            f"plane integrals fail the Cauchy test up to half-width {L / 2:g}", partial=cur)

    results = nk.parallel_map(one, todo, threads)
    values = np.empty((len(grid.theta), len(s), max(1, xpp_pts.size // max(1, grid.n - grid.k - 1))))
    for j, r in zip(todo, results):
        values[j] = r
        if antip is not None and antip[j] != j:
            values[antip[j]] = r[::-1]
    return RestrictedSinogram(grid, values.reshape(grid.shape))


# ---------------------------------------------------------------------------
# dual transform and the k = 1 inversion formula


def _lagrange4(rows, s_nodes, q):
    """Cubic 4-point Lagrange interpolation of each row at queries q (same rows)."""
    h = s_nodes[1] - s_nodes[0]
    pos = (q - s_nodes[0]) / h
    idx = np.clip(np.floor(pos).astype(int), 1, len(s_nodes) - 3)
    x = pos - idx
    r = np.arange(rows.shape[0]).reshape((-1,) + (1,) * (q.ndim - 1))
    p0, p1, p2, p3 = (rows[r, idx - 1 + j] for j in range(4))
    return (-x * (x - 1) * (x - 2) / 6 * p0 + (x + 1) * (x - 1) * (x - 2) / 2 * p1
            - (x + 1) * x * (x - 2) / 2 * p2 + (x + 1) * x * (x - 1) / 6 * p3)


class _SpectralRows:
    """Band-limited (trigonometric) interpolation of uniformly sampled rows."""

    def __init__(self, rows, s_nodes):
        self.coef = np.fft.fft(rows, axis=-1) / rows.shape[-1]
        self.freq = 2 * np.pi * np.fft.fftfreq(rows.shape[-1], d=s_nodes[1] - s_nodes[0])
        self.s0 = s_nodes[0]

    def __call__(self, q):
        # q: (rows, m)
        ph = np.exp(1j * (q[..., None] - self.s0) * self.freq)
        return nk.dsum(ph * self.coef[:, None, :], axis=-1).real


def _require_uniform(g: nk.Grid1D):
    if g.kind != "uniform-trapezoid":
        raise GridError("offset interpolation needs a uniform s grid")


def _dual_values(rows, s_grid, theta, xp, t, interp, spectral=None):
    """R*_t at x' for an array of t; returns (values, out-of-range weight fraction)."""
    s_nodes = s_grid.nodes
    t = np.atleast_1d(np.asarray(t, float))
    q = (theta.points @ np.asarray(xp, float))[:, None] + t[None, :]
    inside = (q >= s_nodes[0]) & (q <= s_nodes[-1])
    if interp == "cubic":
        vals = _lagrange4(rows, s_nodes, np.clip(q, s_nodes[0], s_nodes[-1]))
    elif interp == "spectral":
        vals = (spectral or _SpectralRows(rows, s_nodes))(q)
    else:
        raise InvalidArgumentError(f"unknown interpolation {interp!r}")
    vals = np.where(inside, vals, 0.0)
    out = theta.with_normalization(True).integrate(vals, axis=0)
    outside = theta.with_normalization(True).integrate((~inside).astype(float), axis=0)
    return out, outside


def dual_transform(sino: RestrictedSinogram, xp, t=0.0, xpp_index=(), interp: str = "cubic"):
    """(R*_t phi_{x''})(x') = average over theta of phi(theta, x'.theta + t; x'').

    Offsets outside the sampled s range contribute zero; more than 1% of
    quadrature weight outside raises :class:`OffsetRangeError`.
    """
    _require_uniform(sino.grid.s)
    rows = sino.values[(slice(None), slice(None)) + tuple(np.atleast_1d(xpp_index))]
    if np.asarray(xp).shape != (sino.k + 1,):
        raise InvalidArgumentError("x' must have length k+1")
    vals, outside = _dual_values(rows, sino.grid.s, sino.grid.theta, xp, t, interp)
    if np.any(outside > 0.01):
        raise OffsetRangeError(f"{outside.max():.1%} of the direction weight leaves the s range")
    if np.any(outside > 0):
        warnings.warn("part of the direction average left the s range", TruncationWarning,
                      stacklevel=2)
    return float(vals[0]) if np.ndim(t) == 0 else vals


def invert_dual_formula_k1(sino: RestrictedSinogram, xp, xpp=(), epsilon: float = 1e-2,
                           t_max: float | None = None, tol: float = 1e-4,
                           interp: str = "spectral", panel_order: int = 16,
                           max_halvings: int = 30) -> float:
    """f(x) = (1/pi) int_0^inf [R* phi(x') - R*_t phi(x')] / t^2 dt  (k = 1).

    The lower limit is pushed to zero by halving epsilon; successive
    Richardson extrapolants 2 I(eps/2) - I(eps) are accepted once two agree
    to ``tol``.  Beyond ``t_max`` every offset leaves the sampled range, so
    the remaining tail R* phi / t_max is added in closed form.
    """
    if sino.k != 1:
        raise InvalidArgumentError("the dual inversion formula is implemented for k = 1")
    if epsilon <= 0:
        raise InvalidArgumentError("epsilon must be positive")
    _require_uniform(sino.grid.s)
    xp = np.asarray(xp, float)
    idx = sino.xpp_index(xpp) if sino.grid.xpp else ()
    rows = sino.values[(slice(None), slice(None)) + idx]
    theta = sino.grid.theta
    s_max = float(max(abs(sino.grid.s.nodes[0]), abs(sino.grid.s.nodes[-1])))
    if t_max is None:
        t_max = s_max + float(np.linalg.norm(xp)) + 1.0
    spectral = _SpectralRows(rows, sino.grid.s.nodes) if interp == "spectral" else None

    def dual(t):
        return _dual_values(rows, sino.grid.s, theta, xp, t, interp, spectral)[0]

    base = float(dual(0.0)[0])
    x, w = nk.gauss_legendre(-1.0, 1.0, panel_order).nodes, nk.gauss_legendre(-1.0, 1.0, panel_order).weights

    def panel(a, b):
        tt = 0.5 * (b - a) * x + 0.5 * (a + b)
        g = (base - dual(tt)) / tt ** 2
        return 0.5 * (b - a) * nk.dsum(w * g)

    edges = [epsilon]
    while edges[-1] < min(1.0, t_max):
        edges.append(min(2 * edges[-1], 1.0, t_max))
    edges.extend(np.arange(edges[-1] + 0.5, t_max, 0.5).tolist())
    if edges[-1] < t_max:
        edges.append(t_max)
    total = sum(panel(a, b) for a, b in zip(edges[:-1], edges[1:])) + base / t_max

    trace = [(epsilon, total / math.pi)]
    eps = epsilon
    prev_rich = None
    for _ in range(max_halvings):
        total += panel(eps / 2, eps)
        eps /= 2
        trace.append((eps, total / math.pi))
        rich = 2 * trace[-1][1] - trace[-2][1]
        if prev_rich is not None and abs(rich - prev_rich) < tol:
            return rich
        prev_rich = rich
    raise NoConvergenceError("epsilon-halving did not settle", trace=trace)


# ---------------------------------------------------------------------------
# Fourier-slice inversion


@dataclass(frozen=True, eq=False)
class BoxGrid:
    axes: tuple

    def __post_init__(self):
        object.__setattr__(self, "axes", tuple(np.asarray(a, float) for a in self.axes))

    @property
    def shape(self):
        return tuple(len(a) for a in self.axes)


def target_grid_for(sino: RestrictedSinogram, xp_points: int = 65,
                    xp_max: float | None = None) -> BoxGrid:
    """Box grid whose x'' axes are the sinogram's x'' nodes."""
    if xp_max is None:
        xp_max = 0.5 * float(sino.grid.s.nodes[-1])
    xp_axis = np.linspace(-xp_max, xp_max, xp_points)
    return BoxGrid((xp_axis,) * (sino.k + 1) + tuple(g.nodes for g in sino.grid.xpp))


def _eta_cutoff(sino, rel=nk.EPS_TAIL, probe=256):
    h = sino.grid.s.spacing
    eta = np.linspace(0.0, np.pi / h, probe)
    rows = sino.values.reshape(sino.values.shape[:2] + (-1,))
    rows = np.moveaxis(rows, 1, -1).reshape(-1, rows.shape[1])
    mag = np.max(np.abs(nk.continuous_ft_1d(rows, sino.grid.s, eta)), axis=0)
    peak = mag.max()
    if peak == 0:
        return 0.0, 0.0
    above = np.flatnonzero(mag > rel * peak)
    above_res = np.flatnonzero(mag > 1e-10 * peak)
    return float(eta[min(above[-1] + 1, probe - 1)]), float(eta[above_res[-1]])


def polar_psi(sino: RestrictedSinogram, eta) -> np.ndarray:
    """psi(eta*theta, x'') = int phi(theta, s; x'') e^{i s eta} ds, shape (theta, eta, *x'')."""
    v = np.moveaxis(sino.values, 1, -1)  # (theta, *xpp, s)
    ft = nk.continuous_ft_1d(v, sino.grid.s, eta)  # (theta, *xpp, eta)
    return np.moveaxis(ft, -1, 1)


def _inverse_polar(psi, sino, eta_grid, target: BoxGrid, chunk=16):
    """Inverse Fourier transform in x' by polar quadrature over eta*theta."""
    k = sino.k
    theta = sino.grid.theta.with_normalization(False)
    eta, w_eta = eta_grid.nodes, eta_grid.weights
    jac = (theta.weights[:, None] * (w_eta * eta ** k)[None, :]) / (2 * np.pi) ** (k + 1)
    G = (psi * jac.reshape(jac.shape + (1,) * (psi.ndim - 2))).reshape(
        len(theta) * len(eta), -1)  # (theta*eta, nxpp)
    xp_axes = target.axes[: k + 1]
    mesh = np.meshgrid(*xp_axes, indexing="ij")
    xp = np.stack([m.ravel() for m in mesh], axis=-1)  # (P, k+1)
    proj = xp @ theta.points.T  # (P, theta)
    out = np.empty((len(xp), G.shape[1]))
    for i in range(0, len(xp), chunk):
        ph = np.exp(-1j * (proj[i:i + chunk, :, None] * eta[None, None, :])).reshape(
            -1, len(theta) * len(eta))
        out[i:i + chunk] = nk.dsum(ph[:, None, :] * G.T[None, :, :], axis=-1).real
    return out.reshape(tuple(len(a) for a in xp_axes) + tuple(len(a) for a in target.axes[k + 1:]))


def _check_target(sino, target):
    if len(target.axes) != sino.n:
        raise GridError("target grid needs n axes")
    for a, g in zip(target.axes[sino.k + 1:], sino.grid.xpp):
        if not np.array_equal(a, g.nodes):
            raise GridError("target x'' axes must equal the sinogram x'' nodes")


def _eta_rule(sino, target, eta_points, eta_max):
    cut, cut_res = _eta_cutoff(sino)
    if eta_max is not None:
        cut = eta_max
    radius = float(np.linalg.norm([np.max(np.abs(a)) for a in target.axes[: sino.k + 1]]))
    if cut_res * radius > sino.grid.theta.order:
        raise ResolutionError(
            f"theta grid (degree {sino.grid.theta.order}) too coarse for bandwidth "
            f"{cut_res:.3g} at radius {radius:.3g}")
    return nk.gauss_legendre(0.0, max(cut, 1e-12), eta_points)


def invert_fourier_slice(sino: RestrictedSinogram, target: BoxGrid, eta_points: int = 64,
                         eta_max: float | None = None) -> SampledField:
    """Reconstruct f on ``target`` via the projection-slice identity.

    The s-Fourier transform of each sinogram row gives the x'-Fourier
    transform of f on the ray eta*theta; the inverse (k+1)-dimensional
    transform is evaluated by polar quadrature with Jacobian eta^k.
    """
    _check_target(sino, target)
    eta = _eta_rule(sino, target, eta_points, eta_max)
    psi = polar_psi(sino, eta.nodes)
    values = _inverse_polar(psi, sino, eta, target)
    return SampledField(sino.n, sino.k, target.axes, values)


def projection_slice_error(sino: RestrictedSinogram, fhat, eta) -> float:
    """Sup relative gap between the s-Fourier transform of the sinogram and
    the partial Fourier transform of f on the rays eta*theta.

    ``fhat(xi, xpp)`` evaluates the x'-Fourier transform (kernel e^{+i x'.xi}).
    """
    eta = np.asarray(eta, float)
    psi = polar_psi(sino, eta)  # (theta, eta, *xpp)
    xi = sino.grid.theta.points[:, None, :] * eta[None, :, None]
    xpp = sino.grid.xpp_points()
    if xpp.size:
        xi_b = xi.reshape(xi.shape[:2] + (1,) * (xpp.ndim - 1) + (sino.k + 1,))
        ref = fhat(xi_b, xpp[None, None])
    else:
        ref = fhat(xi, np.zeros(0))
    return float(np.max(np.abs(psi - ref)) / np.max(np.abs(ref)))


# ---------------------------------------------------------------------------
# truncated plane integrals for the sharpness scan


def truncated_plane_integrals(f: FieldRn, theta, s: float, xpp, radii, panel_order: int = 32,
                              dir_order: int = 16, inner: float = 0.125) -> np.ndarray:
    """T(L) = integral of f(s*theta + u, x'') over |u| <= L in theta-perp, for each L.

    Polar coordinates in theta-perp with Gauss-Legendre panels in |u| that
    double in length, so the cost grows only with log(max L).
    """
    radii = np.asarray(radii, float)
    if radii.ndim != 1 or np.any(np.diff(radii) <= 0) or radii[0] <= 0:
        raise InvalidArgumentError("radii must be positive and strictly increasing")
    k = f.k
    theta = np.asarray(theta, float)
    xpp = np.atleast_1d(np.asarray(xpp, float))
    basis = orthonormal_complement(_canonical(theta) if theta.size > 1 else theta)
    if k == 1:
        dirs, dw = np.array([[1.0], [-1.0]]), np.ones(2)
    else:
        q = nk.make_sphere_quadrature(k - 1, dir_order)
        dirs, dw = q.points, q.weights
    udirs = dirs @ basis  # (ndir, k+1)

    dyadic = inner * 2.0 ** np.arange(int(np.ceil(np.log2(radii[-1] / inner))) + 1)
    edges = np.unique(np.concatenate([[0.0], dyadic[dyadic < radii[-1]], radii]))
    g = nk.gauss_legendre(-1.0, 1.0, panel_order)
    a, b = edges[:-1], edges[1:]
    rr = 0.5 * (b - a)[:, None] * g.nodes + 0.5 * (a + b)[:, None]  # (panels, q)
    ww = 0.5 * (b - a)[:, None] * g.weights * rr ** (k - 1)
    xp = s * theta + rr[..., None, None] * udirs  # (panels, q, ndir, k+1)
    pts = np.concatenate([xp, np.broadcast_to(xpp, xp.shape[:-1] + xpp.shape)], axis=-1)
    vals = nk.dsum(f(pts) * dw, axis=-1)
    per_panel = nk.dsum(vals * ww, axis=-1)
    cum = np.cumsum(per_panel)
    ends = np.searchsorted(edges, radii) - 1
    return cum[ends]


def divergence_scan_f0(n: int, k: int, p: float, delta: float, radii=None, theta=None,
                       s: float = 0.0, xpp=None, field: FieldRn | None = None) -> np.ndarray:
    """Truncated plane integrals of the L^p counterexample over growing discs.

    Defaults: radii 2^j for j = 1..12, theta = e_1, s = 0, x'' = 0.  Pass
    ``field`` to scan another function on the same planes.
    """
    _check_nk(n, k)
    radii = 2.0 ** np.arange(1, 13) if radii is None else np.asarray(radii, float)
    theta = np.eye(k + 1)[0] if theta is None else np.asarray(theta, float)
    xpp = np.zeros(n - k - 1) if xpp is None else xpp
    f = CounterexampleF0(n, k, p, delta) if field is None else field
    return truncated_plane_integrals(f, theta, s, xpp, radii)


def is_strictly_increasing(values) -> bool:
    return bool(np.all(np.diff(values) > 0))


def cauchy_settles(values, rtol: float = 1e-6) -> bool:
    """Increments shrink monotonically and the last one is below rtol*|T|."""
    d = np.abs(np.diff(values))
    return bool(np.all(np.diff(d) < 0) and d[-1] < rtol * abs(values[-1]))
