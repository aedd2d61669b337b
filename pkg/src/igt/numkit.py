"""Numerical substrate: 1-D grids, sphere quadrature, Fourier sums and
real spherical harmonics on S^d.

Every quadrature reduction goes through :func:`dsum`, which reduces a
contiguous last axis with numpy's pairwise summation.  The order of
additions then depends only on the array shape, so results are
reproducible bit for bit whatever the worker count of the caller.
"""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import special

from .errors import (
    AliasingRiskError,
    InvalidArgumentError,
    TruncationWarning,
    UnsupportedDimensionError,
)

EPS_TAIL = 1e-12


def dsum(a, axis=-1):
    """Deterministic pairwise sum along ``axis``."""
    a = np.asarray(a)
    a = np.ascontiguousarray(np.moveaxis(a, axis, -1))
    return a.sum(axis=-1)


def parallel_map(fn: Callable, items: Iterable, threads: int = 1) -> list:
    """Ordered map over independent work items.

    Each item is computed by the same code path whatever ``threads`` is,
    so outputs do not depend on the worker count.
    """
    items = list(items)
    if threads is None or threads <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def sphere_surface_area(d: int) -> float:
    """Surface area of the unit sphere S^d in R^{d+1}."""
    if d < 0:
        raise InvalidArgumentError(f"sphere dimension must be >= 0, got {d}")
    return 2.0 * math.pi ** ((d + 1) / 2) / math.gamma((d + 1) / 2)


# ---------------------------------------------------------------------------
# 1-D grids

GRID_KINDS = ("uniform-trapezoid", "gauss-legendre", "uniform-periodic")


@dataclass(frozen=True, eq=False)
class Grid1D:
    nodes: np.ndarray
    weights: np.ndarray
    kind: str

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if self.kind not in GRID_KINDS:
            raise InvalidArgumentError(f"unknown grid kind {self.kind!r}")
        if nodes.ndim != 1 or nodes.shape != weights.shape:
            raise InvalidArgumentError("nodes and weights must be 1-D arrays of equal length")
        if nodes.size > 1 and not np.all(np.diff(nodes) > 0):
            raise InvalidArgumentError("grid nodes must be strictly increasing")
        if not np.all(weights > 0):
            raise InvalidArgumentError("grid weights must be positive")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    def __len__(self):
        return self.nodes.size

    @property
    def spacing(self) -> float:
        if self.kind == "gauss-legendre":
            raise InvalidArgumentError("Gauss-Legendre grids have no uniform spacing")
        return float(self.nodes[1] - self.nodes[0])

    @property
    def is_symmetric(self) -> bool:
        """True when nodes and weights are exactly mirror-symmetric about 0."""
        return bool(np.array_equal(self.nodes, -self.nodes[::-1])
                    and np.array_equal(self.weights, self.weights[::-1]))

    def integrate(self, values, axis=-1):
        values = np.asarray(values)
        w = self.weights.reshape((-1,) + (1,) * (values.ndim - 1 - (axis % values.ndim)))
        return dsum(values * w, axis=axis)


def _mirror(nodes, weights):
    # exact antisymmetry of nodes, symmetry of weights
    nodes = 0.5 * (nodes - nodes[::-1])
    weights = 0.5 * (weights + weights[::-1])
    return nodes, weights


def gauss_legendre(a: float, b: float, n: int) -> Grid1D:
    if n < 1 or not b > a:
        raise InvalidArgumentError("need n >= 1 and b > a")
    x, w = special.roots_legendre(n)
    x, w = _mirror(x, w)
    half = 0.5 * (b - a)
    return Grid1D(half * x + 0.5 * (a + b), half * w, "gauss-legendre")


def composite_gauss_legendre(edges: Sequence[float], n: int) -> Grid1D:
    """Gauss-Legendre rule with ``n`` nodes on each panel between ``edges``."""
    edges = np.asarray(edges, dtype=float)
    x, w = special.roots_legendre(n)
    x, w = _mirror(x, w)
    a, b = edges[:-1, None], edges[1:, None]
    nodes = 0.5 * (b - a) * x + 0.5 * (a + b)
    weights = 0.5 * (b - a) * w
    return Grid1D(nodes.ravel(), weights.ravel(), "gauss-legendre")


def uniform_trapezoid(a: float, b: float, n: int) -> Grid1D:
    """Trapezoid rule on ``n`` equispaced nodes including both ends.

    When ``a == -b`` the nodes are made exactly antisymmetric so that the
    grid is closed under s -> -s.
    """
    if n < 2 or not b > a:
        raise InvalidArgumentError("need n >= 2 and b > a")
    nodes = np.linspace(a, b, n)
    h = (b - a) / (n - 1)
    weights = np.full(n, h)
    weights[[0, -1]] = 0.5 * h
    if a == -b:
        nodes, weights = _mirror(nodes, weights)
    return Grid1D(nodes, weights, "uniform-trapezoid")


def uniform_periodic(n: int, period: float = 2 * math.pi) -> Grid1D:
    if n < 1:
        raise InvalidArgumentError("need n >= 1")
    return Grid1D(np.arange(n) * (period / n), np.full(n, period / n), "uniform-periodic")


# ---------------------------------------------------------------------------
# sphere quadrature


@dataclass(frozen=True, eq=False)
class SphereQuadrature:
    """Nodes and weights on S^d; exact for polynomials of degree <= order."""

    dim: int
    points: np.ndarray
    weights: np.ndarray
    normalized: bool
    order: int

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != self.dim + 1:
            raise InvalidArgumentError("points must have shape (N, dim + 1)")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "weights", np.asarray(self.weights, dtype=float))

    def __len__(self):
        return self.points.shape[0]

    @property
    def total_measure(self) -> float:
        return 1.0 if self.normalized else sphere_surface_area(self.dim)

    def with_normalization(self, normalized: bool) -> "SphereQuadrature":
        if normalized == self.normalized:
            return self
        area = sphere_surface_area(self.dim)
        w = self.weights / area if normalized else self.weights * area
        return SphereQuadrature(self.dim, self.points, w, normalized, self.order)

    def integrate(self, values, axis=0):
        values = np.asarray(values)
        axis = axis % values.ndim
        w = self.weights.reshape((-1,) + (1,) * (values.ndim - 1 - axis))
        return dsum(values * w, axis=axis)

    @cached_property
    def antipodes(self) -> np.ndarray | None:
        """Index of the exact antipode of every node, or None if not closed."""
        return antipodal_index(self.points)


def antipodal_index(points: np.ndarray) -> np.ndarray | None:
    lookup = {tuple(p): i for i, p in enumerate(points)}
    out = np.empty(len(points), dtype=int)
    for i, p in enumerate(points):
        j = lookup.get(tuple(-p))
        if j is None:
            return None
        out[i] = j
    return out


def _circle_points(n: int) -> np.ndarray:
    if n % 2:
        ang = 2 * np.pi * np.arange(n) / n
        return np.stack([np.cos(ang), np.sin(ang)], axis=1)
    ang = 2 * np.pi * np.arange(n // 2) / n
    half = np.stack([np.cos(ang), np.sin(ang)], axis=1)
    return np.concatenate([half, -half])


def circle_quadrature(n_points: int, normalized: bool = True) -> SphereQuadrature:
    """Equispaced rule on S^1 with a given node count (exact to degree n-1)."""
    if n_points < 2:
        raise InvalidArgumentError("need at least 2 points on the circle")
    total = 1.0 if normalized else 2 * np.pi
    return SphereQuadrature(1, _circle_points(n_points), np.full(n_points, total / n_points),
                            normalized, n_points - 1)


def _polar_rule(d: int, n: int):
    """Nodes/weights in t = x_{d+1} for the weight (1 - t^2)^{(d-2)/2}."""
    if d == 2:
        t, w = special.roots_legendre(n)
    else:
        t, w = special.roots_gegenbauer(n, (d - 1) / 2)
    return _mirror(t, w)


def make_sphere_quadrature(d: int, order: int, normalized: bool = True) -> SphereQuadrature:
    """Product rule on S^d exact for polynomials of total degree <= ``order``.

    S^1 uses the smallest even number of equispaced nodes exceeding
    ``order``; S^d for d >= 2 recurses on S^{d-1} with a Gauss rule in the
    last coordinate.  All rules are exactly closed under x -> -x.
    """
    if d not in (0, 1, 2, 3):
        raise UnsupportedDimensionError(f"sphere quadrature supports d in 0..3, got {d}")
    if order < 2:
        raise InvalidArgumentError("quadrature order must be >= 2")
    if d == 0:
        pts = np.array([[1.0], [-1.0]])
        w = np.full(2, 0.5 if normalized else 1.0)
        return SphereQuadrature(0, pts, w, normalized, order)
    if d == 1:
        n = order + 1 if order % 2 else order + 2
        q = circle_quadrature(n, normalized)
        return SphereQuadrature(1, q.points, q.weights, normalized, order)
    inner = make_sphere_quadrature(d - 1, order, normalized=False)
    t, wt = _polar_rule(d, (order + 2) // 2)
    rho = np.sqrt(1.0 - t * t)
    pts = np.concatenate([
        np.concatenate([r * inner.points, np.full((len(inner), 1), ti)], axis=1)
        for r, ti in zip(rho, t)
    ])
    w = np.outer(wt, inner.weights).ravel()
    if normalized:
        w = w / sphere_surface_area(d)
    return SphereQuadrature(d, pts, w, normalized, order)


def sphere_moment(exponents: Sequence[int]) -> float:
    """Closed-form integral of prod x_i^{a_i} over S^d (unnormalized)."""
    a = np.asarray(exponents)
    if np.any(a % 2):
        return 0.0
    b = (a + 1) / 2.0
    return float(2.0 * np.prod([math.gamma(x) for x in b]) / math.gamma(b.sum()))


# ---------------------------------------------------------------------------
# Fourier sums


def dft_1d(samples, sign: int = 1) -> np.ndarray:
    """Unnormalized DFT with kernel exp(sign * 2 pi i j l / N) along the last axis."""
    x = np.asarray(samples, dtype=complex)
    if x.shape[-1] < 2:
        raise InvalidArgumentError("DFT needs at least 2 samples")
    if sign == 1:
        return np.fft.ifft(x, axis=-1) * x.shape[-1]
    if sign == -1:
        return np.fft.fft(x, axis=-1)
    raise InvalidArgumentError("sign must be +1 or -1")


def continuous_ft_1d(values, grid: Grid1D, frequencies, tail_tol: float = EPS_TAIL,
                     chunk: int = 4096) -> np.ndarray:
    """Quadrature estimate of  int f(x) exp(i x y) dx  along the last axis.

    Issues :class:`TruncationWarning` when the samples at the grid ends are
    not below ``tail_tol`` times the peak.
    """
    f = np.asarray(values)
    y = np.atleast_1d(np.asarray(frequencies, dtype=float))
    if f.shape[-1] != len(grid):
        raise InvalidArgumentError("sample count does not match the grid")
    peak = np.max(np.abs(f)) if f.size else 0.0
    edge = max(np.max(np.abs(f[..., 0])), np.max(np.abs(f[..., -1]))) if f.size else 0.0
    if peak > 0 and edge > tail_tol * peak:
        warnings.warn(f"tail mass {edge / peak:.2e} of peak at grid ends", TruncationWarning,
                      stacklevel=2)
    kernel = grid.weights[None, :] * np.exp(1j * np.outer(y, grid.nodes))  # (M, N)
    lead = f.shape[:-1]
    flat = f.reshape(-1, f.shape[-1])
    out = np.empty((flat.shape[0], y.size), dtype=complex)
    step = max(1, chunk // max(1, y.size // 8 + 1))
    for i in range(0, flat.shape[0], step):
        out[i:i + step] = dsum(flat[i:i + step, None, :] * kernel[None], axis=-1)
    return out.reshape(lead + (y.size,))


# ---------------------------------------------------------------------------
# real orthonormal spherical harmonics on S^d


def harmonic_dimension(d: int, m: int) -> int:
    """Dimension of the space of degree-m spherical harmonics on S^d."""
    if m < 0:
        return 0
    if d == 1:
        return 1 if m == 0 else 2
    return math.comb(m + d, d) - math.comb(m + d - 2, d)


def _gegenbauer_norm(n: int, alpha: float) -> float:
    # int_{-1}^1 C_n^alpha(t)^2 (1 - t^2)^(alpha - 1/2) dt
    logh = (math.log(math.pi) + (1 - 2 * alpha) * math.log(2) + math.lgamma(n + 2 * alpha)
            - math.lgamma(n + 1) - math.log(n + alpha) - 2 * math.lgamma(alpha))
    return math.exp(logh)


def harmonic_basis(points, d: int, max_degree: int) -> list[np.ndarray]:
    """Orthonormal real harmonics (w.r.t. the unnormalized measure) at ``points``.

    Returns one array of shape (N, dim_m) per degree m.  On S^2 the first
    column of each degree is the zonal harmonic about the last axis.
    """
    x = np.asarray(points, dtype=float)
    if d == 1:
        phi = np.arctan2(x[:, 1], x[:, 0])
        out = [np.full((len(x), 1), 1 / math.sqrt(2 * math.pi))]
        for m in range(1, max_degree + 1):
            out.append(np.stack([np.cos(m * phi), np.sin(m * phi)], axis=1) / math.sqrt(math.pi))
        return out
    if d < 1:
        raise UnsupportedDimensionError("harmonics need d >= 1")
    t = x[:, d]
    rest = x[:, :d]
    rho = np.linalg.norm(rest, axis=1)
    safe = rho > 0
    omega = np.zeros_like(rest)
    omega[safe] = rest[safe] / rho[safe, None]
    omega[~safe, 0] = 1.0
    sub = harmonic_basis(omega, d - 1, max_degree)
    out = []
    for m in range(max_degree + 1):
        cols = []
        for l in range(m + 1):
            alpha = l + (d - 1) / 2
            c = special.eval_gegenbauer(m - l, alpha, t) * rho ** l
            c = c / math.sqrt(_gegenbauer_norm(m - l, alpha))
            cols.append(c[:, None] * sub[l])
        out.append(np.concatenate(cols, axis=1))
    return out


@dataclass(eq=False)
class HarmonicSpectrum:
    sphere_dim: int
    max_degree: int
    coeffs: list = field(default_factory=list)

    def energy(self) -> float:
        return float(sum(np.sum(np.abs(c) ** 2) for c in self.coeffs))

    def degree_energy(self, m: int) -> float:
        return float(np.sum(np.abs(self.coeffs[m]) ** 2))

    def synthesize(self, points) -> np.ndarray:
        return harmonic_synthesize(self, points)


def harmonic_analyze(values, quad: SphereQuadrature, max_degree: int) -> HarmonicSpectrum:
    """Project samples on ``quad`` onto harmonics of degree <= max_degree.

    ``values`` may carry trailing batch axes after the node axis.
    """
    if quad.order < 2 * max_degree:
        raise AliasingRiskError(
            f"quadrature order {quad.order} < 2 * max_degree ({2 * max_degree})")
    f = np.asarray(values)
    w = quad.with_normalization(False).weights
    basis = harmonic_basis(quad.points, quad.dim, max_degree)
    fw = f * w.reshape((-1,) + (1,) * (f.ndim - 1))
    coeffs = [np.tensordot(Y.T, fw, axes=(1, 0)) for Y in basis]
    return HarmonicSpectrum(quad.dim, max_degree, coeffs)


def harmonic_synthesize(spectrum: HarmonicSpectrum, points) -> np.ndarray:
    basis = harmonic_basis(np.atleast_2d(points), spectrum.sphere_dim, spectrum.max_degree)
    return sum(np.tensordot(Y, c, axes=(1, 0)) for Y, c in zip(basis, spectrum.coeffs))


def legendre_p_at_zero(m: int) -> float:
    """P_m(0): zero for odd m, (-1)^{m/2} (m-1)!!/m!! for even m."""
    if m < 0:
        raise InvalidArgumentError("degree must be >= 0")
    if m % 2:
        return 0.0
    p = 1.0
    for j in range(1, m // 2 + 1):
        p *= -(2 * j - 1) / (2 * j)
    return p
