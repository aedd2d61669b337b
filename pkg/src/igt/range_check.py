"""Range tests for restricted sinograms on R^n.

A sinogram phi(theta, s; x'') of a Schwartz function is even under
(theta, s) -> (-theta, -s), is smooth with rapidly decaying derivatives,
and its s-moments of order m are homogeneous degree-m polynomials in theta.
This module measures each of these properties on a grid.  It also builds
the preimage f from phi through Fourier transforms.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import euclid
from . import numkit as nk
from .errors import (
    FitError,
    GridError,
    IGTError,
    InvalidArgumentError,
    NotInRangeError,
    PreconditionError,
    ResolutionError,
)
from .euclid import BoxGrid, RestrictedSinogram, SampledField


def _antipodes(sino: RestrictedSinogram) -> np.ndarray:
    if not sino.grid.antipodally_closed:
        raise GridError("evenness needs an antipodally closed theta grid and a symmetric s grid")
    return sino.grid.theta.antipodes


def mirror(sino: RestrictedSinogram) -> np.ndarray:
    """Values at (-theta, -s; x'') laid out on the (theta, s; x'') grid."""
    return sino.values[_antipodes(sino)][:, ::-1]


def check_evenness(sino: RestrictedSinogram) -> float:
    """max |phi(theta, s; x'') - phi(-theta, -s; x'')| over the grid."""
    return float(np.max(np.abs(sino.values - mirror(sino))))


# ---------------------------------------------------------------------------
# seminorms


@dataclass(frozen=True)
class SeminormReport:
    m: int
    value: float
    grid_resolution: tuple
    resolution_ratio: float  # h^2 sup|d^3 phi/ds^3| / sup|phi|; want < 0.01


def theta_gradient_matrices(quad: nk.SphereQuadrature, max_degree: int | None = None,
                            h: float = 1e-4) -> np.ndarray:
    """Linear maps taking samples on ``quad`` to the x'_i-derivatives of their
    degree-0 homogeneous extension, shape (k+1, N, N).

    Samples are interpolated by spherical harmonics, then differenced at
    (theta +- h e_i)/|theta +- h e_i|.
    """
    d = quad.dim
    if max_degree is None:
        max_degree = quad.order // 2
    w = quad.with_normalization(False).weights
    basis = np.concatenate(nk.harmonic_basis(quad.points, d, max_degree), axis=1)
    analysis = basis.T * w  # (B, N)
    mats = []
    for i in range(d + 1):
        e = np.zeros(d + 1)
        e[i] = h
        plus = quad.points + e
        minus = quad.points - e
        bp = np.concatenate(nk.harmonic_basis(plus / np.linalg.norm(plus, axis=1, keepdims=True),
                                              d, max_degree), axis=1)
        bm = np.concatenate(nk.harmonic_basis(minus / np.linalg.norm(minus, axis=1, keepdims=True),
                                              d, max_degree), axis=1)
        mats.append((bp - bm) @ analysis / (2 * h))
    return np.stack(mats)


def _derivatives(sino: RestrictedSinogram, m: int):
    """Yield arrays D^mu phi for every |mu| <= m."""
    v = sino.values
    k = sino.k
    hs = sino.grid.s.spacing
    xpp_h = [g.spacing for g in sino.grid.xpp]
    yield v
    if m == 0:
        return
    D = theta_gradient_matrices(sino.grid.theta)
    theta = sino.grid.theta.points

    def dtheta(a, i):
        return np.tensordot(D[i], a, axes=(1, 0))

    def ds(a):
        return np.gradient(a, hs, axis=1, edge_order=2)

    def dxpp(a, j):
        return np.gradient(a, xpp_h[j], axis=2 + j, edge_order=2)

    first = ([("t", i, dtheta(v, i)) for i in range(k + 1)] + [("s", 0, ds(v))]
             + [("x", j, dxpp(v, j)) for j in range(len(xpp_h))])
    for _, _, a in first:
        yield a
    if m == 1:
        return
    for (kind, i, a) in first:
        if kind == "t":
            # the x'_i-derivative of a degree-0 function is homogeneous of degree -1
            for j in range(k + 1):
                corr = theta[:, j].reshape((-1,) + (1,) * (a.ndim - 1))
                yield dtheta(a, j) - corr * a
        yield ds(a)
        for j in range(len(xpp_h)):
            yield dxpp(a, j)


def estimate_seminorm(sino: RestrictedSinogram, m: int, check_resolution: bool = True
                      ) -> SeminormReport:
    """sup (1+|s|+|x''|)^m |D^mu phi| over |mu| <= m, by grid differencing.

    theta-derivatives act on the degree-0 homogeneous extension in x'.
    With ``check_resolution`` a grid whose s spacing fails
    h^2 sup|phi'''| < 0.01 sup|phi| raises :class:`ResolutionError` (m >= 1).
    """
    if m not in (0, 1, 2):
        raise InvalidArgumentError("seminorm order must be 0, 1 or 2")
    v = sino.values
    s = sino.grid.s.nodes
    weight = 1 + np.abs(s)[None, :]
    if sino.grid.xpp:
        r = np.linalg.norm(sino.grid.xpp_points(), axis=-1)
        weight = weight.reshape(weight.shape + (1,) * r.ndim) + r[None, None]
    weight = weight ** m
    value = max(float(np.max(weight * np.abs(a))) for a in _derivatives(sino, m))

    peak = float(np.max(np.abs(v)))
    hs = sino.grid.s.spacing
    d3 = v
    for _ in range(3):
        d3 = np.gradient(d3, hs, axis=1, edge_order=2)
    ratio = hs ** 2 * float(np.max(np.abs(d3))) / peak if peak > 0 else 0.0
    if check_resolution and m >= 1 and ratio >= 0.01:
        raise ResolutionError(f"s spacing {hs:.3g} too coarse for differencing (ratio {ratio:.3g})")
    return SeminormReport(m, value, sino.grid.shape, ratio)


# ---------------------------------------------------------------------------
# moment conditions


def multi_indices(dim: int, m: int) -> list[tuple]:
    """All alpha in Z_+^dim with |alpha| = m, in lexicographically descending order."""
    return sorted((a for a in itertools.product(range(m + 1), repeat=dim) if sum(a) == m),
                  reverse=True)


@dataclass
class MomentPolynomial:
    degree: int
    indices: list
    coefficients: np.ndarray  # (n_alpha, *xpp_shape)
    residual: float

    def evaluate(self, theta) -> np.ndarray:
        theta = np.atleast_2d(theta)
        mono = np.stack([np.prod(theta ** np.array(a), axis=1) for a in self.indices], axis=1)
        return np.tensordot(mono, self.coefficients, axes=(1, 0))


def s_moments(sino: RestrictedSinogram, m: int) -> np.ndarray:
    """mu_m(theta; x'') = int phi(theta, s; x'') s^m ds, shape (theta, *xpp)."""
    v = np.moveaxis(sino.values, 1, -1)
    return sino.grid.s.integrate(v * sino.grid.s.nodes ** m, axis=-1)


def check_moment_condition(sino: RestrictedSinogram, m: int, ridge: float = 1e-12,
                           max_condition: float = 1e8) -> MomentPolynomial:
    """Fit mu_m(theta; x'') by a homogeneous degree-m polynomial in theta.

    The fit is ridge-regularised weighted least squares on the theta grid,
    separately per x''.  The residual is relative to the absolute moment
    int |phi| |s|^m ds, so odd moments of even data score near zero.
    """
    if m < 0:
        raise InvalidArgumentError("moment order must be >= 0")
    s = sino.grid.s
    peak = np.max(np.abs(sino.values))
    edge = max(np.max(np.abs(sino.values[:, 0])), np.max(np.abs(sino.values[:, -1])))
    if peak > 0 and edge > nk.EPS_TAIL * peak:
        raise PreconditionError("sinogram does not decay at the ends of the s grid")
    quad = sino.grid.theta
    idx = multi_indices(sino.k + 1, m)
    if len(quad) < 3 * len(idx):
        raise FitError(f"need at least {3 * len(idx)} directions for degree {m}")
    theta = quad.points
    V = np.stack([np.prod(theta ** np.array(a), axis=1) for a in idx], axis=1)
    w = quad.weights
    G = V.T @ (V * w[:, None])
    cond = np.linalg.cond(G)
    if cond > max_condition:
        raise FitError(f"monomial Gram matrix condition {cond:.2e}; use a finer theta grid")

    mu = s_moments(sino, m)
    flat = mu.reshape(len(quad), -1)
    absmom = s.integrate(np.moveaxis(np.abs(sino.values), 1, -1) * np.abs(s.nodes) ** m,
                         axis=-1).reshape(len(quad), -1)
    lam = ridge * np.trace(G) / len(idx)
    coef = np.linalg.solve(G + lam * np.eye(len(idx)), V.T @ (flat * w[:, None]))
    resid = V @ coef - flat
    num = np.sqrt(nk.dsum((resid ** 2 * w[:, None]).T))
    den = np.sqrt(nk.dsum((absmom ** 2 * w[:, None]).T))
    rel = np.where(den > 0, num / np.where(den > 0, den, 1.0), 0.0)
    return MomentPolynomial(m, idx, coef.reshape((len(idx),) + mu.shape[1:]),
                            float(np.max(rel)))


# ---------------------------------------------------------------------------
# constructive preimage


def _xpp_transform(a: np.ndarray, sino: RestrictedSinogram, sign: int) -> np.ndarray:
    """Fourier pair in x'' on the DFT lattice of the x'' grid (axes 2.. of ``a``).

    sign=+1: int psi(x'') e^{+i x''.xi} dx''; sign=-1: the exact inverse.
    """
    for j, g in enumerate(sino.grid.xpp):
        ax = 2 + j
        nodes = g.nodes
        N, h = len(nodes), g.spacing
        xi = 2 * np.pi * np.arange(N) / (N * h)
        shape = [1] * a.ndim
        shape[ax] = N
        phase = np.exp(1j * nodes[0] * xi).reshape(shape)
        moved = np.moveaxis(a, ax, -1)
        if sign == 1:
            a = np.moveaxis(nk.dft_1d(moved, 1), -1, ax) * h * phase
        else:
            a = np.moveaxis(nk.dft_1d(moved * np.moveaxis(np.conj(phase), ax, -1), -1),
                            -1, ax) / (N * h)
    return a


def range_construct_f(sino: RestrictedSinogram, target: BoxGrid, eta_points: int = 64,
                      tol_evenness: float = 1e-8) -> SampledField:
    """Preimage of ``sino`` on ``target``.

    psi(y', x'') = int phi(y'/|y'|, s; x'') e^{i s |y'|} ds, then
    psi_1 = F_2 psi in x'' and f = F_n^{-1} psi_1, with the inverse in x'
    done by polar quadrature.
    """
    viol = check_evenness(sino)
    scale = float(np.max(np.abs(sino.values))) or 1.0
    if viol > tol_evenness * scale:
        raise NotInRangeError(f"evenness violation {viol:.3g} exceeds tolerance")
    euclid._check_target(sino, target)
    eta = euclid._eta_rule(sino, target, eta_points, None)
    psi = euclid.polar_psi(sino, eta.nodes)  # (theta, eta, *xpp)
    psi1 = _xpp_transform(psi, sino, 1)
    back = _xpp_transform(psi1, sino, -1)
    values = euclid._inverse_polar(back, sino, eta, target)
    return SampledField(sino.n, sino.k, target.axes, values)


# ---------------------------------------------------------------------------
# verdict


@dataclass(frozen=True)
class RangeTolerances:
    evenness: float = 1e-8
    moment: float = 1e-6
    roundtrip: float = 1e-3
    seminorm_max: float = 1e12


@dataclass
class RangeReport:
    rows: list = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)

    def add(self, criterion, m, value, threshold, ok):
        self.rows.append({"criterion": criterion, "m": m, "value": float(value),
                          "threshold": float(threshold), "verdict": "pass" if ok else "fail"})

    @property
    def in_range(self) -> bool:
        return all(r["verdict"] == "pass" for r in self.rows)

    def verdict(self, criterion: str, m=None) -> str:
        for r in self.rows:
            if r["criterion"] == criterion and (m is None or r["m"] == m):
                return r["verdict"]
        raise KeyError(criterion)

    @property
    def first_failing_moment(self):
        for r in self.rows:
            if r["criterion"] == "moment" and r["verdict"] == "fail":
                return r["m"]
        return None

    def csv_rows(self) -> list[list]:
        return [["criterion", "m", "value", "threshold", "verdict"]] + [
            [r["criterion"], "" if r["m"] is None else r["m"], repr(r["value"]),
             repr(r["threshold"]), r["verdict"]] for r in self.rows]


def range_verdict(sino: RestrictedSinogram, m_max: int = 4,
                  tol: RangeTolerances = RangeTolerances(), target: BoxGrid | None = None,
                  plane_order: int = 64, threads: int = 1) -> RangeReport:
    """Pass/fail table for the range conditions and the forward roundtrip."""
    rep = RangeReport()
    scale = float(np.max(np.abs(sino.values))) or 1.0

    try:
        viol = check_evenness(sino) / scale
    except GridError as exc:
        viol = math.inf
        rep.diagnostics["evenness"] = str(exc)
    rep.add("evenness", None, viol, tol.evenness, viol < tol.evenness)

    for m in range(3):
        try:
            sn = estimate_seminorm(sino, m, check_resolution=False)
            val, ok = sn.value, math.isfinite(sn.value) and sn.value < tol.seminorm_max * scale
            rep.diagnostics[f"seminorm_{m}_resolution_ratio"] = sn.resolution_ratio
        except IGTError as exc:
            val, ok = math.inf, False
            rep.diagnostics[f"seminorm_{m}"] = str(exc)
        rep.add("seminorm", m, val, tol.seminorm_max * scale, ok)

    for m in range(m_max + 1):
        try:
            res = check_moment_condition(sino, m).residual
        except IGTError as exc:
            res = math.inf
            rep.diagnostics[f"moment_{m}"] = str(exc)
        rep.add("moment", m, res, tol.moment, res < tol.moment)

    try:
        if target is None:
            target = euclid.target_grid_for(sino)
        f = range_construct_f(sino, target, tol_evenness=tol.evenness)
        again = euclid.forward_restricted(f, sino.grid, plane_order=plane_order, threads=threads)
        denom = np.linalg.norm(sino.values) or 1.0
        err = float(np.linalg.norm(again.values - sino.values) / denom)
    except IGTError as exc:
        err = math.inf
        rep.diagnostics["roundtrip"] = str(exc)
    rep.add("roundtrip", None, err, tol.roundtrip, err < tol.roundtrip)
    return rep
