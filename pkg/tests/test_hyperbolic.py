import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special

from igt import hyperbolic as H
from igt.errors import (DegeneratePointError, DivergenceWarning, InvalidArgumentError,
                        PreconditionError, TruncationError, UnsupportedDimensionError)

J3 = np.diag([-1.0, -1.0, -1.0, 1.0])


def _unit(v):
    v = np.asarray(v, float)
    return v / np.linalg.norm(v)


def test_lorentz_inner_and_distance():
    o = np.array([0.0, 0.0, 1.0])
    x = H.hpoint(np.array([0.6, 0.8]), 1.3)
    assert H.lorentz_inner(x, x) == pytest.approx(1.0, abs=1e-13)
    assert H.geodesic_distance(o, x) == pytest.approx(1.3, abs=1e-12)
    with pytest.raises(InvalidArgumentError):
        H.geodesic_distance(o, -x)


def test_polar_roundtrip():
    th, r = H.hpolar(H.hpoint(_unit([1, -2, 2]), 0.7))
    np.testing.assert_allclose(th, _unit([1, -2, 2]), atol=1e-14)
    assert r == pytest.approx(0.7)


def test_one_sheet_params_roundtrip():
    y = H.one_sheet_point(_unit([0.6, 0.8, 0.0]), -0.9)
    assert H.lorentz_inner(y, y) == pytest.approx(-1.0, abs=1e-13)
    s, rho = H.one_sheet_params(y)
    np.testing.assert_allclose(s, [0.6, 0.8, 0.0], atol=1e-14)
    assert rho == pytest.approx(-0.9)


@settings(max_examples=30)
@given(st.lists(st.floats(-1, 1), min_size=3, max_size=3).filter(lambda v: np.linalg.norm(v) > 0.1),
       st.floats(-10, 10))
def test_lorentz_frame_is_lorentz_orthonormal(sigma, rho):
    y = H.one_sheet_point(_unit(sigma), rho)
    F = H.lorentz_frame(y)
    scale = max(1.0, float(np.max(np.abs(F))) ** 2)
    assert np.max(np.abs(F.T @ J3 @ F - J3)) < 1e-10 * scale
    np.testing.assert_array_equal(F[:, 2], y)
    assert F[-1, -1] > 0


def test_lorentz_frame_rejects_timelike():
    with pytest.raises(InvalidArgumentError):
        H.lorentz_frame(np.array([0.0, 0.0, 0.0, 1.0]))


@pytest.mark.parametrize("n,a", [(2, 1.0), (2, 2.0), (3, 1.0), (3, 2.0)])
def test_measure_decompositions_against_closed_form(n, a):
    mc = H.measure_decompositions(H.ExpDecayField(n, a), n)
    ref = 2 * math.pi / a if n == 2 else 4 * math.pi * math.exp(a) * special.k1(a) / a
    for v in mc.values.values():
        assert v == pytest.approx(ref, rel=1e-10)
    assert mc.max_rel_spread < 1e-6


@pytest.mark.parametrize("sigma,rho", [([1, 0, 0], 0.0), ([0.6, 0.8, 0], 0.7),
                                       ([0, 0, 1], -1.5)])
def test_radon_of_exp_decay_on_h3(sigma, rho):
    # xi_y is a copy of H^2 at distance |rho| from the origin
    a = 1.0
    y = H.one_sheet_point(_unit(sigma), rho)
    c = math.cosh(rho)
    ref = 2 * math.pi * math.exp(a - a * c) / (a * c)
    assert H.hyperbolic_radon(H.ExpDecayField(3, a), y) == pytest.approx(ref, rel=1e-10)


@pytest.mark.parametrize("rho", [0.0, 0.5, 2.0])
def test_radon_of_exp_decay_on_h2(rho):
    a = 2.0
    y = H.one_sheet_point(np.array([0.0, 1.0]), rho)
    ref = 2 * math.exp(a) * special.k0(a * math.cosh(rho))
    assert H.hyperbolic_radon(H.ExpDecayField(2, a), y) == pytest.approx(ref, rel=1e-9)


@pytest.mark.parametrize("v,w", [([0, 1.0], [0, 0, 1.0, 0]), ([0, 1.0], [0, 1.0, 0, 0]),
                                 ([0, -1.0], [0, 0, -1.0, 0])])
def test_restricted_geodesic_through_origin(v, w):
    f = H.ExpDecayField(3, 1.0)
    el = H.HyperbolicComplexElement(3, 1, np.array(v), np.array(w))
    assert H.hradon_forward_restricted(f, el) == pytest.approx(2 * math.e * special.k0(1.0),
                                                               rel=1e-10)


def test_element_validation():
    with pytest.raises(InvalidArgumentError):
        H.HyperbolicComplexElement(3, 1, np.array([0, 1.0]), np.array([1.0, 0, 0, 0]))
    with pytest.raises(InvalidArgumentError):
        H.HyperbolicComplexElement(3, 1, np.array([0, 1.0]), np.array([0, 0, 0, 1.0]))
    with pytest.raises(UnsupportedDimensionError):
        H.HyperbolicComplexElement(3, 3, np.array([]), np.eye(4)[0])


def test_duality_n2_sigma_independent():
    f = H.ExpDecayField(2, 2.0)
    a = H.duality_identity_h(f, 2, np.array([1.0, 0.0]))
    b = H.duality_identity_h(f, 2, np.array([0.6, 0.8]))
    assert a.rel_error < 1e-3 and b.rel_error < 1e-3
    assert abs(a.lhs - b.lhs) / abs(a.lhs) < 1e-6


def test_duality_rhs_closed_form():
    # int_{H^2} e^{a(1 - x3)} / x3 dx = 2 pi e^a E_1(a)
    a = 2.0
    c = H.duality_identity_h(H.ExpDecayField(2, a), 2)
    assert c.rhs == pytest.approx(2 * math.pi * math.exp(a) * special.exp1(a), rel=1e-10)


def test_slice_identity_n3():
    c = H.slice_identity_check(H.ExpDecayField(3, 1.0), 3, 1)
    # lhs = |S^1| * int_{H^2} e^{1 - x3} = 2 pi * 2 pi
    assert c.lhs == pytest.approx(4 * math.pi ** 2, rel=1e-10)
    assert c.rel_error < 1e-3


def test_slice_identity_n4():
    assert H.slice_identity_check(H.ExpDecayField(4, 2.0), 4, 2).rel_error < 1e-6


def test_slice_identity_slow_decay_is_rejected():
    with pytest.raises(PreconditionError):
        H.slice_identity_check(H.PowerDecayField(3, 1.5), 3, 1, r_max=8.0)


def test_truncation_error_and_warning():
    q = H.hpolar_quadrature(2, 0, 6.0)
    f = H.PowerDecayField(2, 1.2)
    with pytest.raises(TruncationError):
        q.integrate(f)
    with pytest.warns(DivergenceWarning):
        q.integrate(f, on_tail="warn")


def test_reconstruct_coordinates():
    x = np.array([0.3, 0.4, 0.2, 0.0])
    x[-1] = math.sqrt(1 + x[:-1] @ x[:-1])
    v, eta, M = H.reconstruct_coordinates(x, 3, 1)
    np.testing.assert_allclose(v, [0.6, 0.8], atol=1e-15)
    np.testing.assert_allclose(M @ eta, x, atol=1e-14)
    o = np.array([0.0, 0.0, 0.5, math.sqrt(1.25)])
    with pytest.raises(DegeneratePointError):
        H.reconstruct_coordinates(o, 3, 1)


def test_sampled_field_matches_analytic():
    from igt import numkit as nk
    n = 2
    r = np.linspace(0, 12, 97)
    q = nk.make_sphere_quadrature(n - 1, 16)
    f = H.ExpDecayField(n, 1.0)
    vals = f(H.hpoint(q.points[None, :, :], r[:, None]))
    sf = H.SampledHField(n, r, q, vals)
    x = H.hpoint(_unit([0.3, 0.7]), 1.234)
    assert sf(x) == pytest.approx(f(x), rel=1e-6)
