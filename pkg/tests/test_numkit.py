import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import special

from igt import numkit as nk
from igt.errors import (AliasingRiskError, InvalidArgumentError, TruncationWarning,
                        UnsupportedDimensionError)


def test_sphere_surface_area_values():
    assert nk.sphere_surface_area(0) == pytest.approx(2.0)
    assert nk.sphere_surface_area(1) == pytest.approx(2 * math.pi)
    assert nk.sphere_surface_area(2) == pytest.approx(4 * math.pi)
    assert nk.sphere_surface_area(3) == pytest.approx(2 * math.pi ** 2)
    with pytest.raises(InvalidArgumentError):
        nk.sphere_surface_area(-1)


def test_circle_quadrature_order_seven():
    q = nk.make_sphere_quadrature(1, 7)
    assert len(q) == 8
    np.testing.assert_allclose(q.weights, 1 / 8)
    np.testing.assert_allclose(np.linalg.norm(q.points, axis=1), 1.0)


def test_s2_second_moment():
    q = nk.make_sphere_quadrature(2, 16)
    assert q.integrate(q.points[:, 2] ** 2) == pytest.approx(1 / 3, abs=1e-14)


@pytest.mark.parametrize("d", [1, 2, 3])
def test_sphere_rule_total_measure(d):
    q = nk.make_sphere_quadrature(d, 10, normalized=False)
    assert q.total_measure == pytest.approx(nk.sphere_surface_area(d), rel=1e-13)


def test_s0_rule():
    q = nk.make_sphere_quadrature(0, 4)
    np.testing.assert_array_equal(np.sort(q.points[:, 0]), [-1.0, 1.0])


@pytest.mark.parametrize("d,order", [(1, 9), (2, 12), (3, 8)])
def test_sphere_rule_is_antipodally_closed(d, order):
    q = nk.make_sphere_quadrature(d, order)
    ant = q.antipodes
    assert ant is not None
    np.testing.assert_array_equal(q.points[ant], -q.points)


def test_unsupported_sphere_dimension():
    with pytest.raises(UnsupportedDimensionError):
        nk.make_sphere_quadrature(4, 8)


@given(st.tuples(*[st.integers(0, 4)] * 3))
def test_s2_monomials_match_closed_form(a):
    q = nk.make_sphere_quadrature(2, 14, normalized=False)
    vals = np.prod(q.points ** np.array(a), axis=1)
    assert q.integrate(vals) == pytest.approx(nk.sphere_moment(a), abs=1e-12)


@given(st.tuples(*[st.integers(0, 3)] * 4))
def test_s3_monomials_match_closed_form(a):
    q = nk.make_sphere_quadrature(3, 14, normalized=False)
    vals = np.prod(q.points ** np.array(a), axis=1)
    assert q.integrate(vals) == pytest.approx(nk.sphere_moment(a), abs=1e-12)


def test_gauss_legendre_polynomial_exactness():
    g = nk.gauss_legendre(-1.0, 2.0, 6)
    assert g.integrate(g.nodes ** 11) == pytest.approx((2 ** 12 - 1) / 12, rel=1e-13)
    assert g.is_symmetric is False
    assert nk.gauss_legendre(-1.0, 1.0, 7).is_symmetric


def test_trapezoid_symmetry_and_spacing():
    g = nk.uniform_trapezoid(-8.0, 8.0, 129)
    assert g.is_symmetric
    assert g.spacing == pytest.approx(0.125)
    assert 0.0 in g.nodes
    with pytest.raises(InvalidArgumentError):
        nk.gauss_legendre(0, 1, 4).spacing


def test_grid_validation():
    with pytest.raises(InvalidArgumentError):
        nk.Grid1D(np.array([0.0, 0.0]), np.array([1.0, 1.0]), "gauss-legendre")
    with pytest.raises(InvalidArgumentError):
        nk.Grid1D(np.array([0.0, 1.0]), np.array([1.0, -1.0]), "gauss-legendre")
    with pytest.raises(InvalidArgumentError):
        nk.Grid1D(np.array([0.0, 1.0]), np.array([1.0, 1.0]), "simpson")


def test_dft_matches_definition(rng):
    x = rng.normal(size=12) + 1j * rng.normal(size=12)
    j = np.arange(12)
    for sign in (1, -1):
        ref = np.exp(sign * 2j * np.pi * np.outer(j, j) / 12) @ x
        np.testing.assert_allclose(nk.dft_1d(x, sign), ref, atol=1e-12)
    with pytest.raises(InvalidArgumentError):
        nk.dft_1d(x, 0)


def test_continuous_ft_of_gaussian():
    g = nk.uniform_trapezoid(-8.0, 8.0, 257)
    ft = nk.continuous_ft_1d(np.exp(-g.nodes ** 2), g, [0.0, 2.0])
    np.testing.assert_allclose(ft, [math.sqrt(math.pi), math.sqrt(math.pi) * math.exp(-1)],
                               rtol=1e-12)


def test_continuous_ft_warns_on_truncation():
    g = nk.uniform_trapezoid(-2.0, 2.0, 65)
    with pytest.warns(TruncationWarning):
        nk.continuous_ft_1d(np.exp(-g.nodes ** 2), g, [0.0])


@pytest.mark.parametrize("d", [1, 2, 3])
def test_harmonic_basis_is_orthonormal(d):
    L = 5
    q = nk.make_sphere_quadrature(d, 2 * L + 2, normalized=False)
    Y = np.concatenate(nk.harmonic_basis(q.points, d, L), axis=1)
    G = Y.T @ (Y * q.weights[:, None])
    np.testing.assert_allclose(G, np.eye(Y.shape[1]), atol=1e-12)
    assert Y.shape[1] == sum(nk.harmonic_dimension(d, m) for m in range(L + 1))


def test_harmonic_dimensions():
    assert [nk.harmonic_dimension(2, m) for m in range(5)] == [1, 3, 5, 7, 9]
    assert [nk.harmonic_dimension(3, m) for m in range(4)] == [1, 4, 9, 16]
    assert nk.harmonic_dimension(1, 3) == 2


def test_harmonic_roundtrip(rng):
    q = nk.make_sphere_quadrature(2, 16)
    coeffs = [rng.normal(size=nk.harmonic_dimension(2, m)) for m in range(7)]
    spec = nk.HarmonicSpectrum(2, 6, coeffs)
    back = nk.harmonic_analyze(spec.synthesize(q.points), q, 6)
    for a, b in zip(back.coeffs, coeffs):
        np.testing.assert_allclose(a, b, atol=1e-12)


def test_harmonic_analyze_rejects_aliasing():
    q = nk.make_sphere_quadrature(2, 8)
    with pytest.raises(AliasingRiskError):
        nk.harmonic_analyze(np.ones(len(q)), q, 6)


@pytest.mark.parametrize("m", range(0, 13))
def test_legendre_at_zero(m):
    assert nk.legendre_p_at_zero(m) == pytest.approx(special.eval_legendre(m, 0.0), abs=1e-15)


def test_legendre_at_zero_first_values():
    assert [nk.legendre_p_at_zero(m) for m in (0, 2, 4)] == pytest.approx([1, -0.5, 0.375])


def test_parallel_map_is_thread_independent(rng):
    items = [rng.normal(size=1000) for _ in range(9)]
    a = nk.parallel_map(nk.dsum, items, 1)
    b = nk.parallel_map(nk.dsum, items, 4)
    assert [x.tobytes() for x in a] == [x.tobytes() for x in b]


@pytest.mark.parametrize("order", [2, 5, 8, 11])
def test_circle_rule_exact_to_order(order):
    q = nk.make_sphere_quadrature(1, order)
    phi = np.arctan2(q.points[:, 1], q.points[:, 0])
    for m in range(1, order + 1):
        assert abs(q.integrate(np.cos(m * phi))) < 1e-14
    # eight equispaced nodes cannot integrate cos(8 phi) to zero
    eight = nk.circle_quadrature(8)
    phi8 = np.arctan2(eight.points[:, 1], eight.points[:, 0])
    assert eight.integrate(np.cos(8 * phi8)) == pytest.approx(1.0)
