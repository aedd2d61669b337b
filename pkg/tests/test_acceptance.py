"""Acceptance criteria 1-8, each reported as one PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v``; the summary section at
the end of the session repeats every line.
"""
import json
import time

import numpy as np

from igt import cli, rgrd
from igt import euclid as E
from igt import funk as F
from igt import hyperbolic as H
from igt import numkit as nk
from igt import range_check as R


def _gaussian_setup():
    f = E.GaussianField(3, 1)
    grid = E.make_sinogram_grid(3, 1, theta_points=64, s_points=128, s_max=8.0)
    return f, grid


def test_criterion_1_projection_slice(acceptance):
    t0 = time.perf_counter()
    f, grid = _gaussian_setup()
    sino = E.forward_restricted(f, grid)
    err = E.projection_slice_error(sino, f.partial_fourier, np.linspace(0.0, 8.0, 65))
    dt = time.perf_counter() - t0
    assert acceptance("1 projection-slice", err < 1e-6, f"sup rel error {err:.2e} < 1e-6", dt, 10)


def test_criterion_2_euclidean_inversion(acceptance):
    t0 = time.perf_counter()
    f, grid = _gaussian_setup()
    sino = E.forward_restricted(f, grid)
    target = E.target_grid_for(sino)
    rec = E.invert_fourier_slice(sino, target)
    X = np.stack(np.meshgrid(*target.axes, indexing="ij"), axis=-1)
    ref = f(X)
    rel = np.linalg.norm(rec.values - ref) / np.linalg.norm(ref)
    probes = [(0.0, 0.0, 0.0), (1.0, 0.0, 0.0), (0.5, -0.3, 0.0), (0.0, 1.0, 0.5),
              (-0.7, 0.2, -1.0)]
    errs = [abs(E.invert_dual_formula_k1(sino, p[:2], [p[2]]) - f(np.array(p)))
            for p in probes]
    dt = time.perf_counter() - t0
    ok = rel < 1e-3 and max(errs) < 2e-3
    assert acceptance("2 euclidean inversion", ok,
                      f"fourier-slice rel L2 {rel:.2e} < 1e-3, dual formula max abs "
                      f"{max(errs):.2e} < 2e-3 at 5 probes", dt, 60)


def test_criterion_3_range(acceptance):
    t0 = time.perf_counter()
    f, grid = _gaussian_setup()
    sino = E.forward_restricted(f, grid)
    rep = R.range_verdict(sino, m_max=4)
    s = grid.s.nodes
    odd = E.RestrictedSinogram(grid, sino.values + 1e-3 * (s * np.exp(-s * s))[None, :, None])
    rep_odd = R.range_verdict(odd, m_max=4)
    dt = time.perf_counter() - t0
    checks = ([rep.verdict("evenness")] + [rep.verdict("moment", m) for m in range(5)]
              + [rep.verdict("roundtrip")])
    ok = all(c == "pass" for c in checks) and not rep_odd.in_range
    values = {(r["criterion"], r["m"]): r["value"] for r in rep.rows}
    worst_moment = max(values[("moment", m)] for m in range(5))
    assert acceptance("3 range", ok,
                      f"evenness {values[('evenness', None)]:.1e}, moments <= {worst_moment:.1e}, "
                      f"roundtrip {values[('roundtrip', None)]:.1e}; odd perturbation "
                      f"{'detected' if not rep_odd.in_range else 'missed'}", dt, 60)


def test_criterion_4_funk_duality(acceptance):
    t0 = time.perf_counter()
    const = F.duality_identity_check(F.ConstantSphereField(3), 3, 1)
    zonal = F.duality_identity_check(
        F.ZonalProfileField(3, axis=np.array([0.5, 0.5, 0.5, 0.5]), a=1.0), 3, 1)
    c = F.duality_constant(3, 1)
    dt = time.perf_counter() - t0
    ok = const.rel_error < 1e-4 and zonal.rel_error < 1e-3 and abs(c - 0.5) < 1e-15
    assert acceptance("4 funk duality", ok,
                      f"constant {const.rel_error:.1e} < 1e-4 (C = {c:g}), even zonal "
                      f"{zonal.rel_error:.1e} < 1e-3", dt, 30)


def test_criterion_5_funk_hecke(acceptance):
    t0 = time.perf_counter()
    q = nk.make_sphere_quadrature(2, 24)
    expected = {0: 1.0, 2: -0.5, 4: 0.375}
    mult_err = 0.0
    for m, mu in expected.items():
        Y = F.spherical_harmonic_field(2, m)
        y = Y(q.points)
        FY = F.sphere_funk_transform(Y, q.points, 64)
        mult_err = max(mult_err, abs(float(FY @ y / (y @ y)) - mu),
                       abs(nk.legendre_p_at_zero(m) - mu))
    rng = np.random.default_rng(5)
    q20 = nk.make_sphere_quadrature(2, 20)
    rt = 0.0
    for _ in range(3):
        coeffs = [rng.normal(size=nk.harmonic_dimension(2, m)) * (m % 2 == 0) for m in range(9)]
        f = F.SpectralSphereField(nk.HarmonicSpectrum(2, 8, coeffs))
        phi = F.sphere_funk_transform(f, q20.points, 64)
        back = F.funk_invert_slice(phi, q20, 8)
        rt = max(rt, float(np.max(np.abs(back(q20.points) - f(q20.points)))))
    dt = time.perf_counter() - t0
    ok = mult_err < 1e-8 and rt < 1e-8
    assert acceptance("5 funk-hecke", ok,
                      f"multipliers 1, -1/2, 3/8 within {mult_err:.1e} < 1e-8, inversion "
                      f"roundtrip {rt:.1e} < 1e-8", dt, 10)


def test_criterion_6_hyperbolic(acceptance):
    t0 = time.perf_counter()
    f2 = H.ExpDecayField(2, 2.0)
    d1 = H.duality_identity_h(f2, 2, np.array([1.0, 0.0]))
    d2 = H.duality_identity_h(f2, 2, np.array([0.6, 0.8]))
    spread = abs(d1.lhs - d2.lhs) / abs(d1.lhs)
    sl = H.slice_identity_check(H.ExpDecayField(3, 1.0), 3, 1)
    mc = H.measure_decompositions(H.ExpDecayField(3, 1.0), 3)
    dt = time.perf_counter() - t0
    dual = max(d1.rel_error, d2.rel_error)
    ok = dual < 1e-3 and spread < 1e-6 and sl.rel_error < 1e-3 and mc.max_rel_spread < 1e-6
    assert acceptance("6 hyperbolic identities", ok,
                      f"duality {dual:.1e} < 1e-3, sigma spread {spread:.1e} < 1e-6, slice "
                      f"{sl.rel_error:.1e} < 1e-3, measures {mc.max_rel_spread:.1e} < 1e-6",
                      dt, 120)


def test_criterion_7a_f0_divergence(acceptance):
    # k = 1: divergent regime starts at p = (k+1)/k = 2
    t0 = time.perf_counter()
    radii = 2.0 ** np.arange(1, 13)
    parts, ok = [], True
    for p in (2.0, 3.0):
        T = E.divergence_scan_f0(3, 1, p, 0.25, radii)
        ratio = T[-1] / T[0]
        inc = E.is_strictly_increasing(T)
        ok &= inc and ratio > 5
        parts.append(f"p={p:g}: increasing={inc}, T(4096)/T(2)={ratio:.3f}")
    dt = time.perf_counter() - t0
    assert acceptance("7a f0 divergence (ratio > 5)", ok, "; ".join(parts), dt, 60)


def test_criterion_7b_f0_convergence(acceptance):
    t0 = time.perf_counter()
    T = E.divergence_scan_f0(3, 1, 1.2, 0.1, 2.0 ** np.arange(1, 40))
    settles = E.cauchy_settles(T, 1e-6)
    last = abs(T[-1] - T[-2]) / abs(T[-1])
    dt = time.perf_counter() - t0
    assert acceptance("7b f0 convergence at p=1.2", settles,
                      f"last increment {last:.1e} of T, Lambda up to 2^39", dt, 60)


def test_criterion_7c_ftilde(acceptance):
    t0 = time.perf_counter()
    sc = F.counterexample_scan_ftilde(4, 1)
    inc = np.diff(sc.funk_values)
    finite = sc.norm_cauchy < 1e-8 and abs(sc.norm_values[-1] - sc.norm_closed_form) < 1e-6
    diverges = bool(np.all(inc > 0) and inc[-1] > 1e-2
                    and np.allclose(sc.funk_values, sc.funk_closed_form, rtol=1e-10))
    dt = time.perf_counter() - t0
    assert acceptance("7c ftilde", finite and diverges,
                      f"||f~||_p^p -> {sc.norm_values[-1]:.8f} (Cauchy {sc.norm_cauchy:.1e}); "
                      f"Funk increments stay >= {inc[-1]:.3f}", dt, 60)


def test_criterion_8_infrastructure(acceptance, tmp_path):
    t0 = time.perf_counter()
    rng = np.random.default_rng(8)
    arrays = [rng.normal(size=(3, 4, 5)), np.array([np.nan, -0.0, np.inf, 1e-310]),
              rng.normal(size=(2,) * 8)]
    rt = all(rgrd.decode(rgrd.encode(a)).tobytes() == a.tobytes() for a in arrays)
    cfg = tmp_path / "gauss3d.json"
    cfg.write_text(json.dumps({"n": 3, "k": 1, "field": {"family": "gaussian",
                                                         "center": [0.3, -0.2, 0.1]}}))
    outs = []
    for t in (1, 4):
        code = cli.run(["forward-euclidean", "--config", str(cfg), "--out",
                        str(tmp_path / f"t{t}"), "--threads", str(t), "--log-level", "error"])
        assert code == 0
        outs.append((tmp_path / f"t{t}" / "sinogram.rgrd").read_bytes())
    same = outs[0] == outs[1]
    dt = time.perf_counter() - t0
    assert acceptance("8 infrastructure", rt and same,
                      f"RGRD roundtrip bit-exact={rt}, threads 1 vs 4 bit-identical={same}",
                      dt, 60)
