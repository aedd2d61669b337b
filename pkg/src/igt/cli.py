"""Command-line front end: ``igt <command> --config cfg.json --out dir``.

Exit codes: 0 success, 2 bad input or precondition, 3 numerical check
failed, 4 file I/O.  Errors are also written to stderr as one JSON object.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import hashlib
import json
import logging
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, config, euclid, funk, hyperbolic, range_check, rgrd
from . import numkit as nk
from .errors import IGTError, InvalidArgumentError, NumericalError

log = logging.getLogger("igt")

LOG_LEVELS = {"error": logging.ERROR, "warn": logging.WARNING, "info": logging.INFO,
              "debug": logging.DEBUG}


class CheckFailed(NumericalError):
    """A computed identity or verdict missed its tolerance."""


class Run:
    """Output directory bookkeeping: files written plus the manifest."""

    def __init__(self, out: Path, command: str, cfg, cfg_path: Path, threads: int):
        self.out = out
        self.command = command
        self.cfg = cfg
        self.cfg_path = cfg_path
        self.threads = threads
        self.outputs: list[Path] = []
        self.t0 = time.perf_counter()

    def grid(self, name, array, sidecar: dict | None = None):
        path = self.out / name
        rgrd.write_grid(path, array)
        self.outputs.append(path)
        if sidecar is not None:
            self.json(Path(name).with_suffix(".json").name, sidecar)

    def json(self, name, obj):
        path = self.out / name
        path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")
        self.outputs.append(path)

    def csv(self, name, rows):
        path = self.out / name
        with path.open("w", newline="") as fh:
            csv.writer(fh, lineterminator="\n").writerows(rows)
        self.outputs.append(path)

    def manifest(self):
        def sha(p):
            return hashlib.sha256(p.read_bytes()).hexdigest()

        man = {
            "command": self.command,
            "config": str(self.cfg_path),
            "config_sha256": sha(self.cfg_path),
            "parameters": dataclasses.asdict(self.cfg),
            "threads": self.threads,
            "wall_time_s": time.perf_counter() - self.t0,
            "version": __version__,
            "numpy": np.__version__,
            "outputs": [{"path": p.name, "sha256": sha(p)} for p in self.outputs],
        }
        (self.out / "manifest.json").write_text(json.dumps(man, indent=2, sort_keys=True) + "\n")


def _fmt(x):
    return repr(float(x))


# ---------------------------------------------------------------------------
# commands


def _euclid_sinogram(cfg, run, field):
    grid = cfg.grid.make(cfg.n, cfg.k)
    return euclid.forward_restricted(field, grid, plane_order=cfg.plane_order,
                                     threads=run.threads)


def cmd_forward_euclidean(cfg: config.ForwardEuclideanConfig, run: Run):
    sino = _euclid_sinogram(cfg, run, cfg.field.make(cfg.n, cfg.k))
    run.grid("sinogram.rgrd", sino.values, {"grid": cfg.grid.describe(cfg.n, cfg.k),
                                            "axes": ["theta", "s"] + ["xpp"] * (cfg.n - cfg.k - 1)})


def cmd_invert_euclidean(cfg: config.InvertEuclideanConfig, run: Run):
    field = cfg.field.make(cfg.n, cfg.k) if cfg.field is not None else None
    if cfg.sinogram is not None:
        grid = cfg.grid.make(cfg.n, cfg.k)
        sino = euclid.RestrictedSinogram(grid, rgrd.read_grid(cfg.sinogram))
    else:
        sino = _euclid_sinogram(cfg, run, field)
    rows = [["quantity", "point", "value", "reference", "abs_error"]]
    if cfg.method in ("fourier-slice", "both"):
        target = euclid.target_grid_for(sino, cfg.target_points, cfg.target_max)
        rec = euclid.invert_fourier_slice(sino, target, cfg.eta_points)
        run.grid("reconstruction.rgrd", rec.values,
                 {"axes": [a.tolist() for a in target.axes]})
        if field is not None:
            X = np.stack(np.meshgrid(*target.axes, indexing="ij"), axis=-1)
            ref = field(X)
            rel = np.linalg.norm(rec.values - ref) / (np.linalg.norm(ref) or 1.0)
            rows.append(["rel_l2_fourier_slice", "", _fmt(rel), "", ""])
    if cfg.method in ("dual-formula", "both"):
        for p in cfg.probes:
            p = np.asarray(p, float)
            val = euclid.invert_dual_formula_k1(sino, p[:2], p[2:], cfg.epsilon, tol=cfg.tol)
            ref = float(field(p)) if field is not None else math.nan
            rows.append(["dual_formula", " ".join(_fmt(c) for c in p), _fmt(val), _fmt(ref),
                         _fmt(abs(val - ref))])
    run.csv("report.csv", rows)


def _funk_v_points(cfg):
    return config.sphere_points(cfg.n - cfg.k - 1, cfg.v_order)


def cmd_forward_funk(cfg: config.ForwardFunkConfig, run: Run):
    f = cfg.field.make(cfg.n, cfg.k)
    sino = funk.funk_sinogram(f, cfg.n, cfg.k, _funk_v_points(cfg), cfg.zeta_order, cfg.order,
                              run.threads)
    run.grid("funk_sinogram.rgrd", sino.values,
             {"n": cfg.n, "k": cfg.k, "v_points": sino.v_points.tolist(),
              "zeta_order": cfg.zeta_order, "axes": ["v", "zeta"]})


def cmd_invert_funk(cfg: config.InvertFunkConfig, run: Run):
    f = cfg.field.make(cfg.n, cfg.k)
    vpts = _funk_v_points(cfg)
    zq = nk.make_sphere_quadrature(cfg.k + 1, cfg.zeta_order)
    if cfg.sinogram is not None:
        values = rgrd.read_grid(cfg.sinogram)
        if values.shape != (len(vpts), len(zq)):
            raise InvalidArgumentError("sinogram shape does not match v_order and zeta_order")
    else:
        values = funk.funk_sinogram(f, cfg.n, cfg.k, vpts, cfg.zeta_order, cfg.order,
                                    run.threads).values

    def one(i):
        fv = funk.funk_invert_slice(values[i], zq, cfg.max_degree)
        return fv(zq.points)

    rec = np.stack(nk.parallel_map(one, range(len(vpts)), run.threads))
    run.grid("funk_reconstruction.rgrd", rec,
             {"points": "f(block_rotation(v_i) zeta_j)", "v_points": vpts.tolist(),
              "zeta_order": cfg.zeta_order})
    # the slice transform only sees the even part of f
    pts = [funk.rotate_slice(v, zq.points, cfg.n, cfg.k) for v in vpts]
    ref = np.stack([0.5 * (f(x) + f(-x)) for x in pts])
    run.csv("report.csv", [["quantity", "value"],
                           ["max_abs_error_even_part", _fmt(np.max(np.abs(rec - ref)))]])


def cmd_forward_hyperbolic(cfg: config.ForwardHyperbolicConfig, run: Run):
    n, k = cfg.n, cfg.k
    f = cfg.field.make(n)
    vpts = config.sphere_points(n - k - 1, cfg.v_order)
    sig = config.sphere_points(k, cfg.sigma_order)
    rho = np.linspace(-cfg.rho_max, cfg.rho_max, cfg.rho_points)
    orders = cfg.orders.orders()

    def row(v):
        out = np.empty((len(sig), len(rho)))
        for i, s in enumerate(sig):
            for j, r in enumerate(rho):
                zeta = hyperbolic.one_sheet_point(s, r)
                w = hyperbolic.rotate_slice(v, zeta, n, k)
                el = hyperbolic.HyperbolicComplexElement(n, k, v, w)
                out[i, j] = hyperbolic.hradon_forward_restricted(f, el, cfg.orders.r_max, orders)
        return out

    vals = np.stack(nk.parallel_map(row, list(vpts), run.threads))
    run.grid("hyperbolic_sinogram.rgrd", vals,
             {"n": n, "k": k, "v_points": vpts.tolist(), "sigma_points": sig.tolist(),
              "rho": rho.tolist(), "axes": ["v", "sigma", "rho"],
              "element": "w = block_rotation(v) (sigma cosh rho + e sinh rho)"})


def cmd_check_range(cfg: config.CheckRangeConfig, run: Run):
    sino = _euclid_sinogram(cfg, run, cfg.field.make(cfg.n, cfg.k))
    if cfg.inject_odd:
        s = sino.grid.s.nodes
        bump = (s * np.exp(-s * s)).reshape((1, -1) + (1,) * (sino.values.ndim - 2))
        sino = euclid.RestrictedSinogram(sino.grid, sino.values + cfg.inject_odd * bump)
    tol = range_check.RangeTolerances(**dataclasses.asdict(cfg.tolerances))
    target = euclid.target_grid_for(sino, cfg.target_points)
    rep = range_check.range_verdict(sino, cfg.m_max, tol, target, cfg.plane_order, run.threads)
    run.csv("range_report.csv", rep.csv_rows())
    if rep.diagnostics:
        run.json("range_diagnostics.json", rep.diagnostics)
    if not rep.in_range:
        failed = [f"{r['criterion']}{'' if r['m'] is None else r['m']}" for r in rep.rows
                  if r["verdict"] == "fail"]
        raise CheckFailed(f"not in range: {', '.join(failed)}")


def cmd_check_identity(cfg: config.CheckIdentityConfig, run: Run):
    spec = cfg.field_spec()
    rows = [["identity", "variant", "lhs", "rhs", "rel_error", "tolerance", "verdict"]]
    orders = cfg.orders.orders()
    checks = []
    if cfg.identity == "funk-duality":
        c = funk.duality_identity_check(spec.make(cfg.n, cfg.k), cfg.n, cfg.k)
        checks.append(("", c.lhs, c.rhs, c.rel_error))
    elif cfg.identity == "hyperbolic-duality":
        sigmas = cfg.sigmas or [np.eye(cfg.n)[0].tolist(), (np.ones(cfg.n) / math.sqrt(cfg.n)).tolist()]
        for s in sigmas:
            s = np.asarray(s, float)
            c = hyperbolic.duality_identity_h(spec.make(cfg.n), cfg.n, s / np.linalg.norm(s),
                                              cfg.rho_max, cfg.orders.r_max, orders)
            checks.append(("sigma=" + " ".join(_fmt(x) for x in s), c.lhs, c.rhs, c.rel_error))
    elif cfg.identity == "hyperbolic-slice":
        c = hyperbolic.slice_identity_check(spec.make(cfg.n), cfg.n, cfg.k, cfg.orders.r_max,
                                            orders)
        checks.append(("", c.lhs, c.rhs, c.rel_error))
    elif cfg.identity == "hyperbolic-measure":
        mc = hyperbolic.measure_decompositions(spec.make(cfg.n), cfg.n, cfg.orders.r_max, orders)
        base = mc.values["k=0"]
        for label, v in mc.values.items():
            checks.append((label, v, base, abs(v - base) / abs(base)))
    else:  # projection-slice
        field = spec.make(cfg.n, cfg.k)
        if not isinstance(field, euclid.GaussianField):
            raise InvalidArgumentError("field: the projection-slice check needs a gaussian field")
        sino = _euclid_sinogram(cfg_like(cfg), run, field)
        eta = np.linspace(0.0, 4.0, 33)
        err = euclid.projection_slice_error(sino, field.partial_fourier, eta)
        checks.append(("sup", math.nan, math.nan, err))
    ok = True
    for variant, lhs, rhs, rel in checks:
        good = rel < cfg.tolerance
        ok &= good
        rows.append([cfg.identity, variant, _fmt(lhs), _fmt(rhs), _fmt(rel), _fmt(cfg.tolerance),
                     "pass" if good else "fail"])
    run.csv("identity.csv", rows)
    if not ok:
        raise CheckFailed(f"{cfg.identity}: relative error above {cfg.tolerance:g}")


def cfg_like(cfg):
    """Adapter giving identity configs the fields used by _euclid_sinogram."""
    return dataclasses.make_dataclass("C", ["n", "k", "grid", "plane_order"])(
        cfg.n, cfg.k, cfg.grid, 64)


def cmd_scan_divergence(cfg: config.ScanDivergenceConfig, run: Run):
    if cfg.scan == "f0":
        radii = 2.0 ** np.arange(cfg.j_min, cfg.j_max + 1)
        T = euclid.divergence_scan_f0(cfg.n, cfg.k, cfg.p, cfg.delta, radii)
        rows = [["j", "radius", "value", "increment"]]
        for j, (r, t) in enumerate(zip(radii, T)):
            rows.append([cfg.j_min + j, _fmt(r), _fmt(t), _fmt(t - T[j - 1]) if j else ""])
        rows.append(["summary", "ratio_last_first", _fmt(T[-1] / T[0]),
                     "increasing" if euclid.is_strictly_increasing(T) else "not-increasing"])
        run.csv("scan.csv", rows)
    else:
        eps = 2.0 ** -np.arange(cfg.eps_j_min, cfg.eps_j_max + 1)
        sc = funk.counterexample_scan_ftilde(cfg.n, cfg.k, cfg.p, eps, cfg.h)
        rows = [["kind", "cutoff", "value", "closed_form"]]
        for u, v in zip(sc.norm_cutoffs, sc.norm_values):
            rows.append(["norm", _fmt(u), _fmt(v),
                         "" if sc.norm_closed_form is None else _fmt(sc.norm_closed_form)])
        for e, v, c in zip(sc.eps, sc.funk_values, sc.funk_closed_form):
            rows.append(["funk", _fmt(e), _fmt(v), _fmt(c)])
        run.csv("scan.csv", rows)


HANDLERS = {
    "forward-euclidean": cmd_forward_euclidean,
    "invert-euclidean": cmd_invert_euclidean,
    "forward-funk": cmd_forward_funk,
    "invert-funk": cmd_invert_funk,
    "forward-hyperbolic": cmd_forward_hyperbolic,
    "check-range": cmd_check_range,
    "check-identity": cmd_check_identity,
    "scan-divergence": cmd_scan_divergence,
}


# ---------------------------------------------------------------------------
# entry point


def parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="igt", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"igt {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name in HANDLERS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, type=Path)
        sp.add_argument("--out", type=Path, default=Path("."))
        sp.add_argument("--threads", type=int, default=os.cpu_count() or 1)
        sp.add_argument("--log-level", choices=list(LOG_LEVELS), default="warn")
    return p


def exit_code(exc: BaseException) -> int:
    if isinstance(exc, InvalidArgumentError):
        return 2
    if isinstance(exc, (NumericalError, ArithmeticError)):
        return 3
    if isinstance(exc, OSError):
        return 4
    return 1


def _report(exc: BaseException, code: int):
    json.dump({"error": type(exc).__name__, "message": str(exc), "exit_code": code}, sys.stderr)
    sys.stderr.write("\n")


def run(argv=None) -> int:
    try:
        args = parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) if exc.code in (0, None) else 2
    logging.basicConfig(level=LOG_LEVELS[args.log_level], format="%(levelname)s %(message)s")
    try:
        if args.threads < 1:
            raise InvalidArgumentError("--threads must be >= 1")
        if not args.config.is_file():
            raise FileNotFoundError(f"config file {args.config} not found")
        cfg = config.load(config.COMMANDS[args.command], args.config)
        args.out.mkdir(parents=True, exist_ok=True)
        r = Run(args.out, args.command, cfg, args.config, args.threads)
        log.info("running %s with %d threads", args.command, args.threads)
        try:
            HANDLERS[args.command](cfg, r)
        finally:
            if r.outputs:
                r.manifest()
    except (IGTError, OSError, ArithmeticError) as exc:
        code = exit_code(exc)
        _report(exc, code)
        return code
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
