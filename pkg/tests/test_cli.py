import csv
import hashlib
import json

import pytest

from igt import cli, rgrd

SMALL_GRID = {"theta_points": 16, "s_points": 64, "xpp_points": 9}


def _run(tmp_path, cmd, cfg, out="out", threads=1, capsys=None):
    p = tmp_path / f"{cmd}.json"
    p.write_text(json.dumps(cfg))
    code = cli.run([cmd, "--config", str(p), "--out", str(tmp_path / out),
                    "--threads", str(threads), "--log-level", "error"])
    return code, tmp_path / out


def _csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def _check_manifest(out):
    man = json.loads((out / "manifest.json").read_text())
    assert man["outputs"]
    for o in man["outputs"]:
        assert hashlib.sha256((out / o["path"]).read_bytes()).hexdigest() == o["sha256"]
    listed = {o["path"] for o in man["outputs"]}
    present = {p.name for p in out.iterdir()} - {"manifest.json"}
    assert listed == present
    for key in ("command", "config_sha256", "parameters", "wall_time_s", "version"):
        assert key in man
    return man


def test_forward_euclidean(tmp_path):
    code, out = _run(tmp_path, "forward-euclidean", {"grid": SMALL_GRID})
    assert code == 0
    a = rgrd.read_grid(out / "sinogram.rgrd")
    assert a.shape == (16, 64, 9)
    man = _check_manifest(out)
    assert man["command"] == "forward-euclidean"


def test_threads_bit_identical(tmp_path):
    cfgs = [("forward-euclidean", {"grid": SMALL_GRID}, "sinogram.rgrd"),
            ("forward-funk", {"v_order": 5, "zeta_order": 12}, "funk_sinogram.rgrd"),
            ("forward-hyperbolic", {"v_order": 3, "sigma_order": 3, "rho_points": 3,
                                    "orders": {"directions": 8, "radial": 8}},
             "hyperbolic_sinogram.rgrd")]
    for cmd, cfg, name in cfgs:
        _, o1 = _run(tmp_path, cmd, cfg, out=f"{cmd}-1", threads=1)
        _, o4 = _run(tmp_path, cmd, cfg, out=f"{cmd}-4", threads=4)
        assert (o1 / name).read_bytes() == (o4 / name).read_bytes()


def test_invert_euclidean_from_file(tmp_path):
    _, out = _run(tmp_path, "forward-euclidean", {"grid": SMALL_GRID})
    code, out2 = _run(tmp_path, "invert-euclidean", {
        "field": None, "sinogram": str(out / "sinogram.rgrd"), "grid": SMALL_GRID,
        "method": "dual-formula", "probes": [[0.0, 0.0, 0.0]]}, out="inv")
    assert code == 0
    rows = _csv(out2 / "report.csv")
    assert rows[0] == ["quantity", "point", "value", "reference", "abs_error"]
    assert float(rows[1][2]) == pytest.approx(1.0, abs=2e-3)


def test_invert_funk(tmp_path):
    code, out = _run(tmp_path, "invert-funk", {
        "field": {"family": "zonal-legendre", "degree": 4, "axis": [0.5, 0.5, 0.5, 0.5]},
        "v_order": 5, "zeta_order": 24, "max_degree": 8})
    assert code == 0
    assert float(_csv(out / "report.csv")[1][1]) < 1e-10


def test_check_identity_pass(tmp_path):
    code, out = _run(tmp_path, "check-identity", {"identity": "funk-duality",
                                                  "field": {"family": "constant"}})
    assert code == 0
    rows = _csv(out / "identity.csv")
    assert rows[0] == ["identity", "variant", "lhs", "rhs", "rel_error", "tolerance", "verdict"]
    assert rows[1][-1] == "pass"
    assert float(rows[1][2]) == pytest.approx(1.0)


def test_check_identity_fail_exit_3(tmp_path, capsys):
    code, out = _run(tmp_path, "check-identity", {
        "identity": "hyperbolic-duality", "n": 2, "field": {"family": "exp-decay", "a": 2.0},
        "tolerance": 1e-30})
    assert code == 3
    err = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert err["exit_code"] == 3
    assert _csv(out / "identity.csv")[1][-1] == "fail"
    _check_manifest(out)


def test_check_range_detects_odd(tmp_path):
    cfg = {"grid": {"theta_points": 64, "s_points": 128, "xpp_points": 9},
           "target_points": 33}
    code, _ = _run(tmp_path, "check-range", cfg, out="even")
    assert code == 0
    code, out = _run(tmp_path, "check-range", dict(cfg, inject_odd=1e-3), out="odd")
    assert code == 3
    verdicts = {(r[0], r[1]): r[4] for r in _csv(out / "range_report.csv")[1:]}
    assert verdicts[("evenness", "")] == "fail"


def test_scan_divergence(tmp_path):
    code, out = _run(tmp_path, "scan-divergence", {"scan": "f0", "p": 3.0})
    assert code == 0
    rows = _csv(out / "scan.csv")
    assert rows[0] == ["j", "radius", "value", "increment"]
    assert len(rows) == 1 + 12 + 1


def test_malformed_config_exit_2(tmp_path, capsys):
    code, _ = _run(tmp_path, "forward-euclidean", {"grid": {"s_pionts": 64}})
    assert code == 2
    err = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert err["exit_code"] == 2 and "grid.s_pionts" in err["message"]


def test_missing_config_exit_4(tmp_path, capsys):
    code = cli.run(["forward-euclidean", "--config", str(tmp_path / "none.json")])
    assert code == 4
    assert json.loads(capsys.readouterr().err)["exit_code"] == 4


def test_bad_rgrd_exit_4(tmp_path, capsys):
    bad = tmp_path / "bad.rgrd"
    bad.write_bytes(b"NOPE" + bytes(20))
    code, _ = _run(tmp_path, "invert-euclidean", {"field": None, "sinogram": str(bad)})
    assert code == 4
    assert json.loads(capsys.readouterr().err)["error"] == "FormatError"


def test_precondition_exit_2(tmp_path):
    code, _ = _run(tmp_path, "check-identity", {"identity": "funk-duality", "n": 4,
                                                "field": {"family": "ftilde"}})
    assert code == 2


def test_bad_thread_count(tmp_path):
    code, _ = _run(tmp_path, "scan-divergence", {}, threads=0)
    assert code == 2


def test_unknown_command():
    assert cli.run(["nope"]) == 2
