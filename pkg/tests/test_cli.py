import json
import subprocess
import sys

import numpy as np
import pytest

from rfi_scrub.cli import run
from rfi_scrub.image_io import HEADER, read_cimg, write_cimg


@pytest.fixture
def spec(tmp_path):
    p = tmp_path / "spec.json"
    p.write_text(json.dumps({"rows": 64, "cols": 64, "sir_db": 0.0, "seed": 3}))
    return p


def simulate(tmp_path, spec, *extra):
    clean, corrupt = tmp_path / "clean.cimg", tmp_path / "corrupt.cimg"
    code = run(["simulate", "--spec", str(spec), "--out-clean", str(clean), "--out-corrupt", str(corrupt),
                *extra])
    assert code == 0
    return clean, corrupt


def error_of(capsys):
    return json.loads(capsys.readouterr().err.strip().splitlines()[-1])


def test_metrics_at_zero_sir(tmp_path, spec):
    clean, corrupt = simulate(tmp_path, spec)
    rep = tmp_path / "m.json"
    assert run(["metrics", "--test", str(corrupt), "--ref", str(clean), "--report", str(rep)]) == 0
    out = json.loads(rep.read_text())
    assert out["rel_err_db"] == pytest.approx(0.0, abs=1e-6)
    assert out["sir_db"] == pytest.approx(0.0, abs=1e-6)
    assert out["ag"] > 0


def test_suppress_clean_image_is_byte_identical(tmp_path, spec):
    clean, _ = simulate(tmp_path, spec)
    out = tmp_path / "s.cimg"
    rep = tmp_path / "r.json"
    assert run(["suppress", "--in", str(clean), "--out", str(out), "--report", str(rep)]) == 0
    assert out.read_bytes()[HEADER.size:] == clean.read_bytes()[HEADER.size:]
    assert json.loads(rep.read_text())["status"] == "no-interference"


def test_suppress_keeps_precision_and_reduces_error(tmp_path, spec):
    clean, corrupt = simulate(tmp_path, spec, "--precision", "32")
    out, rfi = tmp_path / "s.cimg", tmp_path / "r.cimg"
    assert run(["suppress", "--in", str(corrupt), "--out", str(out), "--rfi-out", str(rfi)]) == 0
    assert out.read_bytes()[14] == 0
    S, C, X = read_cimg(out), read_cimg(clean), read_cimg(corrupt)
    assert np.linalg.norm(S - C) < 0.5 * np.linalg.norm(X - C)
    np.testing.assert_allclose(read_cimg(rfi) + S, X, atol=1e-5)


def test_estimate_report(tmp_path, spec):
    _, corrupt = simulate(tmp_path, spec)
    rep = tmp_path / "e.json"
    assert run(["estimate", "--in", str(corrupt), "--report", str(rep)]) == 0
    out = json.loads(rep.read_text())
    assert out["status"] == "ok" and out["schema"] == "rfi-scrub/estimate/1"
    assert 1 <= len(out["range_components"]) <= 5


def test_seed_override_positions(tmp_path, spec):
    a = simulate(tmp_path, spec, "--seed", "9")[1].read_bytes()
    code = run(["--seed", "9", "simulate", "--spec", str(spec), "--out-clean", str(tmp_path / "c2.cimg"),
                "--out-corrupt", str(tmp_path / "x2.cimg")])
    assert code == 0 and (tmp_path / "x2.cimg").read_bytes() == a
    base = simulate(tmp_path, spec)[1].read_bytes()
    assert base != a


def test_render(tmp_path, spec):
    clean, _ = simulate(tmp_path, spec)
    png = tmp_path / "c.png"
    assert run(["render", "--in", str(clean), "--out", str(png), "--dyn-range", "30"]) == 0
    assert png.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_sweep_small(tmp_path):
    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps({"rows": 32, "cols": 32, "seed": 1}))
    rep = tmp_path / "sw.json"
    code = run(["sweep", "--spec", str(spec), "--sir-from", "0", "--sir-to", "5", "--sir-step", "5",
                "--trials", "2", "--methods", "proposed,pca", "--report", str(rep)])
    assert code == 0
    out = json.loads(rep.read_text())
    assert out["sir_points"] == [0.0, 5.0] and len(out["results"]) == 4
    assert all(len(r["trials"]) == 2 for r in out["results"])


def test_usage_errors(capsys):
    assert run(["frobnicate"]) == 2
    assert error_of(capsys)["error"] == "usage"
    assert run(["metrics", "--test", "x.cimg"]) == 2
    assert run([]) == 2


def test_io_and_format_errors(tmp_path, capsys):
    assert run(["metrics", "--test", str(tmp_path / "missing.cimg"), "--report", str(tmp_path / "m.json")]) == 5
    assert error_of(capsys)["error"] == "io"
    bad = tmp_path / "bad.cimg"
    bad.write_bytes(b"NOTCIMG" + bytes(20))
    assert run(["metrics", "--test", str(bad), "--report", str(tmp_path / "m.json")]) == 3
    err = error_of(capsys)
    assert err["error"] == "format" and "offset 0" in err["message"]


def test_config_errors(tmp_path, capsys):
    img = tmp_path / "x.cimg"
    write_cimg(img, np.ones((16, 16)))
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"notch.kapa": 3}))
    assert run(["suppress", "--in", str(img), "--config", str(cfg), "--out", str(tmp_path / "o.cimg")]) == 4
    assert error_of(capsys)["error"] == "config"
    spec = tmp_path / "s.json"
    spec.write_text(json.dumps({"cols": 32}))
    assert run(["simulate", "--spec", str(spec), "--out-clean", "a", "--out-corrupt", "b"]) == 4


def test_parameter_error_exit(tmp_path, capsys):
    spec = tmp_path / "s.json"
    spec.write_text(json.dumps({"rows": 8, "cols": 8}))
    assert run(["simulate", "--spec", str(spec), "--out-clean", "a", "--out-corrupt", "b"]) == 6
    assert error_of(capsys)["error"] == "parameter"


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "rfi_scrub.cli", "render"], capture_output=True, text=True)
    assert proc.returncode == 2
    assert json.loads(proc.stderr)["error"] == "usage"
