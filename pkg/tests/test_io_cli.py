import json
import os
import subprocess
import sys

import numpy as np
import pytest

from tflab import io
from tflab._validation import TFLabError
from tflab.cli import main, read_config_file
from tflab.gabor import Lattice, analysis, GaborSystem
from tflab.grid import dft, gaussian, make_grid, random_signal
from tflab.ops import gaussian_symbol, tau_quantization_matrix
from tflab.specs import parse_symbol, parse_window
from tflab.tfr import stft


@pytest.fixture
def out(tmp_path, monkeypatch):
    monkeypatch.setenv("TFLAB_OUT", str(tmp_path))
    return tmp_path


def load(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


# serialization


def test_signal_roundtrips(tmp_path, grid16):
    f = random_signal(grid16, np.random.default_rng(0))
    io.save_signal(tmp_path / "s.json", f)
    np.testing.assert_array_equal(io.load_signal(tmp_path / "s.json").samples, f.samples)
    io.write_signal_csv(tmp_path / "s.csv", f)
    back = io.read_signal_csv(tmp_path / "s.csv")
    assert back.grid == grid16
    np.testing.assert_array_equal(back.samples, f.samples)


def test_field_and_operator_roundtrip(tmp_path, grid16):
    fld = stft(gaussian(grid16, 0.3), gaussian(grid16))
    io.save_field(tmp_path / "f.json", fld)
    np.testing.assert_array_equal(io.load_field(tmp_path / "f.json").values, fld.values)
    op = tau_quantization_matrix(gaussian_symbol(c=1j), 0.25, grid16)
    io.save_operator(tmp_path / "o.json", op)
    data = load(tmp_path / "o.json")
    assert set(data) == {"n", "L", "entries_re", "entries_im"}
    np.testing.assert_array_equal(io.load_operator(tmp_path / "o.json").entries, op.entries)


def test_coefficient_roundtrip(grid16):
    c = analysis(gaussian(grid16, 0.2), GaborSystem(gaussian(grid16), Lattice(4, 2, grid16)))
    back = io.coefs_from_dict(json.loads(io.dumps(io.coefs_to_dict(c))))
    assert back.lattice == c.lattice
    np.testing.assert_array_equal(back.values, c.values)


def test_field_csv_layout(tmp_path, grid16):
    fld = stft(gaussian(grid16), gaussian(grid16))
    io.write_field_csv(tmp_path / "f.csv", fld, magnitude_only=True)
    lines = (tmp_path / "f.csv").read_text().splitlines()
    assert lines[0].startswith("# n=16 L=4.0")
    assert lines[1] == "m,k,x,w,abs"
    assert len(lines) == 2 + 16 * 16


def test_dumps_is_deterministic_and_json_safe():
    obj = {"b": np.float64(1.5), "a": [np.int64(2), float("inf"), 1 + 2j], "c": np.array([True])}
    text = io.dumps(obj)
    assert text == io.dumps(dict(reversed(list(obj.items()))))
    assert json.loads(text) == {"a": [2, "inf", {"re": 1.0, "im": 2.0}], "b": 1.5, "c": [True]}


def test_read_json_errors(tmp_path):
    with pytest.raises(TFLabError):
        io.read_json(tmp_path / "missing.json")


def test_output_dir_precedence(tmp_path, monkeypatch):
    monkeypatch.setenv("TFLAB_OUT", str(tmp_path / "env"))
    assert io.output_dir() == str(tmp_path / "env")
    assert io.output_dir(str(tmp_path / "flag")) == str(tmp_path / "flag")


# spec strings


def test_window_specs(grid64):
    np.testing.assert_array_equal(parse_window("gauss", grid64).samples, gaussian(grid64).samples)
    w = parse_window("gauss:width=2,x0=0.5,w0=-1", grid64)
    np.testing.assert_array_equal(w.samples, gaussian(grid64, 0.5, -1.0, 2.0).samples)
    assert parse_window("hermite:k=3", grid64).norm() == pytest.approx(1.0)
    assert parse_window("box:w=4", grid64).norm() == pytest.approx(1.0)
    for bad in ("sinc", "gauss:width", "hermite:k=-1", "box:w=x", "gauss:zz=1"):
        with pytest.raises(TFLabError):
            parse_window(bad, grid64)


def test_symbol_specs(grid16):
    s = parse_symbol("gauss2d:sx=1,sw=2,c=1j")
    assert s.params["c"] == 1j and not s.is_real(grid16)
    assert parse_symbol("const:1").params["c"] == 1.0
    assert parse_symbol("subexp2d:k=2").is_real(grid16)
    for bad in ("foo", "gauss2d:sx=a", "const:x", "field:"):
        with pytest.raises(TFLabError):
            parse_symbol(bad)


def test_field_symbol_from_file(tmp_path, grid16):
    fld = stft(gaussian(grid16), gaussian(grid16))
    io.save_field(tmp_path / "sym.json", fld)
    sym = parse_symbol(f"field:{tmp_path / 'sym.json'}")
    np.testing.assert_allclose(sym.sample(grid16), fld.values, atol=1e-12)


# command line


def test_stft_command(out):
    assert main(["stft", "--window", "gauss", "--signal", "gauss"]) == 0
    data = load(out / "stft.json")
    assert data["meta"]["center_value"]["re"] == pytest.approx(1.0, abs=1e-10)
    assert (out / "stft.csv").exists()


def test_wigner_rihaczek_command(out):
    assert main(["wigner", "--tau", "0", "--f", "gauss", "--g", "gauss", "--n", "32"]) == 0
    fld = io.load_field(out / "wigner_tau0.json")
    g = gaussian(make_grid(32))
    xx, ww = np.meshgrid(g.grid.x, g.grid.w, indexing="ij")
    closed = g.samples[:, None] * np.conj(dft(g).samples)[None, :] * np.exp(-2j * np.pi * xx * ww)
    np.testing.assert_allclose(fld.values, closed, atol=1e-13)


@pytest.mark.parametrize("argv", [
    ["wigner", "--tau", "2"],
    ["stft", "--n", "12"],
    ["stft", "--window", "sinc"],
    ["verify", "no-such-suite"],
    ["frobnicate"],
    ["modnorm", "--weight", "nope:1"],
])
def test_usage_errors_exit_2(out, argv):
    assert main(argv) == 2


def test_locop_gaussian_benchmark(out):
    assert main(["locop", "--n", "128", "--eig"]) == 0
    report = load(out / "spectrum.json")
    assert min(report["overlaps"]) >= 0.99
    assert report["eigenvalues"][0] == pytest.approx(0.5, rel=1e-10)
    assert report["decay_fits"][0]["gamma_hat"] == 0.5
    assert set(report["config"]) >= {"n", "symbol", "phi1", "phi2", "seed"}


def test_locop_constant_symbol(out):
    assert main(["locop", "--symbol", "const:1", "--eig", "--n", "32"]) == 0
    np.testing.assert_allclose(load(out / "spectrum.json")["eigenvalues"], 1.0, atol=1e-10)


def test_locop_complex_symbol_with_eig_exits_4(out):
    assert main(["locop", "--symbol", "gauss2d:c=1j", "--eig", "--n", "32"]) == 4


def test_locop_tau_quantization_reports_singular_values(out):
    assert main(["locop", "--symbol", "gauss2d:c=1j", "--tau", "0.5", "--n", "32"]) == 0
    s = load(out / "spectrum.json")["singular_values"]
    assert s[0] == pytest.approx(2 / 3, rel=1e-9)


def test_modnorm_command(out):
    assert main(["modnorm", "--p", "2", "--q", "2", "--lattice", "lat:a=4,b=4"]) == 0
    report = load(out / "modnorm.json")
    assert report["value"] > 0 and report["weight"] == "const:c=1"


def test_precondition_failure_exits_3(out, monkeypatch):
    from tflab import cli
    from tflab._validation import PreconditionError

    def boom(args):
        raise PreconditionError("weight condition fails")

    monkeypatch.setitem(cli.COMMANDS, "stft", boom)
    assert main(["stft"]) == 3


def test_verify_command_and_determinism(out):
    assert main(["verify", "weights", "--seed", "7", "--trials", "2000"]) == 0
    first = (out / "verify_weights.json").read_bytes()
    report = json.loads(first)
    assert report["passed"] and report["metrics"]["violations"] == 0 and report["seed"] == 7
    assert "tolerances" in report
    assert main(["verify", "weights", "--seed", "7", "--trials", "2000"]) == 0
    assert (out / "verify_weights.json").read_bytes() == first


def test_verify_kernel_equality_command(out):
    assert main(["verify", "kernel-equality", "--n", "64"]) == 0
    assert load(out / "verify_kernel-equality.json")["metrics"]["max_rel_error"] <= 1e-6


def test_config_file_with_flag_override(out, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# experiment\nn = 32\ntau = 0.25\nformat = json\nf = gauss:x0=0.5\n")
    assert read_config_file(cfg)["tau"] == "0.25"
    assert main(["wigner", "--config", str(cfg), "--n", "16"]) == 0
    fld = io.load_field(out / "wigner_tau0.25.json")
    assert fld.grid.n == 16
    assert not (out / "wigner_tau0.25.csv").exists()


def test_config_file_errors(out, tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("bogus_key = 1\n")
    assert main(["stft", "--config", str(bad)]) == 2
    bad.write_text("no equals sign\n")
    assert main(["stft", "--config", str(bad)]) == 2
    assert main(["stft", "--config", str(tmp_path / "missing.cfg")]) == 2


def test_console_script_entry_point(out):
    proc = subprocess.run(
        [sys.executable, "-m", "tflab.cli", "wigner", "--tau", "2"],
        capture_output=True, text=True, env={**os.environ, "TFLAB_OUT": str(out)},
    )
    assert proc.returncode == 2
    assert "tau" in proc.stderr
