import json
import shutil
import subprocess

import numpy as np
import pytest

from hybridyn import io
from hybridyn.cli import main
from hybridyn.config import ConfigError, apply_overrides, config_from_mapping, parse_config
from hybridyn.hybrid_state import from_bargmann_dyad
from hybridyn.phase_grid import PhaseGrid
from hybridyn.scenarios import OUTPUT_ENV, counterexample_dyad, run_scenario


@pytest.mark.parametrize(
    "scenario, kappa, t_final",
    [("positivity", 1.0, 0.5), ("oracle-compare", 0.3, 1.0), ("meanfield-compare", 1.0, 1.0), ("free-run", 0.3, 1.0)],
)
def test_scenario_defaults(scenario, kappa, t_final):
    cfg = parse_config(f"scenario: {scenario}\n")
    assert (cfg.kappa, cfg.t_final, cfg.L, cfg.N, cfg.dt) == (kappa, t_final, 8.0, 128, 1e-3)


def test_collapse_grid_is_widened():
    cfg = parse_config("scenario: collapse\n")
    assert cfg.L >= 12 and 2 * cfg.L / cfg.N == pytest.approx(0.125)
    assert cfg.t_final == 0 and cfg.n_fock == 64
    wide = parse_config("scenario: collapse\ng: 9\nn_fock: 200\n")
    assert wide.L >= 14


@pytest.mark.parametrize(
    "text, match",
    [
        ("scenario: collapse\ng: 50\n", "budget"),
        ("scenario: collapse\nt_final: 1\n", "t_final"),
        ("scenario: positivity\nbogus: 1\n", "unknown key"),
        ("scenario: warp\n", "unknown scenario"),
        ("L: 8\n", "scenario"),
        ("scenario: free-run\nN: 33\n", "even"),
        ("scenario: free-run\ndt: 0.1\n", "stability"),
        ("scenario: free-run\nN: 12.5\n", "integer"),
        ("scenario: free-run\nkappa: yes\n", "number"),
        ("scenario: free-run\nh_q: [[0, 1], [0, 0]]\n", "Hermitian"),
        ("scenario: free-run\nrhs: euler\n", "rhs"),
        ("- 1\n- 2\n", "mapping"),
    ],
)
def test_config_errors(text, match):
    with pytest.raises(ConfigError, match=match):
        parse_config(text)


def test_parse_error_reports_position():
    with pytest.raises(ConfigError, match=r"line \d+, column \d+"):
        parse_config("scenario: free-run\nL: [8\nN: 64\n")


def test_overrides():
    d = apply_overrides({"scenario": "free-run"}, ["kappa=0.5", "h_q=[[0, 1], [1, 0]]", "method=fd4"])
    cfg = config_from_mapping(d)
    assert cfg.kappa == 0.5 and cfg.method == "fd4" and cfg.h_q == [[0, 1], [1, 0]]
    with pytest.raises(ConfigError, match="key=value"):
        apply_overrides({}, ["kappa"])


def test_field_round_trip(tmp_path):
    grid = PhaseGrid(4, 16)
    X, P = grid.mesh
    f = np.sin(X) * np.exp(-(P**2)) + 1e-17
    path = io.write_field(tmp_path / "f.dat", grid, f, "rho_c", {"time": 0.25})
    meta, back = io.read_field(path)
    assert meta == {"L": 4.0, "N": 16, "quantity": "rho_c", "time": 0.25}
    np.testing.assert_array_equal(back, f)
    lines = path.read_text().splitlines()
    assert lines[1] == "# x p rho_c" and lines[2 + 16] == ""


def test_density_dump_and_slice(tmp_path):
    grid = PhaseGrid(4, 16)
    rho = from_bargmann_dyad(counterexample_dyad(), grid)
    names = io.write_density(tmp_path, "snap", rho)
    assert names == [f"snap_{c}.dat" for c in ("rho_c", "a1", "a2", "a3")]
    _, a3 = io.read_field(tmp_path / "snap_a3.dat")
    np.testing.assert_allclose(a3, rho.pauli_fields()[3], atol=1e-17)
    io.write_slice(tmp_path / "s.csv", grid, io.density_fields(rho), "p", 0.0)
    rows = (tmp_path / "s.csv").read_text().splitlines()
    assert rows[0] == "p,rho_c,a1,a2,a3" and len(rows) == 17
    with pytest.raises(ValueError):
        io.write_slice(tmp_path / "s.csv", grid, {}, "q")


def test_collapse_run_is_deterministic(tmp_path):
    cfg = parse_config("scenario: collapse\nc_plus_sq: 0.3\n")
    a = run_scenario(cfg, tmp_path / "a")
    b = run_scenario(cfg, tmp_path / "b")
    assert a.status == 0 and a.summary["passed"]
    assert (a.directory / "summary.json").read_bytes() == (b.directory / "summary.json").read_bytes()
    manifest = json.loads((a.directory / "manifest.json").read_text())
    for entry in manifest["files"]:
        for name in entry.get("files", [entry.get("file")]):
            assert (a.directory / name).exists()


def test_cli_validate_and_errors(tmp_path, capsys):
    good = tmp_path / "ok.yaml"
    good.write_text("scenario: free-run\nt_final: 0.01\n")
    assert main(["validate", str(good)]) == 0
    assert capsys.readouterr().out.startswith("ok: free-run")
    bad = tmp_path / "bad.yaml"
    bad.write_text("scenario: collapse\ng: 50\n")
    assert main(["validate", str(bad)]) == 1
    assert "budget" in capsys.readouterr().err
    assert main(["run", str(tmp_path / "missing.yaml")]) == 1


def test_cli_demo_uses_env_output(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv(OUTPUT_ENV, str(tmp_path))
    assert main(["demo", "collapse", "--override", "c_plus_sq=0.5"]) == 0
    out = capsys.readouterr().out
    assert "PASS" in out and "FAIL" not in out
    assert (tmp_path / "collapse" / "summary.json").exists()


def test_cli_numeric_breach_exit_code(tmp_path, capsys):
    # oracle budget is pinned for the default grid; a coarse grid must breach it
    code = main(["demo", "oracle-compare", "--override", "N=24", "--override", "t_final=0.2",
                 "--output", str(tmp_path)])
    assert code == 2
    assert "FAIL" in capsys.readouterr().out


@pytest.mark.skipif(shutil.which("hybridyn") is None, reason="console script not installed")
def test_console_script(tmp_path):
    cfg = tmp_path / "c.yaml"
    cfg.write_text("scenario: positivity\n")
    res = subprocess.run(["hybridyn", "validate", str(cfg)], capture_output=True, text=True)
    assert res.returncode == 0 and "positivity" in res.stdout
