import csv
import json
import subprocess
import sys

import pytest

from daqc.cli import main
from daqc.config import PRESETS, load_config
from daqc.errors import ConfigError
from daqc.executor import run_sdaqc
from daqc.pauli import evolve, fidelity
from daqc.verify import PERTURBATIONS, modules_covered, run_checks
from daqc.xz import compile_xz

ISING3 = """
experiment = "fidelity"
[system]
n_qubits = 3
[resource]
kind = "polynomial"
J = 1.0
alpha = 2.5
[target]
kind = "explicit"
terms = { ZZI = 0.3, ZIZ = -0.8, IZZ = 0.5 }
[run]
t_F = 1.0
n_T = [1]
modes = ["sdaqc"]
initial_state = "dud"
"""

XZ3 = """
experiment = "fidelity"
[system]
n_qubits = 3
[resource]
kind = "polynomial"
J = 0.5
alpha = 2.5
[target]
kind = "xz"
profile = { kind = "polynomial", J = 0.5, alpha = 0.5 }
[run]
t_F = 1.0
n_T = [2, 4]
dt = [0.004]
modes = ["sdaqc", "bdaqc", "dqc"]
initial_state = "dud"
[noise]
enabled = true
sigma_d = 0.0
r_u = 0.0
r_b = 0.0
r_s = 0.0
"""


def write(tmp_path, text, name="cfg.toml"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def read_rows(path):
    lines = [ln for ln in path.read_text().splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(lines))


# configuration ------------------------------------------------------------------------


@pytest.mark.parametrize("name", PRESETS)
def test_presets_parse(name):
    cfg = load_config(name)
    assert cfg.n_T and cfg.modes
    cfg.build_target()
    cfg.build_resource()


def test_json_and_toml_are_equivalent(tmp_path):
    toml_cfg = load_config(write(tmp_path, ISING3))
    doc = json.loads(json.dumps(toml_cfg.source))
    json_cfg = load_config(write(tmp_path, json.dumps(doc), "cfg.json"))
    assert json_cfg.resolved() == toml_cfg.resolved()


def test_bad_configurations_rejected(tmp_path):
    for text in ('experiment = "nope"', '[system]\nn_qubits = 1', '[run]\nn_T = [0]', '[bogus]\nx = 1',
                 '[run]\nmodes = ["teleport"]', "not = [valid"):
        with pytest.raises(ConfigError):
            load_config(write(tmp_path, text))
    with pytest.raises(ConfigError):
        load_config("no-such-preset")


def test_overrides():
    cfg = load_config("figure9").apply_overrides(seed=7, runs=3, no_noise=True, out="x")
    assert cfg.noise.seed == 7 and cfg.noise.runs == 3 and not cfg.noise_enabled and cfg.out_dir == "x"
    with pytest.raises(ConfigError):
        load_config("figure9").apply_overrides(runs=0)


# command line -------------------------------------------------------------------------


def test_compile_ising_demo(tmp_path, capsys):
    # a generic three-qubit target needs one analog block per pair
    out = tmp_path / "out"
    assert main(["compile", "--config", write(tmp_path, ISING3), "--out", str(out)]) == 0
    sched = json.loads((out / "schedule.json").read_text())
    assert sum(b["type"] == "analog" for b in sched["blocks"]) == 3
    assert (out / "report.json").exists() and (out / "config.resolved.json").exists()
    assert "3 analog blocks" in capsys.readouterr().out


def test_compile_is_byte_identical(tmp_path):
    cfg = write(tmp_path, XZ3)
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["compile", "--config", cfg, "--out", str(a)]) == 0
    assert main(["compile", "--config", cfg, "--out", str(b)]) == 0
    assert (a / "schedule.json").read_bytes() == (b / "schedule.json").read_bytes()


def test_four_qubit_ata_exit_code_and_hint(tmp_path, capsys):
    text = ISING3.replace("n_qubits = 3", "n_qubits = 4").replace('"dud"', '"dudd"')
    cfg = write(tmp_path, text.replace("{ ZZI = 0.3, ZIZ = -0.8, IZZ = 0.5 }", "{ ZZII = 0.3, IZIZ = -0.8, IIZZ = 0.5 }"))
    assert main(["compile", "--config", cfg, "--out", str(tmp_path / "o")]) == 3
    assert "--allow-fallback" in capsys.readouterr().err
    assert main(["compile", "--config", cfg, "--out", str(tmp_path / "o"), "--allow-fallback"]) == 0


def test_invalid_config_exit_code(tmp_path, capsys):
    assert main(["run", "--config", write(tmp_path, "[system]\nn_qubits = 99")]) == 2
    assert "invalid configuration" in capsys.readouterr().err
    assert main(["run", "--config", str(tmp_path / "missing.toml")]) == 2


def test_zero_noise_run_matches_ideal(tmp_path):
    cfg_path = write(tmp_path, XZ3)
    noisy, clean = tmp_path / "noisy", tmp_path / "clean"
    assert main(["run", "--config", cfg_path, "--runs", "1", "--out", str(noisy)]) == 0
    assert main(["run", "--config", cfg_path, "--no-noise", "--out", str(clean)]) == 0
    a, b = read_rows(noisy / "results.csv"), read_rows(clean / "results.csv")
    assert [r["mode"] for r in a] == [r["mode"] for r in b] == ["sdaqc", "bdaqc", "dqc-direct-ATA"] * 2
    for ra, rb in zip(a, b):
        assert abs(float(ra["mean_fidelity"]) - float(rb["mean_fidelity"])) <= 1e-12
    # independent check of one row
    cfg = load_config(cfg_path)
    target, resource, psi0 = cfg.build_target(), cfg.build_resource(), cfg.initial_psi()
    want = fidelity(run_sdaqc(compile_xz(target, resource, 1.0, 2), psi0), evolve(target, 1.0, psi0))
    assert abs(float(b[0]["mean_fidelity"]) - want) <= 1e-12


def test_results_csv_layout(tmp_path):
    out = tmp_path / "o"
    assert main(["run", "--config", write(tmp_path, XZ3), "--runs", "2", "--out", str(out)]) == 0
    text = (out / "results.csv").read_text().splitlines()
    assert text[0].startswith("# schema: daqc.sweep/")
    header = next(ln for ln in text if not ln.startswith("#"))
    assert header.split(",") == ["sweep_var", "mode", "mean_fidelity", "stderr", "total_analog_time",
                                 "wall_time", "status"]
    resolved = json.loads((out / "config.resolved.json").read_text())
    assert resolved["noise"]["runs"] == 2 and resolved["run"]["n_T"] == [2, 4]


def test_verify_passes_and_covers_modules(capsys):
    assert main(["verify"]) == 0
    out = capsys.readouterr().out
    checks = run_checks()
    assert len(checks) == 17 and all(c.passed for c in checks)
    assert modules_covered(checks) == {"pauli-core", "hamiltonian-models", "ising-compiler", "xz-compiler",
                                       "mbody-compiler", "executor", "noise-engine", "bench-cli"}
    assert "17/17 checks passed" in out


@pytest.mark.parametrize("perturbation", PERTURBATIONS)
def test_verify_detects_perturbations(perturbation, capsys):
    assert main(["verify", "--perturb", perturbation]) == 1
    assert "failed:" in capsys.readouterr().err
    assert main(["verify", "--perturb", "unknown"]) == 2


def test_console_script_entry_point():
    res = subprocess.run([sys.executable, "-m", "daqc.cli", "--help"], capture_output=True, text=True)
    assert res.returncode == 0 and "compile" in res.stdout and "verify" in res.stdout
