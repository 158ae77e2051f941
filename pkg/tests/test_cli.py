import json
from pathlib import Path

import pandas as pd
import pytest

from diatomiq import EXIT_INPUT, EXIT_OK, EXIT_REGIME, EXIT_RESOURCE, cli_main

BELL = "\n".join(
    [
        '{"type": "raman", "site": 0, "angle": 1.5707963267948966, "rabi": 10}',
        '{"type": "raman", "site": 1, "angle": 1.5707963267948966, "rabi": 10}',
        '{"type": "free", "duration": 3.141592653589793}',
        '{"type": "raman", "site": 0, "angle": 1.5707963267948966, "rabi": 10}',
    ]
)


def _config(tmp_path: Path, **data) -> str:
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(data))
    return str(path)


def _bell_config(tmp_path: Path, **data) -> str:
    (tmp_path / "bell.jsonl").write_text(BELL + "\n")
    return _config(tmp_path, schedule="bell.jsonl", **data)


def test_tables_default_config(tmp_path: Path, capsys):
    out = tmp_path / "out"
    assert cli_main(["tables", "--out", str(out)]) == EXIT_OK
    for stem in (
        "frequency_table",
        "rate_table",
        "rate_vs_published",
        "consistency_vs_published",
        "consistency",
        "frequency_vs_published",
        "addressing",
        "dominance",
    ):
        assert (out / f"{stem}.csv").exists()
    freq = pd.read_csv(out / "frequency_table.csv")
    assert len(freq) == 10
    assert freq.set_index("species").loc["LiCs", "value"] == pytest.approx(728.0, rel=0.01)
    assert pd.read_csv(out / "consistency.csv")["rel_residual"].max() < 1e-10
    published = pd.read_csv(out / "consistency_vs_published.csv")
    assert len(published) == 10
    assert published["rel_residual"].max() < 0.006
    assert "Wrote:" in capsys.readouterr().out


def test_tables_json_and_h_convention(tmp_path: Path):
    cfg = _config(tmp_path, species=["RbCs"], frequency_convention="h")
    out = tmp_path / "out"
    assert cli_main(["tables", "--config", cfg, "--out", str(out), "--format", "json"]) == 0
    records = json.loads((out / "frequency_table.json").read_text())
    assert [r["species"] for r in records] == ["RbCs"]
    assert not (out / "consistency.json").exists()
    dominance = json.loads((out / "dominance.json").read_text())
    assert {r["site"] for r in dominance} == {0, 1}


def test_gatecheck_qubit_and_fock(tmp_path: Path, capsys):
    for backend in ("qubit", "fock"):
        out = tmp_path / backend
        cfg = _bell_config(tmp_path, backend=backend)
        assert cli_main(["gatecheck", "--config", cfg, "--out", str(out), "--seed", "3"]) == 0
        summary = json.loads((out / "gatecheck.json").read_text())
        assert summary["backend"] == backend
        assert summary["all_passed"] is True
        assert summary["config"]["seed"] == 3
        assert (out / "gatecheck.md").exists()
    fock = json.loads((tmp_path / "fock" / "gatecheck.json").read_text())
    assert "backend_agreement_schedule" in fock["checks"]
    assert "Gate check: PASS" in capsys.readouterr().out


def test_simulate_bell_schedule(tmp_path: Path):
    out = tmp_path / "out"
    cfg = _bell_config(tmp_path, shots=200, seed=5)
    assert cli_main(["simulate", "--config", cfg, "--out", str(out)]) == 0
    amps = pd.read_csv(out / "amplitudes.csv")
    assert list(amps.columns) == ["index", "re", "im"]
    probs = (amps["re"] ** 2 + amps["im"] ** 2).tolist()
    assert probs == pytest.approx([0, 0.5, 0.5, 0], abs=1e-5)
    leak = json.loads((out / "leakage.json").read_text())
    assert leak["backend"] == "qubit"
    assert leak["leakage"] == 0.0
    assert leak["steps"] == 4
    assert leak["duration"] == pytest.approx(3.61283, rel=1e-5)
    shots = pd.read_csv(out / "measurements.csv", dtype={"bitstring": str})
    assert len(shots) == 200
    assert set(shots["bitstring"]) <= {"01", "10"}


def test_simulate_measurements_are_byte_identical(tmp_path: Path):
    cfg = _bell_config(tmp_path, shots=500, seed=42, backend="fock")
    a, b = tmp_path / "a", tmp_path / "b"
    assert cli_main(["simulate", "--config", cfg, "--out", str(a)]) == 0
    assert cli_main(["simulate", "--config", cfg, "--out", str(b)]) == 0
    assert (a / "measurements.csv").read_bytes() == (b / "measurements.csv").read_bytes()
    assert json.loads((a / "leakage.json").read_text())["leakage"] < 1e-10


def test_simulate_dump_operator(tmp_path: Path):
    op = tmp_path / "h.txt"
    assert cli_main(["simulate", "--out", str(tmp_path / "out"), "--dump-operator", str(op)]) == 0
    rows = [line.split() for line in op.read_text().splitlines()]
    assert rows and all(len(r) == 4 for r in rows)


def test_input_errors_exit_2(tmp_path: Path, capsys):
    cfg = _config(tmp_path, lattice={"num_sites": 2, "colour": "red"})
    assert cli_main(["tables", "--config", cfg, "--out", str(tmp_path)]) == EXIT_INPUT
    assert "error:" in capsys.readouterr().err
    cfg = _config(tmp_path, shots=10)
    assert cli_main(["simulate", "--config", cfg, "--out", str(tmp_path)]) == EXIT_INPUT
    (tmp_path / "bad.jsonl").write_text('{"type": "free"}\n')
    cfg = _config(tmp_path, schedule="bad.jsonl")
    assert cli_main(["simulate", "--config", cfg, "--out", str(tmp_path)]) == EXIT_INPUT
    assert "bad.jsonl:1" in capsys.readouterr().err


def test_regime_error_exit_3(tmp_path: Path):
    cfg = _config(tmp_path, backend="fock", hamiltonian={"tunneling": [0.1, 0.0, 0.0]})
    assert cli_main(["simulate", "--config", cfg, "--out", str(tmp_path)]) == EXIT_REGIME
    assert cli_main(["gatecheck", "--config", cfg, "--out", str(tmp_path)]) == EXIT_REGIME


def test_resource_guard_exit_4(tmp_path: Path):
    cfg = _config(tmp_path, backend="fock", lattice={"num_sites": 6})
    assert cli_main(["simulate", "--config", cfg, "--out", str(tmp_path)]) == EXIT_RESOURCE


def test_qubit_register_guard_exit_4(tmp_path: Path, capsys):
    cfg = _config(tmp_path, lattice={"num_sites": 60})
    assert cli_main(["simulate", "--config", cfg, "--out", str(tmp_path)]) == EXIT_RESOURCE
    assert "error:" in capsys.readouterr().err


def test_tables_with_no_species(tmp_path: Path):
    cfg = _config(tmp_path, species=[])
    out = tmp_path / "out"
    assert cli_main(["tables", "--config", cfg, "--out", str(out)]) == EXIT_OK
    assert pd.read_csv(out / "frequency_table.csv").empty
    assert pd.read_csv(out / "dominance.csv").empty


def test_undecodable_files_exit_2(tmp_path: Path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_bytes(b'{"seed": 1}\xff')
    assert cli_main(["tables", "--config", str(cfg), "--out", str(tmp_path)]) == EXIT_INPUT
    (tmp_path / "bad.jsonl").write_bytes(b'{"type": "free", "duration": 1}\n\xff\xfe garbage\n')
    cfg = _config(tmp_path, schedule="bad.jsonl")
    assert cli_main(["simulate", "--config", cfg, "--out", str(tmp_path)]) == EXIT_INPUT
    assert "bad.jsonl:2" in capsys.readouterr().err
    assert cli_main(["tables", "--config", str(tmp_path), "--out", str(tmp_path)]) == EXIT_INPUT
