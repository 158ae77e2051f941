import json
from pathlib import Path

from diatomiq.checks import (
    check_backend_agreement,
    check_bell_prep,
    check_cnot,
    check_entangling_phase,
)
from diatomiq.model import HamiltonianParams
from diatomiq.report import generate_report
from diatomiq.score import aggregate_checks_to_summary


def _summary(params, strict=True):
    return aggregate_checks_to_summary(
        backend="fock",
        cnot_result=check_cnot(),
        bell_result=check_bell_prep(),
        phase_result=check_entangling_phase(params, samples=4, seed=1, strict=strict),
        agreement_results=[check_backend_agreement(params, 10.0, "bell")],
        config={"seed": 1},
    )


def test_json_and_markdown_created(tmp_path: Path):
    out = tmp_path / "out"
    out.mkdir()
    summary = _summary(HamiltonianParams.create(2, coupling=1.0))
    json_path = out / "gatecheck.json"
    json_path.write_text(json.dumps(summary))
    md_path = generate_report(summary, md_out=out / "gatecheck.md")
    assert json_path.exists()
    assert md_path.exists()

    loaded = json.loads(json_path.read_text())
    assert loaded["schema_version"] == "1.0"
    assert loaded["datetime_utc"].endswith("Z")
    assert set(loaded["system"]) == {"python", "platform", "diatomiq"}
    assert set(loaded["checks"]) == {
        "cnot_identity",
        "bell_prep",
        "entangling_phase",
        "backend_agreement_bell",
    }
    assert loaded["all_passed"] is True
    assert loaded["pass_ratio"] == 1.0
    assert loaded["checks"]["bell_prep"]["details"]["label"] == "psi_plus"
    assert len(loaded["checks"]["entangling_phase"]["details"]["samples"]) == 4

    text = md_path.read_text()
    assert text.startswith("# Gate check report")
    assert "**PASS**" in text
    assert "| 10 | 11 |" in text
    assert "`psi_plus`" in text


def test_unsupported_suite_is_a_warning(tmp_path: Path):
    params = HamiltonianParams.create(2, coupling=1.0, tunneling=(0.1, 0.0, 0.0))
    summary = aggregate_checks_to_summary(
        backend="qubit",
        cnot_result=check_cnot(),
        bell_result=check_bell_prep(),
        phase_result=check_entangling_phase(params, strict=False),
    )
    phase = summary["checks"]["entangling_phase"]
    assert phase["supported"] is False
    assert phase["severity"] == "warn"
    assert phase["residual"] is None
    assert summary["all_passed"] is True
    md = generate_report(summary, tmp_path / "nested" / "report.md").read_text()
    assert "Not run: nonzero tunneling." in md
