from __future__ import annotations

import math
import platform
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Any

import numpy as np

from .checks import BackendAgreementResult, BellResult, CnotResult, EntanglingPhaseResult

SCHEMA_VERSION = "1.0"


@dataclass
class CheckSummary:
    name: str
    supported: bool
    passed: bool
    residual: float | None  # headline residual of the suite
    tol: float
    details: dict[str, Any]
    severity: str  # "info" | "warn" | "fail"


def _severity(supported: bool, passed: bool) -> str:
    if not supported:
        return "warn"
    return "info" if passed else "fail"


def _finite_or_none(x: float | None) -> float | None:
    if x is None or not math.isfinite(x):
        return None
    return float(x)


def _summarize_cnot(r: CnotResult) -> CheckSummary:
    detail = {
        "control": r.control,
        "target": r.target,
        "involution_residual": r.involution_residual,
        "unitarity_error": r.unitarity_error,
        "truth_table": r.truth_table,
    }
    return CheckSummary(
        r.name, True, r.passed, r.residual, r.tol, detail, _severity(True, r.passed)
    )


def _summarize_bell(r: BellResult) -> CheckSummary:
    detail = {
        "label": r.label,
        "fidelity": r.fidelity,
        "concurrence": r.concurrence,
        "step_residuals": r.step_residuals,
    }
    return CheckSummary(
        r.name, True, r.passed, r.concurrence_residual, r.tol, detail, _severity(True, r.passed)
    )


def _summarize_phase(r: EntanglingPhaseResult) -> CheckSummary:
    worst = float(np.max(r.residuals)) if r.residuals else None
    detail = {
        "coupling": r.coupling,
        "pi_time": r.pi_time,
        "pi_residual": r.pi_residual,
        "perturbation_residual": _finite_or_none(r.perturbation_residual),
        "seed": r.seed,
        "samples": [
            {"coupling": D, "time": t, "phase": phi, "residual": res}
            for D, t, phi, res in zip(r.couplings, r.times, r.phases, r.residuals, strict=True)
        ],
    }
    if r.reason:
        detail["reason"] = r.reason
    return CheckSummary(
        r.name, r.supported, r.passed, worst, r.tol, detail, _severity(r.supported, r.passed)
    )


def _summarize_agreement(r: BackendAgreementResult) -> CheckSummary:
    detail = {
        "schedule": r.schedule,
        "infidelities": r.infidelities,
        "leakages": r.leakages,
        "tol_leakage": r.tol_leakage,
        **r.extra,
    }
    worst = max(r.infidelities.values(), default=0.0)
    return CheckSummary(
        r.name, True, r.passed, worst, r.tol_infidelity, detail, _severity(True, r.passed)
    )


def _as_dict(c: CheckSummary) -> dict[str, Any]:
    return {
        "supported": c.supported,
        "passed": c.passed,
        "residual": c.residual,
        "tol": c.tol,
        "details": c.details,
        "severity": c.severity,
    }


def aggregate_checks_to_summary(
    backend: str,
    cnot_result: CnotResult,
    bell_result: BellResult,
    phase_result: EntanglingPhaseResult,
    agreement_results: list[BackendAgreementResult] | None = None,
    config: dict[str, Any] | None = None,
) -> dict[str, Any]:
    """Collect suite results into the JSON-ready gate-check summary.

    ``all_passed`` ignores unsupported suites; ``pass_ratio`` is the fraction
    of supported suites that passed.
    """
    from . import __version__

    summaries = [
        _summarize_cnot(cnot_result),
        _summarize_bell(bell_result),
        _summarize_phase(phase_result),
    ]
    summaries += [_summarize_agreement(r) for r in agreement_results or []]
    supported = [c for c in summaries if c.supported]
    ratio = float(np.mean([c.passed for c in supported])) if supported else 0.0

    return {
        "schema_version": SCHEMA_VERSION,
        "datetime_utc": datetime.now(timezone.utc).isoformat().replace("+00:00", "Z"),
        "system": {
            "python": platform.python_version(),
            "platform": platform.platform(),
            "diatomiq": __version__,
        },
        "backend": backend,
        "config": config or {},
        "checks": {c.name: _as_dict(c) for c in summaries},
        "all_passed": bool(supported) and all(c.passed for c in supported),
        "pass_ratio": ratio,
    }
