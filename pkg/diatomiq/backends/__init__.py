"""Schedule backends: ideal qubit gates or full lattice dynamics."""

from __future__ import annotations

from dataclasses import dataclass
from importlib import import_module
from typing import Any, Protocol

from ..model import InputError, PulseSchedule, RegisterState

BUILTIN_BACKENDS = {
    "qubit": "diatomiq.backends.qubit:QubitBackend",
    "fock": "diatomiq.backends.fock:FockBackend",
}


@dataclass(frozen=True)
class ScheduleResult:
    """Final qubit state, leakage out of the encoding, and the raw Fock state if any."""

    state: RegisterState
    leakage: float
    backend: str
    fock_state: RegisterState | None = None


class ScheduleBackend(Protocol):
    """Protocol for schedule runners.

    run(schedule, state) -> ScheduleResult
        ``state`` is a qubit register; the result is projected back onto qubits.
    """

    name: str

    def run(self, schedule: PulseSchedule, state: RegisterState) -> ScheduleResult: ...


def load_backend(spec: str, **options: Any) -> ScheduleBackend:
    """Instantiate a backend by name (``qubit``/``fock``) or ``module:Class``."""
    class_path = BUILTIN_BACKENDS.get(spec, spec)
    if ":" not in class_path:
        raise InputError(f"unknown backend {spec!r}; use qubit, fock or 'module:Class'")
    mod_name, cls_name = class_path.split(":")
    try:
        cls = getattr(import_module(mod_name), cls_name)
    except (ImportError, AttributeError) as exc:
        raise InputError(f"cannot load backend {spec!r}: {exc}") from exc
    return cls(**options)
