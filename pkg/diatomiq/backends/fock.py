from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

from ..fock import (
    FockBasis,
    HermitianOperator,
    build_hamiltonian,
    embed_qubit_state,
    evolve_eig,
    evolve_stepped,
    project_qubit_subspace,
    register_basis,
)
from ..model import (
    FreeEvolution,
    HamiltonianParams,
    InputError,
    PulseSchedule,
    RamanPulse,
    RegimeError,
    RegisterState,
    interaction_matrix,
)
from . import ScheduleResult

logger = logging.getLogger(__name__)


@dataclass
class FockBackend:
    """Schedule dynamics under the full lattice Hamiltonian, then projection onto qubits.

    A pulse of angle θ at Rabi rate Ω_R switches the addressed site's Raman
    coupling to Ω_R/2 for θ/Ω_R (phase 0 for axis x, π/2 for axis y, +π for
    negative angles); free evolution runs with every Raman coupling off.

    instantaneous : bool
        If True, only the addressed Raman term acts during a pulse (the
        instantaneous-pulse idealization); requires zero tunneling.
    propagator : "eig" | "stepped"
    """

    params: HamiltonianParams | None = None
    instantaneous: bool = True
    propagator: str = "eig"
    step_count: int = 2000
    name: str = "fock"
    basis: FockBasis = field(init=False, repr=False)
    _free: HamiltonianParams = field(init=False, repr=False)
    _cache: dict = field(default_factory=dict, init=False, repr=False)

    def __post_init__(self) -> None:
        if self.params is None:
            raise InputError("the fock backend needs Hamiltonian parameters", field="hamiltonian")
        if self.propagator not in ("eig", "stepped"):
            raise InputError(f"unknown propagator {self.propagator!r}", field="propagator")
        if self.instantaneous and any(t != 0 for t in self.params.tunneling):
            raise RegimeError(
                "instantaneous pulses on the fock backend need t_a = t_b = t_c = 0"
            )
        M = self.params.num_sites
        self.basis = register_basis(M, self.params.caps)
        self._free = self.params.with_updates(rabi=(0.0,) * M, raman_phase=None)

    def _pulse_params(self, step: RamanPulse) -> HamiltonianParams:
        M = self.params.num_sites
        rabi = [0.0] * M
        rabi[step.site] = step.rabi / 2.0
        phase = [0.0] * M
        phase[step.site] = (math.pi / 2 if step.axis == "y" else 0.0) + (
            math.pi if step.angle < 0 else 0.0
        )
        base = self._free
        if self.instantaneous:
            base = base.with_updates(
                interactions=interaction_matrix(),
                dipole_coupling=((0.0,) * M,) * M,
            )
        return base.with_updates(rabi=tuple(rabi), raman_phase=tuple(phase))

    def _operator(self, key: tuple, params: HamiltonianParams) -> HermitianOperator:
        if key not in self._cache:
            self._cache[key] = build_hamiltonian(params, self.basis)
        return self._cache[key]

    def _evolve(self, psi: RegisterState, op: HermitianOperator, t: float) -> RegisterState:
        if self.propagator == "stepped":
            return evolve_stepped(psi, op, t, self.step_count)
        return evolve_eig(psi, op, t)

    def run(self, schedule: PulseSchedule, state: RegisterState) -> ScheduleResult:
        if state.num_qubits != self.params.num_sites:
            raise InputError(
                f"{state.num_qubits}-qubit register on a {self.params.num_sites}-site lattice"
            )
        psi = embed_qubit_state(state, self.basis)
        for step in schedule:
            if isinstance(step, RamanPulse):
                if step.site >= self.params.num_sites:
                    raise InputError(f"pulse site {step.site} outside the lattice", field="site")
                key = ("pulse", step.site, step.axis, step.angle < 0, step.rabi)
                op = self._operator(key, self._pulse_params(step))
            elif isinstance(step, FreeEvolution):
                op = self._operator(("free",), self._free)
            else:
                raise InputError(f"unknown schedule step {step!r}")
            psi = self._evolve(psi, op, step.duration)
        qubits, leakage = project_qubit_subspace(psi)
        logger.debug("fock schedule done: leakage=%.3e", leakage)
        return ScheduleResult(state=qubits, leakage=leakage, backend=self.name, fock_state=psi)
