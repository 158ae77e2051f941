from __future__ import annotations

from dataclasses import dataclass

from ..fock import encoded_site_energies
from ..gates import couplings_from_params, free_evolution, rx, ry
from ..model import FreeEvolution, HamiltonianParams, PulseSchedule, RamanPulse, RegisterState
from . import ScheduleResult


@dataclass
class QubitBackend:
    """Ideal gates: pulses are exact rotations, free evolution is diagonal.

    With params, free evolution applies the conditional phases from
    ``params.dipole_coupling`` and the on-site energies of the encoded
    occupations from ``params.interactions``, both with the physical sign
    exp(-iE·t) so results match the Fock backend.
    """

    params: HamiltonianParams | None = None
    name: str = "qubit"

    def run(self, schedule: PulseSchedule, state: RegisterState) -> ScheduleResult:
        couplings, energies = {}, None
        if self.params is not None:
            couplings = couplings_from_params(self.params)
            energies = encoded_site_energies(self.params)
        for step in schedule:
            if isinstance(step, RamanPulse):
                gate = ry if step.axis == "y" else rx
                state = gate(state, step.site, step.angle)
            elif isinstance(step, FreeEvolution):
                state = free_evolution(
                    state, couplings, step.duration, convention="physical", site_energies=energies
                )
        return ScheduleResult(state=state, leakage=0.0, backend=self.name)
