"""Qubit-level gate set: Raman rotations, conditional phase gate, CNOT, Bell states.

Conventions
-----------
* Qubit i lives on lattice site i; site 0 is the most significant bit.
* Ry(θ) = [[cos θ/2, -sin θ/2], [sin θ/2, cos θ/2]], so Ry(π/2)|0⟩ = (|0⟩+|1⟩)/√2
  and Ry(π/2)|1⟩ = (-|0⟩+|1⟩)/√2.
* ``phase_gate`` multiplies |..1..1..⟩ by exp(+iφ). Physical evolution
  exp(-iHt) gives |11⟩ the phase -D·t; ``free_evolution(convention="physical")``
  follows that sign, ``convention="gate"`` (default) the exp(+iφ) form.
"""

from __future__ import annotations

import logging
import math
from collections import Counter
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from pathlib import Path
from typing import Literal

import numpy as np
import pandas as pd

from .fock import (
    add_site_energies,
    build_hamiltonian,
    embed_qubit_state,
    encoded_indices,
    evolve_eig,
    register_basis,
)
from .model import (
    FreeEvolution,
    HamiltonianParams,
    InputError,
    PulseSchedule,
    RamanPulse,
    RegimeError,
    RegisterState,
    ResourceGuardError,
)

logger = logging.getLogger(__name__)

PhaseConvention = Literal["gate", "physical"]
MAX_QUBITS = 20
MAX_GATE_QUBITS = 10
SQRT1_2 = 1.0 / math.sqrt(2.0)


@dataclass(frozen=True, eq=False)
class GateUnitary:
    """Dense 2^n × 2^n gate matrix."""

    matrix: np.ndarray
    num_qubits: int

    def __post_init__(self) -> None:
        m = np.array(self.matrix, dtype=complex)
        if m.shape != (2**self.num_qubits, 2**self.num_qubits):
            raise InputError(f"gate matrix shape {m.shape} does not match {self.num_qubits} qubits")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dimension(self) -> int:
        return 2**self.num_qubits

    def unitarity_error(self) -> float:
        return float(np.max(np.abs(self.matrix.conj().T @ self.matrix - np.eye(self.dimension))))

    def apply(self, state: RegisterState) -> RegisterState:
        if state.dimension != self.dimension:
            raise InputError("gate and state dimensions differ")
        return RegisterState(self.matrix @ state.amplitudes, "qubit")

    def __matmul__(self, other: GateUnitary) -> GateUnitary:
        return GateUnitary(self.matrix @ other.matrix, self.num_qubits)


def _guard_qubits(n: int, limit: int = MAX_QUBITS) -> None:
    if n > limit:
        raise ResourceGuardError(f"{n} qubits exceed the limit of {limit}")


def init_register(n: int) -> RegisterState:
    """|0…0⟩: the Mott state with one a and one b atom per site."""
    if int(n) < 1:
        raise InputError("a register needs at least one qubit", field="n")
    _guard_qubits(int(n))
    psi = np.zeros(2 ** int(n), dtype=complex)
    psi[0] = 1.0
    return RegisterState(psi, "qubit")


def basis_state(bits: str) -> RegisterState:
    """Computational basis state from a bitstring such as ``"01"``."""
    if not bits or set(bits) - {"0", "1"}:
        raise InputError(f"invalid bitstring {bits!r}")
    _guard_qubits(len(bits))
    psi = np.zeros(2 ** len(bits), dtype=complex)
    psi[int(bits, 2)] = 1.0
    return RegisterState(psi, "qubit")


def _qubits(state: RegisterState) -> int:
    if state.basis_tag != "qubit":
        raise InputError("gate operations act on qubit registers")
    return state.num_qubits


def _wire(state: RegisterState, site: int) -> int:
    n = _qubits(state)
    if not 0 <= int(site) < n:
        raise InputError(f"site {site} out of range for {n} qubits", field="site")
    return n


def _bit(n: int, site: int) -> np.ndarray:
    return (np.arange(2**n) >> (n - 1 - site)) & 1


def ry_matrix(angle: float) -> np.ndarray:
    c, s = math.cos(angle / 2.0), math.sin(angle / 2.0)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rx_matrix(angle: float) -> np.ndarray:
    c, s = math.cos(angle / 2.0), math.sin(angle / 2.0)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)


def apply_single(state: RegisterState, matrix: np.ndarray, site: int) -> RegisterState:
    n = _wire(state, site)
    psi = state.amplitudes.reshape([2] * n)
    psi = np.moveaxis(np.tensordot(matrix, psi, axes=([1], [site])), 0, site)
    return RegisterState(psi.reshape(-1), "qubit")


def ry(state: RegisterState, site: int, angle: float) -> RegisterState:
    return apply_single(state, ry_matrix(angle), site)


def rx(state: RegisterState, site: int, angle: float) -> RegisterState:
    return apply_single(state, rx_matrix(angle), site)


def phase_gate(state: RegisterState, pair: tuple[int, int], phi: float) -> RegisterState:
    """exp(iφ) on every amplitude whose bits i and j are both 1."""
    i, j = pair
    if i == j:
        raise InputError("phase gate needs two distinct qubits", field="pair")
    n = _wire(state, i)
    _wire(state, j)
    mask = (_bit(n, i) & _bit(n, j)).astype(bool)
    psi = np.array(state.amplitudes)
    psi[mask] *= np.exp(1j * phi)
    return RegisterState(psi, "qubit")


def couplings_from_params(params: HamiltonianParams) -> dict[tuple[int, int], float]:
    """Non-zero D_ij (i < j) of a parameter set."""
    D = params.D
    M = params.num_sites
    return {(i, j): float(D[i, j]) for i in range(M) for j in range(i + 1, M) if D[i, j] != 0}


def free_evolution(
    state: RegisterState,
    couplings: Mapping[tuple[int, int], float],
    t: float,
    convention: PhaseConvention = "gate",
    site_energies: np.ndarray | Sequence[Sequence[float]] | None = None,
) -> RegisterState:
    """Conditional phases D_ij·t on every coupled pair (diagonal, order-independent).

    ``site_energies`` is an (n, 2) array of local energies of |0⟩ and |1⟩ on each
    site; they add single-qubit phases with the same sign convention.
    """
    if t < 0:
        raise InputError("free-evolution time must be >= 0", field="t")
    sign = {"gate": 1.0, "physical": -1.0}.get(convention)
    if sign is None:
        raise InputError(f"unknown phase convention {convention!r}", field="convention")
    n = _qubits(state)
    phase = np.zeros(2**n)
    for (i, j), D in sorted(couplings.items()):
        if i == j:
            raise InputError("coupled pair must join two distinct qubits", field="couplings")
        _wire(state, i)
        _wire(state, j)
        phase += D * t * (_bit(n, i) & _bit(n, j))
    if site_energies is not None:
        eps = np.asarray(site_energies, dtype=float)
        if eps.shape != (n, 2):
            raise InputError(f"site energies must have shape ({n}, 2), got {eps.shape}")
        for i in range(n):
            bit = _bit(n, i)
            phase += t * np.where(bit == 1, eps[i, 1], eps[i, 0])
    return RegisterState(state.amplitudes * np.exp(1j * sign * phase), "qubit")


def _embed(n: int, control: int, target: int) -> None:
    for w in (control, target):
        if not 0 <= w < n:
            raise InputError(f"wire {w} out of range for {n} qubits")
    if control == target:
        raise InputError("control and target must differ")


def cnot(control: int, target: int, num_qubits: int | None = None) -> GateUnitary:
    """CNOT compiled as Ry(-π/2)_target · π phase gate · Ry(π/2)_target."""
    n = max(control, target) + 1 if num_qubits is None else int(num_qubits)
    _embed(n, control, target)
    _guard_qubits(n, MAX_GATE_QUBITS)
    columns = []
    for k in range(2**n):
        psi = basis_state(format(k, f"0{n}b"))
        psi = ry(psi, target, -math.pi / 2)
        psi = phase_gate(psi, (control, target), math.pi)
        psi = ry(psi, target, math.pi / 2)
        columns.append(psi.amplitudes)
    return GateUnitary(np.column_stack(columns), n)


def ideal_cnot(control: int, target: int, num_qubits: int | None = None) -> GateUnitary:
    """Permutation-matrix CNOT for reference."""
    n = max(control, target) + 1 if num_qubits is None else int(num_qubits)
    _embed(n, control, target)
    _guard_qubits(n, MAX_GATE_QUBITS)
    m = np.zeros((2**n, 2**n), dtype=complex)
    for k in range(2**n):
        flip = (k >> (n - 1 - control)) & 1
        m[k ^ (flip << (n - 1 - target)), k] = 1.0
    return GateUnitary(m, n)


BELL_LABELS = ("phi_plus", "phi_minus", "psi_plus", "psi_minus")


def bell_states() -> dict[str, RegisterState]:
    vecs = {
        "phi_plus": [SQRT1_2, 0, 0, SQRT1_2],
        "phi_minus": [SQRT1_2, 0, 0, -SQRT1_2],
        "psi_plus": [0, SQRT1_2, SQRT1_2, 0],
        "psi_minus": [0, SQRT1_2, -SQRT1_2, 0],
    }
    return {k: RegisterState.normalized(v) for k, v in vecs.items()}


def fidelity(a: RegisterState, b: RegisterState) -> float:
    """|⟨a|b⟩|²."""
    if a.dimension != b.dimension:
        raise InputError(f"dimension mismatch: {a.dimension} vs {b.dimension}")
    return float(abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2)


def concurrence(state: RegisterState) -> float:
    """Two-qubit pure-state concurrence 2|a₀₀a₁₁ - a₀₁a₁₀|."""
    if state.basis_tag != "qubit" or state.dimension != 4:
        raise InputError("concurrence is defined here for two-qubit registers")
    a = state.amplitudes
    return float(2.0 * abs(a[0] * a[3] - a[1] * a[2]))


def identify_bell_state(state: RegisterState) -> tuple[str, float]:
    """Closest Bell state (label, fidelity)."""
    scores = {label: fidelity(b, state) for label, b in bell_states().items()}
    label = max(scores, key=scores.__getitem__)
    return label, scores[label]


@dataclass(frozen=True)
class BellPreparation:
    """States after each preparation step and the Bell state reached."""

    after_pulse: RegisterState
    after_phase: RegisterState
    state: RegisterState
    label: str
    fidelity: float
    concurrence: float


def bell_prep() -> BellPreparation:
    """Two-bit π/2 pulse, π phase gate, single-bit π/2 pulse on qubit 0, from |00⟩.

    With the Ry convention above the result is (|01⟩+|10⟩)/√2 (``psi_plus``).
    """
    psi = init_register(2)
    step1 = ry(ry(psi, 0, math.pi / 2), 1, math.pi / 2)
    step2 = phase_gate(step1, (0, 1), math.pi)
    step3 = ry(step2, 0, math.pi / 2)
    label, fid = identify_bell_state(step3)
    return BellPreparation(step1, step2, step3, label, fid, concurrence(step3))


def wrap_phase(phi: float) -> float:
    """Map to (-π, π]."""
    wrapped = math.remainder(float(phi), 2.0 * math.pi)
    return math.pi if math.isclose(wrapped, -math.pi, abs_tol=1e-15) else wrapped


def entangling_phase_from_fock(
    params: HamiltonianParams,
    t: float,
    site_energies: Sequence[Sequence[float]] | None = None,
) -> float:
    """arg(A₀₀A₁₁/(A₀₁A₁₀)) after evolving each encoded product for time t.

    Only defined in the free-evolution regime (no tunneling, no Raman
    coupling), where φ_e = -D₁₂·t mod 2π and local phases cancel.
    The two-site lattice is the one ``params`` describes (``num_sites == 2``).
    ``site_energies`` (2×3) adds on-site terms Σ ε_iκ n_κi to the Hamiltonian.
    """
    if params.num_sites != 2:
        raise InputError("entangling phase is extracted on a two-site register")
    if any(x != 0 for x in params.tunneling):
        raise RegimeError("entangling phase needs t_a = t_b = t_c = 0 (free-evolution regime)")
    if any(x != 0 for x in params.rabi):
        raise RegimeError("entangling phase needs all Raman couplings off (free-evolution regime)")
    if t < 0:
        raise InputError("evolution time must be >= 0", field="t")
    basis = register_basis(2, params.caps)
    H = build_hamiltonian(params, basis)
    if site_energies is not None:
        H = add_site_energies(H, site_energies)
    idx = encoded_indices(basis)
    amps = []
    for q in range(4):
        start = embed_qubit_state(basis_state(format(q, "02b")), basis)
        amps.append(evolve_eig(start, H, t).amplitudes[idx[q]])
    a00, a01, a10, a11 = amps
    return float(np.angle(a00 * a11 / (a01 * a10)))


@dataclass(frozen=True)
class MeasurementRecord:
    """Projective readout samples; bitstrings list site 0 first."""

    bitstrings: tuple[str, ...]
    shots: int
    seed: int

    def counts(self) -> dict[str, int]:
        return dict(sorted(Counter(self.bitstrings).items()))

    def frequencies(self) -> dict[str, float]:
        return {k: v / self.shots for k, v in self.counts().items()}

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"shot": np.arange(self.shots), "bitstring": list(self.bitstrings)})

    def write_csv(self, path: str | Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.to_frame().to_csv(path, index=False, lineterminator="\n")
        return path


def measure(state: RegisterState, shots: int, seed: int) -> MeasurementRecord:
    """Born-rule samples from one seeded PCG64 stream (bit-reproducible)."""
    if int(shots) < 1:
        raise InputError("shots must be >= 1", field="shots")
    if seed is None or int(seed) < 0:
        raise InputError("measurement needs an explicit non-negative seed", field="seed")
    n = _qubits(state)
    rng = np.random.Generator(np.random.PCG64(int(seed)))
    outcomes = rng.choice(state.dimension, size=int(shots), p=state.probabilities)
    labels = [format(k, f"0{n}b") for k in range(state.dimension)]
    return MeasurementRecord(tuple(labels[k] for k in outcomes), int(shots), int(seed))


def bell_schedule(coupling: float, rabi: float) -> PulseSchedule:
    """Bell preparation as Raman pulses plus a π phase free evolution (duration π/D)."""
    if coupling <= 0:
        raise InputError("Bell schedule needs a positive coupling", field="coupling")
    return PulseSchedule(
        (
            RamanPulse(0, "y", math.pi / 2, rabi),
            RamanPulse(1, "y", math.pi / 2, rabi),
            FreeEvolution(math.pi / coupling),
            RamanPulse(0, "y", math.pi / 2, rabi),
        )
    )


def cnot_schedule(control: int, target: int, coupling: float, rabi: float) -> PulseSchedule:
    """CNOT as Ry(-π/2) on target, π phase free evolution, Ry(π/2) on target."""
    if control == target:
        raise InputError("control and target must differ")
    if coupling <= 0:
        raise InputError("CNOT schedule needs a positive coupling", field="coupling")
    return PulseSchedule(
        (
            RamanPulse(target, "y", -math.pi / 2, rabi),
            FreeEvolution(math.pi / coupling),
            RamanPulse(target, "y", math.pi / 2, rabi),
        )
    )


def run_schedule(
    schedule: PulseSchedule,
    backend: str = "qubit",
    params: HamiltonianParams | None = None,
    state: RegisterState | None = None,
    **options,
):
    """Run ``schedule`` on the ``qubit`` or ``fock`` backend.

    ``state`` defaults to |0…0⟩ on ``params.num_sites`` qubits (or on enough
    qubits for the schedule when no params are given). Returns a
    :class:`~diatomiq.backends.ScheduleResult`.
    """
    from .backends import load_backend

    if state is None:
        if params is not None:
            n = params.num_sites
        else:
            n = 1 + max((s.site for s in schedule if isinstance(s, RamanPulse)), default=0)
        state = init_register(n)
    runner = load_backend(backend, params=params, **options)
    logger.info("running %d-step schedule on %s backend", len(schedule), backend)
    return runner.run(schedule, state)


def site_occupations(state: RegisterState) -> Sequence[float]:
    """Probability that each site holds a molecule (qubit in |1⟩)."""
    n = _qubits(state)
    p = state.probabilities
    return [float(p @ _bit(n, i)) for i in range(n)]
