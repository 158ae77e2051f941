"""Exact small-register simulation of the atom–molecule lattice Hamiltonian.

H = -Σ_<ij> Σ_κ t_κ (κ_i⁺κ_j + h.c.)
    + Σ_i Ω_i (e^{iϕ_i} c_i⁺a_ib_i + e^{-iϕ_i} a_i⁺b_i⁺c_i)
    + Σ_<ij> D_ij n_ci n_cj
    + Σ_i Σ_κ U_κκ n_κi(n_κi - 1)/2
    + Σ_i (U_ab n_ai n_bi + U_ac n_ai n_ci + U_bc n_bi n_ci)

Dimensionless units (ħ = 1). The Raman term conserves Q₁ = Σ(n_a + n_c) and
Q₂ = Σ(n_b + n_c), so every operator is assembled inside one (Q₁, Q₂) sector.
Occupations above the caps are dropped (hard-wall truncation); the chain is open.
"""

from __future__ import annotations

import logging
from collections.abc import Iterator, Sequence
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.linalg
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from .model import (
    DipoleRange,
    FockState,
    HamiltonianParams,
    InputError,
    LatticeSpec,
    RegisterState,
    ResourceGuardError,
    require_valid,
)

logger = logging.getLogger(__name__)

MAX_SITES = 5
MAX_DIMENSION = 20000
QUBIT_ZERO = (1, 1, 0)
QUBIT_ONE = (0, 0, 1)


@dataclass(frozen=True)
class FockBasis:
    """Ordered Fock states of one (Q₁, Q₂) sector.

    States are sorted in descending lexicographic order of the flattened
    occupation tuple (site 0 n_a, n_b, n_c, site 1 ...). ``sector`` is
    ``None`` for merged multi-sector bases.
    """

    states: tuple[FockState, ...]
    sector: tuple[int, int] | None
    caps: tuple[int, int, int]
    _index: dict[tuple[int, ...], int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        index = {s.flat: k for k, s in enumerate(self.states)}
        if len(index) != len(self.states):
            raise InputError("Fock basis contains duplicate states")
        object.__setattr__(self, "_index", index)

    def __len__(self) -> int:
        return len(self.states)

    def __iter__(self) -> Iterator[FockState]:
        return iter(self.states)

    def __getitem__(self, k: int) -> FockState:
        return self.states[k]

    @property
    def num_sites(self) -> int:
        return self.states[0].num_sites if self.states else 0

    def index(self, state: FockState | Sequence[int]) -> int | None:
        """Position of ``state`` (FockState or flat tuple), ``None`` if absent."""
        key = state.flat if isinstance(state, FockState) else tuple(int(n) for n in state)
        return self._index.get(key)

    def occupation_array(self) -> np.ndarray:
        """(dim, M, 3) integer array of occupations."""
        return np.array([s.occupations for s in self.states], dtype=np.int64).reshape(
            len(self.states), self.num_sites, 3
        )


def default_caps(sector: tuple[int, int]) -> tuple[int, int, int]:
    q1, q2 = sector
    return (q1, q2, min(q1, q2))


def _guard_sites(num_sites: int) -> None:
    if num_sites > MAX_SITES:
        raise ResourceGuardError(
            f"{num_sites} sites exceed the exact-simulation limit of {MAX_SITES}"
        )


def _guard_dimension(dim: int) -> None:
    if dim > MAX_DIMENSION:
        raise ResourceGuardError(
            f"Fock dimension {dim} exceeds the exact-simulation limit of {MAX_DIMENSION}"
        )


def enumerate_basis(
    lattice: LatticeSpec | int,
    sector: tuple[int, int],
    caps: Sequence[int] | None = None,
) -> FockBasis:
    """All cap-respecting occupations with charges ``sector``; may be empty."""
    num_sites = lattice.num_sites if isinstance(lattice, LatticeSpec) else int(lattice)
    q1, q2 = (int(q) for q in sector)
    if q1 < 0 or q2 < 0:
        raise InputError(f"sector charges must be >= 0, got {sector}", field="sector")
    if num_sites < 1:
        raise InputError("num_sites must be >= 1", field="num_sites")
    _guard_sites(num_sites)
    cap_a, cap_b, cap_c = default_caps((q1, q2)) if caps is None else (int(c) for c in caps)

    site_options = [
        (a, b, c)
        for c in range(min(cap_c, q1, q2) + 1)
        for a in range(min(cap_a, q1 - c) + 1)
        for b in range(min(cap_b, q2 - c) + 1)
    ]

    found: list[tuple[int, ...]] = []

    def fill(site: int, r1: int, r2: int, prefix: tuple[int, ...]) -> None:
        if site == num_sites:
            if r1 == 0 and r2 == 0:
                found.append(prefix)
                _guard_dimension(len(found))
            return
        for a, b, c in site_options:
            if a + c <= r1 and b + c <= r2:
                fill(site + 1, r1 - a - c, r2 - b - c, prefix + (a, b, c))

    fill(0, q1, q2, ())
    found.sort(reverse=True)
    states = tuple(
        FockState(tuple(flat[3 * i : 3 * i + 3] for i in range(num_sites))) for flat in found
    )
    logger.debug("sector %s on %d sites: %d states", (q1, q2), num_sites, len(states))
    return FockBasis(states=states, sector=(q1, q2), caps=(cap_a, cap_b, cap_c))


def merge_bases(*bases: FockBasis) -> FockBasis:
    """Union of several sector bases in the same canonical order (sector = None)."""
    if not bases:
        raise InputError("merge_bases needs at least one basis")
    sites = {b.num_sites for b in bases if len(b)}
    if len(sites) > 1:
        raise InputError("cannot merge bases with different site counts")
    flats = sorted({s.flat for b in bases for s in b}, reverse=True)
    _guard_dimension(len(flats))
    m = sites.pop() if sites else 0
    states = tuple(FockState(tuple(f[3 * i : 3 * i + 3] for i in range(m))) for f in flats)
    caps = tuple(max(b.caps[k] for b in bases) for k in range(3))
    return FockBasis(states=states, sector=None, caps=caps)


@dataclass(frozen=True, eq=False)
class HermitianOperator:
    """Sparse Hermitian matrix as sorted (row, col, value) triplets."""

    dimension: int
    rows: np.ndarray
    cols: np.ndarray
    values: np.ndarray
    basis: FockBasis | None = field(default=None, repr=False, compare=False)
    _eig: tuple[np.ndarray, np.ndarray] | None = field(
        default=None, init=False, repr=False, compare=False
    )

    @classmethod
    def from_entries(
        cls, dimension: int, entries: dict[tuple[int, int], complex], basis: FockBasis | None = None
    ) -> HermitianOperator:
        keys = sorted(k for k, v in entries.items() if v != 0)
        rows = np.array([k[0] for k in keys], dtype=np.int64)
        cols = np.array([k[1] for k in keys], dtype=np.int64)
        values = np.array([entries[k] for k in keys], dtype=complex)
        for arr in (rows, cols, values):
            arr.setflags(write=False)
        return cls(dimension, rows, cols, values, basis)

    @property
    def nnz(self) -> int:
        return int(self.values.size)

    def to_sparse(self) -> sp.csr_matrix:
        return sp.csr_matrix(
            (self.values, (self.rows, self.cols)), shape=(self.dimension, self.dimension)
        )

    def to_dense(self) -> np.ndarray:
        dense = np.zeros((self.dimension, self.dimension), dtype=complex)
        dense[self.rows, self.cols] = self.values
        return dense

    def hermiticity_error(self) -> float:
        dense = self.to_dense()
        return float(np.max(np.abs(dense - dense.conj().T))) if self.dimension else 0.0

    def eigh(self) -> tuple[np.ndarray, np.ndarray]:
        """Cached full eigendecomposition (ascending eigenvalues)."""
        if self._eig is None:
            w, v = scipy.linalg.eigh(self.to_dense())
            object.__setattr__(self, "_eig", (w, v))
        return self._eig

    def expectation(self, state: RegisterState) -> float:
        psi = state.amplitudes
        return float(np.real(np.vdot(psi, self.to_sparse() @ psi)))


def _add(entries: dict[tuple[int, int], complex], key: tuple[int, int], value: complex) -> None:
    entries[key] = entries.get(key, 0.0) + value


def onsite_energy(U: np.ndarray, occupation: Sequence[int]) -> float:
    """Σ_κ U_κκ n_κ(n_κ-1)/2 + Σ_{κ<κ'} U_κκ' n_κ n_κ' for one site."""
    na, nb, nc = occupation
    energy = U[0, 0] * na * (na - 1) / 2 + U[1, 1] * nb * (nb - 1) / 2 + U[2, 2] * nc * (nc - 1) / 2
    return float(energy + U[0, 1] * na * nb + U[0, 2] * na * nc + U[1, 2] * nb * nc)


def encoded_site_energies(params: HamiltonianParams) -> np.ndarray:
    """On-site energies of the encoded |0⟩ = (1,1,0) and |1⟩ = (0,0,1), shape (M, 2)."""
    U = params.U
    pair = (onsite_energy(U, QUBIT_ZERO), onsite_energy(U, QUBIT_ONE))
    return np.tile(pair, (params.num_sites, 1))


def build_hamiltonian(params: HamiltonianParams, basis: FockBasis) -> HermitianOperator:
    """Assemble the lattice Hamiltonian on ``basis``."""
    require_valid(params)
    if len(basis) == 0:
        raise InputError("cannot build a Hamiltonian on an empty basis")
    M = params.num_sites
    if basis.num_sites != M:
        raise InputError(
            f"basis has {basis.num_sites} sites but parameters describe {M}", field="basis"
        )
    if params.caps is not None and not all(s.within(params.caps) for s in basis):
        raise InputError("basis contains states above the parameter caps", field="caps")

    U = params.U
    D = params.D
    t = params.tunneling
    rabi = params.rabi
    phases = np.exp(1j * params.phases)
    pairs = [
        (i, j, D[i, j])
        for i in range(M)
        for j in range(i + 1, M)
        if D[i, j] != 0 and (j - i == 1 or params.dipole_range is DipoleRange.FULL_INVERSE_CUBE)
    ]

    entries: dict[tuple[int, int], complex] = {}
    for k, state in enumerate(basis):
        occ = [list(site) for site in state.occupations]

        diag = sum(onsite_energy(U, site) for site in occ)
        for i, j, Dij in pairs:
            diag += Dij * occ[i][2] * occ[j][2]
        if diag != 0.0:
            _add(entries, (k, k), diag)

        for i in range(M - 1):
            for kappa in range(3):
                if t[kappa] == 0.0:
                    continue
                for src, dst in ((i, i + 1), (i + 1, i)):
                    n_src, n_dst = occ[src][kappa], occ[dst][kappa]
                    if n_src == 0:
                        continue
                    new = [row[:] for row in occ]
                    new[src][kappa] -= 1
                    new[dst][kappa] += 1
                    target = basis.index(tuple(n for row in new for n in row))
                    if target is not None:
                        amp = -t[kappa] * np.sqrt(n_src * (n_dst + 1))
                        _add(entries, (target, k), amp)

        for i in range(M):
            if rabi[i] == 0.0:
                continue
            na, nb, nc = occ[i]
            if na > 0 and nb > 0:
                new = [row[:] for row in occ]
                new[i] = [na - 1, nb - 1, nc + 1]
                target = basis.index(tuple(n for row in new for n in row))
                if target is not None:
                    _add(entries, (target, k), rabi[i] * phases[i] * np.sqrt(na * nb * (nc + 1)))
            if nc > 0:
                new = [row[:] for row in occ]
                new[i] = [na + 1, nb + 1, nc - 1]
                target = basis.index(tuple(n for row in new for n in row))
                if target is not None:
                    amp = rabi[i] * np.conj(phases[i]) * np.sqrt((na + 1) * (nb + 1) * nc)
                    _add(entries, (target, k), amp)

    op = HermitianOperator.from_entries(len(basis), entries, basis)
    logger.debug("hamiltonian: dim=%d nnz=%d", op.dimension, op.nnz)
    return op


def add_site_energies(
    op: HermitianOperator, site_energies: Sequence[Sequence[float]]
) -> HermitianOperator:
    """H + Σ_i Σ_κ ε_iκ n_κi for an M×3 array of on-site energies ε."""
    if op.basis is None:
        raise InputError("site energies need an operator built on a Fock basis")
    eps = np.asarray(site_energies, dtype=float)
    occ = op.basis.occupation_array()
    if eps.shape != occ.shape[1:]:
        raise InputError(f"site energies must have shape {occ.shape[1:]}, got {eps.shape}")
    entries = {
        (int(r), int(c)): complex(v)
        for r, c, v in zip(op.rows.tolist(), op.cols.tolist(), op.values.tolist(), strict=True)
    }
    for k, shift in enumerate(np.einsum("kij,ij->k", occ, eps)):
        _add(entries, (k, k), float(shift))
    return HermitianOperator.from_entries(op.dimension, entries, op.basis)


def dump_operator(op: HermitianOperator, path: str | Path) -> Path:
    """Write ``row col re im`` lines in (row, col) order, full precision."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [
        f"{r} {c} {v.real:.17g} {v.imag:.17g}"
        for r, c, v in zip(op.rows.tolist(), op.cols.tolist(), op.values.tolist(), strict=True)
    ]
    path.write_text("\n".join(lines) + ("\n" if lines else ""))
    return path


def _check_dims(state: RegisterState, op: HermitianOperator) -> None:
    if state.dimension != op.dimension:
        raise InputError(
            f"state dimension {state.dimension} does not match operator dimension {op.dimension}"
        )


def _like(state: RegisterState, amplitudes: np.ndarray) -> RegisterState:
    return RegisterState(amplitudes, state.basis_tag, state.basis)


def evolve_eig(state: RegisterState, op: HermitianOperator, t: float) -> RegisterState:
    """exp(-iHt)·ψ from the full eigendecomposition."""
    _check_dims(state, op)
    if t == 0:
        return _like(state, state.amplitudes.copy())
    w, v = op.eigh()
    psi = v @ (np.exp(-1j * w * t) * (v.conj().T @ state.amplitudes))
    return _like(state, psi)


def evolve_stepped(
    state: RegisterState, op: HermitianOperator, t: float, step_count: int = 1000
) -> RegisterState:
    """exp(-iHt)·ψ by ``step_count`` diagonal [2/2] Padé steps.

    Each step (1 - iHτ/2 - H²τ²/12)/(1 + iHτ/2 - H²τ²/12) is unitary for
    Hermitian H; the local error is O(τ⁵).
    """
    _check_dims(state, op)
    if int(step_count) < 1:
        raise InputError("step_count must be >= 1", field="step_count")
    if t == 0:
        return _like(state, state.amplitudes.copy())
    tau = float(t) / int(step_count)
    H = op.to_sparse().tocsc()
    H2 = (H @ H).tocsc()
    eye = sp.identity(op.dimension, dtype=complex, format="csc")
    numer = (eye - 0.5j * tau * H - (tau**2 / 12.0) * H2).tocsr()
    denom = (eye + 0.5j * tau * H - (tau**2 / 12.0) * H2).tocsc()
    lu = splu(denom)
    psi = np.array(state.amplitudes, dtype=complex)
    for _ in range(int(step_count)):
        psi = lu.solve(numer @ psi)
    return _like(state, psi)


def ground_state(op: HermitianOperator) -> tuple[float, RegisterState]:
    """Lowest eigenpair; the largest-magnitude amplitude is made real positive."""
    if op.dimension == 0:
        raise InputError("empty operator has no ground state")
    w, v = op.eigh()
    vec = np.array(v[:, 0], dtype=complex)
    pivot = vec[int(np.argmax(np.abs(vec)))]
    vec *= np.conj(pivot) / abs(pivot)
    vec /= np.linalg.norm(vec)
    return float(w[0]), RegisterState(vec, "fock", op.basis)


def encoded_indices(basis: FockBasis) -> np.ndarray:
    """Basis position of every encoded product, indexed by qubit index.

    Site i is qubit i (most significant first): |0⟩ = (1,1,0), |1⟩ = (0,0,1).
    """
    M = basis.num_sites
    if basis.sector != (M, M):
        raise InputError(f"qubit encoding needs sector ({M}, {M}), got {basis.sector}")
    out = np.empty(2**M, dtype=np.int64)
    for q in range(2**M):
        bits = [(q >> (M - 1 - i)) & 1 for i in range(M)]
        flat = tuple(n for bit in bits for n in (QUBIT_ONE if bit else QUBIT_ZERO))
        k = basis.index(flat)
        if k is None:
            raise InputError("basis caps exclude part of the qubit encoding", field="caps")
        out[q] = k
    return out


def project_qubit_subspace(state: RegisterState) -> tuple[RegisterState, float]:
    """Encoded-subspace part of a Fock state (renormalized) and its leakage 1 - weight."""
    if state.basis_tag != "fock" or state.basis is None:
        raise InputError("projection needs a state over a Fock basis")
    idx = encoded_indices(state.basis)
    amps = state.amplitudes[idx]
    captured = float(np.sum(np.abs(amps) ** 2))
    leakage = max(0.0, 1.0 - captured)
    if captured == 0.0:
        raise InputError("state has no weight in the encoded qubit subspace")
    return RegisterState(amps / np.sqrt(captured), "qubit"), leakage


def embed_qubit_state(state: RegisterState, basis: FockBasis) -> RegisterState:
    """Place a qubit register into the encoded products of ``basis``."""
    if state.basis_tag != "qubit":
        raise InputError("embedding needs a qubit register")
    idx = encoded_indices(basis)
    if idx.size != state.dimension:
        raise InputError(
            f"{state.num_qubits} qubits do not match a {basis.num_sites}-site basis"
        )
    psi = np.zeros(len(basis), dtype=complex)
    psi[idx] = state.amplitudes
    return RegisterState(psi, "fock", basis)


def charge_expectations(state: RegisterState) -> tuple[float, float]:
    """(⟨N_a + N_c⟩, ⟨N_b + N_c⟩) of a Fock state."""
    if state.basis is None:
        raise InputError("charge expectations need a Fock basis")
    occ = state.basis.occupation_array()
    q1 = (occ[:, :, 0] + occ[:, :, 2]).sum(axis=1)
    q2 = (occ[:, :, 1] + occ[:, :, 2]).sum(axis=1)
    p = np.abs(state.amplitudes) ** 2
    return float(p @ q1), float(p @ q2)


def register_basis(num_sites: int, caps: Sequence[int] | None = None) -> FockBasis:
    """The (M, M) sector holding an M-site register."""
    return enumerate_basis(num_sites, (num_sites, num_sites), caps)
