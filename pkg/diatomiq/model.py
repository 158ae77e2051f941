"""Domain types, pinned physical constants and unit helpers.

Units
-----
* ``params`` works in SI (J, s, C·m, V/m, m).
* ``fock`` and ``gates`` work in dimensionless units with ħ = 1: energies are
  divided by a caller-chosen reference energy E_ref and times are multiplied
  by E_ref/ħ. Use :func:`energy_to_reference` / :func:`time_to_reference`.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any

import numpy as np
import pint

logger = logging.getLogger(__name__)

ureg = pint.UnitRegistry()
Q_ = ureg.Quantity

NORM_GUARD = 1e-10
SPECIES_LABELS = ("a", "b", "c")


class DiatomiqError(Exception):
    """Base class for all package errors."""


class InputError(DiatomiqError, ValueError):
    """Malformed or inconsistent input (config, schedule, catalog, arguments)."""

    def __init__(self, message: str, field: str | None = None, line: int | None = None):
        self.field = field
        self.line = line
        super().__init__(message)


class RegimeError(DiatomiqError, ValueError):
    """Operation requested outside the regime where it is defined."""


class ResourceGuardError(DiatomiqError, RuntimeError):
    """Problem size exceeds the exact-simulation guard."""


@dataclass(frozen=True)
class PhysicalConstants:
    """CODATA-2018 values used everywhere in the package.

    Attributes
    ----------
    hbar : float
        Reduced Planck constant [J·s].
    epsilon0 : float
        Vacuum permittivity [F/m].
    debye : float
        One debye [C·m].
    """

    hbar: float = 1.054571817e-34
    epsilon0: float = 8.8541878128e-12
    debye: float = 3.33564e-30

    def __post_init__(self) -> None:
        for name in ("hbar", "epsilon0", "debye"):
            if not getattr(self, name) > 0:
                raise InputError(f"constant {name} must be strictly positive", field=name)


CONSTANTS = PhysicalConstants()
HBAR = CONSTANTS.hbar
EPSILON0 = CONSTANTS.epsilon0
DEBYE = CONSTANTS.debye


class DipoleRange(str, Enum):
    NEAREST_NEIGHBOR = "nearest_neighbor"
    FULL_INVERSE_CUBE = "full_inverse_cube"


class Statistics(str, Enum):
    BOSE = "bose"
    FERMI_ATOMS = "fermi_atoms"


def _finite(value: float, name: str) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise InputError(f"{name} must be finite, got {value}", field=name)
    return value


def debye_to_si(value: float) -> float:
    """Dipole moment in debye -> C·m."""
    return _finite(value, "dipole_debye") * DEBYE


def si_to_debye(value: float) -> float:
    """Dipole moment in C·m -> debye."""
    return _finite(value, "dipole_si") / DEBYE


def to_si(value: float | str, unit: str, name: str = "value") -> float:
    """Convert a plain number (already in ``unit``) or a pint string to a float in ``unit``.

    Examples: ``to_si("420 nm", "m")``, ``to_si("1.0 V/cm**2", "V/m**2")``,
    ``to_si("pi/2 * rad", "rad")``.
    """
    if isinstance(value, bool):
        raise InputError(f"{name}: expected a number or a quantity string", field=name)
    if isinstance(value, (int, float)):
        return _finite(value, name)
    try:
        q = ureg.parse_expression(str(value))
        if isinstance(q, pint.Quantity):
            out = float(q.to(unit).magnitude)
        else:
            out = float(q)
    except (pint.errors.PintError, AttributeError, SyntaxError, TypeError, ValueError) as exc:
        raise InputError(f"{name}: cannot read {value!r} as {unit} ({exc})", field=name) from exc
    return _finite(out, name)


def energy_to_reference(energy_J: float, reference_J: float) -> float:
    """SI energy -> dimensionless energy in units of ``reference_J``."""
    if reference_J <= 0:
        raise InputError("reference energy must be positive", field="reference_energy")
    return float(energy_J) / reference_J


def time_to_reference(t_s: float, reference_J: float) -> float:
    """SI time -> dimensionless time t·E_ref/ħ."""
    if reference_J <= 0:
        raise InputError("reference energy must be positive", field="reference_energy")
    return float(t_s) * reference_J / HBAR


def time_from_reference(t: float, reference_J: float) -> float:
    """Dimensionless time -> SI seconds."""
    if reference_J <= 0:
        raise InputError("reference energy must be positive", field="reference_energy")
    return float(t) * HBAR / reference_J


@dataclass(frozen=True)
class MoleculeSpecies:
    """Heteronuclear molecule with its ground-state electric dipole moment [C·m]."""

    name: str
    dipole_moment: float

    def __post_init__(self) -> None:
        if not self.name:
            raise InputError("species name must be non-empty", field="name")
        d = _finite(self.dipole_moment, "dipole_moment")
        if d < 0:
            raise InputError(f"{self.name}: dipole moment must be >= 0", field="dipole_moment")
        object.__setattr__(self, "dipole_moment", d)

    @property
    def dipole_debye(self) -> float:
        return si_to_debye(self.dipole_moment)


@dataclass(frozen=True)
class LatticeSpec:
    """1D lattice of ``num_sites`` sites at z = i·spacing (open chain).

    ``wavelength`` is optional metadata; when given, spacing must be λ/2.
    ``depth`` (V₀) is carried as metadata only.
    """

    num_sites: int
    spacing: float
    wavelength: float | None = None
    dipole_range: DipoleRange = DipoleRange.NEAREST_NEIGHBOR
    depth: float | None = None

    def __post_init__(self) -> None:
        if int(self.num_sites) < 1:
            raise InputError("num_sites must be >= 1", field="lattice.num_sites")
        if not _finite(self.spacing, "lattice.spacing") > 0:
            raise InputError("spacing must be > 0", field="lattice.spacing")
        if self.wavelength is not None:
            wl = _finite(self.wavelength, "lattice.wavelength")
            if not math.isclose(self.spacing, wl / 2.0, rel_tol=1e-9):
                raise InputError("spacing must equal wavelength/2", field="lattice.spacing")
        object.__setattr__(self, "num_sites", int(self.num_sites))
        object.__setattr__(self, "dipole_range", DipoleRange(self.dipole_range))

    @classmethod
    def from_wavelength(cls, num_sites: int, wavelength: float, **kw: Any) -> LatticeSpec:
        return cls(num_sites=num_sites, spacing=wavelength / 2.0, wavelength=wavelength, **kw)

    @property
    def wavenumber(self) -> float | None:
        """k = 2π/λ [1/m] when a wavelength is known."""
        return None if self.wavelength is None else 2.0 * math.pi / self.wavelength

    def positions(self) -> np.ndarray:
        return np.arange(self.num_sites, dtype=float) * self.spacing


@dataclass(frozen=True)
class FieldSpec:
    """External field E(z) = E₀ + g·z along x.

    base_field : E₀ [V/m]
    gradient : g [V/m²]
    """

    base_field: float = 0.0
    gradient: float = 0.0

    def __post_init__(self) -> None:
        if _finite(self.base_field, "field.base_field") < 0:
            raise InputError("base_field must be >= 0", field="field.base_field")
        if _finite(self.gradient, "field.gradient") < 0:
            raise InputError("gradient must be >= 0", field="field.gradient")

    def at(self, z: float | np.ndarray) -> float | np.ndarray:
        return self.base_field + self.gradient * z


def interaction_matrix(
    aa: float = 0.0,
    bb: float = 0.0,
    cc: float = 0.0,
    ab: float = 0.0,
    ac: float = 0.0,
    bc: float = 0.0,
) -> tuple[tuple[float, ...], ...]:
    """Symmetric U_κκ′ matrix in (a, b, c) order."""
    return (
        (float(aa), float(ab), float(ac)),
        (float(ab), float(bb), float(bc)),
        (float(ac), float(bc), float(cc)),
    )


def dipole_matrix(
    num_sites: int,
    coupling: float,
    dipole_range: DipoleRange | str = DipoleRange.NEAREST_NEIGHBOR,
) -> tuple[tuple[float, ...], ...]:
    """D_ij for an open chain with nearest-neighbour coupling ``coupling``.

    With ``full_inverse_cube`` the pair (i, j) gets coupling/|i-j|³.
    """
    dipole_range = DipoleRange(dipole_range)
    n = int(num_sites)
    D = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            k = j - i
            if k == 1 or dipole_range is DipoleRange.FULL_INVERSE_CUBE:
                D[i, j] = D[j, i] = float(coupling) / k**3
    return tuple(tuple(float(x) for x in row) for row in D)


@dataclass(frozen=True)
class HamiltonianParams:
    """All coefficients of the atom–molecule lattice Hamiltonian (dimensionless, ħ = 1).

    Attributes
    ----------
    tunneling : (t_a, t_b, t_c)
    rabi : Ω_i per site; its length fixes the number of sites.
    interactions : 3×3 U_κκ′ in (a, b, c) order.
    dipole_coupling : M×M D_ij.
    caps : per-site occupation caps (a, b, c); ``None`` means "sector charge".
    statistics : ``bose`` or ``fermi_atoms``.
    dipole_range : which pairs may carry D_ij.
    raman_phase : per-site phase ϕ_i of the Raman coupling (default 0).
    """

    tunneling: tuple[float, float, float]
    rabi: tuple[float, ...]
    interactions: tuple[tuple[float, ...], ...]
    dipole_coupling: tuple[tuple[float, ...], ...]
    caps: tuple[int, int, int] | None = None
    statistics: Statistics = Statistics.BOSE
    dipole_range: DipoleRange = DipoleRange.NEAREST_NEIGHBOR
    raman_phase: tuple[float, ...] | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "tunneling", tuple(float(x) for x in self.tunneling))
        object.__setattr__(self, "rabi", tuple(float(x) for x in self.rabi))
        object.__setattr__(
            self, "interactions", tuple(tuple(float(x) for x in row) for row in self.interactions)
        )
        object.__setattr__(
            self,
            "dipole_coupling",
            tuple(tuple(float(x) for x in row) for row in self.dipole_coupling),
        )
        if self.caps is not None:
            object.__setattr__(self, "caps", tuple(int(x) for x in self.caps))
        if self.raman_phase is not None:
            object.__setattr__(self, "raman_phase", tuple(float(x) for x in self.raman_phase))
        object.__setattr__(self, "statistics", Statistics(self.statistics))
        object.__setattr__(self, "dipole_range", DipoleRange(self.dipole_range))

    @classmethod
    def create(
        cls,
        num_sites: int,
        *,
        tunneling: Sequence[float] = (0.0, 0.0, 0.0),
        rabi: float | Sequence[float] = 0.0,
        interactions: Sequence[Sequence[float]] | None = None,
        coupling: float = 0.0,
        dipole_range: DipoleRange | str = DipoleRange.NEAREST_NEIGHBOR,
        caps: Sequence[int] | None = None,
        statistics: Statistics | str = Statistics.BOSE,
        raman_phase: Sequence[float] | None = None,
    ) -> HamiltonianParams:
        """Convenience constructor from a single nearest-neighbour coupling."""
        rabi_t = tuple(np.broadcast_to(np.asarray(rabi, dtype=float), (num_sites,)).tolist())
        return cls(
            tunneling=tuple(tunneling),
            rabi=rabi_t,
            interactions=interactions if interactions is not None else interaction_matrix(),
            dipole_coupling=dipole_matrix(num_sites, coupling, dipole_range),
            caps=None if caps is None else tuple(caps),
            statistics=Statistics(statistics),
            dipole_range=DipoleRange(dipole_range),
            raman_phase=None if raman_phase is None else tuple(raman_phase),
        )

    @property
    def num_sites(self) -> int:
        return len(self.rabi)

    @property
    def U(self) -> np.ndarray:
        return np.asarray(self.interactions, dtype=float)

    @property
    def D(self) -> np.ndarray:
        return np.asarray(self.dipole_coupling, dtype=float)

    @property
    def phases(self) -> np.ndarray:
        if self.raman_phase is None:
            return np.zeros(self.num_sites)
        return np.asarray(self.raman_phase, dtype=float)

    def with_updates(self, **changes: Any) -> HamiltonianParams:
        return replace(self, **changes)


@dataclass(frozen=True)
class Diagnostic:
    """One violated invariant: dotted field path plus message."""

    path: str
    message: str

    def __str__(self) -> str:
        return f"{self.path}: {self.message}"


def validate(params: HamiltonianParams) -> list[Diagnostic]:
    """Return every violated invariant of ``params`` (empty list means valid)."""
    out: list[Diagnostic] = []
    M = params.num_sites
    if M < 1:
        out.append(Diagnostic("rabi", "at least one site is required"))
    if len(params.tunneling) != 3:
        out.append(Diagnostic("tunneling", "expected (t_a, t_b, t_c)"))
    for k, t in enumerate(params.tunneling):
        if not math.isfinite(t):
            out.append(Diagnostic(f"tunneling[{k}]", "must be finite"))
    for i, w in enumerate(params.rabi):
        if not math.isfinite(w) or w < 0:
            out.append(Diagnostic(f"rabi[{i}]", "must be finite and >= 0"))
    if params.raman_phase is not None and len(params.raman_phase) != M:
        out.append(Diagnostic("raman_phase", f"expected {M} entries"))

    U = params.U
    if U.shape != (3, 3):
        out.append(Diagnostic("interactions", "expected a 3x3 matrix"))
    else:
        if not np.all(np.isfinite(U)):
            out.append(Diagnostic("interactions", "entries must be finite"))
        for i in range(3):
            for j in range(i + 1, 3):
                if U[i, j] != U[j, i]:
                    pair = SPECIES_LABELS[i] + SPECIES_LABELS[j]
                    out.append(Diagnostic(f"interactions.U_{pair}", "matrix must be symmetric"))

    D = params.D
    if D.shape != (M, M):
        out.append(Diagnostic("dipole_coupling", f"expected a {M}x{M} matrix"))
    else:
        for i in range(M):
            if D[i, i] != 0:
                out.append(Diagnostic(f"dipole_coupling[{i}][{i}]", "diagonal must be 0"))
            for j in range(i + 1, M):
                if D[i, j] != D[j, i]:
                    out.append(Diagnostic(f"dipole_coupling[{i}][{j}]", "D_ij must equal D_ji"))
                if (
                    params.dipole_range is DipoleRange.NEAREST_NEIGHBOR
                    and j - i > 1
                    and D[i, j] != 0
                ):
                    out.append(
                        Diagnostic(
                            f"dipole_coupling[{i}][{j}]",
                            "non-nearest-neighbour coupling with dipole_range=nearest_neighbor",
                        )
                    )

    if params.caps is not None:
        if len(params.caps) != 3:
            out.append(Diagnostic("caps", "expected (cap_a, cap_b, cap_c)"))
        elif any(c < 0 for c in params.caps):
            out.append(Diagnostic("caps", "caps must be >= 0"))

    if params.statistics is Statistics.FERMI_ATOMS:
        if U.shape == (3, 3):
            if U[0, 0] != 0:
                out.append(Diagnostic("interactions.U_aa", "must be 0 for fermionic atoms"))
            if U[1, 1] != 0:
                out.append(Diagnostic("interactions.U_bb", "must be 0 for fermionic atoms"))
        caps = params.caps
        if caps is None or len(caps) != 3 or caps[0] != 1 or caps[1] != 1:
            out.append(Diagnostic("caps", "fermionic atoms require cap_a = cap_b = 1"))
        if any(t != 0 for t in params.tunneling):
            out.append(
                Diagnostic(
                    "tunneling",
                    "fermionic atoms require all tunneling amplitudes to be 0 "
                    "(sign-correct fermionic hopping is not modelled)",
                )
            )
    return out


def require_valid(params: HamiltonianParams) -> None:
    problems = validate(params)
    if problems:
        raise InputError("; ".join(str(p) for p in problems), field=problems[0].path)


@dataclass(frozen=True)
class FockState:
    """Per-site occupations ((n_a, n_b, n_c), ...)."""

    occupations: tuple[tuple[int, int, int], ...]

    def __post_init__(self) -> None:
        occ = tuple(tuple(int(n) for n in site) for site in self.occupations)
        if any(len(site) != 3 or min(site) < 0 for site in occ):
            raise InputError("occupations must be non-negative (n_a, n_b, n_c) triples")
        object.__setattr__(self, "occupations", occ)

    @property
    def num_sites(self) -> int:
        return len(self.occupations)

    @property
    def flat(self) -> tuple[int, ...]:
        return tuple(n for site in self.occupations for n in site)

    @property
    def charges(self) -> tuple[int, int]:
        """(Q₁, Q₂) = (Σ n_a + n_c, Σ n_b + n_c)."""
        q1 = sum(a + c for a, _, c in self.occupations)
        q2 = sum(b + c for _, b, c in self.occupations)
        return q1, q2

    def within(self, caps: Sequence[int]) -> bool:
        return all(n <= cap for site in self.occupations for n, cap in zip(site, caps, strict=True))

    def __str__(self) -> str:
        return "".join("|" + "".join(str(n) for n in site) + ">" for site in self.occupations)


@dataclass(frozen=True)
class RegisterState:
    """Normalized amplitude vector over the qubit basis (2^n) or a Fock basis.

    ``basis_tag`` is ``"qubit"`` or ``"fock"``; for ``"fock"`` the
    :class:`~diatomiq.fock.FockBasis` is kept in ``basis``.
    """

    amplitudes: np.ndarray
    basis_tag: str = "qubit"
    basis: Any = field(default=None, compare=False, repr=False)

    def __post_init__(self) -> None:
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if amps.size == 0:
            raise InputError("register state must have at least one amplitude")
        if not np.all(np.isfinite(amps)):
            raise InputError("amplitudes must be finite")
        if abs(np.linalg.norm(amps) - 1.0) > NORM_GUARD:
            raise InputError(f"state is not normalized (norm={np.linalg.norm(amps):.12g})")
        if self.basis_tag not in ("qubit", "fock"):
            raise InputError(f"unknown basis tag {self.basis_tag!r}")
        if self.basis_tag == "qubit" and amps.size & (amps.size - 1):
            raise InputError("qubit register dimension must be a power of two")
        if self.basis_tag == "fock" and self.basis is not None and len(self.basis) != amps.size:
            raise InputError("amplitude count does not match the Fock basis")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def normalized(
        cls, amplitudes: Any, basis_tag: str = "qubit", basis: Any = None
    ) -> RegisterState:
        amps = np.asarray(amplitudes, dtype=complex).reshape(-1)
        nrm = np.linalg.norm(amps)
        if nrm == 0:
            raise InputError("cannot normalize a zero vector")
        return cls(amps / nrm, basis_tag, basis)

    @property
    def dimension(self) -> int:
        return int(self.amplitudes.size)

    @property
    def num_qubits(self) -> int:
        if self.basis_tag != "qubit":
            raise InputError("num_qubits is defined for qubit registers only")
        return self.dimension.bit_length() - 1

    @property
    def probabilities(self) -> np.ndarray:
        p = np.abs(self.amplitudes) ** 2
        return p / p.sum()


@dataclass(frozen=True)
class RamanPulse:
    """Resonant Raman rotation by ``angle`` about ``axis`` at Rabi rate ``rabi`` (θ = Ω_R·τ)."""

    site: int
    axis: str
    angle: float
    rabi: float

    def __post_init__(self) -> None:
        if int(self.site) < 0:
            raise InputError("pulse site must be >= 0", field="site")
        if self.axis not in ("x", "y"):
            raise InputError(f"pulse axis must be 'x' or 'y', got {self.axis!r}", field="axis")
        _finite(self.angle, "angle")
        if not _finite(self.rabi, "rabi") > 0:
            raise InputError("pulse rabi rate must be > 0", field="rabi")
        object.__setattr__(self, "site", int(self.site))

    @property
    def duration(self) -> float:
        return abs(self.angle) / self.rabi


@dataclass(frozen=True)
class FreeEvolution:
    """Free evolution with all Raman couplings off."""

    duration: float

    def __post_init__(self) -> None:
        if _finite(self.duration, "duration") < 0:
            raise InputError("free-evolution duration must be >= 0", field="duration")


Step = RamanPulse | FreeEvolution


@dataclass(frozen=True)
class PulseSchedule:
    steps: tuple[Step, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "steps", tuple(self.steps))

    def __len__(self) -> int:
        return len(self.steps)

    def __iter__(self):
        return iter(self.steps)

    @property
    def duration(self) -> float:
        return float(sum(s.duration for s in self.steps))

    def then(self, *steps: Step) -> PulseSchedule:
        return PulseSchedule(self.steps + tuple(steps))
