"""Run configuration and schedule files.

Config files are JSON objects validated by :class:`RunConfig`; unknown keys
are errors. Physical quantities are plain SI numbers or pint strings such as
``"420 nm"``, ``"1.0 V/cm**2"`` or ``"1e-30 J"``. Hamiltonian entries are
dimensionless (units of ``reference_energy``) when given as numbers and are
converted when given as energy strings.

Schedule files are JSON Lines, one step per line::

    # Bell preparation
    {"type": "raman", "site": 0, "axis": "y", "angle": "pi/2", "rabi": 10}
    {"type": "raman", "site": 1, "axis": "y", "angle": "pi/2", "rabi": 10}
    {"type": "free", "duration": 3.141592653589793}
    {"type": "raman", "site": 0, "axis": "y", "angle": "pi/2", "rabi": 10}

Rabi strings are angular rates (``"2*pi*5 kHz"``; pint reads Hz as 1/s).
"""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Annotated, Any, Literal

from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    TypeAdapter,
    ValidationError,
    field_validator,
    model_validator,
)

from .catalog import SpeciesCatalog, load_catalog
from .model import (
    HBAR,
    DipoleRange,
    FieldSpec,
    FreeEvolution,
    HamiltonianParams,
    InputError,
    LatticeSpec,
    PulseSchedule,
    RamanPulse,
    Statistics,
    dipole_matrix,
    interaction_matrix,
    require_valid,
    time_to_reference,
    to_si,
)
from .params import coupling_matrix

logger = logging.getLogger(__name__)

Quantity = float | str
DEFAULT_WAVELENGTH = "840 nm"


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class LatticeConfig(_Strict):
    """Give ``spacing`` or ``wavelength`` (not both); neither means λ = 840 nm."""

    num_sites: int = Field(2, ge=1)
    spacing: Quantity | None = None
    wavelength: Quantity | None = None
    dipole_range: DipoleRange = DipoleRange.NEAREST_NEIGHBOR
    depth: Quantity | None = None

    @model_validator(mode="after")
    def _one_length(self) -> LatticeConfig:
        if self.spacing is not None and self.wavelength is not None:
            raise ValueError("give exactly one of lattice.spacing / lattice.wavelength")
        return self


class FieldConfig(_Strict):
    base_field: Quantity = "100 V/m"
    gradient: Quantity = "1.0 V/cm**2"


class InteractionConfig(_Strict):
    aa: Quantity = 0.0
    bb: Quantity = 0.0
    cc: Quantity = 0.0
    ab: Quantity = 0.0
    ac: Quantity = 0.0
    bc: Quantity = 0.0


class HamiltonianConfig(_Strict):
    """Lattice Hamiltonian coefficients in units of ``reference_energy``.

    ``coupling`` is the nearest-neighbour D (``1.0`` by default); naming a
    ``molecule`` from the catalog derives every D_ij from its dipole instead.
    """

    reference_energy: Quantity = "1e-30 J"
    tunneling: tuple[Quantity, Quantity, Quantity] = (0.0, 0.0, 0.0)
    rabi: Quantity | list[Quantity] = 0.0
    interactions: InteractionConfig = InteractionConfig()
    coupling: Quantity | None = 1.0
    molecule: str | None = None
    caps: tuple[int, int, int] | None = None
    statistics: Statistics = Statistics.BOSE
    raman_phase: list[float] | None = None

    @model_validator(mode="after")
    def _one_coupling_source(self) -> HamiltonianConfig:
        explicit = "coupling" in self.model_fields_set and self.coupling is not None
        if self.molecule is not None and explicit:
            raise ValueError("give hamiltonian.coupling or hamiltonian.molecule, not both")
        return self


class RunConfig(_Strict):
    species: list[str] | None = None
    lattice: LatticeConfig = LatticeConfig()
    field: FieldConfig = FieldConfig()
    hamiltonian: HamiltonianConfig = HamiltonianConfig()
    schedule: str | None = None
    format: Literal["csv", "json"] = "csv"
    seed: int | None = Field(None, ge=0, lt=2**64)
    shots: int = Field(0, ge=0)
    backend: Literal["qubit", "fock"] = "qubit"
    instantaneous: bool = True
    propagator: Literal["eig", "stepped"] = "eig"
    pulse_rabi: float = Field(10.0, gt=0)
    addressing_rabi: Quantity = "2*pi*10 Hz"
    dominance_threshold: float = Field(100.0, gt=0)
    frequency_convention: Literal["hbar", "h"] = "hbar"

    @field_validator("species")
    @classmethod
    def _unique_species(cls, v: list[str] | None) -> list[str] | None:
        if v is not None and len(set(v)) != len(v):
            raise ValueError("species list contains duplicates")
        return v

    @model_validator(mode="after")
    def _seed_with_shots(self) -> RunConfig:
        if self.shots > 0 and self.seed is None:
            raise ValueError("shots > 0 requires an explicit seed")
        return self


def _input_error(exc: ValidationError, source: str, line: int | None = None) -> InputError:
    err = exc.errors()[0]
    path = ".".join(str(p) for p in err["loc"])
    where = f"{source}:{line}" if line is not None else source
    return InputError(f"{where}: {path or 'value'}: {err['msg']}", field=path or None, line=line)


def _read_text(path: Path, kind: str) -> str:
    """UTF-8 file contents; unreadable or undecodable files are input errors."""
    try:
        data = path.read_bytes()
    except FileNotFoundError as exc:
        raise InputError(f"{kind} file not found: {path}") from exc
    except OSError as exc:
        raise InputError(f"cannot read {kind} file {path}: {exc.strerror or exc}") from exc
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as exc:
        line = data[: exc.start].count(b"\n") + 1
        raise InputError(f"{path}:{line}: invalid UTF-8 in {kind} file", line=line) from exc


def load_config(path: str | Path | None = None, **overrides: Any) -> RunConfig:
    """Read and validate a JSON config; ``None`` starts from the defaults.

    Non-``None`` ``overrides`` (CLI flags) replace top-level keys before
    validation. A relative ``schedule`` path is resolved against the config
    file's directory.
    """
    data: dict[str, Any] = {}
    source = "defaults"
    if path is not None:
        path = Path(path)
        source = str(path)
        text = _read_text(path, "config")
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InputError(f"{path}:{exc.lineno}: {exc.msg}", line=exc.lineno) from exc
        if not isinstance(data, dict):
            raise InputError(f"{path}: config must be a JSON object")
    data.update({k: v for k, v in overrides.items() if v is not None})
    try:
        cfg = RunConfig.model_validate(data)
    except ValidationError as exc:
        raise _input_error(exc, source) from exc
    if path is not None and cfg.schedule is not None and not Path(cfg.schedule).is_absolute():
        cfg = cfg.model_copy(update={"schedule": str(path.parent / cfg.schedule)})
    logger.debug("loaded config from %s", source)
    return cfg


# --- builders -----------------------------------------------------------------


def reference_energy(cfg: RunConfig) -> float:
    """E_ref [J]."""
    e_ref = to_si(cfg.hamiltonian.reference_energy, "J", "hamiltonian.reference_energy")
    if e_ref <= 0:
        raise InputError("reference energy must be positive", field="hamiltonian.reference_energy")
    return e_ref


def _energy(value: Quantity, e_ref: float, name: str) -> float:
    if isinstance(value, str):
        return to_si(value, "J", name) / e_ref
    return to_si(value, "J", name)


def to_lattice(cfg: RunConfig) -> LatticeSpec:
    lat = cfg.lattice
    depth = None if lat.depth is None else to_si(lat.depth, "J", "lattice.depth")
    if lat.spacing is not None:
        return LatticeSpec(
            num_sites=lat.num_sites,
            spacing=to_si(lat.spacing, "m", "lattice.spacing"),
            dipole_range=lat.dipole_range,
            depth=depth,
        )
    wavelength = DEFAULT_WAVELENGTH if lat.wavelength is None else lat.wavelength
    return LatticeSpec.from_wavelength(
        lat.num_sites,
        to_si(wavelength, "m", "lattice.wavelength"),
        dipole_range=lat.dipole_range,
        depth=depth,
    )


def to_field(cfg: RunConfig) -> FieldSpec:
    return FieldSpec(
        base_field=to_si(cfg.field.base_field, "V/m", "field.base_field"),
        gradient=to_si(cfg.field.gradient, "V/m**2", "field.gradient"),
    )


def to_catalog(cfg: RunConfig, catalog: SpeciesCatalog | None = None) -> SpeciesCatalog:
    catalog = load_catalog() if catalog is None else catalog
    return catalog.select(cfg.species)


def to_params(cfg: RunConfig, catalog: SpeciesCatalog | None = None) -> HamiltonianParams:
    """Dimensionless :class:`HamiltonianParams`; raises InputError on invalid combinations."""
    ham = cfg.hamiltonian
    e_ref = reference_energy(cfg)
    lattice = to_lattice(cfg)
    M = lattice.num_sites
    rabi = ham.rabi if isinstance(ham.rabi, list) else [ham.rabi] * M
    if len(rabi) != M:
        raise InputError(f"hamiltonian.rabi needs {M} entries", field="hamiltonian.rabi")
    U = {
        k: _energy(getattr(ham.interactions, k), e_ref, f"hamiltonian.interactions.{k}")
        for k in ("aa", "bb", "cc", "ab", "ac", "bc")
    }
    if ham.molecule is not None:
        d = (load_catalog() if catalog is None else catalog)[ham.molecule].dipole_moment
        D = coupling_matrix([d] * M, lattice.spacing, lattice.dipole_range) / e_ref
        dipole = tuple(tuple(float(x) for x in row) for row in D)
    else:
        coupling = _energy(ham.coupling or 0.0, e_ref, "hamiltonian.coupling")
        dipole = dipole_matrix(M, coupling, lattice.dipole_range)
    params = HamiltonianParams(
        tunneling=tuple(
            _energy(t, e_ref, f"hamiltonian.tunneling[{k}]") for k, t in enumerate(ham.tunneling)
        ),
        rabi=tuple(_energy(w, e_ref, f"hamiltonian.rabi[{i}]") for i, w in enumerate(rabi)),
        interactions=interaction_matrix(**U),
        dipole_coupling=dipole,
        caps=ham.caps,
        statistics=ham.statistics,
        dipole_range=lattice.dipole_range,
        raman_phase=None if ham.raman_phase is None else tuple(ham.raman_phase),
    )
    require_valid(params)
    return params


# --- schedule files -------------------------------------------------------------


class RamanStepModel(_Strict):
    type: Literal["raman"]
    site: int = Field(ge=0)
    axis: Literal["x", "y"] = "y"
    angle: Quantity
    rabi: Quantity


class FreeStepModel(_Strict):
    type: Literal["free"]
    duration: Quantity


_STEP = TypeAdapter(Annotated[RamanStepModel | FreeStepModel, Field(discriminator="type")])


def _rate(value: Quantity, e_ref: float | None, name: str) -> float:
    if not isinstance(value, str):
        return to_si(value, "", name)
    if e_ref is None:
        raise InputError(f"{name}: unit strings need a reference energy", field=name)
    return to_si(value, "rad/s", name) * HBAR / e_ref


def _duration(value: Quantity, e_ref: float | None, name: str) -> float:
    if not isinstance(value, str):
        return to_si(value, "", name)
    if e_ref is None:
        raise InputError(f"{name}: unit strings need a reference energy", field=name)
    return time_to_reference(to_si(value, "s", name), e_ref)


def parse_schedule(
    text: str, e_ref: float | None = None, source: str = "<schedule>"
) -> PulseSchedule:
    """Parse JSON Lines schedule text; every error names its line."""
    steps = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            step = _STEP.validate_json(line)
        except ValidationError as exc:
            raise _input_error(exc, source, lineno) from exc
        try:
            if isinstance(step, RamanStepModel):
                steps.append(
                    RamanPulse(
                        site=step.site,
                        axis=step.axis,
                        angle=to_si(step.angle, "rad", "angle"),
                        rabi=_rate(step.rabi, e_ref, "rabi"),
                    )
                )
            else:
                steps.append(FreeEvolution(_duration(step.duration, e_ref, "duration")))
        except InputError as exc:
            raise InputError(f"{source}:{lineno}: {exc}", field=exc.field, line=lineno) from exc
    logger.debug("parsed %d schedule steps from %s", len(steps), source)
    return PulseSchedule(tuple(steps))


def load_schedule(path: str | Path, e_ref: float | None = None) -> PulseSchedule:
    path = Path(path)
    return parse_schedule(_read_text(path, "schedule"), e_ref, str(path))
