"""Closed-form calculators for addressing, dipole coupling and gate rates (SI units).

Δν     = g·d·r/ħ                       (addressing frequency between neighbours)
D_ij   = d_i·d_j / (4π ε₀ (r|i-j|)³)   (co-aligned dipole-dipole coupling)
φ      = D₁₂·t/ħ                       (conditional phase after free evolution)
N      = D₁₂/(πħ)                      (CNOT gates per second)
"""

from __future__ import annotations

import json
import logging
import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Literal

import numpy as np
import pandas as pd

from .model import (
    EPSILON0,
    HBAR,
    DipoleRange,
    FieldSpec,
    InputError,
    LatticeSpec,
    MoleculeSpecies,
)

logger = logging.getLogger(__name__)

Convention = Literal["hbar", "h"]
DEFAULT_DOMINANCE_THRESHOLD = 100.0
PUBLISHED_GRADIENT = 1.0e4
PUBLISHED_SPACING = 420e-9
SIG_DIGITS = 6


def _nonneg(value: float, name: str) -> float:
    value = float(value)
    if not math.isfinite(value) or value < 0:
        raise InputError(f"{name} must be finite and >= 0, got {value}", field=name)
    return value


def _positive(value: float, name: str) -> float:
    value = float(value)
    if not math.isfinite(value) or value <= 0:
        raise InputError(f"{name} must be finite and > 0, got {value}", field=name)
    return value


def _frequency_divisor(convention: Convention) -> float:
    if convention == "hbar":
        return HBAR
    if convention == "h":
        return 2.0 * math.pi * HBAR
    raise InputError(f"unknown frequency convention {convention!r}", field="convention")


def delta_nu(d: float, g: float, r: float, convention: Convention = "hbar") -> float:
    """Transition-frequency difference of neighbouring bits [Hz].

    The published tables use Δν = g·d·r/ħ (``convention="hbar"``); the
    ``"h"`` convention returns ΔE/h instead, for physical comparisons.
    """
    d = _nonneg(d, "d")
    g = _nonneg(g, "g")
    r = _positive(r, "r")
    return g * d * r / _frequency_divisor(convention)


def invert_delta_nu(delta_nu: float, g: float, r: float, convention: Convention = "hbar") -> float:
    """Dipole moment [C·m] reproducing a given Δν at (g, r)."""
    dnu = _nonneg(delta_nu, "delta_nu")
    g = _positive(g, "g")
    r = _positive(r, "r")
    return dnu * _frequency_divisor(convention) / (g * r)


def dipole_coupling(d1: float, d2: float, r: float, separation: int = 1) -> float:
    """D for two co-aligned dipoles ``separation`` sites apart [J]."""
    if int(separation) != separation or separation < 1:
        raise InputError(
            f"separation must be an integer >= 1, got {separation}", field="separation"
        )
    r = _positive(r, "r")
    d1 = _nonneg(d1, "d1")
    d2 = _nonneg(d2, "d2")
    return d1 * d2 / (4.0 * math.pi * EPSILON0 * (r * separation) ** 3)


def coupling_matrix(
    dipoles: Sequence[float],
    spacing: float,
    dipole_range: DipoleRange | str = DipoleRange.NEAREST_NEIGHBOR,
) -> np.ndarray:
    """Per-site dipoles [C·m] -> D_ij matrix [J] for the chosen pair range."""
    dipole_range = DipoleRange(dipole_range)
    n = len(dipoles)
    D = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            if j - i == 1 or dipole_range is DipoleRange.FULL_INVERSE_CUBE:
                D[i, j] = D[j, i] = dipole_coupling(dipoles[i], dipoles[j], spacing, j - i)
    return D


def internal_field(
    site: int, molecule_occupancy: Sequence[int], d: float, lattice: LatticeSpec
) -> float:
    """|E_int| on ``site`` from the molecules on all other sites [V/m]."""
    occ = list(molecule_occupancy)
    if len(occ) != lattice.num_sites:
        raise InputError("molecule_occupancy must have one entry per site", field="occupancy")
    if not 0 <= site < lattice.num_sites:
        raise InputError(f"site {site} outside lattice", field="site")
    d = _nonneg(d, "d")
    total = 0.0
    for j, n in enumerate(occ):
        if j == site or not n:
            continue
        total += d * n / (4.0 * math.pi * EPSILON0 * (lattice.spacing * abs(j - site)) ** 3)
    return total


def dominance_ratio(
    field: FieldSpec,
    site: int,
    molecule_occupancy: Sequence[int],
    d: float,
    lattice: LatticeSpec,
) -> float:
    """Min|E_ext| over occupied sites / |E_int| on ``site``; ``math.inf`` without neighbours.

    Occupied sites are those holding a molecule plus ``site`` itself. Sites sit
    at z = i·r, so the minimum is E₀ whenever site 0 is occupied.
    """
    e_int = internal_field(site, molecule_occupancy, d, lattice)
    if e_int == 0.0:
        return math.inf
    occupied = np.flatnonzero(np.asarray(molecule_occupancy) != 0)
    occupied = np.union1d(occupied, [site])
    e_min = float(np.min(np.abs(field.at(lattice.positions()[occupied]))))
    return e_min / e_int


@dataclass(frozen=True)
class DominanceCheck:
    site: int
    ratio: float
    threshold: float
    passed: bool

    @property
    def unconstrained(self) -> bool:
        return math.isinf(self.ratio)

    def to_dict(self) -> dict[str, Any]:
        return {
            "site": self.site,
            "ratio": "unconstrained" if self.unconstrained else float(f"{self.ratio:.6g}"),
            "threshold": self.threshold,
            "passed": self.passed,
        }


def check_dominance(
    field: FieldSpec,
    site: int,
    molecule_occupancy: Sequence[int],
    d: float,
    lattice: LatticeSpec,
    threshold: float = DEFAULT_DOMINANCE_THRESHOLD,
) -> DominanceCheck:
    """Accept the external field on ``site`` when the dominance ratio reaches ``threshold``."""
    ratio = dominance_ratio(field, site, molecule_occupancy, d, lattice)
    return DominanceCheck(site=site, ratio=ratio, threshold=threshold, passed=ratio >= threshold)


def dominance_profile(
    field: FieldSpec,
    d: float,
    lattice: LatticeSpec,
    molecule_occupancy: Sequence[int] | None = None,
    threshold: float = DEFAULT_DOMINANCE_THRESHOLD,
) -> list[DominanceCheck]:
    """Dominance check on every site; default occupancy is the worst case (all molecules)."""
    occ = [1] * lattice.num_sites if molecule_occupancy is None else list(molecule_occupancy)
    return [check_dominance(field, i, occ, d, lattice, threshold) for i in range(lattice.num_sites)]


def phase_shift(D12: float, t: float) -> float:
    """Conditional phase D₁₂·t/ħ [rad]."""
    return float(D12) * _nonneg(t, "t") / HBAR


def pi_phase_duration(D12: float) -> float:
    """Free-evolution time giving a π phase gate [s]."""
    return math.pi * HBAR / _positive(D12, "D12")


def cnot_rate(d1: float, d2: float, r: float) -> float:
    """CNOT gates per second, d₁d₂/(4π² ε₀ ħ r³) = D₁₂/(πħ)."""
    r = _positive(r, "r")
    return _nonneg(d1, "d1") * _nonneg(d2, "d2") / (4.0 * math.pi**2 * EPSILON0 * HBAR * r**3)


def rate_from_delta_nu(delta_nu: float, g: float, r: float) -> float:
    """CNOT rate recovered from an ħ-convention Δν without the dipole moment."""
    dnu = _nonneg(delta_nu, "delta_nu")
    g = _positive(g, "g")
    r = _positive(r, "r")
    return dnu**2 * HBAR / (4.0 * math.pi**2 * EPSILON0 * g**2 * r**5)


def crosstalk_bound(rabi: float, delta_nu: float) -> float:
    """Worst-case population transfer on a neighbour detuned by Δν.

    rabi is an angular frequency [rad/s]; returns Ω²/(Ω² + (2πΔν)²).
    """
    rabi = _nonneg(rabi, "rabi")
    detuning = 2.0 * math.pi * float(delta_nu)
    if rabi == 0.0:
        return 0.0
    return rabi**2 / (rabi**2 + detuning**2)


def _fmt(value: float) -> float:
    return float(f"{value:.{SIG_DIGITS}g}")


@dataclass(frozen=True)
class FrequencyTable:
    """Δν [Hz] per species at fixed (g, r)."""

    entries: dict[str, float]
    gradient: float
    spacing: float
    convention: Convention = "hbar"
    unit: str = "Hz"

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "species": list(self.entries),
                "value": list(self.entries.values()),
                "unit": [self.unit] * len(self.entries),
            },
            columns=["species", "value", "unit"],
        )


@dataclass(frozen=True)
class RateTable:
    """CNOT rate [1/s] per species at fixed r."""

    entries: dict[str, float]
    spacing: float
    unit: str = "1/s"

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "species": list(self.entries),
                "value": list(self.entries.values()),
                "unit": [self.unit] * len(self.entries),
            },
            columns=["species", "value", "unit"],
        )


def build_frequency_table(
    catalog: Mapping[str, MoleculeSpecies],
    field: FieldSpec,
    lattice: LatticeSpec,
    convention: Convention = "hbar",
) -> FrequencyTable:
    entries = {
        name: delta_nu(s.dipole_moment, field.gradient, lattice.spacing, convention)
        for name, s in catalog.items()
    }
    return FrequencyTable(entries, field.gradient, lattice.spacing, convention)


def build_rate_table(catalog: Mapping[str, MoleculeSpecies], lattice: LatticeSpec) -> RateTable:
    entries = {
        name: cnot_rate(s.dipole_moment, s.dipole_moment, lattice.spacing)
        for name, s in catalog.items()
    }
    return RateTable(entries, lattice.spacing)


def consistency_residuals(freq: FrequencyTable, rates: RateTable) -> pd.DataFrame:
    """Compare the direct CNOT rate with the one recomputed from Δν alone.

    Columns: species, rate_direct, rate_from_delta_nu, rel_residual.
    """
    if freq.convention != "hbar":
        raise InputError("consistency identity is defined for the hbar convention")
    rows = []
    for name, direct in rates.entries.items():
        if name not in freq.entries:
            continue
        derived = rate_from_delta_nu(freq.entries[name], freq.gradient, freq.spacing)
        rel = abs(derived - direct) / direct if direct > 0 else abs(derived)
        rows.append((name, direct, derived, rel))
    columns = ["species", "rate_direct", "rate_from_delta_nu", "rel_residual"]
    return pd.DataFrame(rows, columns=columns)


def published_consistency(
    published: pd.DataFrame,
    gradient: float = PUBLISHED_GRADIENT,
    spacing: float = PUBLISHED_SPACING,
) -> pd.DataFrame:
    """Recompute each published CNOT rate from the published Δν alone.

    No dipole moment enters: N = Δν²ħ/(4π²ε₀g²r⁵) at the published (g, r).
    Columns: species, delta_nu_hz, rate_from_delta_nu, published, rel_residual.
    """
    rows = []
    for name, row in published.iterrows():
        dnu = float(row["delta_nu_hz"])
        ref = float(row["cnot_rate"])
        derived = rate_from_delta_nu(dnu, gradient, spacing)
        rows.append((name, dnu, derived, ref, abs(derived - ref) / ref))
    columns = ["species", "delta_nu_hz", "rate_from_delta_nu", "published", "rel_residual"]
    return pd.DataFrame(rows, columns=columns)


def compare_to_published(
    table: FrequencyTable | RateTable, published: pd.DataFrame, column: str
) -> pd.DataFrame:
    """Relative deviation of computed entries from a published column.

    Columns: species, value, published, rel_deviation. Species without a
    published value are skipped.
    """
    rows = []
    for name, value in table.entries.items():
        if name not in published.index:
            continue
        ref = float(published.loc[name, column])
        rows.append((name, value, ref, abs(value - ref) / ref))
    return pd.DataFrame(rows, columns=["species", "value", "published", "rel_deviation"])


def addressing_report(
    catalog: Mapping[str, MoleculeSpecies],
    field: FieldSpec,
    lattice: LatticeSpec,
    rabi: float,
) -> pd.DataFrame:
    """Δν and the neighbour crosstalk bound for a Raman Rabi rate ``rabi`` [rad/s]."""
    freq = build_frequency_table(catalog, field, lattice)
    return pd.DataFrame(
        [(name, dnu, crosstalk_bound(rabi, dnu)) for name, dnu in freq.entries.items()],
        columns=["species", "delta_nu_hz", "crosstalk_bound"],
    )


def write_frame(frame: pd.DataFrame, path: str | Path, fmt: str = "csv") -> Path:
    """Write a table as CSV or JSON records with 6 significant digits."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if fmt == "csv":
        frame.to_csv(path, index=False, float_format=f"%.{SIG_DIGITS}g", lineterminator="\n")
    elif fmt == "json":
        records = [
            {k: (_fmt(v) if isinstance(v, (float, np.floating)) else v) for k, v in row.items()}
            for row in frame.to_dict(orient="records")
        ]
        path.write_text(json.dumps(records, indent=2) + "\n")
    else:
        raise InputError(f"unknown output format {fmt!r}", field="format")
    logger.info("wrote %s", path)
    return path
