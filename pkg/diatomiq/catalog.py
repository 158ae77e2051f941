from __future__ import annotations

import logging
from collections.abc import Iterable, Iterator, Mapping
from importlib import resources
from pathlib import Path

import pandas as pd

from .model import InputError, MoleculeSpecies, debye_to_si

logger = logging.getLogger(__name__)

CATALOG_COLUMNS = ("name", "dipole_debye")
PUBLISHED_COLUMNS = ("name", "delta_nu_hz", "cnot_rate")


def _dataset(name: str) -> Path:
    return Path(str(resources.files("diatomiq") / "datasets" / name))


def _read_table(path: str | Path, columns: tuple[str, ...]) -> pd.DataFrame:
    """Read a '#'-commented CSV and enforce an exact column set."""
    try:
        df = pd.read_csv(path, comment="#", skipinitialspace=True)
    except FileNotFoundError as exc:
        raise InputError(f"catalog file not found: {path}") from exc
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as exc:
        raise InputError(f"cannot parse {path}: {exc}") from exc
    unknown = [c for c in df.columns if c not in columns]
    if unknown:
        raise InputError(f"{path}: unknown column(s) {unknown}; expected {list(columns)}")
    missing = [c for c in columns if c not in df.columns]
    if missing:
        raise InputError(f"{path}: missing column(s) {missing}")
    df["name"] = df["name"].astype(str).str.strip()
    dup = df["name"][df["name"].duplicated()].tolist()
    if dup:
        raise InputError(f"{path}: duplicate species {dup}")
    for col in columns[1:]:
        values = pd.to_numeric(df[col], errors="coerce")
        bad = df["name"][values.isna()].tolist()
        if bad:
            raise InputError(f"{path}: non-numeric {col} for {bad}")
        df[col] = values.astype(float)
    return df


class SpeciesCatalog(Mapping[str, MoleculeSpecies]):
    """Ordered, read-only name -> :class:`MoleculeSpecies` map."""

    def __init__(self, species: Iterable[MoleculeSpecies] = ()):
        self._items: dict[str, MoleculeSpecies] = {}
        for s in species:
            if s.name in self._items:
                raise InputError(f"duplicate species {s.name!r} in catalog", field="name")
            self._items[s.name] = s

    def __getitem__(self, name: str) -> MoleculeSpecies:
        try:
            return self._items[name]
        except KeyError:
            raise InputError(f"unknown species {name!r}", field="species") from None

    def __contains__(self, name: object) -> bool:
        return name in self._items

    def __iter__(self) -> Iterator[str]:
        return iter(self._items)

    def __len__(self) -> int:
        return len(self._items)

    def select(self, names: Iterable[str] | None) -> SpeciesCatalog:
        """Sub-catalog in the requested order; ``None`` keeps everything."""
        if names is None:
            return self
        return SpeciesCatalog(self[n] for n in names)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "name": list(self._items),
                "dipole_debye": [s.dipole_debye for s in self._items.values()],
                "dipole_Cm": [s.dipole_moment for s in self._items.values()],
            }
        )


def load_catalog(path: str | Path | None = None) -> SpeciesCatalog:
    """Load the species catalog (package default: the ten XY pairs)."""
    path = _dataset("species.csv") if path is None else Path(path)
    df = _read_table(path, CATALOG_COLUMNS)
    species = []
    for row in df.itertuples(index=False):
        if row.dipole_debye < 0:
            raise InputError(f"{path}: negative dipole for {row.name}")
        species.append(MoleculeSpecies(name=row.name, dipole_moment=debye_to_si(row.dipole_debye)))
    logger.debug("loaded %d species from %s", len(species), path)
    return SpeciesCatalog(species)


def load_published_tables(path: str | Path | None = None) -> pd.DataFrame:
    """Published Δν [Hz] and CNOT rates [1/s], indexed by species name."""
    path = _dataset("published_tables.csv") if path is None else Path(path)
    return _read_table(path, PUBLISHED_COLUMNS).set_index("name")
