"""
diatomiq: diatomic-qubit lattice simulator and gate calculator.

CLI:
  diatomiq tables    [--config cfg.json] [--out out/] [--format csv|json]
  diatomiq gatecheck [--config cfg.json] [--out out/] [--seed N]
  diatomiq simulate  [--config cfg.json] [--out out/] [--seed N] [--dump-operator path]

Exit codes: 0 success, 2 input error, 3 regime violation, 4 resource guard.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from collections.abc import Sequence
from pathlib import Path

import pandas as pd
from pydantic import ValidationError

from .catalog import load_published_tables
from .checks import (
    check_backend_agreement,
    check_bell_prep,
    check_cnot,
    check_entangling_phase,
)
from .config import (
    RunConfig,
    load_config,
    load_schedule,
    reference_energy,
    to_catalog,
    to_field,
    to_lattice,
    to_params,
)
from .fock import build_hamiltonian, dump_operator, register_basis
from .gates import measure, run_schedule
from .model import (
    DiatomiqError,
    InputError,
    PulseSchedule,
    RegimeError,
    ResourceGuardError,
    to_si,
)
from .params import (
    addressing_report,
    build_frequency_table,
    build_rate_table,
    compare_to_published,
    consistency_residuals,
    dominance_profile,
    published_consistency,
    write_frame,
)
from .report import generate_report
from .score import aggregate_checks_to_summary

__all__ = ["cli_main"]
__version__ = "0.1.0"

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_REGIME = 3
EXIT_RESOURCE = 4


def _table(frame: pd.DataFrame, out: Path, stem: str, fmt: str) -> Path:
    return write_frame(frame, out / f"{stem}.{fmt}", fmt)


def cmd_tables(cfg: RunConfig, out: Path) -> list[Path]:
    """Frequency and rate tables, consistency residuals, published comparisons,
    addressing crosstalk and field dominance per species."""
    catalog = to_catalog(cfg)
    lattice = to_lattice(cfg)
    field = to_field(cfg)
    fmt = cfg.format
    freq = build_frequency_table(catalog, field, lattice, cfg.frequency_convention)
    rates = build_rate_table(catalog, lattice)
    published = load_published_tables()

    written = [
        _table(freq.to_frame(), out, "frequency_table", fmt),
        _table(rates.to_frame(), out, "rate_table", fmt),
        _table(compare_to_published(rates, published, "cnot_rate"), out, "rate_vs_published", fmt),
        _table(published_consistency(published), out, "consistency_vs_published", fmt),
    ]
    # the identity and the published values use the ħ convention
    if cfg.frequency_convention == "hbar":
        written.append(_table(consistency_residuals(freq, rates), out, "consistency", fmt))
        written.append(
            _table(
                compare_to_published(freq, published, "delta_nu_hz"),
                out,
                "frequency_vs_published",
                fmt,
            )
        )
    rabi = to_si(cfg.addressing_rabi, "rad/s", "addressing_rabi")
    written.append(_table(addressing_report(catalog, field, lattice, rabi), out, "addressing", fmt))

    rows = [
        {"species": name, **check.to_dict()}
        for name, s in catalog.items()
        for check in dominance_profile(
            field, s.dipole_moment, lattice, threshold=cfg.dominance_threshold
        )
    ]
    dominance = pd.DataFrame(rows, columns=["species", "site", "ratio", "threshold", "passed"])
    written.append(_table(dominance, out, "dominance", fmt))
    return written


def cmd_gatecheck(cfg: RunConfig, out: Path) -> list[Path]:
    """CNOT identity, Bell preparation and entangling-phase suites (plus backend
    agreement on the fock backend); JSON summary and Markdown report."""
    params = to_params(cfg)
    schedule = None
    if cfg.schedule is not None:
        schedule = load_schedule(cfg.schedule, reference_energy(cfg))
    fock = cfg.backend == "fock"

    r_cnot = check_cnot()
    r_bell = check_bell_prep()
    r_phase = check_entangling_phase(params, seed=cfg.seed or 0, strict=fock)
    agreement = []
    if fock:
        targets: list[str | PulseSchedule] = ["bell", "cnot"]
        if schedule is not None:
            targets.append(schedule)
        agreement = [
            check_backend_agreement(params, cfg.pulse_rabi, target, propagator=cfg.propagator)
            for target in targets
        ]

    summary = aggregate_checks_to_summary(
        backend=cfg.backend,
        cnot_result=r_cnot,
        bell_result=r_bell,
        phase_result=r_phase,
        agreement_results=agreement,
        config=cfg.model_dump(mode="json"),
    )
    json_path = out / "gatecheck.json"
    with open(json_path, "w") as f:
        json.dump(summary, f, indent=2)
    md_path = generate_report(summary, out / "gatecheck.md")
    print("Gate check:", "PASS" if summary["all_passed"] else "FAIL")
    return [json_path, md_path]


def cmd_simulate(cfg: RunConfig, out: Path, operator_path: str | None = None) -> list[Path]:
    """Run the configured schedule; amplitudes, leakage and optional measurements."""
    params = to_params(cfg)
    schedule = PulseSchedule()
    if cfg.schedule is not None:
        schedule = load_schedule(cfg.schedule, reference_energy(cfg))
    options = {}
    if cfg.backend == "fock":
        options = {"instantaneous": cfg.instantaneous, "propagator": cfg.propagator}
    result = run_schedule(schedule, cfg.backend, params, **options)

    amps = result.state.amplitudes
    frame = pd.DataFrame({"index": range(amps.size), "re": amps.real, "im": amps.imag})
    written = [_table(frame, out, "amplitudes", cfg.format)]

    leakage_path = out / "leakage.json"
    info = {
        "backend": result.backend,
        "leakage": float(f"{result.leakage:.6g}"),
        "steps": len(schedule),
        "duration": float(f"{schedule.duration:.6g}"),
    }
    leakage_path.write_text(json.dumps(info, indent=2) + "\n")
    written.append(leakage_path)

    if cfg.shots > 0:
        record = measure(result.state, cfg.shots, cfg.seed)
        written.append(record.write_csv(out / "measurements.csv"))
    if operator_path:
        free = params.with_updates(rabi=(0.0,) * params.num_sites, raman_phase=None)
        H = build_hamiltonian(free, register_basis(params.num_sites, params.caps))
        written.append(dump_operator(H, operator_path))
    return written


def _configure_logging(verbosity: int) -> None:
    level = logging.WARNING
    if verbosity == 1:
        level = logging.INFO
    elif verbosity >= 2:
        level = logging.DEBUG
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def cli_main(argv: Sequence[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="diatomiq", description="Diatomic-qubit simulator CLI")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="cmd", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=None, help="JSON run configuration")
    common.add_argument("--out", default="out", help="output directory")
    common.add_argument("--format", choices=["csv", "json"], default=None)
    common.add_argument("--seed", type=int, default=None, help="u64 seed (overrides config)")
    common.add_argument("-v", "--verbose", action="count", default=0)

    sub.add_parser("tables", parents=[common], help="Write frequency and rate tables")
    sub.add_parser("gatecheck", parents=[common], help="Run gate verification suites")
    p_sim = sub.add_parser("simulate", parents=[common], help="Run a pulse schedule")
    p_sim.add_argument("--dump-operator", default=None, help="write the free Hamiltonian (COO)")

    args = parser.parse_args(argv)
    _configure_logging(args.verbose)

    try:
        cfg = load_config(args.config, format=args.format, seed=args.seed)
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        if args.cmd == "tables":
            written = cmd_tables(cfg, out)
        elif args.cmd == "gatecheck":
            written = cmd_gatecheck(cfg, out)
        else:
            written = cmd_simulate(cfg, out, args.dump_operator)
    except (InputError, ValidationError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except RegimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_REGIME
    except ResourceGuardError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except DiatomiqError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT

    for path in written:
        print(f"Wrote: {path}")
    return EXIT_OK
