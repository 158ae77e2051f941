import json
import math
from pathlib import Path

import pandas as pd
import pytest

from diatomiq.catalog import load_catalog, load_published_tables
from diatomiq.model import FieldSpec, InputError, LatticeSpec, debye_to_si
from diatomiq.params import (
    addressing_report,
    build_frequency_table,
    build_rate_table,
    check_dominance,
    cnot_rate,
    compare_to_published,
    consistency_residuals,
    coupling_matrix,
    crosstalk_bound,
    delta_nu,
    dipole_coupling,
    dominance_profile,
    dominance_ratio,
    internal_field,
    invert_delta_nu,
    phase_shift,
    pi_phase_duration,
    published_consistency,
    rate_from_delta_nu,
    write_frame,
)

G = 1.0e4  # 1.0 V/cm²
R = 420e-9
LATTICE = LatticeSpec.from_wavelength(2, 840e-9)
FIELD = FieldSpec(base_field=100.0, gradient=G)


def test_delta_nu_reference_values():
    assert delta_nu(debye_to_si(0.53), G, R) == pytest.approx(70.41, rel=1e-3)
    assert delta_nu(debye_to_si(1.26), G, R) == pytest.approx(167.39, rel=1e-3)
    assert delta_nu(debye_to_si(5.48), G, R) == pytest.approx(728.00, rel=1e-3)


def test_delta_nu_conventions():
    d = debye_to_si(1.26)
    assert delta_nu(d, G, R, "h") == pytest.approx(delta_nu(d, G, R) / (2 * math.pi))
    with pytest.raises(InputError):
        delta_nu(d, G, R, "hz")
    with pytest.raises(InputError):
        delta_nu(-d, G, R)


def test_invert_delta_nu_recovers_dipole():
    d = invert_delta_nu(167.39, G, R)
    assert d == pytest.approx(4.203e-30, rel=1e-3)
    assert d / debye_to_si(1.0) == pytest.approx(1.26, rel=1e-3)


def test_rbcs_coupling_and_pi_time():
    d = debye_to_si(1.26)
    D = dipole_coupling(d, d, R)
    assert D == pytest.approx(2.143e-30, rel=1e-3)
    t_pi = pi_phase_duration(D)
    assert t_pi == pytest.approx(1.546e-4, rel=1e-3)
    assert phase_shift(D, t_pi) == pytest.approx(math.pi)
    assert cnot_rate(d, d, R) == pytest.approx(1.0 / t_pi)
    with pytest.raises(InputError):
        dipole_coupling(d, d, R, separation=0)


def test_coupling_matrix_ranges():
    d = debye_to_si(1.26)
    nn = coupling_matrix([d, d, d], R)
    assert nn[0, 2] == 0.0
    full = coupling_matrix([d, d, d], R, "full_inverse_cube")
    assert full[0, 2] == pytest.approx(full[0, 1] / 8)
    assert (full == full.T).all()


def test_tables_match_published_within_one_percent():
    cat = load_catalog()
    pub = load_published_tables()
    freq = build_frequency_table(cat, FIELD, LATTICE)
    rates = build_rate_table(cat, LATTICE)
    f_cmp = compare_to_published(freq, pub, "delta_nu_hz")
    r_cmp = compare_to_published(rates, pub, "cnot_rate")
    assert len(f_cmp) == len(r_cmp) == 10
    assert f_cmp["rel_deviation"].max() < 0.01
    assert r_cmp["rel_deviation"].max() < 0.01
    assert rates.entries["LiCs"] == pytest.approx(1.22e5, rel=0.01)
    assert rates.entries["RbCs"] == pytest.approx(6.46e3, rel=0.01)


def test_consistency_identity_matches_direct_rate():
    cat = load_catalog()
    freq = build_frequency_table(cat, FIELD, LATTICE)
    rates = build_rate_table(cat, LATTICE)
    res = consistency_residuals(freq, rates)
    assert list(res.columns) == ["species", "rate_direct", "rate_from_delta_nu", "rel_residual"]
    assert res["rel_residual"].max() < 1e-10
    direct = rate_from_delta_nu(freq.entries["RbCs"], G, R)
    assert direct == pytest.approx(rates.entries["RbCs"], rel=1e-10)
    with pytest.raises(InputError):
        consistency_residuals(build_frequency_table(cat, FIELD, LATTICE, "h"), rates)


def test_dominance_rbcs():
    d = debye_to_si(1.26)
    ratio = dominance_ratio(FIELD, 0, [1, 1], d, LATTICE)
    assert ratio == pytest.approx(196.0, rel=0.01)
    assert check_dominance(FIELD, 0, [1, 1], d, LATTICE).passed
    assert not check_dominance(FIELD, 0, [1, 1], d, LATTICE, threshold=500.0).passed


def test_dominance_unconstrained_without_neighbours():
    d = debye_to_si(1.26)
    checks = dominance_profile(FIELD, d, LATTICE, molecule_occupancy=[1, 0])
    assert checks[0].unconstrained
    assert checks[0].to_dict()["ratio"] == "unconstrained"
    assert checks[0].passed


def test_internal_field_adds_both_neighbours():
    d = debye_to_si(1.26)
    lat = LatticeSpec.from_wavelength(3, 840e-9)
    one = internal_field(0, [1, 1, 0], d, lat)
    middle = internal_field(1, [1, 1, 1], d, lat)
    assert middle == pytest.approx(2 * one)
    with pytest.raises(InputError):
        internal_field(0, [1, 1], d, lat)


def test_crosstalk_bound():
    assert crosstalk_bound(2 * math.pi * 10.0, 100.0) == pytest.approx(1 / 101)
    assert crosstalk_bound(0.0, 100.0) == 0.0
    report = addressing_report(load_catalog().select(["RbCs"]), FIELD, LATTICE, 2 * math.pi)
    assert list(report.columns) == ["species", "delta_nu_hz", "crosstalk_bound"]
    assert report.loc[0, "crosstalk_bound"] < 1e-4


def test_write_frame_formats(tmp_path: Path):
    freq = build_frequency_table(load_catalog().select(["LiNa"]), FIELD, LATTICE)
    csv_path = write_frame(freq.to_frame(), tmp_path / "f.csv")
    lines = csv_path.read_text().splitlines()
    assert lines[0] == "species,value,unit"
    name, value, unit = lines[1].split(",")
    assert (name, unit) == ("LiNa", "Hz")
    assert float(value) == pytest.approx(70.41, rel=1e-3)
    assert len(value.replace(".", "")) <= 6
    json_path = write_frame(freq.to_frame(), tmp_path / "f.json", "json")
    records = json.loads(json_path.read_text())
    assert records[0]["species"] == "LiNa"
    assert records[0]["value"] == pytest.approx(70.41, rel=1e-3)
    with pytest.raises(InputError):
        write_frame(pd.DataFrame(), tmp_path / "f.txt", "txt")


def test_published_rates_follow_from_published_frequencies():
    pub = load_published_tables()
    res = published_consistency(pub)
    assert list(res.columns) == [
        "species",
        "delta_nu_hz",
        "rate_from_delta_nu",
        "published",
        "rel_residual",
    ]
    assert len(res) == 10
    # printed values are rounded; KRb is the worst at about 0.5%
    assert res["rel_residual"].max() < 0.006
    assert res.set_index("species").loc["KRb", "rel_residual"] == pytest.approx(0.0052, abs=1e-3)
    doubled = published_consistency(pub.assign(delta_nu_hz=2 * pub["delta_nu_hz"]))
    assert doubled["rate_from_delta_nu"].tolist() == pytest.approx(
        (4 * res["rate_from_delta_nu"]).tolist()
    )


def test_delta_nu_is_linear_in_each_argument():
    d = debye_to_si(1.26)
    base = delta_nu(d, G, R)
    assert delta_nu(3 * d, G, R) == pytest.approx(3 * base)
    assert delta_nu(d, 3 * G, R) == pytest.approx(3 * base)
    assert delta_nu(d, G, 3 * R) == pytest.approx(3 * base)
    assert delta_nu(0.0, G, R) == 0.0


def test_dipole_coupling_is_symmetric():
    d1, d2 = debye_to_si(0.53), debye_to_si(1.26)
    assert dipole_coupling(d1, d2, R) == pytest.approx(dipole_coupling(d2, d1, R), rel=1e-15)
    assert dipole_coupling(d1, d2, R, 2) == pytest.approx(dipole_coupling(d1, d2, R) / 8)


def test_phase_shift_is_additive_in_time():
    D = dipole_coupling(debye_to_si(1.26), debye_to_si(1.26), R)
    t1, t2 = 3.0e-5, 7.5e-5
    assert phase_shift(D, t1 + t2) == pytest.approx(phase_shift(D, t1) + phase_shift(D, t2))
    assert phase_shift(D, 0.0) == 0.0


def test_adding_a_molecule_never_raises_the_dominance_ratio():
    d = debye_to_si(1.26)
    lat = LatticeSpec.from_wavelength(3, 840e-9)
    alone = dominance_ratio(FIELD, 1, [0, 1, 0], d, lat)
    one = dominance_ratio(FIELD, 1, [1, 1, 0], d, lat)
    both = dominance_ratio(FIELD, 1, [1, 1, 1], d, lat)
    assert alone == math.inf
    assert both <= one < alone
    doubled = FieldSpec(base_field=200.0, gradient=G)
    assert dominance_ratio(doubled, 1, [1, 1, 1], d, lat) == pytest.approx(2 * both, rel=1e-3)


def test_dominance_uses_the_weakest_field_at_an_occupied_site():
    d = debye_to_si(1.26)
    lat = LatticeSpec.from_wavelength(3, 840e-9)
    steep = FieldSpec(base_field=100.0, gradient=1.0e9)
    ratio = dominance_ratio(steep, 2, [0, 1, 1], d, lat)
    e_int = internal_field(2, [0, 1, 1], d, lat)
    assert ratio == pytest.approx((100.0 + 1.0e9 * lat.spacing) / e_int)
    assert dominance_ratio(steep, 1, [1, 1, 0], d, lat) == pytest.approx(
        100.0 / internal_field(1, [1, 1, 0], d, lat)
    )


def test_tables_scale_with_gradient_and_spacing():
    cat = load_catalog()
    freq = build_frequency_table(cat, FIELD, LATTICE)
    steeper = build_frequency_table(cat, FieldSpec(base_field=100.0, gradient=2 * G), LATTICE)
    wider = LatticeSpec(num_sites=2, spacing=2 * R)
    for name in cat:
        assert steeper.entries[name] == pytest.approx(2 * freq.entries[name])
    rates = build_rate_table(cat, LATTICE)
    far = build_rate_table(cat, wider)
    for name in cat:
        assert far.entries[name] == pytest.approx(rates.entries[name] / 8)
