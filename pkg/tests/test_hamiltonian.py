import math
from pathlib import Path

import numpy as np
import pytest

from diatomiq.fock import (
    add_site_energies,
    build_hamiltonian,
    dump_operator,
    enumerate_basis,
    merge_bases,
    register_basis,
)
from diatomiq.model import HamiltonianParams, InputError, interaction_matrix


def _general_params(num_sites=2):
    return HamiltonianParams.create(
        num_sites,
        tunneling=(0.2, 0.15, 0.05),
        rabi=[0.4, 0.7, 0.3][:num_sites],
        interactions=interaction_matrix(aa=1.0, bb=0.8, cc=0.5, ab=-0.4, ac=0.2, bc=0.1),
        coupling=0.6,
        raman_phase=[0.3, -1.1, 2.0][:num_sites],
    )


def test_single_site_two_level_block():
    U_ab, omega = -0.3, 0.4
    params = HamiltonianParams.create(1, rabi=omega, interactions=interaction_matrix(ab=U_ab))
    H = build_hamiltonian(params, enumerate_basis(1, (1, 1)))
    assert np.allclose(H.to_dense(), [[U_ab, omega], [omega, 0.0]])


def test_raman_phase_enters_the_coupling():
    params = HamiltonianParams.create(1, rabi=0.5, raman_phase=[0.7])
    H = build_hamiltonian(params, enumerate_basis(1, (1, 1))).to_dense()
    assert H[1, 0] == pytest.approx(0.5 * np.exp(0.7j))
    assert H[0, 1] == pytest.approx(0.5 * np.exp(-0.7j))


def test_dipole_term_on_molecule_pairs():
    params = HamiltonianParams.create(2, coupling=0.8)
    basis = register_basis(2)
    H = build_hamiltonian(params, basis).to_dense()
    assert H[basis.index((0, 0, 1, 0, 0, 1)), basis.index((0, 0, 1, 0, 0, 1))] == 0.8
    assert H[basis.index((0, 0, 2, 0, 0, 0)), basis.index((0, 0, 2, 0, 0, 0))] == 0.0


def test_tunneling_bose_factors():
    params = HamiltonianParams.create(2, tunneling=(0.3, 0.0, 0.0))
    basis = enumerate_basis(2, (2, 0))
    assert [s.flat for s in basis] == [
        (2, 0, 0, 0, 0, 0),
        (1, 0, 0, 1, 0, 0),
        (0, 0, 0, 2, 0, 0),
    ]
    H = build_hamiltonian(params, basis).to_dense()
    assert H[1, 0] == pytest.approx(-0.3 * math.sqrt(2))
    assert H[2, 1] == pytest.approx(-0.3 * math.sqrt(2))
    assert H[2, 0] == 0.0


def test_onsite_interaction_counts_pairs():
    params = HamiltonianParams.create(1, interactions=interaction_matrix(aa=1.5, ab=0.25))
    basis = enumerate_basis(1, (2, 1), caps=(2, 1, 0))
    H = build_hamiltonian(params, basis)
    assert [s.flat for s in basis] == [(2, 1, 0)]
    assert H.to_dense()[0, 0] == pytest.approx(1.5 + 2 * 0.25)


@pytest.mark.parametrize("num_sites", [1, 2, 3])
def test_hermitian(num_sites):
    params = _general_params(num_sites)
    H = build_hamiltonian(params, register_basis(num_sites))
    assert H.hermiticity_error() < 1e-12


def test_merged_sectors_stay_block_diagonal():
    params = _general_params(2)
    small = enumerate_basis(2, (1, 1))
    big = register_basis(2)
    merged = merge_bases(small, big)
    H = build_hamiltonian(params, merged).to_dense()
    in_small = np.array([s.charges == (1, 1) for s in merged])
    assert np.all(H[np.ix_(in_small, ~in_small)] == 0)
    assert H.shape == (len(small) + len(big),) * 2


def test_site_energies_shift_the_diagonal():
    params = HamiltonianParams.create(2, coupling=1.0)
    basis = register_basis(2)
    H = build_hamiltonian(params, basis)
    eps = [[0.1, 0.2, 0.3], [0.4, 0.5, 0.6]]
    shifted = add_site_energies(H, eps).to_dense()
    k = basis.index((1, 1, 0, 0, 0, 1))
    assert shifted[k, k] - H.to_dense()[k, k] == pytest.approx(0.1 + 0.2 + 0.6)
    with pytest.raises(InputError):
        add_site_energies(H, [[0.0, 0.0, 0.0]])


def test_build_rejects_mismatches():
    basis = register_basis(2)
    with pytest.raises(InputError):
        build_hamiltonian(HamiltonianParams.create(3), basis)
    with pytest.raises(InputError):
        build_hamiltonian(HamiltonianParams.create(2, caps=(1, 1, 1)), basis)
    with pytest.raises(InputError):
        build_hamiltonian(HamiltonianParams.create(2), enumerate_basis(1, (2, 2), (0, 0, 1)))


def test_dump_operator(tmp_path: Path):
    H = build_hamiltonian(_general_params(2), register_basis(2))
    path = dump_operator(H, tmp_path / "ops" / "h.txt")
    lines = path.read_text().splitlines()
    assert len(lines) == H.nnz
    keys = [tuple(int(x) for x in line.split()[:2]) for line in lines]
    assert keys == sorted(keys)
    r, c, re, im = lines[0].split()
    assert complex(float(re), float(im)) == H.values[0]
