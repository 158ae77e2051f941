import itertools

import numpy as np
import pytest

from diatomiq.fock import (
    MAX_SITES,
    embed_qubit_state,
    encoded_indices,
    enumerate_basis,
    merge_bases,
    project_qubit_subspace,
    register_basis,
)
from diatomiq.gates import basis_state
from diatomiq.model import FockState, InputError, RegisterState, ResourceGuardError


def _brute_force(num_sites, sector, caps):
    ranges = [range(c + 1) for c in caps] * num_sites
    out = []
    for flat in itertools.product(*ranges):
        if FockState(tuple(flat[3 * i : 3 * i + 3] for i in range(num_sites))).charges == sector:
            out.append(flat)
    return sorted(out, reverse=True)


def test_single_site_register_sector():
    basis = enumerate_basis(1, (1, 1))
    assert [s.flat for s in basis] == [(1, 1, 0), (0, 0, 1)]
    assert basis.caps == (1, 1, 1)
    assert basis.index((0, 0, 1)) == 1
    assert basis.index((1, 0, 0)) is None


@pytest.mark.parametrize(
    "num_sites,sector,caps",
    [(2, (2, 2), (2, 2, 2)), (2, (2, 1), (2, 1, 1)), (3, (2, 3), (1, 2, 1))],
)
def test_enumeration_matches_brute_force(num_sites, sector, caps):
    basis = enumerate_basis(num_sites, sector, caps)
    assert [s.flat for s in basis] == _brute_force(num_sites, sector, caps)
    assert all(s.charges == sector for s in basis)
    assert all(s.within(caps) for s in basis)


def test_vacuum_and_empty_sectors():
    vac = enumerate_basis(2, (0, 0))
    assert len(vac) == 1
    assert vac[0].flat == (0,) * 6
    empty = enumerate_basis(1, (2, 2), caps=(0, 0, 1))
    assert len(empty) == 0
    assert empty.num_sites == 0


def test_basis_guards():
    with pytest.raises(InputError):
        enumerate_basis(2, (-1, 0))
    with pytest.raises(ResourceGuardError):
        enumerate_basis(MAX_SITES + 1, (1, 1))


def test_merge_bases_keeps_canonical_order():
    merged = merge_bases(enumerate_basis(2, (1, 1)), enumerate_basis(2, (1, 0)))
    flats = [s.flat for s in merged]
    assert flats == sorted(flats, reverse=True)
    assert merged.sector is None
    assert len(merged) == len(enumerate_basis(2, (1, 1))) + len(enumerate_basis(2, (1, 0)))
    with pytest.raises(InputError):
        merge_bases(enumerate_basis(1, (1, 1)), enumerate_basis(2, (1, 1)))


def test_encoded_indices_follow_qubit_order():
    basis = register_basis(2)
    idx = encoded_indices(basis)
    assert basis[idx[0]].flat == (1, 1, 0, 1, 1, 0)
    assert basis[idx[1]].flat == (1, 1, 0, 0, 0, 1)
    assert basis[idx[2]].flat == (0, 0, 1, 1, 1, 0)
    assert basis[idx[3]].flat == (0, 0, 1, 0, 0, 1)
    with pytest.raises(InputError):
        encoded_indices(enumerate_basis(2, (1, 1)))


def test_embed_then_project_has_no_leakage():
    basis = register_basis(2, (1, 1, 1))
    psi = RegisterState.normalized([0.5, 0.5j, -0.5, 0.5])
    fock = embed_qubit_state(psi, basis)
    assert fock.basis_tag == "fock"
    back, leakage = project_qubit_subspace(fock)
    assert leakage == pytest.approx(0.0, abs=1e-15)
    assert np.allclose(back.amplitudes, psi.amplitudes)
    with pytest.raises(InputError):
        embed_qubit_state(basis_state("0"), basis)
