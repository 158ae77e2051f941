import math

import numpy as np
import pytest

from diatomiq.checks import check_bell_prep, check_cnot, check_entangling_phase
from diatomiq.gates import entangling_phase_from_fock
from diatomiq.model import HamiltonianParams, InputError, RegimeError, interaction_matrix


def _distance(a, b):
    return abs(np.angle(np.exp(1j * (a - b))))


def test_phase_follows_coupling_times_time():
    rng = np.random.default_rng(5)
    for _ in range(5):
        D, t = rng.uniform(0.1, 3.0), rng.uniform(0.0, 10.0)
        params = HamiltonianParams.create(
            2, coupling=D, interactions=interaction_matrix(*rng.uniform(-1, 1, size=6))
        )
        assert _distance(entangling_phase_from_fock(params, t), -D * t) < 1e-10


def test_pi_time_gives_pi_phase():
    D = 0.7
    params = HamiltonianParams.create(2, coupling=D)
    phi = entangling_phase_from_fock(params, math.pi / D)
    assert abs(abs(phi) - math.pi) < 1e-10


def test_site_energies_do_not_change_the_phase():
    params = HamiltonianParams.create(2, coupling=1.3, interactions=interaction_matrix(ab=0.4))
    base = entangling_phase_from_fock(params, 2.2)
    eps = [[0.5, -1.0, 2.0], [3.0, 0.25, -0.75]]
    shifted = entangling_phase_from_fock(params, 2.2, site_energies=eps)
    assert _distance(base, shifted) < 1e-10


def test_phase_needs_the_free_evolution_regime():
    with pytest.raises(RegimeError):
        entangling_phase_from_fock(HamiltonianParams.create(2, tunneling=(0.1, 0, 0)), 1.0)
    with pytest.raises(RegimeError):
        entangling_phase_from_fock(HamiltonianParams.create(2, rabi=0.2), 1.0)
    with pytest.raises(InputError):
        entangling_phase_from_fock(HamiltonianParams.create(3), 1.0)
    with pytest.raises(InputError):
        entangling_phase_from_fock(HamiltonianParams.create(2), -1.0)


def test_check_entangling_phase_suite():
    r = check_entangling_phase(HamiltonianParams.create(2, coupling=1.0), samples=20, seed=3)
    assert r.supported and r.passed
    assert len(r.residuals) == 20
    assert max(r.residuals) < 1e-10
    assert r.perturbation_residual < 1e-10
    assert r.pi_time == pytest.approx(math.pi)
    again = check_entangling_phase(HamiltonianParams.create(2, coupling=1.0), samples=20, seed=3)
    assert again.couplings == r.couplings


def test_check_entangling_phase_fermi_atoms():
    params = HamiltonianParams.create(2, coupling=0.5, caps=(1, 1, 1), statistics="fermi_atoms")
    r = check_entangling_phase(params, samples=5, seed=1)
    assert r.passed


def test_check_entangling_phase_with_tunneling():
    params = HamiltonianParams.create(2, coupling=1.0, tunneling=(0.1, 0.1, 0.0))
    with pytest.raises(RegimeError):
        check_entangling_phase(params)
    r = check_entangling_phase(params, strict=False)
    assert not r.supported
    assert r.reason == "nonzero tunneling"


def test_gate_algebra_checks_pass():
    c = check_cnot()
    assert c.passed
    assert c.truth_table == {"00": "00", "01": "01", "10": "11", "11": "10"}
    b = check_bell_prep()
    assert b.passed
    assert b.label == "psi_plus"
    assert max(b.step_residuals) < 1e-14
