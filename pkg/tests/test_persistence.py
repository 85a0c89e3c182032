import numpy as np
import pytest

from common import SizeError
from lattice import LatticeSpec, build_hamiltonian, gaussian_packet, propagator, random_unitary
from persistence import (
    LabelledConfig,
    PermutationAmplitudes,
    PersistenceState,
    all_permutation_amps,
    evolve_free,
    evolve_persistence,
    exchange_operator,
    labelled_state,
    persistence_amp,
    product_state,
    sum_rule_demo,
    symmetric_hamiltonian,
    symmetric_two_particle_hamiltonian,
    two_path_demo,
)


def test_persistence_amp_is_product(rng):
    u = random_unitary(6, rng)
    amp = persistence_amp(u, LabelledConfig((1, 4)), LabelledConfig((2, 0)))
    assert amp == pytest.approx(u[2, 1] * u[0, 4])


def test_persistence_amp_count_mismatch(rng):
    with pytest.raises(ValueError):
        persistence_amp(random_unitary(4, rng), (0, 1), (0, 1, 2))


def test_all_permutation_amps_two_particles(rng):
    u = random_unitary(5, rng)
    amps = all_permutation_amps(u, (0, 3), (1, 2))
    assert amps.direct == pytest.approx(u[1, 0] * u[2, 3])
    assert amps.indirect == pytest.approx(u[2, 0] * u[1, 3])


def test_all_permutation_amps_three_particles(rng):
    u = random_unitary(6, rng)
    amps = all_permutation_amps(u, (0, 2, 4), (1, 3, 5))
    assert len(amps.amps) == 6
    assert amps.amps[(2, 0, 1)] == pytest.approx(u[5, 0] * u[1, 2] * u[3, 4])


def test_permutation_limit():
    with pytest.raises(SizeError):
        all_permutation_amps(np.eye(12), tuple(range(9)), tuple(range(9)))


def test_permutation_amplitudes_need_full_map():
    with pytest.raises(ValueError):
        PermutationAmplitudes(2, {(0, 1): 1.0})
    with pytest.raises(ValueError):
        PermutationAmplitudes(3, {(0, 1, 2): 1.0})


def test_labelled_config_validation():
    with pytest.raises(ValueError):
        LabelledConfig(())
    with pytest.raises(ValueError):
        LabelledConfig((-1, 2))
    with pytest.raises(ValueError):
        labelled_state(LabelledConfig((0, 7)), 4)


def test_state_must_be_normalized():
    with pytest.raises(ValueError):
        PersistenceState(np.ones((3, 3)))
    assert PersistenceState.normalized(np.ones((3, 3))).n == 2


def test_symmetric_hamiltonian_commutes_with_exchange():
    spec = LatticeSpec(4, potential=(0.0, 0.5, -0.3, 0.1))
    h = symmetric_hamiltonian(spec, 2, interaction=1.5)
    p = exchange_operator(4)
    np.testing.assert_allclose(h @ p, p @ h, atol=1e-12)
    np.testing.assert_allclose(h, symmetric_two_particle_hamiltonian(spec, 1.5))


def test_three_particle_hamiltonian_commutes_with_cycle():
    spec = LatticeSpec(3)
    h = symmetric_hamiltonian(spec, 3, interaction=0.7)
    p = exchange_operator(3, n=3, perm=(1, 2, 0))
    np.testing.assert_allclose(h @ p, p @ h, atol=1e-12)


def test_exchange_operator_swaps_labels():
    psi = np.zeros((3, 3))
    psi[0, 2] = 1.0
    moved = (exchange_operator(3) @ psi.reshape(-1)).reshape(3, 3)
    assert moved[2, 0] == 1.0 and moved[0, 2] == 0.0


def test_free_evolution_matches_two_particle_hamiltonian():
    spec = LatticeSpec(5)
    a, b = gaussian_packet(spec, 1.0), gaussian_packet(spec, 3.0, p0=0.4)
    state = product_state(a, b)
    by_h = evolve_persistence(state, symmetric_hamiltonian(spec, 2), 0.9)
    by_u = evolve_free(state, propagator(build_hamiltonian(spec), 0.9))
    np.testing.assert_allclose(by_h.psi, by_u.psi, atol=1e-12)


def test_evolve_persistence_dimension_check():
    state = labelled_state(LabelledConfig((0, 1)), 3)
    with pytest.raises(ValueError):
        evolve_persistence(state, np.eye(4), 1.0)


def test_sum_rule_demo():
    assert sum_rule_demo(1 + 2j, 3 - 1j) == 4 + 1j


def test_two_path_demo_path_sum_equals_composed_amplitude():
    h = build_hamiltonian(LatticeSpec(16))
    rep = two_path_demo(propagator(h, 0.7), propagator(h, 0.4, t_from=0.7), 0, 5, (3, 4))
    assert rep.c == rep.a + rep.b
    assert rep.difference < 1e-12
