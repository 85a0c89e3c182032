"""
Tests for the lattice, propagators and the permanent / determinant kernels.
"""
import math

import numpy as np
import pytest

from common import SizeError
from lattice import (
    LatticeSpec,
    Packet,
    build_hamiltonian,
    determinant,
    gaussian_packet,
    permanent,
    permutation_expansion,
    permutation_sign,
    propagator,
    random_unitary,
)


def test_spec_fills_zero_potential():
    spec = LatticeSpec(5)
    assert spec.potential == (0.0,) * 5


@pytest.mark.parametrize("kwargs", [
    {"sites": 1},
    {"sites": 4, "boundary": "twisted"},
    {"sites": 4, "dt": 0.0},
    {"sites": 4, "potential": (0.0, 1.0)},
])
def test_spec_rejects_bad_values(kwargs):
    with pytest.raises(ValueError):
        LatticeSpec(**kwargs)


def test_hamiltonian_periodic_and_open():
    h = build_hamiltonian(LatticeSpec(4, hopping=2.0))
    assert h[0, 3] == -2.0 and h[3, 0] == -2.0
    h_open = build_hamiltonian(LatticeSpec(4, boundary="open"))
    assert h_open[0, 3] == 0.0
    np.testing.assert_allclose(h, h.conj().T)


def test_four_site_ring_spectrum():
    h = build_hamiltonian(LatticeSpec(4))
    np.testing.assert_allclose(np.linalg.eigvalsh(h), [-2.0, 0.0, 0.0, 2.0], atol=1e-12)


def test_two_site_periodic_has_single_bond():
    h = build_hamiltonian(LatticeSpec(2, hopping=1.0))
    np.testing.assert_allclose(h, [[0, -1], [-1, 0]])


def test_propagator_identity_at_zero():
    u = propagator(build_hamiltonian(LatticeSpec(6)), 0.0)
    assert np.array_equal(u.matrix, np.eye(6))


@pytest.mark.parametrize("sites", [2, 5, 16])
def test_propagator_is_unitary(sites):
    spec = LatticeSpec(sites, potential=tuple(np.linspace(-1, 1, sites)))
    u = propagator(build_hamiltonian(spec), 3.7)
    assert u.unitarity_defect() < 1e-10


def test_propagator_composes():
    h = build_hamiltonian(LatticeSpec(8))
    u, v = propagator(h, 0.3), propagator(h, 0.5, t_from=0.3)
    both = u.then(v)
    np.testing.assert_allclose(both.matrix, propagator(h, 0.8).matrix, atol=1e-12)
    assert both.interval == (0.0, 0.8)


def test_propagator_of_diagonal_hamiltonian():
    u = propagator(np.diag([1.0, 2.0]), math.pi)
    np.testing.assert_allclose(u.matrix, np.diag([-1.0, 1.0]), atol=1e-12)


def test_propagator_matches_taylor_series():
    h = build_hamiltonian(LatticeSpec(4))
    term = np.eye(4, dtype=complex)
    series = term.copy()
    for k in range(1, 60):
        term = term @ (-1j * h) / k
        series += term
    assert propagator(h, 1.0).matrix[0, 0] == pytest.approx(series[0, 0], abs=1e-12)


def test_propagator_rejects_non_hermitian():
    with pytest.raises(ValueError):
        propagator(np.array([[0, 1], [0, 0]]), 1.0)


def test_balanced_two_site_unitary():
    u = propagator(build_hamiltonian(LatticeSpec(2, boundary="open")), math.pi / 4)
    np.testing.assert_allclose(np.abs(u.matrix) ** 2, 0.5, atol=1e-12)


def test_gaussian_packet_normalized():
    spec = LatticeSpec(32)
    phi = gaussian_packet(spec, 8.0, p0=0.5, sigma=1.5)
    assert abs(np.linalg.norm(phi.vector) - 1.0) < 1e-12
    assert int(np.argmax(phi.density())) == 8
    np.testing.assert_allclose(Packet(8.0, 0.5, 1.5).state(spec).vector, phi.vector)


def test_separated_packets_barely_overlap():
    spec = LatticeSpec(32)
    overlap = np.vdot(gaussian_packet(spec, 8.0).vector, gaussian_packet(spec, 24.0).vector)
    assert abs(overlap) < 1e-10


def test_gaussian_packet_needs_positive_sigma():
    with pytest.raises(ValueError):
        gaussian_packet(LatticeSpec(8), 3.0, sigma=0.0)


@pytest.mark.parametrize("perm, sign", [((0, 1, 2), 1), ((1, 0, 2), -1), ((1, 2, 0), 1), ((3, 2, 1, 0), 1)])
def test_permutation_sign(perm, sign):
    assert permutation_sign(perm) == sign


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5, 6])
def test_kernels_match_expansion(n, rng):
    for _ in range(20):
        m = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        assert abs(permanent(m) - permutation_expansion(m, signed=False)) < 1e-12 * max(1.0, abs(permanent(m)))
        assert abs(determinant(m) - permutation_expansion(m, signed=True)) < 1e-12 * max(1.0, abs(determinant(m)))


def test_permanent_known_values():
    assert permanent(np.ones((3, 3))) == pytest.approx(6.0)
    assert permanent(np.ones((4, 4))) == pytest.approx(24.0)
    assert permanent(np.array([[1, 2], [3, 4]])) == pytest.approx(10.0)
    assert permanent(np.zeros((0, 0))) == 1


def test_determinant_of_repeated_rows_vanishes(rng):
    row = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    m = np.vstack([row, row, rng.standard_normal(3)])
    assert abs(determinant(m)) < 1e-12


def test_permanent_size_limit():
    with pytest.raises(SizeError):
        permanent(np.zeros((21, 21)))


def test_kernels_need_square_matrix():
    with pytest.raises(ValueError):
        permanent(np.zeros((2, 3)))
    with pytest.raises(ValueError):
        determinant(np.zeros((3, 2)))


def test_random_unitary(rng):
    u = random_unitary(7, rng)
    assert u.unitarity_defect() < 1e-10
