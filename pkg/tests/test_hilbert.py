import itertools
import math

import numpy as np
import pytest

from chiralflow import hilbert, models
from chiralflow.errors import CapacityOverflow, SpecMismatch, SpinOverflow
from chiralflow.hilbert import Hopping, OnSite, Statistics


def brute_force_states(n_sites, n_exc, cap):
    """Independent enumeration: filter the full occupation product."""
    states = [
        occ for occ in itertools.product(range(cap + 1), repeat=n_sites)
        if sum(occ) == n_exc
    ]
    return sorted(states, reverse=True)


def test_single_excitation_basis():
    basis = hilbert.enumerate_basis(3, 1, Statistics.boson())
    assert basis.states == ((1, 0, 0), (0, 1, 0), (0, 0, 1))
    assert len(hilbert.enumerate_basis(5, 1, Statistics.boson())) == 5


def test_two_boson_capped_basis():
    basis = hilbert.enumerate_basis(3, 2, Statistics.boson(2))
    expected = ((2, 0, 0), (1, 1, 0), (1, 0, 1), (0, 2, 0), (0, 1, 1), (0, 0, 2))
    assert basis.states == expected
    assert basis.states == tuple(brute_force_states(3, 2, 2))


@pytest.mark.parametrize("n_sites", range(1, 13))
@pytest.mark.parametrize("n_exc", range(0, 5))
def test_dimension_formulas(n_sites, n_exc):
    boson = Statistics.boson()
    basis = hilbert.enumerate_basis(n_sites, n_exc, boson)
    assert len(basis) == math.comb(n_sites + n_exc - 1, n_exc)
    assert len(basis) == hilbert.subspace_dimension(n_sites, n_exc, boson)
    # independent enumeration: bosonic states are site multisets
    multisets = {
        tuple(combo.count(site) for site in range(n_sites))
        for combo in itertools.combinations_with_replacement(range(n_sites), n_exc)
    }
    assert multisets == set(basis.states)
    if n_exc <= n_sites:
        spin_basis = hilbert.enumerate_basis(n_sites, n_exc, Statistics.spin())
        assert len(spin_basis) == math.comb(n_sites, n_exc)
        subsets = {
            tuple(1 if site in combo else 0 for site in range(n_sites))
            for combo in itertools.combinations(range(n_sites), n_exc)
        }
        assert subsets == set(spin_basis.states)
        capped = hilbert.enumerate_basis(n_sites, n_exc, Statistics.boson(1))
        assert spin_basis.states == capped.states


@pytest.mark.parametrize("n_sites,n_exc,cap", [(4, 3, 2), (5, 4, 3), (6, 2, 1)])
def test_enumeration_matches_brute_force(n_sites, n_exc, cap):
    basis = hilbert.enumerate_basis(n_sites, n_exc, Statistics.boson(cap))
    assert list(basis.states) == brute_force_states(n_sites, n_exc, cap)


def test_index_is_inverse_of_states():
    basis = hilbert.enumerate_basis(6, 3, Statistics.boson())
    for i, state in enumerate(basis.states):
        assert basis.index[state] == i
    assert len(set(basis.states)) == len(basis)


def test_enumeration_errors():
    with pytest.raises(SpinOverflow):
        hilbert.enumerate_basis(3, 4, Statistics.spin())
    with pytest.raises(CapacityOverflow):
        hilbert.enumerate_basis(2, 5, Statistics.boson(2))
    with pytest.raises(ValueError):
        hilbert.enumerate_basis(0, 1, Statistics.boson())


def test_single_particle_hop_element():
    hop = Hopping(1, 2, 1.0, math.pi / 2)
    value = hilbert.matrix_element((1, 0, 0), (0, 1, 0), hop)
    assert value == pytest.approx(1j, abs=1e-15)
    # Hermitian partner direction comes from the conjugate part of the term.
    value = hilbert.matrix_element((0, 1, 0), (1, 0, 0), hop)
    assert value == pytest.approx(-1j, abs=1e-15)
    assert hilbert.matrix_element((0, 0, 1), (1, 0, 0), hop) == 0


def test_bosonic_enhancement_element():
    hop = Hopping(1, 2, 1.0, 0.0)
    value = hilbert.matrix_element((2, 0, 0), (1, 1, 0), hop)
    assert value == pytest.approx(math.sqrt(2.0), abs=1e-15)


def test_spin_blocking_element():
    hop = Hopping(1, 2, 1.0, 0.0)
    value = hilbert.matrix_element((2, 0, 0), (1, 1, 0), hop, Statistics.spin())
    assert value == 0
    value = hilbert.matrix_element((1, 0, 1), (0, 1, 1), hop, Statistics.spin())
    assert value == pytest.approx(1.0, abs=1e-15)


def test_onsite_element():
    term = OnSite(1, 0.0, 1.0)
    assert hilbert.matrix_element((2, 0, 0), (2, 0, 0), term) == pytest.approx(4.0)
    assert hilbert.matrix_element((2, 0, 0), (1, 1, 0), term) == 0
    shifted = OnSite(2, 0.5, 0.0)
    assert hilbert.matrix_element((1, 2, 0), (1, 2, 0), shifted) == pytest.approx(1.0)


def test_three_node_ring_matrix():
    spec = models.sgf_ring(3, 3 * math.pi / 2)
    basis = hilbert.enumerate_basis(3, 1, spec.statistics)
    h = hilbert.build_hamiltonian(spec, basis).matrix
    expected = np.array([[0, 1j, -1j], [-1j, 0, 1j], [1j, -1j, 0]])
    assert np.allclose(h, expected, atol=1e-15)


def test_four_node_symmetric_gauge_matrix():
    theta = math.pi / 4
    spec = models.sgf_ring(4, 4 * theta)
    basis = hilbert.enumerate_basis(4, 1, spec.statistics)
    h = hilbert.build_hamiltonian(spec, basis).matrix
    phase = np.exp(1j * theta)
    expected = np.array([
        [0, phase, 0, np.conj(phase)],
        [np.conj(phase), 0, phase, 0],
        [0, np.conj(phase), 0, phase],
        [phase, 0, np.conj(phase), 0],
    ])
    assert np.allclose(h, expected, atol=1e-15)


def test_hamiltonian_exactly_hermitian():
    rng = np.random.default_rng(11)
    for _ in range(20):
        n = int(rng.integers(3, 7))
        spec = models.asgf(n, float(rng.uniform(0, 3)), float(rng.uniform(-math.pi, math.pi)))
        basis = hilbert.enumerate_basis(spec.n_sites, 2, spec.statistics)
        h = hilbert.build_hamiltonian(spec, basis).matrix
        assert np.array_equal(h, h.conj().T)


def test_number_operator_commutes_exactly():
    spec = models.asgf(4, 2.0, math.pi / 2)
    basis = hilbert.enumerate_basis(spec.n_sites, 2, spec.statistics)
    h = hilbert.build_hamiltonian(spec, basis).matrix
    n_op = hilbert.number_operator(basis)
    assert np.max(np.abs(h @ n_op - n_op @ h)) == 0.0


def full_space_hamiltonian(spec, local_dim):
    """Independent construction from dense ladder operators on the full
    tensor space."""
    lower = np.diag(np.sqrt(np.arange(1, local_dim)), k=1)
    raise_op = lower.T.conj()
    n_sites = spec.n_sites
    dim = local_dim ** n_sites

    def site_op(op, site):
        out = np.eye(1)
        for j in range(1, n_sites + 1):
            out = np.kron(out, op if j == site else np.eye(local_dim))
        return out

    h = np.zeros((dim, dim), dtype=complex)
    for hop in spec.hoppings:
        coeff = hop.amplitude * np.exp(1j * hop.phase)
        term = coeff * site_op(raise_op, hop.j) @ site_op(lower, hop.k)
        h += term + term.conj().T
    for onsite in spec.onsite:
        n_op = site_op(raise_op @ lower, onsite.j)
        h += onsite.delta_omega * n_op + onsite.kerr_u * n_op @ n_op
    return h


@pytest.mark.parametrize("statistics,n_exc", [
    (Statistics.boson(), 2),
    (Statistics.spin(), 2),
])
def test_subspace_block_matches_full_space(statistics, n_exc):
    spec = models.sgf_ring(4, 2 * math.pi, statistics=statistics)
    spec = models.NetworkSpec(
        spec.n_network, spec.auxiliary_count, spec.hoppings,
        (OnSite(1, 0.3, 0.7), OnSite(3, -0.2, 0.1)), spec.statistics, spec.labels,
    )
    basis = hilbert.enumerate_basis(4, n_exc, statistics)
    block = hilbert.build_hamiltonian(spec, basis).matrix
    local_dim = 2 if statistics.is_spin else n_exc + 1
    full = full_space_hamiltonian(spec, local_dim)
    projected = hilbert.sector_block(full, basis, local_dim)
    assert np.allclose(block, projected, atol=1e-12)


def test_build_rejects_bad_sites():
    spec = models.sgf_ring(3, math.pi / 2)
    bad = models.NetworkSpec(
        3, 0, spec.hoppings, (OnSite(7, 1.0, 0.0),), spec.statistics, spec.labels
    )
    basis = hilbert.enumerate_basis(3, 1, spec.statistics)
    with pytest.raises(SpecMismatch):
        hilbert.build_hamiltonian(bad, basis)
    with pytest.raises(SpecMismatch):
        hilbert.build_hamiltonian(spec, hilbert.enumerate_basis(4, 1, spec.statistics))


def test_full_space_embedding():
    basis = hilbert.enumerate_basis(3, 1, Statistics.spin())
    assert hilbert.full_space_index((1, 0, 0)) == 4
    assert hilbert.full_space_index((0, 0, 1)) == 1
    assert list(hilbert.embedding_indices(basis)) == [4, 2, 1]
    vec = hilbert.embed_state(np.array([1.0, 2.0, 3.0], dtype=complex), basis)
    assert vec[4] == 1.0 and vec[2] == 2.0 and vec[1] == 3.0
    assert np.sum(np.abs(vec)) == 6.0
