import numpy as np

from chiralflow import dynamics, hilbert


def evolve_spec(spec, times, start=None, n_excitations=1):
    """Build the requested excitation block and evolve a basis start state."""
    basis = hilbert.enumerate_basis(spec.n_sites, n_excitations, spec.statistics)
    h = hilbert.build_hamiltonian(spec, basis)
    if start is None:
        start = tuple(n_excitations if j == 0 else 0 for j in range(spec.n_sites))
    psi0 = np.zeros(len(basis), dtype=complex)
    psi0[basis.state_index(start)] = 1.0
    return dynamics.evolve(h, psi0, times, basis=basis, labels=spec.labels)


def spec_hamiltonian(spec, n_excitations=1):
    basis = hilbert.enumerate_basis(spec.n_sites, n_excitations, spec.statistics)
    return hilbert.build_hamiltonian(spec, basis), basis
