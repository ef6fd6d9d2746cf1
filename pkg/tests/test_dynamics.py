import math

import numpy as np
import pytest
from scipy import sparse

from config import config
from dynamics import (
    EvolutionTime,
    Propagator,
    adiabatic_fidelity,
    evolve,
    evolve_many,
    evolve_rwa,
    rwa_fidelity,
)
from errors import DimensionLimitError, NotHermitianError, ParameterError
from fock import LinearOperator, QuantumState, TruncatedFockBasis, make_ladder, sector_split
from hamiltonians import EffectiveParams, RamanParams, build_effective, build_rwa
from states import SqueezingParam, initial_state, ladder_state, two_mode_squeezed_amplitudes


@pytest.fixture
def random_hamiltonian(rng):
    def make(basis):
        dim = basis.dimension
        a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        h = (a + a.conj().T) / (2.0 * math.sqrt(dim))
        return LinearOperator(basis, sparse.csr_matrix(h), hermitian=True)

    return make


def test_zero_time_returns_same_state(small_pair_basis, random_amplitudes):
    state = QuantumState(small_pair_basis, random_amplitudes(small_pair_basis))
    h = build_effective(EffectiveParams(g=-1.0, q=0.1, chi=0.05), small_pair_basis)
    assert evolve(h, state, 0.0) is state
    assert evolve_rwa(EffectiveParams(g=-1.0, q=0.1, chi=0.05), state, 0.0) is state


def test_diagonal_hamiltonian_gives_phases(random_amplitudes):
    basis = TruncatedFockBasis(mode_count=2, cutoff=3)
    energies = np.linspace(-1.0, 2.0, basis.dimension)
    state = QuantumState(basis, random_amplitudes(basis))
    evolved = evolve(LinearOperator.diagonal(basis, energies), state, 0.7)
    np.testing.assert_allclose(evolved.amplitudes, state.amplitudes * np.exp(-0.7j * energies), atol=1e-13)


def test_group_property(random_amplitudes):
    basis = TruncatedFockBasis(mode_count=2, cutoff=8)
    h = build_effective(EffectiveParams(g=-0.6, q=0.2, chi=0.1), basis)
    state = QuantumState(basis, random_amplitudes(basis))
    two_steps = evolve(h, evolve(h, state, 0.4), 1.1)
    np.testing.assert_allclose(two_steps.amplitudes, evolve(h, state, 1.5).amplitudes, atol=1e-12)


def test_methods_agree(random_hamiltonian, random_amplitudes):
    basis = TruncatedFockBasis(mode_count=2, cutoff=19)
    h = random_hamiltonian(basis)
    state = QuantumState(basis, random_amplitudes(basis))
    results = [evolve(h, state, 1.3, method=method).amplitudes for method in ("eigen", "expm", "krylov")]
    np.testing.assert_allclose(results[1], results[0], atol=1e-9)
    np.testing.assert_allclose(results[2], results[0], atol=1e-9)


def test_methods_agree_on_blocked_operator(random_amplitudes):
    basis = TruncatedFockBasis(mode_count=2, cutoff=10)
    h = build_effective(EffectiveParams(g=-1.0, q=0.3, chi=0.1), basis)
    state = QuantumState(basis, random_amplitudes(basis))
    eigen = evolve(h, state, 2.0, method="eigen")
    for method in ("expm", "krylov"):
        np.testing.assert_allclose(evolve(h, state, 2.0, method=method).amplitudes, eigen.amplitudes, atol=1e-9)


def test_rejects_non_hermitian():
    basis = TruncatedFockBasis(mode_count=1, cutoff=4)
    a, _ = make_ladder(basis, 0)
    with pytest.raises(NotHermitianError):
        evolve(a, QuantumState.vacuum(basis), 1.0)


def test_rejects_unknown_method():
    basis = TruncatedFockBasis(mode_count=1, cutoff=4)
    with pytest.raises(ParameterError):
        evolve(LinearOperator.identity(basis), QuantumState.vacuum(basis), 1.0, method="rk4")


def test_norm_and_sectors_are_conserved(random_amplitudes):
    basis = TruncatedFockBasis(mode_count=2, cutoff=8)
    h = build_effective(EffectiveParams(g=-0.9, q=0.4, chi=-0.2), basis)
    state = QuantumState(basis, random_amplitudes(basis))
    before = sector_split(state).weights()
    for evolved in evolve_many(h, state, [0.5, 3.0, 40.0]):
        assert evolved.norm == pytest.approx(1.0, abs=1e-12)
        after = sector_split(evolved).weights()
        for total_number, weight in before.items():
            assert after[total_number] == pytest.approx(weight, abs=1e-12)


def test_propagator_reuses_decomposition(random_amplitudes):
    basis = TruncatedFockBasis(mode_count=2, cutoff=6)
    h = build_effective(EffectiveParams(g=-0.5, q=0.1, chi=0.0), basis)
    propagator = Propagator.from_hamiltonian(h)
    assert len(propagator.blocks) == 2 * 6 + 1
    np.testing.assert_allclose(propagator.energies(), np.linalg.eigvalsh(h.to_dense()), atol=1e-12)

    state = QuantumState(basis, random_amplitudes(basis))
    np.testing.assert_allclose(propagator.evolve(state, 2.5).amplitudes, evolve(h, state, 2.5).amplitudes,
                               atol=1e-12)


def test_propagator_dimension_limit(monkeypatch, random_hamiltonian):
    basis = TruncatedFockBasis(mode_count=1, cutoff=9)
    h = random_hamiltonian(basis)
    monkeypatch.setattr(config, 'max_dense_dimension', 5)
    with pytest.raises(DimensionLimitError) as excinfo:
        Propagator.from_hamiltonian(h)
    assert excinfo.value.required == 10


def test_rwa_phases_match_exact_rwa_evolution(random_amplitudes):
    basis = TruncatedFockBasis(mode_count=2, cutoff=10)
    p = EffectiveParams(g=-0.45, q=0.1, chi=0.05)
    state = QuantumState(basis, random_amplitudes(basis))
    fast = evolve_rwa(p, state, 3.0)
    exact = evolve(build_rwa(p, basis), state, 3.0)
    np.testing.assert_allclose(fast.amplitudes, exact.amplitudes, atol=1e-10)


def test_rwa_ladder_phase_law(medium_pair_basis, xi_half):
    p = EffectiveParams(g=-0.7, q=0.2, chi=0.15)
    t = 1.9
    ladder = two_mode_squeezed_amplitudes(xi_half.rotated(1j), 40)
    evolved = evolve_rwa(p, ladder_state(medium_pair_basis, ladder), t)
    n = np.arange(41)
    phase = np.exp(1j * t * ((p.q + p.chi - 2 * p.g) * n - (3 * p.q + p.chi) * n ** 2))
    np.testing.assert_allclose(evolved.amplitudes[n * 41 + n], ladder * phase, atol=1e-12)


def test_rwa_is_exact_without_interactions(medium_pair_basis, xi_half):
    psi0 = initial_state(xi_half, medium_pair_basis, representation="b")
    p = EffectiveParams(g=-1.3, q=0.0, chi=0.0)
    for t in (0.5, 4.0, 17.0):
        assert rwa_fidelity(p, psi0, t) >= 1 - 1e-10


def test_rwa_improves_as_interactions_weaken(medium_pair_basis, xi_half):
    psi0 = initial_state(xi_half, medium_pair_basis, representation="b")
    fidelities = [rwa_fidelity(EffectiveParams(g=-1.0, q=q, chi=0.5 * q), psi0, 1.0) for q in (0.1, 0.01, 0.001)]
    assert fidelities[0] <= fidelities[1] <= fidelities[2]
    assert fidelities[2] >= 1 - 1e-4


def test_evolution_time():
    time = EvolutionTime.from_tau(math.pi, q=0.1)
    assert time.t == pytest.approx(math.pi / 0.7)
    with pytest.raises(ParameterError):
        EvolutionTime(t=1.0, tau=1.0, q=0.1)
    with pytest.raises(ParameterError):
        EvolutionTime.from_tau(1.0, q=0.0)
    with pytest.raises(ParameterError):
        EvolutionTime(t=float('inf'))


def test_evolution_time_is_accepted(small_pair_basis, random_amplitudes):
    state = QuantumState(small_pair_basis, random_amplitudes(small_pair_basis))
    p = EffectiveParams(g=-0.45, q=0.1, chi=0.05)
    by_tau = evolve_rwa(p, state, EvolutionTime.from_tau(math.pi, q=0.1))
    by_seconds = evolve_rwa(p, state, math.pi / 0.7)
    np.testing.assert_allclose(by_tau.amplitudes, by_seconds.amplitudes)


def test_adiabatic_without_coupling_is_exact():
    basis = TruncatedFockBasis(mode_count=2, cutoff=4)
    p = RamanParams(g1=0.0, g2=0.0, delta1=1.0, delta2=1.0, lambda1=0.1, lambda3=0.2, lambda13=0.3)
    report = adiabatic_fidelity(p, QuantumState.fock(basis, 2, 1), 5.0)
    assert report.fidelity == pytest.approx(1.0, abs=1e-12)
    assert report.max_mid_population == pytest.approx(0.0, abs=1e-14)


def test_adiabatic_elimination_improves_with_detuning():
    basis = TruncatedFockBasis(mode_count=2, cutoff=16)
    psi0 = initial_state(SqueezingParam(r=0.3), basis, representation="b")

    def report(ratio):
        p = RamanParams(g1=1.0, g2=1.0, delta1=ratio, delta2=ratio, lambda1=1e-4, lambda3=1e-4, lambda13=2e-4)
        # gt = 1 with g = |g1|^2 / delta
        return adiabatic_fidelity(p, psi0, float(ratio), max_total=6)

    near, far = report(20.0), report(200.0)
    assert far.fidelity >= 0.99
    assert far.fidelity > near.fidelity
    assert far.max_mid_population <= 1e-3
    assert far.max_mid_population < near.max_mid_population


def test_adiabatic_refuses_large_sectors(monkeypatch):
    basis = TruncatedFockBasis(mode_count=2, cutoff=8)
    monkeypatch.setattr(config, 'max_sector_dimension', 20)
    p = RamanParams(g1=1.0, g2=1.0, delta1=50.0, delta2=50.0)
    with pytest.raises(DimensionLimitError):
        adiabatic_fidelity(p, QuantumState.fock(basis, 5, 2), 1.0)


def test_adiabatic_needs_resonance():
    basis = TruncatedFockBasis(mode_count=2, cutoff=4)
    p = RamanParams(g1=1.0, g2=1.0, delta1=50.0, delta2=40.0)
    with pytest.raises(ParameterError):
        adiabatic_fidelity(p, QuantumState.fock(basis, 1, 0), 1.0)
