import cmath
import math

import numpy as np
import pytest

from dynamics import EvolutionTime, evolve_rwa
from errors import DecompositionError, ParameterError
from fock import QuantumState, TruncatedFockBasis
from revivals import (
    RevivalSpec,
    coefficient_ratio,
    decompose,
    fidelity,
    gauss_coefficients,
    printed_coefficient_array,
    printed_superposition,
    resonant_params,
    running_phases,
    target_superposition,
)
from states import (
    SqueezingParam,
    initial_state,
    ladder_state,
    product_squeezed,
    to_b_representation,
    two_mode_squeezed_amplitudes,
    two_mode_squeezed_vacuum,
)

Q = 0.1


def _evolved(spec: RevivalSpec, basis: TruncatedFockBasis, convention: str = "derived") -> QuantumState:
    psi0 = initial_state(spec.xi, basis, kind="opposite_phase", representation="B")
    return evolve_rwa(resonant_params(Q, convention), psi0, EvolutionTime.from_tau(spec.tau, Q))


def test_resonant_params():
    derived = resonant_params(Q)
    assert derived.g == pytest.approx(-4.5 * Q)
    assert derived.chi == pytest.approx(0.5 * Q)
    assert coefficient_ratio(derived) == pytest.approx(3.0)

    literal = resonant_params(Q, "paper-literal")
    assert literal.g == pytest.approx(-4.75 * Q)
    assert coefficient_ratio(literal) == pytest.approx(22.0 / 7.0)


@pytest.mark.parametrize("q, convention", [(0.0, "derived"), (float('nan'), "derived"), (Q, "guessed")])
def test_resonant_params_rejects(q, convention):
    with pytest.raises(ParameterError):
        resonant_params(q, convention)


def test_gauss_two_branches():
    c = gauss_coefficients(2, 1)
    expected = np.array([0, cmath.exp(1j * math.pi / 4) / math.sqrt(2), 0, cmath.exp(-1j * math.pi / 4) / math.sqrt(2)])
    np.testing.assert_allclose(c, expected, atol=1e-14)


def test_gauss_four_branches():
    c = gauss_coefficients(4, 1)
    half = 0.5 * cmath.exp(-1j * math.pi / 4)
    np.testing.assert_allclose(c, [0, 0.5, 0, half, 0, 0.5, 0, -half], atol=1e-14)


def test_gauss_full_revival():
    np.testing.assert_allclose(gauss_coefficients(1, 1), [1.0, 0.0], atol=1e-15)


@pytest.mark.parametrize("N", range(1, 13))
def test_gauss_coefficients_have_unit_norm(N):
    for M in range(1, 2 * N):
        if math.gcd(N, M) == 1:
            assert np.sum(np.abs(gauss_coefficients(N, M)) ** 2) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("N, M", [(2, 1), (3, 1), (3, 2), (5, 3), (7, 4)])
def test_gauss_coefficients_reproduce_ladder_phase(N, M):
    c = gauss_coefficients(N, M)
    phi = running_phases(N)
    n = np.arange(4 * N)
    synthesized = np.exp(1j * np.outer(n, phi)) @ c
    np.testing.assert_allclose(synthesized, np.exp(-1j * math.pi * M / N * n * (n - 3)), atol=1e-12)


def test_gauss_coefficients_depend_on_m_modulo_2n():
    np.testing.assert_allclose(gauss_coefficients(3, 1), gauss_coefficients(3, 7), atol=1e-13)


def test_gauss_rejects_common_factor():
    with pytest.raises(ParameterError):
        gauss_coefficients(4, 2)


def test_revival_spec():
    spec = RevivalSpec(N=4, M=1, xi=SqueezingParam(r=0.5))
    assert spec.tau == pytest.approx(math.pi / 2)
    np.testing.assert_allclose(spec.phases, math.pi * np.arange(8) / 4)
    with pytest.raises(ParameterError):
        RevivalSpec(N=4, M=2, xi=SqueezingParam(r=0.5))
    with pytest.raises(ParameterError):
        RevivalSpec(N=2, M=3, xi=SqueezingParam(r=0.5))


def test_fidelity_of_identical_and_orthogonal_states():
    basis = TruncatedFockBasis(mode_count=2, cutoff=2)
    assert fidelity(QuantumState.fock(basis, 1, 1), QuantumState.fock(basis, 1, 1)) == 1.0
    assert fidelity(QuantumState.fock(basis, 1, 1), QuantumState.fock(basis, 0, 1)) == 0.0


def test_two_branch_target_in_both_representations(pair_basis, xi_half):
    spec = RevivalSpec(N=2, M=1, xi=xi_half)
    target = target_superposition(spec, pair_basis)

    phase = cmath.exp(1j * math.pi / 4)
    branch_a = two_mode_squeezed_vacuum(xi_half.rotated(-1.0), pair_basis)
    branch_b = two_mode_squeezed_vacuum(xi_half, pair_basis)
    expected = (branch_a * phase + branch_b * phase.conjugate()).normalized()
    assert fidelity(target, expected) >= 1 - 1e-12

    target_b = target_superposition(spec, pair_basis, representation="b")
    assert fidelity(target_b, to_b_representation(target)) >= 1 - 1e-10


def test_printed_table_misses_four_branch_revival(pair_basis, xi_half):
    spec = RevivalSpec(N=4, M=1, xi=xi_half)
    evolved = _evolved(spec, pair_basis)
    assert fidelity(printed_superposition(spec, pair_basis), evolved) < 0.99
    assert fidelity(target_superposition(spec, pair_basis), evolved) >= 1 - 1e-8


def test_printed_table_matches_two_branch_revival(pair_basis, xi_half):
    spec = RevivalSpec(N=2, M=1, xi=xi_half)
    assert fidelity(printed_superposition(spec, pair_basis), _evolved(spec, pair_basis)) >= 1 - 1e-8


@pytest.mark.parametrize("N, M", [(2, 1), (4, 1), (3, 1), (4, 3)])
def test_evolved_state_reaches_target(N, M, pair_basis, xi_half):
    spec = RevivalSpec(N=N, M=M, xi=xi_half)
    assert fidelity(target_superposition(spec, pair_basis), _evolved(spec, pair_basis)) >= 1 - 1e-8


@pytest.mark.parametrize("N, M", [(2, 1), (4, 1)])
def test_paper_literal_convention_misses_target(N, M, pair_basis, xi_half):
    spec = RevivalSpec(N=N, M=M, xi=xi_half)
    target = target_superposition(spec, pair_basis)
    derived = fidelity(target, _evolved(spec, pair_basis, "derived"))
    literal = fidelity(target, _evolved(spec, pair_basis, "paper-literal"))
    assert literal < derived
    assert literal < 0.999


def test_full_revival(pair_basis, xi_half):
    spec = RevivalSpec(N=1, M=1, xi=xi_half)
    psi0 = initial_state(xi_half, pair_basis, representation="B")
    assert fidelity(_evolved(spec, pair_basis), psi0) >= 1 - 1e-10


def test_two_branch_revival_is_a_pair_of_product_states(pair_basis, xi_half):
    spec = RevivalSpec(N=2, M=1, xi=xi_half)
    i_xi, minus_i_xi = xi_half.rotated(1j), xi_half.rotated(-1j)
    expected = (
        product_squeezed(i_xi, minus_i_xi, pair_basis)
        - product_squeezed(minus_i_xi, i_xi, pair_basis) * 1j
    ).normalized()

    assert fidelity(target_superposition(spec, pair_basis, representation="b"), expected) >= 1 - 1e-10
    assert fidelity(to_b_representation(_evolved(spec, pair_basis)), expected) >= 1 - 1e-8


def test_four_branch_printed_form_in_b_representation(pair_basis, xi_half):
    spec = RevivalSpec(N=4, M=1, xi=xi_half)
    i_xi, minus_i_xi = xi_half.rotated(1j), xi_half.rotated(-1j)
    phase = 0.5 * cmath.exp(1j * math.pi / 4)
    printed_form = (
        product_squeezed(xi_half, -xi_half, pair_basis) * 0.5
        + product_squeezed(-xi_half, xi_half, pair_basis) * 0.5
        + product_squeezed(i_xi, minus_i_xi, pair_basis) * phase
        - product_squeezed(minus_i_xi, i_xi, pair_basis) * phase
    ).normalized()

    assert fidelity(printed_superposition(spec, pair_basis, representation="b"), printed_form) >= 1 - 1e-10
    evolved_b = to_b_representation(_evolved(spec, pair_basis))
    assert fidelity(printed_form, evolved_b) == pytest.approx(0.8318, abs=1e-3)


@pytest.mark.parametrize("N, M", [(2, 1), (3, 1), (4, 1), (4, 3)])
def test_decompose_round_trips_target(N, M, pair_basis, xi_half):
    spec = RevivalSpec(N=N, M=M, xi=xi_half)
    result = decompose(target_superposition(spec, pair_basis), N, xi_half)
    np.testing.assert_allclose(result.coefficients, gauss_coefficients(N, M), atol=1e-8)
    assert result.residual <= 1e-8


@pytest.mark.parametrize("N, M", [(2, 1), (3, 1), (4, 1), (4, 3)])
def test_decompose_recovers_gauss_coefficients(N, M, pair_basis, xi_half):
    spec = RevivalSpec(N=N, M=M, xi=xi_half)
    result = decompose(_evolved(spec, pair_basis), N, xi_half)
    np.testing.assert_allclose(result.coefficients, gauss_coefficients(N, M), atol=1e-6)
    assert result.residual < 1e-6
    assert np.sum(np.abs(result.coefficients) ** 2) + result.residual ** 2 == pytest.approx(1.0, abs=1e-6)


def test_decompose_single_branch(medium_pair_basis, xi_half):
    state = ladder_state(medium_pair_basis, two_mode_squeezed_amplitudes(xi_half.rotated(1j), 40))
    result = decompose(state, 1, xi_half)
    np.testing.assert_allclose(result.coefficients, [1.0, 0.0], atol=1e-8)
    assert result.nonzero() == {0: pytest.approx(1.0)}
    assert result.N == 1


def test_decompose_rejects_off_ladder_state(small_pair_basis, xi_half):
    product = initial_state(xi_half, small_pair_basis, representation="b")
    with pytest.raises(DecompositionError):
        decompose(QuantumState.fock(small_pair_basis, 1, 0), 2, xi_half)
    with pytest.raises(DecompositionError):
        decompose(product, 2, xi_half)


def test_decompose_refuses_ill_conditioned_candidates(medium_pair_basis):
    xi = SqueezingParam(r=0.01)
    state = ladder_state(medium_pair_basis, two_mode_squeezed_amplitudes(xi.rotated(1j), 40))
    with pytest.raises(DecompositionError):
        decompose(state, 4, xi)


def test_printed_coefficient_array():
    np.testing.assert_allclose(np.abs(printed_coefficient_array(4, 1)), [0.5, 0, 0.5, 0, 0.5, 0, 0.5, 0])
    with pytest.raises(ParameterError):
        printed_coefficient_array(3, 1)
    with pytest.raises(ParameterError):
        printed_superposition(RevivalSpec(N=3, M=1, xi=SqueezingParam(r=0.5)), TruncatedFockBasis(mode_count=2, cutoff=8))
