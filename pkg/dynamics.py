"""Unitary time evolution and validity diagnostics.

Exact propagation works for any Hermitian operator and is blocked by total
number whenever the operator conserves it. The RWA Hamiltonian is diagonal
in the B-Fock basis, so its evolution is a phase per basis state.
"""

import logging
import math
from dataclasses import dataclass
from typing import List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import linalg
from scipy.sparse.linalg import expm_multiply

from config import config
from errors import BasisMismatchError, DimensionLimitError, NotHermitianError, ParameterError
from fock import LinearOperator, QuantumState, TruncatedFockBasis, inner, number_blocks
from hamiltonians import (
    EffectiveParams,
    RamanParams,
    build_effective,
    build_effective_general,
    build_three_mode,
    general_from_raman,
    spectrum,
)
from states import to_B_representation, to_b_representation

logger = logging.getLogger(__name__)

METHODS = ("eigen", "expm", "krylov")


@dataclass(frozen=True)
class EvolutionTime:
    """Evolution time t, optionally paired with the scaled time tau = 7 q t"""

    t: float
    tau: Optional[float] = None
    q: Optional[float] = None

    def __post_init__(self):
        if not math.isfinite(self.t):
            raise ParameterError(f"evolution time must be finite, got {self.t}")
        if self.tau is not None and self.q is not None:
            expected = 7.0 * self.q * self.t
            if abs(self.tau - expected) > 1e-12 * max(1.0, abs(self.tau)):
                raise ParameterError(f"tau={self.tau} is inconsistent with 7*q*t={expected}")

    @classmethod
    def from_tau(cls, tau: float, q: float) -> "EvolutionTime":
        if q == 0:
            raise ParameterError("tau is undefined for q = 0")
        return cls(t=tau / (7.0 * q), tau=tau, q=q)


TimeLike = Union[float, EvolutionTime]


def _seconds(t: TimeLike) -> float:
    return t.t if isinstance(t, EvolutionTime) else float(t)


def _require_hermitian(H: LinearOperator):
    error = H.hermiticity_error()
    if error > config.hermitian_tolerance:
        raise NotHermitianError(f"evolution needs a Hermitian operator, deviation is {error:.3e}")


@dataclass(frozen=True, eq=False)
class Propagator:
    """Eigendecomposition of a Hermitian operator, one block per conserved sector"""

    hamiltonian: LinearOperator
    blocks: Tuple[Tuple[np.ndarray, np.ndarray, np.ndarray], ...]

    @classmethod
    def from_hamiltonian(cls, H: LinearOperator) -> "Propagator":
        _require_hermitian(H)
        index_sets = number_blocks(H)
        if index_sets is None:
            index_sets = [(-1, np.arange(H.basis.dimension))]

        blocks = []
        for _, indices in index_sets:
            if len(indices) > config.max_dense_dimension:
                raise DimensionLimitError(
                    f"block of dimension {len(indices)} exceeds {config.max_dense_dimension}",
                    required=len(indices),
                    limit=config.max_dense_dimension,
                )
            block = H.matrix[indices][:, indices].toarray()
            energies, vectors = linalg.eigh(block)
            blocks.append((indices, energies, vectors))

        logger.debug(f"Diagonalised {len(blocks)} blocks on basis of dimension {H.basis.dimension}")
        return cls(hamiltonian=H, blocks=tuple(blocks))

    @property
    def basis(self) -> TruncatedFockBasis:
        return self.hamiltonian.basis

    def energies(self) -> np.ndarray:
        return np.sort(np.concatenate([energies for _, energies, _ in self.blocks]))

    def evolve(self, state: QuantumState, t: TimeLike) -> QuantumState:
        if state.basis != self.basis:
            raise BasisMismatchError(f"basis mismatch: {state.basis} vs {self.basis}")
        seconds = _seconds(t)
        if seconds == 0.0:
            return state

        amplitudes = np.zeros(self.basis.dimension, dtype=np.complex128)
        for indices, energies, vectors in self.blocks:
            projected = vectors.conj().T @ state.amplitudes[indices]
            amplitudes[indices] = vectors @ (np.exp(-1j * energies * seconds) * projected)
        return QuantumState(self.basis, amplitudes)

    def evolve_many(self, state: QuantumState, times: Sequence[TimeLike]) -> List[QuantumState]:
        return [self.evolve(state, t) for t in times]


def _evolve_expm(H: LinearOperator, state: QuantumState, seconds: float) -> QuantumState:
    index_sets = number_blocks(H) or [(-1, np.arange(H.basis.dimension))]
    amplitudes = np.zeros(H.basis.dimension, dtype=np.complex128)
    for _, indices in index_sets:
        if len(indices) > config.max_dense_dimension:
            raise DimensionLimitError(
                f"block of dimension {len(indices)} exceeds {config.max_dense_dimension}",
                required=len(indices),
                limit=config.max_dense_dimension,
            )
        block = H.matrix[indices][:, indices].toarray()
        amplitudes[indices] = linalg.expm(-1j * seconds * block) @ state.amplitudes[indices]
    return QuantumState(H.basis, amplitudes)


def evolve(H: LinearOperator, psi0: QuantumState, t: TimeLike, method: str = "eigen") -> QuantumState:
    """psi(t) = exp(-i H t) psi0

    ``eigen`` diagonalises each conserved block, ``expm`` uses dense
    scaling-and-squaring per block and ``krylov`` applies the sparse action
    of the exponential directly.
    """
    if method not in METHODS:
        raise ParameterError(f"unknown evolution method {method!r}, expected one of {METHODS}")
    if H.basis != psi0.basis:
        raise BasisMismatchError(f"basis mismatch: {H.basis} vs {psi0.basis}")
    _require_hermitian(H)

    seconds = _seconds(t)
    if seconds == 0.0:
        return psi0

    if method == "eigen":
        return Propagator.from_hamiltonian(H).evolve(psi0, seconds)
    if method == "expm":
        return _evolve_expm(H, psi0, seconds)
    generator = (-1j * seconds) * H.matrix.tocsc()
    return QuantumState(H.basis, expm_multiply(generator, psi0.amplitudes))


def evolve_many(H: LinearOperator, psi0: QuantumState, times: Sequence[TimeLike]) -> List[QuantumState]:
    """Trajectory over a time grid from a single eigendecomposition"""
    if H.basis != psi0.basis:
        raise BasisMismatchError(f"basis mismatch: {H.basis} vs {psi0.basis}")
    return Propagator.from_hamiltonian(H).evolve_many(psi0, times)


def evolve_rwa(p: EffectiveParams, psi0: QuantumState, t: TimeLike) -> QuantumState:
    """Multiply each B-Fock amplitude by exp(-i E(n,m) t)"""
    seconds = _seconds(t)
    if seconds == 0.0:
        return psi0
    phases = np.exp(-1j * spectrum(p, psi0.basis) * seconds)
    return QuantumState(psi0.basis, psi0.amplitudes * phases)


def _fidelity(a: QuantumState, b: QuantumState) -> float:
    return min(1.0, abs(inner(a, b)) ** 2)


def rwa_fidelity(p: EffectiveParams, psi0: QuantumState, t: TimeLike) -> float:
    """Overlap of exact effective evolution with RWA evolution, psi0 in the b representation"""
    exact = evolve(build_effective(p, psi0.basis), psi0, t)
    approximate = to_b_representation(evolve_rwa(p, to_B_representation(psi0), t))
    return _fidelity(exact, approximate)


class AdiabaticReport(NamedTuple):
    fidelity: float
    max_mid_population: float


def _embed(psi0: QuantumState, total_number: int) -> Tuple[TruncatedFockBasis, np.ndarray]:
    """Sector-N three-mode amplitudes with the middle mode empty"""
    sector = TruncatedFockBasis.sector(3, total_number)
    amplitudes = np.zeros(sector.dimension, dtype=np.complex128)
    for index in psi0.basis.sector_indices(total_number):
        n1, n3 = psi0.basis.decode(int(index))
        amplitudes[sector.encode((n1, 0, n3))] = psi0.amplitudes[index]
    return sector, amplitudes


def adiabatic_fidelity(p: RamanParams, psi0: QuantumState, t: TimeLike,
                       max_total: Optional[int] = None) -> AdiabaticReport:
    """Compare three-mode evolution with the eliminated two-mode model.

    psi0 is a two-mode b-representation state. Every complete number sector
    up to ``max_total`` (default: the cutoff) is embedded with level 2 empty
    and evolved under the three-mode Hamiltonian; the middle-level fraction
    <n2>/<N> is sampled on a uniform grid of ``config.trajectory_samples``
    points and its maximum reported.
    """
    if psi0.basis.mode_count != 2 or psi0.basis.is_sector:
        raise BasisMismatchError(f"adiabatic_fidelity needs a full two-mode state, got {psi0.basis}")
    seconds = _seconds(t)
    max_total = psi0.basis.cutoff if max_total is None else min(max_total, psi0.basis.cutoff)

    effective = evolve(build_effective_general(general_from_raman(p), psi0.basis), psi0, seconds)
    grid = np.linspace(0.0, seconds, config.trajectory_samples)

    overlap = 0.0 + 0.0j
    kept_weight = 0.0
    mean_total = 0.0
    mid_population = np.zeros(len(grid))
    totals = psi0.basis.total_numbers()
    for total_number in range(max_total + 1):
        weight = float(psi0.probabilities[totals == total_number].sum())
        if weight == 0.0:
            continue
        kept_weight += weight
        mean_total += total_number * weight

        sector, amplitudes = _embed(psi0, total_number)
        propagator = Propagator.from_hamiltonian(build_three_mode(p, total_number))
        start = QuantumState(sector, amplitudes)
        middle = sector.occupations[:, 1].astype(float)
        for k, sample in enumerate(grid):
            mid_population[k] += float(propagator.evolve(start, sample).probabilities @ middle)

        final = propagator.evolve(start, seconds)
        _, reference = _embed(effective, total_number)
        overlap += np.vdot(reference, final.amplitudes)

    dropped = 1.0 - kept_weight
    if dropped > config.tail_tolerance:
        logger.warning(f"Sectors above N={max_total} hold weight {dropped:.3e} and were not compared")
    if kept_weight == 0.0:
        raise ParameterError(f"psi0 has no weight in sectors N <= {max_total}")

    fidelity = min(1.0, abs(overlap) ** 2 / kept_weight ** 2)
    max_mid = float(mid_population.max() / mean_total) if mean_total > 0 else 0.0
    return AdiabaticReport(fidelity=fidelity, max_mid_population=max_mid)
