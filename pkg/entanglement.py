"""Bipartite entanglement of pure two-mode states"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import linalg

from config import config
from errors import BasisMismatchError, ParameterError
from fock import QuantumState, TruncatedFockBasis

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Single-mode density matrix, validated on construction"""

    basis: TruncatedFockBasis
    entries: np.ndarray

    def __post_init__(self):
        if self.basis.mode_count != 1 or self.basis.is_sector:
            raise BasisMismatchError(f"density matrix needs a full single-mode basis, got {self.basis}")
        entries = np.array(self.entries, dtype=np.complex128)
        dim = self.basis.dimension
        if entries.shape != (dim, dim):
            raise BasisMismatchError(f"entries of shape {entries.shape} for basis of dimension {dim}")

        hermiticity = float(np.abs(entries - entries.conj().T).max())
        if hermiticity > config.hermitian_tolerance:
            raise ParameterError(f"density matrix is not Hermitian (deviation {hermiticity:.3e})")
        trace = complex(np.trace(entries))
        if abs(trace - 1.0) > config.trace_tolerance:
            raise ParameterError(f"density matrix trace is {trace}, expected 1")
        if self.eigenvalues_of(entries).min() < -config.eigenvalue_clamp:
            raise ParameterError("density matrix has a negative eigenvalue beyond the clamp")

        entries.setflags(write=False)
        object.__setattr__(self, 'entries', entries)

    @staticmethod
    def eigenvalues_of(entries: np.ndarray) -> np.ndarray:
        return linalg.eigvalsh(entries)

    def eigenvalues(self) -> np.ndarray:
        return self.eigenvalues_of(self.entries)

    @property
    def populations(self) -> np.ndarray:
        return self.entries.diagonal().real


def reduced_density(state: QuantumState, keep: int, tolerance: Optional[float] = None) -> DensityMatrix:
    """Trace out the other mode of a normalized two-mode state; keep is 0 or 1"""
    basis = state.basis
    if basis.mode_count != 2 or basis.is_sector:
        raise BasisMismatchError(f"reduced_density needs a full two-mode state, got {basis}")
    if keep not in (0, 1):
        raise ParameterError(f"keep must be 0 or 1, got {keep}")
    tolerance = config.ladder_tolerance if tolerance is None else tolerance
    if abs(state.norm - 1.0) > tolerance:
        raise ParameterError(f"reduced_density needs a normalized state, norm is {state.norm}")

    levels = basis.cutoff + 1
    # Row index is mode 1, column index mode 3
    matrix = state.amplitudes.reshape(levels, levels)
    if keep == 1:
        matrix = matrix.T
    rho = matrix @ matrix.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    return DensityMatrix(TruncatedFockBasis(mode_count=1, cutoff=basis.cutoff), rho / np.trace(rho).real)


def entropy(rho: DensityMatrix) -> float:
    """Von Neumann entropy in nats"""
    p = rho.eigenvalues()
    if p.min() < 0:
        logger.debug(f"Clipping eigenvalue {p.min():.3e} to zero")
    # Negative round-off down to -clamp is zero weight
    p = np.clip(p, 0.0, None)
    nonzero = p[p > 0]
    return float(-np.sum(nonzero * np.log(nonzero)))


def purity(rho: DensityMatrix) -> float:
    return float(np.real(np.sum(rho.entries * rho.entries.T)))


def entanglement_entropy(state: QuantumState) -> float:
    """Entropy of the mode-1 reduction of a pure two-mode state"""
    return entropy(reduced_density(state, keep=0))


def two_mode_squeezed_entropy(s: float) -> float:
    """cosh^2 s ln cosh^2 s - sinh^2 s ln sinh^2 s"""
    if s == 0:
        return 0.0
    c2, s2 = np.cosh(s) ** 2, np.sinh(s) ** 2
    return float(c2 * np.log(c2) - s2 * np.log(s2))
