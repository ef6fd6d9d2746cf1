"""Truncated bosonic Fock-space foundation.

Bases index occupation tuples with mode 1 as the major (slowest varying)
index; every module shares that ordering. A basis is either full, with
(cutoff + 1) ** mode_count states, or a fixed-total-number sector holding
every tuple whose occupations sum to ``total_number``.

States and operators are immutable once built and never resized: an
operator is always tied to the basis it was declared on.
"""

import itertools
import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import sparse

from config import config
from errors import BasisMismatchError, DimensionLimitError, NotHermitianError, ParameterError, TruncationError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TruncatedFockBasis:
    """Index scheme for 1-, 2- and 3-mode number states"""

    mode_count: int
    cutoff: int
    total_number: Optional[int] = None

    def __post_init__(self):
        if self.mode_count not in (1, 2, 3):
            raise ParameterError(f"mode_count must be 1, 2 or 3, got {self.mode_count}")
        if self.cutoff < 0:
            raise ParameterError(f"cutoff must be non-negative, got {self.cutoff}")
        if self.total_number is not None:
            if self.total_number < 0:
                raise ParameterError(f"total_number must be non-negative, got {self.total_number}")
            if self.cutoff < self.total_number:
                raise ParameterError(
                    f"sector N={self.total_number} needs cutoff >= N, got {self.cutoff}"
                )

    @classmethod
    def sector(cls, mode_count: int, total_number: int) -> "TruncatedFockBasis":
        """Fixed-total-number basis; no occupation is ever truncated"""
        return cls(mode_count=mode_count, cutoff=total_number, total_number=total_number)

    @property
    def is_sector(self) -> bool:
        return self.total_number is not None

    @cached_property
    def occupations(self) -> np.ndarray:
        """Occupation tuples, one row per basis index"""
        levels = range(self.cutoff + 1)
        tuples = itertools.product(levels, repeat=self.mode_count)
        if self.is_sector:
            tuples = (occ for occ in tuples if sum(occ) == self.total_number)
        table = np.array(list(tuples), dtype=np.int64).reshape(-1, self.mode_count)
        table.setflags(write=False)
        return table

    @cached_property
    def _index(self) -> Dict[Tuple[int, ...], int]:
        return {tuple(int(n) for n in occ): i for i, occ in enumerate(self.occupations)}

    @property
    def dimension(self) -> int:
        if not self.is_sector:
            return (self.cutoff + 1) ** self.mode_count
        return len(self.occupations)

    def encode(self, occupation: Sequence[int]) -> int:
        """Index of an occupation tuple"""
        key = tuple(int(n) for n in occupation)
        if len(key) != self.mode_count:
            raise BasisMismatchError(f"expected {self.mode_count} occupations, got {len(key)}")
        try:
            return self._index[key]
        except KeyError:
            raise ParameterError(f"occupation {key} is not in {self}") from None

    def decode(self, index: int) -> Tuple[int, ...]:
        """Occupation tuple of an index"""
        if not 0 <= index < self.dimension:
            raise ParameterError(f"index {index} outside basis of dimension {self.dimension}")
        return tuple(int(n) for n in self.occupations[index])

    def total_numbers(self) -> np.ndarray:
        return self.occupations.sum(axis=1)

    def sector_indices(self, total_number: int) -> np.ndarray:
        return np.flatnonzero(self.total_numbers() == total_number)

    def complete_sector_mask(self) -> np.ndarray:
        """True where the state's number sector fits entirely below the cutoff"""
        if self.is_sector:
            return np.ones(self.dimension, dtype=bool)
        return self.total_numbers() <= self.cutoff

    def top_level_mask(self) -> np.ndarray:
        """True where any mode sits in one of its top two levels"""
        if self.is_sector:
            return np.zeros(self.dimension, dtype=bool)
        return np.any(self.occupations >= self.cutoff - 1, axis=1)


def _require_same_basis(a: TruncatedFockBasis, b: TruncatedFockBasis):
    if a != b:
        raise BasisMismatchError(f"basis mismatch: {a} vs {b}")


@dataclass(frozen=True, eq=False)
class QuantumState:
    """Complex amplitude vector over a basis"""

    basis: TruncatedFockBasis
    amplitudes: np.ndarray

    def __post_init__(self):
        vector = np.array(self.amplitudes, dtype=np.complex128).reshape(-1)
        if vector.shape[0] != self.basis.dimension:
            raise BasisMismatchError(
                f"{vector.shape[0]} amplitudes for basis of dimension {self.basis.dimension}"
            )
        if not np.all(np.isfinite(vector)):
            raise ParameterError("state amplitudes must be finite")
        vector.setflags(write=False)
        object.__setattr__(self, 'amplitudes', vector)

    @classmethod
    def fock(cls, basis: TruncatedFockBasis, *occupation: int) -> "QuantumState":
        """Number state |n_1, ..., n_k>"""
        vector = np.zeros(basis.dimension, dtype=np.complex128)
        vector[basis.encode(occupation)] = 1.0
        return cls(basis, vector)

    @classmethod
    def vacuum(cls, basis: TruncatedFockBasis) -> "QuantumState":
        return cls.fock(basis, *([0] * basis.mode_count))

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def is_normalized(self, tolerance: Optional[float] = None) -> bool:
        tolerance = config.normalization_tolerance if tolerance is None else tolerance
        return abs(self.norm - 1.0) <= tolerance

    def normalized(self) -> "QuantumState":
        norm = self.norm
        if norm == 0.0:
            raise ParameterError("cannot normalize the zero vector")
        return QuantumState(self.basis, self.amplitudes / norm)

    def amplitude(self, *occupation: int) -> complex:
        return complex(self.amplitudes[self.basis.encode(occupation)])

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    @property
    def tail_weight(self) -> float:
        """Squared weight on any mode's top two levels"""
        return float(self.probabilities[self.basis.top_level_mask()].sum())

    def require_tail_below(self, tolerance: Optional[float] = None, label: str = "state") -> "QuantumState":
        """Raise TruncationError when the top-level weight exceeds the tolerance"""
        tolerance = config.tail_tolerance if tolerance is None else tolerance
        weight = self.tail_weight
        if weight > tolerance:
            logger.warning(f"{label} has tail weight {weight:.3e} at cutoff {self.basis.cutoff}")
            raise TruncationError(
                f"{label}: tail weight {weight:.3e} exceeds {tolerance:.1e} at cutoff {self.basis.cutoff}",
                tail_weight=weight,
                cutoff=self.basis.cutoff,
            )
        return self

    def __add__(self, other: "QuantumState") -> "QuantumState":
        _require_same_basis(self.basis, other.basis)
        return QuantumState(self.basis, self.amplitudes + other.amplitudes)

    def __sub__(self, other: "QuantumState") -> "QuantumState":
        _require_same_basis(self.basis, other.basis)
        return QuantumState(self.basis, self.amplitudes - other.amplitudes)

    def __mul__(self, scalar: complex) -> "QuantumState":
        return QuantumState(self.basis, self.amplitudes * scalar)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class LinearOperator:
    """Sparse complex matrix over a basis, with checked Hermitian/unitary flags"""

    basis: TruncatedFockBasis
    matrix: sparse.csr_matrix
    hermitian: bool = False
    unitary: bool = False

    def __post_init__(self):
        matrix = sparse.csr_matrix(self.matrix, dtype=np.complex128, copy=True)
        dim = self.basis.dimension
        if matrix.shape != (dim, dim):
            raise BasisMismatchError(f"matrix shape {matrix.shape} for basis of dimension {dim}")
        matrix.eliminate_zeros()
        matrix.sort_indices()
        object.__setattr__(self, 'matrix', matrix)

        if self.hermitian:
            error = self.hermiticity_error()
            if error > config.hermitian_tolerance:
                raise NotHermitianError(f"operator flagged Hermitian deviates by {error:.3e}")
        if self.unitary:
            error = self.unitarity_error()
            if error > config.unitary_tolerance:
                raise ParameterError(f"operator flagged unitary deviates by {error:.3e}")

    @classmethod
    def identity(cls, basis: TruncatedFockBasis) -> "LinearOperator":
        return cls(basis, sparse.identity(basis.dimension, dtype=np.complex128, format='csr'),
                   hermitian=True, unitary=True)

    @classmethod
    def zero(cls, basis: TruncatedFockBasis) -> "LinearOperator":
        return cls(basis, sparse.csr_matrix((basis.dimension, basis.dimension), dtype=np.complex128),
                   hermitian=True)

    @classmethod
    def diagonal(cls, basis: TruncatedFockBasis, values: np.ndarray) -> "LinearOperator":
        values = np.asarray(values)
        return cls(basis, sparse.diags(values.astype(np.complex128), format='csr'),
                   hermitian=bool(np.all(np.isreal(values))))

    def hermiticity_error(self) -> float:
        return _max_abs(self.matrix - self.matrix.conj().T)

    def unitarity_error(self) -> float:
        product = self.matrix.conj().T @ self.matrix
        return _max_abs(product - sparse.identity(self.basis.dimension, format='csr'))

    def dagger(self) -> "LinearOperator":
        return LinearOperator(self.basis, self.matrix.conj().T, hermitian=self.hermitian, unitary=self.unitary)

    def to_dense(self) -> np.ndarray:
        if self.basis.dimension > config.max_dense_dimension:
            raise DimensionLimitError(
                f"dense form of dimension {self.basis.dimension} exceeds {config.max_dense_dimension}; "
                f"use number-sector blocks",
                required=self.basis.dimension,
                limit=config.max_dense_dimension,
            )
        return self.matrix.toarray()

    def diagonal_values(self) -> np.ndarray:
        return self.matrix.diagonal()

    def max_abs(self) -> float:
        return _max_abs(self.matrix)

    def commutator(self, other: "LinearOperator") -> "LinearOperator":
        _require_same_basis(self.basis, other.basis)
        return LinearOperator(self.basis, self.matrix @ other.matrix - other.matrix @ self.matrix)

    def __matmul__(self, other: Union["LinearOperator", QuantumState]):
        if isinstance(other, QuantumState):
            return apply(self, other)
        _require_same_basis(self.basis, other.basis)
        return LinearOperator(self.basis, self.matrix @ other.matrix)

    def __add__(self, other: "LinearOperator") -> "LinearOperator":
        _require_same_basis(self.basis, other.basis)
        return LinearOperator(self.basis, self.matrix + other.matrix)

    def __sub__(self, other: "LinearOperator") -> "LinearOperator":
        _require_same_basis(self.basis, other.basis)
        return LinearOperator(self.basis, self.matrix - other.matrix)

    def __mul__(self, scalar: complex) -> "LinearOperator":
        return LinearOperator(self.basis, self.matrix * scalar)

    __rmul__ = __mul__


def _max_abs(matrix) -> float:
    if sparse.issparse(matrix):
        matrix = sparse.csr_matrix(matrix)
        return float(np.abs(matrix.data).max()) if matrix.nnz else 0.0
    return float(np.abs(matrix).max()) if np.size(matrix) else 0.0


@dataclass(frozen=True, eq=False)
class SectorDecomposition:
    """Components of a state in each total-number sector"""

    parent: QuantumState
    sectors: Tuple[Tuple[int, QuantumState], ...] = field(default_factory=tuple)

    def weights(self) -> Dict[int, float]:
        return {n: component.norm ** 2 for n, component in self.sectors}

    def reassemble(self) -> QuantumState:
        total = np.zeros(self.parent.basis.dimension, dtype=np.complex128)
        for _, component in self.sectors:
            total = total + component.amplitudes
        return QuantumState(self.parent.basis, total)


def _require_full(basis: TruncatedFockBasis, what: str):
    if basis.is_sector:
        raise BasisMismatchError(f"{what} needs a full basis, got sector basis {basis}")


def make_ladder(basis: TruncatedFockBasis, mode: int) -> Tuple[LinearOperator, LinearOperator]:
    """Annihilator and creator acting on one mode, identity on the others"""
    _require_full(basis, "make_ladder")
    if not 0 <= mode < basis.mode_count:
        raise ParameterError(f"mode {mode} out of range for {basis.mode_count}-mode basis")

    occupations = basis.occupations[:, mode]
    stride = (basis.cutoff + 1) ** (basis.mode_count - 1 - mode)
    columns = np.flatnonzero(occupations > 0)
    rows = columns - stride
    values = np.sqrt(occupations[columns]).astype(np.complex128)

    matrix = sparse.csr_matrix((values, (rows, columns)), shape=(basis.dimension, basis.dimension))
    annihilator = LinearOperator(basis, matrix)
    return annihilator, annihilator.dagger()


def number_operator(basis: TruncatedFockBasis, mode: int) -> LinearOperator:
    if not 0 <= mode < basis.mode_count:
        raise ParameterError(f"mode {mode} out of range for {basis.mode_count}-mode basis")
    return LinearOperator.diagonal(basis, basis.occupations[:, mode].astype(float))


def total_number_operator(basis: TruncatedFockBasis) -> LinearOperator:
    return LinearOperator.diagonal(basis, basis.total_numbers().astype(float))


def tensor(op_a: LinearOperator, op_b: LinearOperator) -> LinearOperator:
    """Kronecker product with the first operand's modes major"""
    _require_full(op_a.basis, "tensor")
    _require_full(op_b.basis, "tensor")
    if op_a.basis.cutoff != op_b.basis.cutoff:
        raise BasisMismatchError(
            f"cutoff mismatch: {op_a.basis.cutoff} vs {op_b.basis.cutoff}"
        )
    modes = op_a.basis.mode_count + op_b.basis.mode_count
    if modes > 3:
        raise BasisMismatchError(f"tensor product would have {modes} modes")

    basis = TruncatedFockBasis(mode_count=modes, cutoff=op_a.basis.cutoff)
    return LinearOperator(
        basis,
        sparse.kron(op_a.matrix, op_b.matrix, format='csr'),
        hermitian=op_a.hermitian and op_b.hermitian,
        unitary=op_a.unitary and op_b.unitary,
    )


def apply(op: LinearOperator, state: QuantumState) -> QuantumState:
    _require_same_basis(op.basis, state.basis)
    return QuantumState(state.basis, op.matrix @ state.amplitudes)


def inner(a: QuantumState, b: QuantumState) -> complex:
    """<a|b>, conjugate-linear in the first argument"""
    _require_same_basis(a.basis, b.basis)
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def expectation(op: LinearOperator, state: QuantumState) -> float:
    value = inner(state, apply(op, state))
    return value.real if op.hermitian else value


def mode_populations(state: QuantumState) -> np.ndarray:
    """Mean occupation of every mode"""
    return state.probabilities @ state.basis.occupations


def sector_split(state: QuantumState) -> SectorDecomposition:
    """Split a state into its total-number components"""
    totals = state.basis.total_numbers()
    sectors: List[Tuple[int, QuantumState]] = []
    for total_number in np.unique(totals):
        mask = totals == total_number
        if not np.any(state.amplitudes[mask] != 0):
            continue
        component = np.where(mask, state.amplitudes, 0.0)
        sectors.append((int(total_number), QuantumState(state.basis, component)))
    return SectorDecomposition(parent=state, sectors=tuple(sectors))


def number_blocks(op: LinearOperator) -> Optional[List[Tuple[int, np.ndarray]]]:
    """Sector index sets when the operator conserves total number, else None"""
    totals = op.basis.total_numbers()
    coo = op.matrix.tocoo()
    if np.any(totals[coo.row] != totals[coo.col]):
        return None
    return [(int(n), np.flatnonzero(totals == n)) for n in np.unique(totals)]
