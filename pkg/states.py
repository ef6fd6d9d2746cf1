"""Squeezed vacuum states and the (b1, b3) <-> (B1, B3) basis change.

The single-mode squeezer is the quadratic exp[-(xi b^+2 - xi* b^2)/2]; the
two-mode squeezer is exp(-zeta B1^+ B3^+ + zeta* B1 B3). States are built by
exponentiating the truncated generator and applying it to the vacuum; the
closed-form amplitude laws are kept separate (``squeezed_vacuum_amplitudes``,
``two_mode_squeezed_amplitudes``) so the two paths can check each other.

The basis change W maps b-representation amplitude arrays to
B-representation amplitude arrays:

    W b1 W^+ = (b1 - i b3) / sqrt(2),    W b3 W^+ = (b1 + i b3) / sqrt(2)
"""

import cmath
import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple, Optional

import numpy as np
from scipy import linalg, sparse
from scipy.sparse.linalg import expm_multiply

from errors import BasisMismatchError, ParameterError
from fock import (
    LinearOperator,
    QuantumState,
    TruncatedFockBasis,
    apply,
    inner,
    make_ladder,
    number_blocks,
)

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class SqueezingParam:
    """Squeezing argument xi = r exp(i theta)"""

    r: float
    theta: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.r) or not math.isfinite(self.theta):
            raise ParameterError(f"squeezing parameters must be finite, got r={self.r}, theta={self.theta}")
        if self.r < 0:
            raise ParameterError(f"squeezing amplitude must be non-negative, got {self.r}")
        theta = self.theta % TWO_PI
        object.__setattr__(self, 'theta', 0.0 if theta >= TWO_PI else theta)

    @classmethod
    def from_complex(cls, value: complex) -> "SqueezingParam":
        r, theta = cmath.polar(complex(value))
        return cls(r=r, theta=theta)

    @property
    def value(self) -> complex:
        return cmath.rect(self.r, self.theta)

    def rotated(self, phase: complex) -> "SqueezingParam":
        """Parameter multiplied by a unit-modulus factor, e.g. i or -1"""
        return SqueezingParam(r=self.r, theta=self.theta + cmath.phase(phase))

    def __neg__(self) -> "SqueezingParam":
        return SqueezingParam(r=self.r, theta=self.theta + math.pi)


def _require_modes(basis: TruncatedFockBasis, modes: int, what: str):
    if basis.mode_count != modes or basis.is_sector:
        raise BasisMismatchError(f"{what} needs a full {modes}-mode basis, got {basis}")


def squeezed_vacuum(xi: SqueezingParam, basis: TruncatedFockBasis,
                    tail_tolerance: Optional[float] = None) -> QuantumState:
    """Single-mode squeezed vacuum S(xi)|0>"""
    _require_modes(basis, 1, "squeezed_vacuum")
    a, a_dag = make_ladder(basis, 0)
    z = xi.value
    generator = -0.5 * (z * (a_dag @ a_dag).matrix - z.conjugate() * (a @ a).matrix)

    # Scaling and squaring on the truncated matrix
    propagator = linalg.expm(generator.toarray())
    state = QuantumState(basis, propagator[:, 0]).normalized()
    return state.require_tail_below(tail_tolerance, label=f"squeezed vacuum r={xi.r}")


def two_mode_squeezed_vacuum(zeta: SqueezingParam, basis: TruncatedFockBasis,
                             tail_tolerance: Optional[float] = None) -> QuantumState:
    """Two-mode squeezed vacuum S2(zeta)|0,0>"""
    _require_modes(basis, 2, "two_mode_squeezed_vacuum")
    a1, a1_dag = make_ladder(basis, 0)
    a3, a3_dag = make_ladder(basis, 1)
    z = zeta.value
    generator = -z * (a1_dag @ a3_dag).matrix + z.conjugate() * (a1 @ a3).matrix

    vacuum = QuantumState.vacuum(basis)
    state = QuantumState(basis, expm_multiply(generator.tocsc(), vacuum.amplitudes)).normalized()
    return state.require_tail_below(tail_tolerance, label=f"two-mode squeezed vacuum s={zeta.r}")


def product_squeezed(xi1: SqueezingParam, xi3: SqueezingParam, basis: TruncatedFockBasis,
                     tail_tolerance: Optional[float] = None) -> QuantumState:
    """S(xi1) S(xi3)|0,0> in whichever representation the basis is read"""
    _require_modes(basis, 2, "product_squeezed")
    single = TruncatedFockBasis(mode_count=1, cutoff=basis.cutoff)
    first = squeezed_vacuum(xi1, single, tail_tolerance)
    second = squeezed_vacuum(xi3, single, tail_tolerance)
    return QuantumState(basis, np.kron(first.amplitudes, second.amplitudes))


def squeezed_vacuum_amplitudes(xi: SqueezingParam, cutoff: int) -> np.ndarray:
    """Closed-form Fock amplitudes of S(xi)|0> up to the cutoff"""
    amplitudes = np.zeros(cutoff + 1, dtype=np.complex128)
    ratio = -cmath.exp(1j * xi.theta) * math.tanh(xi.r)
    for k in range(cutoff // 2 + 1):
        # sqrt((2k)!) / (2^k k!) evaluated in log space
        log_weight = 0.5 * math.lgamma(2 * k + 1) - k * math.log(2.0) - math.lgamma(k + 1)
        amplitudes[2 * k] = ratio ** k * math.exp(log_weight)
    return amplitudes / math.sqrt(math.cosh(xi.r))


def two_mode_squeezed_amplitudes(zeta: SqueezingParam, cutoff: int) -> np.ndarray:
    """Closed-form |n,n> amplitudes of S2(zeta)|0,0> for n = 0..cutoff"""
    ratio = -cmath.exp(1j * zeta.theta) * math.tanh(zeta.r)
    return ratio ** np.arange(cutoff + 1) / math.cosh(zeta.r)


def ladder_state(basis: TruncatedFockBasis, ladder_amplitudes: np.ndarray) -> QuantumState:
    """State supported on |n,n> with the given amplitudes"""
    _require_modes(basis, 2, "ladder_state")
    vector = np.zeros(basis.dimension, dtype=np.complex128)
    n = np.arange(min(len(ladder_amplitudes), basis.cutoff + 1))
    vector[n * (basis.cutoff + 1) + n] = ladder_amplitudes[:len(n)]
    return QuantumState(basis, vector)


@lru_cache(maxsize=16)
def basis_change(basis: TruncatedFockBasis) -> LinearOperator:
    """Unitary W taking b-representation amplitudes to B-representation amplitudes"""
    _require_modes(basis, 2, "basis_change")
    b1, b1_dag = make_ladder(basis, 0)
    b3, b3_dag = make_ladder(basis, 1)
    hopping = (b1_dag @ b3) + (b1 @ b3_dag)

    # The generator conserves n + m, so exponentiate one number sector at a time
    rows, columns, values = [], [], []
    for _, indices in number_blocks(hopping):
        block = hopping.matrix[indices][:, indices].toarray()
        rotation = linalg.expm(1j * (math.pi / 4.0) * block)
        rows.append(np.repeat(indices, len(indices)))
        columns.append(np.tile(indices, len(indices)))
        values.append(rotation.reshape(-1))
    rotation = sparse.csr_matrix(
        (np.concatenate(values), (np.concatenate(rows), np.concatenate(columns))),
        shape=(basis.dimension, basis.dimension),
    )

    # Quarter-turn on mode 3: exp(-i pi/2 b3^+ b3) sends b3 -> i b3
    phases = np.array([1, -1j, -1, 1j])[basis.occupations[:, 1] % 4]
    matrix = rotation @ sparse.diags(phases, format='csr')

    logger.info(f"Built basis change for cutoff {basis.cutoff} ({basis.dimension} states)")
    return LinearOperator(basis, matrix, unitary=True)


def to_B_representation(state: QuantumState) -> QuantumState:
    return apply(basis_change(state.basis), state)


def to_b_representation(state: QuantumState) -> QuantumState:
    return apply(basis_change(state.basis).dagger(), state)


def initial_state(xi: SqueezingParam, basis: TruncatedFockBasis, kind: str = "opposite_phase",
                  representation: str = "B", tail_tolerance: Optional[float] = None) -> QuantumState:
    """Product squeezed initial states |xi,-xi> (opposite_phase) or |xi,xi> (same_phase)"""
    if kind not in ("opposite_phase", "same_phase"):
        raise ParameterError(f"unknown initial state kind {kind!r}")
    if representation not in ("B", "b"):
        raise ParameterError(f"representation must be 'B' or 'b', got {representation!r}")

    if representation == "b":
        partner = -xi if kind == "opposite_phase" else xi
        return product_squeezed(xi, partner, basis, tail_tolerance)
    if kind == "opposite_phase":
        # |xi,-xi> = S2(i xi)|0,0) in the B representation
        return two_mode_squeezed_vacuum(xi.rotated(1j), basis, tail_tolerance)
    # |xi,xi> = |xi,-xi)
    return product_squeezed(xi, -xi, basis, tail_tolerance)


class RepresentationFidelities(NamedTuple):
    """Overlaps checking the three product/two-mode transformation relations"""

    same_phase: float
    opposite_phase: float
    B_same_phase: float


def check_rep_relations(xi: SqueezingParam, basis: TruncatedFockBasis,
                        tail_tolerance: Optional[float] = None) -> RepresentationFidelities:
    """|xi,xi> = |xi,-xi),  |xi,-xi> = |i xi)_{B1B3},  |xi,xi) = |xi>_{b1b3}"""
    _require_modes(basis, 2, "check_rep_relations")
    w = basis_change(basis)

    plus_plus = product_squeezed(xi, xi, basis, tail_tolerance)
    plus_minus = product_squeezed(xi, -xi, basis, tail_tolerance)

    f1 = abs(inner(apply(w, plus_plus), plus_minus)) ** 2
    f2 = abs(inner(apply(w, plus_minus), two_mode_squeezed_vacuum(xi.rotated(1j), basis, tail_tolerance))) ** 2
    f3 = abs(inner(apply(w.dagger(), plus_plus), two_mode_squeezed_vacuum(xi, basis, tail_tolerance))) ** 2
    return RepresentationFidelities(*(min(1.0, f) for f in (f1, f2, f3)))
