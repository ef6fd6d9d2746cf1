"""Raman-coupled three-level Hamiltonians and their two-mode reductions.

All energies are in hbar = 1 units. Three-mode work happens in fixed
total-number sectors; two-mode operators live on a full truncated basis in
either the b (atomic level) or B (rotated) representation.
"""

import logging
import math
from dataclasses import dataclass
from typing import List

import numpy as np
from scipy import sparse

from config import config
from errors import BasisMismatchError, DimensionLimitError, ParameterError
from fock import LinearOperator, TruncatedFockBasis, make_ladder, number_operator
from states import basis_change

logger = logging.getLogger(__name__)


def _require_finite(**values):
    for name, value in values.items():
        if not np.isfinite(value):
            raise ParameterError(f"{name} must be finite, got {value}")


@dataclass(frozen=True)
class RamanParams:
    """Couplings, detunings and collision strengths of the three-level model"""

    g1: complex
    g2: complex
    delta1: float
    delta2: float
    lambda1: float = 0.0
    lambda2: float = 0.0
    lambda3: float = 0.0
    lambda12: float = 0.0
    lambda13: float = 0.0
    lambda23: float = 0.0

    def __post_init__(self):
        _require_finite(g1=self.g1, g2=self.g2, delta1=self.delta1, delta2=self.delta2,
                        lambda1=self.lambda1, lambda2=self.lambda2, lambda3=self.lambda3,
                        lambda12=self.lambda12, lambda13=self.lambda13, lambda23=self.lambda23)

    @property
    def is_two_photon_resonant(self) -> bool:
        return math.isclose(self.delta1, self.delta2, rel_tol=1e-12, abs_tol=0.0)


@dataclass(frozen=True)
class EffectiveParams:
    """Symmetric two-mode parameters: tunnelling g, self-interaction q, cross-interaction chi"""

    g: float
    q: float
    chi: float

    def __post_init__(self):
        _require_finite(g=self.g, q=self.q, chi=self.chi)

    @property
    def omega(self) -> float:
        return self.g - 0.5 * (self.chi + self.q)


@dataclass(frozen=True)
class GeneralEffectiveParams:
    """Asymmetric two-mode parameters after adiabatic elimination"""

    omega1: float
    omega3: float
    g: complex
    lambda1: float = 0.0
    lambda3: float = 0.0
    lambda13: float = 0.0

    def __post_init__(self):
        _require_finite(omega1=self.omega1, omega3=self.omega3, g=self.g,
                        lambda1=self.lambda1, lambda3=self.lambda3, lambda13=self.lambda13)

    @classmethod
    def symmetric(cls, p: EffectiveParams) -> "GeneralEffectiveParams":
        return cls(omega1=p.g, omega3=p.g, g=p.g, lambda1=p.q, lambda3=p.q, lambda13=2.0 * p.chi)


def _resonant_detuning(p: RamanParams) -> float:
    if not p.is_two_photon_resonant:
        raise ParameterError(f"adiabatic elimination needs delta1 == delta2, got {p.delta1} and {p.delta2}")
    if p.delta1 == 0:
        raise ParameterError("adiabatic elimination needs a non-zero detuning")
    return p.delta1


def general_from_raman(p: RamanParams) -> GeneralEffectiveParams:
    """Eliminate the middle level without assuming symmetric couplings"""
    delta = _resonant_detuning(p)
    return GeneralEffectiveParams(
        omega1=-abs(p.g1) ** 2 / delta,
        omega3=-abs(p.g2) ** 2 / delta,
        g=-p.g1 * np.conj(p.g2) / delta,
        lambda1=p.lambda1,
        lambda3=p.lambda3,
        lambda13=p.lambda13,
    )


def effective_from_raman(p: RamanParams) -> EffectiveParams:
    """Symmetric reduction: g = -|g1|^2/delta, q = lambda1, chi = lambda13/2"""
    delta = _resonant_detuning(p)
    if not math.isclose(abs(p.g1), abs(p.g2), rel_tol=1e-12, abs_tol=1e-15):
        raise ParameterError(f"symmetric reduction needs |g1| == |g2|, got {abs(p.g1)} and {abs(p.g2)}")
    if not math.isclose(p.lambda1, p.lambda3, rel_tol=1e-12, abs_tol=1e-15):
        raise ParameterError(f"symmetric reduction needs lambda1 == lambda3, got {p.lambda1} and {p.lambda3}")
    if abs(p.g1) > 0 and not np.isclose(p.g1, p.g2):
        logger.warning("g1 and g2 differ by a phase; it is absorbed into the phase of mode 3")

    return EffectiveParams(g=-abs(p.g1) ** 2 / delta, q=p.lambda1, chi=0.5 * p.lambda13)


def _require_two_mode(basis: TruncatedFockBasis):
    if basis.mode_count != 2 or basis.is_sector:
        raise BasisMismatchError(f"two-mode Hamiltonians need a full 2-mode basis, got {basis}")


def build_effective_general(p: GeneralEffectiveParams, basis: TruncatedFockBasis) -> LinearOperator:
    """w1 n1 + w3 n3 + g b3^+ b1 + g* b1^+ b3 + l1 n1(n1-1) + l13 n1 n3 + l3 n3(n3-1)"""
    _require_two_mode(basis)
    n1 = basis.occupations[:, 0].astype(float)
    n3 = basis.occupations[:, 1].astype(float)
    diagonal = (
        p.omega1 * n1 + p.omega3 * n3
        + p.lambda1 * n1 * (n1 - 1) + p.lambda3 * n3 * (n3 - 1)
        + p.lambda13 * n1 * n3
    )

    b1, b1_dag = make_ladder(basis, 0)
    b3, b3_dag = make_ladder(basis, 1)
    tunnelling = p.g * (b3_dag @ b1).matrix + np.conj(p.g) * (b1_dag @ b3).matrix

    matrix = sparse.diags(diagonal.astype(np.complex128), format='csr') + tunnelling
    return LinearOperator(basis, matrix, hermitian=True)


def build_effective(p: EffectiveParams, basis: TruncatedFockBasis) -> LinearOperator:
    """Symmetric effective two-mode Hamiltonian in the b representation"""
    return build_effective_general(GeneralEffectiveParams.symmetric(p), basis)


def build_rwa(p: EffectiveParams, basis: TruncatedFockBasis) -> LinearOperator:
    """Rotating-wave Hamiltonian, diagonal in the B-Fock basis"""
    _require_two_mode(basis)
    n1 = number_operator(basis, 0)
    n3 = number_operator(basis, 1)
    total = n1 + n3
    imbalance = n1 - n3

    hamiltonian = (
        p.omega * total
        + p.g * imbalance
        + (0.25 * p.q) * (3.0 * (total @ total) - imbalance @ imbalance)
        + (0.5 * p.chi) * (total @ total)
        - p.chi * (n1 @ n3)
    )
    return LinearOperator(basis, hamiltonian.matrix, hermitian=True)


def eigenvalue(n: int, m: int, p: EffectiveParams) -> float:
    """E(n,m) = w(n+m) + g(n-m) + (q+chi)(n+m)^2/2 + (q-chi)nm"""
    if n < 0 or m < 0:
        raise ParameterError(f"Fock indices must be non-negative, got ({n}, {m})")
    total = n + m
    return p.omega * total + p.g * (n - m) + 0.5 * (p.q + p.chi) * total ** 2 + (p.q - p.chi) * n * m


def spectrum(p: EffectiveParams, basis: TruncatedFockBasis) -> np.ndarray:
    """Closed-form E(n,m) for every state of a two-mode basis"""
    _require_two_mode(basis)
    n = basis.occupations[:, 0].astype(float)
    m = basis.occupations[:, 1].astype(float)
    total = n + m
    return p.omega * total + p.g * (n - m) + 0.5 * (p.q + p.chi) * total ** 2 + (p.q - p.chi) * n * m


def rwa_residual(p: EffectiveParams, basis: TruncatedFockBasis) -> LinearOperator:
    """Terms dropped by the rotating-wave approximation, in the B-Fock basis"""
    w = basis_change(basis)
    rotated = w @ build_effective(p, basis) @ w.dagger()
    return rotated - build_rwa(p, basis)


def sector_dimension(mode_count: int, total_number: int) -> int:
    """Number of occupation tuples of given total over the modes"""
    return math.comb(total_number + mode_count - 1, mode_count - 1)


def three_mode_hamiltonian(p: RamanParams, basis: TruncatedFockBasis) -> LinearOperator:
    """Interaction-picture Hamiltonian of the three-level model on any 3-mode basis"""
    if basis.mode_count != 3:
        raise BasisMismatchError(f"three-mode Hamiltonian needs a 3-mode basis, got {basis}")

    occupations = basis.occupations
    n1, n2, n3 = (occupations[:, k].astype(float) for k in range(3))

    # Cross collisions are counted once per unordered pair
    diagonal = (
        (p.delta1 - p.delta2) * n3 + p.delta1 * n2
        + p.lambda1 * n1 * (n1 - 1) + p.lambda2 * n2 * (n2 - 1) + p.lambda3 * n3 * (n3 - 1)
        + p.lambda12 * n1 * n2 + p.lambda13 * n1 * n3 + p.lambda23 * n2 * n3
    )

    rows: List[int] = []
    columns: List[int] = []
    values: List[complex] = []
    for column, (k1, k2, k3) in enumerate(occupations):
        # -g1 b2^+ b1 and -g2 b2^+ b3
        for source, coupling, target in (
            (k1, p.g1, (k1 - 1, k2 + 1, k3)),
            (k3, p.g2, (k1, k2 + 1, k3 - 1)),
        ):
            if source == 0 or k2 + 1 > basis.cutoff:
                continue
            row = basis.encode(target)
            amplitude = -coupling * math.sqrt(source * (k2 + 1))
            rows += [row, column]
            columns += [column, row]
            values += [amplitude, np.conj(amplitude)]

    hopping = sparse.csr_matrix(
        (np.array(values, dtype=np.complex128), (rows, columns)),
        shape=(basis.dimension, basis.dimension),
    )
    matrix = sparse.diags(diagonal.astype(np.complex128), format='csr') + hopping
    return LinearOperator(basis, matrix, hermitian=True)


def build_three_mode(p: RamanParams, sector_N: int) -> LinearOperator:
    """Three-mode Hamiltonian restricted to total number sector_N"""
    if sector_N < 0:
        raise ParameterError(f"sector_N must be non-negative, got {sector_N}")
    required = sector_dimension(3, sector_N)
    if required > config.max_sector_dimension:
        raise DimensionLimitError(
            f"three-mode sector N={sector_N} has {required} states, limit is {config.max_sector_dimension}",
            required=required,
            limit=config.max_sector_dimension,
        )
    basis = TruncatedFockBasis.sector(3, sector_N)
    logger.debug(f"Building three-mode sector N={sector_N} ({required} states)")
    return three_mode_hamiltonian(p, basis)
