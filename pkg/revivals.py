"""Fractional revivals of the opposite-phase squeezed state.

Under resonant parameters the |n,n) ladder of the B representation picks up
exp[-(i/2) tau n(n-3)]. At tau = 2 pi M / N that phase pattern has period
2N in n, so the evolved state is a finite superposition of the rotated
two-mode squeezed states S2(i exp(i phi_r) xi)|0,0), phi_r = pi r / N.
"""

import cmath
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np
from scipy import linalg

from config import config
from errors import BasisMismatchError, DecompositionError, ParameterError
from fock import QuantumState, TruncatedFockBasis, inner
from hamiltonians import EffectiveParams
from states import (
    SqueezingParam,
    to_b_representation,
    two_mode_squeezed_amplitudes,
    two_mode_squeezed_vacuum,
)

logger = logging.getLogger(__name__)

CONVENTIONS = ("derived", "paper-literal")

# Coefficient tables quoted alongside the worked two- and four-branch examples
PRINTED_COEFFICIENTS: Dict[Tuple[int, int], Dict[int, complex]] = {
    (2, 1): {
        1: cmath.exp(1j * math.pi / 4) / math.sqrt(2),
        3: cmath.exp(-1j * math.pi / 4) / math.sqrt(2),
    },
    (4, 1): {
        0: 0.5,
        4: 0.5,
        2: 0.5 * cmath.exp(1j * math.pi / 4),
        6: -0.5 * cmath.exp(1j * math.pi / 4),
    },
}


@dataclass(frozen=True)
class RevivalSpec:
    """Revival target at tau = 2 pi M / N"""

    N: int
    M: int
    xi: SqueezingParam

    def __post_init__(self):
        if self.N < 1 or self.M < 1:
            raise ParameterError(f"N and M must be positive, got N={self.N}, M={self.M}")
        if math.gcd(self.N, self.M) != 1:
            raise ParameterError(f"N={self.N} and M={self.M} must be coprime")
        if self.tau > 2.0 * math.pi:
            raise ParameterError(f"tau = 2 pi M/N must not exceed 2 pi, got M/N = {self.M}/{self.N}")

    @property
    def tau(self) -> float:
        return 2.0 * math.pi * self.M / self.N

    @property
    def phases(self) -> np.ndarray:
        return running_phases(self.N)


@dataclass(frozen=True, eq=False)
class DecompositionResult:
    """Least-residual coefficients on the 2N rotated squeezed states"""

    phases: np.ndarray
    coefficients: np.ndarray
    residual: float
    condition: float = field(default=float('nan'))

    @property
    def N(self) -> int:
        return len(self.phases) // 2

    def nonzero(self, tolerance: float = 1e-8) -> Dict[int, complex]:
        return {r: complex(c) for r, c in enumerate(self.coefficients) if abs(c) > tolerance}


def running_phases(N: int) -> np.ndarray:
    return math.pi * np.arange(2 * N) / N


def resonant_params(q: float, convention: str = "derived") -> EffectiveParams:
    """Parameters turning the ladder phase into exp[-(i/2) tau n(n-3)], tau = 7 q t

    ``derived`` solves (q + chi - 2g) = 3 (3q + chi) with chi = q/2, giving
    g = -9q/2. ``paper-literal`` keeps 4g = -19q, which leaves the
    coefficient ratio at 22/7 instead of 3.
    """
    if q == 0 or not math.isfinite(q):
        raise ParameterError(f"resonant parameters need a finite non-zero q, got {q}")
    if convention not in CONVENTIONS:
        raise ParameterError(f"unknown resonance convention {convention!r}, expected one of {CONVENTIONS}")

    chi = 0.5 * q
    g = -(4.0 * q + chi) if convention == "derived" else -19.0 * q / 4.0
    return EffectiveParams(g=g, q=q, chi=chi)


def coefficient_ratio(p: EffectiveParams) -> float:
    """(q + chi - 2g) / (3q + chi); equal to 3 exactly on resonance"""
    return (p.q + p.chi - 2.0 * p.g) / (3.0 * p.q + p.chi)


def gauss_coefficients(N: int, M: int) -> np.ndarray:
    """c_r = (1/2N) sum_n exp{-(pi i / N)[n r + M n(n-3)]}, r = 0..2N-1

    These satisfy sum_r c_r exp(i n phi_r) = exp[-i pi (M/N) n(n-3)] for
    every n, which is the evolved ladder phase at tau = 2 pi M / N.
    """
    if N < 1 or M < 1:
        raise ParameterError(f"N and M must be positive, got N={N}, M={M}")
    if math.gcd(N, M) != 1:
        raise ParameterError(f"N={N} and M={M} must be coprime")

    n = np.arange(2 * N)
    r = n[:, None]
    # n(n-3) is reduced modulo 2N before scaling so the phases stay exact
    kerr = (M * n * (n - 3)) % (2 * N)
    exponents = (n[None, :] * r + kerr[None, :]) % (2 * N)
    return np.exp(-1j * math.pi * exponents / N).sum(axis=1) / (2 * N)


def _candidate_amplitudes(xi: SqueezingParam, phase: float, cutoff: int) -> np.ndarray:
    return two_mode_squeezed_amplitudes(xi.rotated(1j).rotated(cmath.exp(1j * phase)), cutoff)


def _superposition(coefficients: Dict[int, complex], N: int, xi: SqueezingParam,
                   basis: TruncatedFockBasis, representation: str,
                   tail_tolerance: Optional[float]) -> QuantumState:
    if representation not in ("B", "b"):
        raise ParameterError(f"representation must be 'B' or 'b', got {representation!r}")
    phases = running_phases(N)
    total = np.zeros(basis.dimension, dtype=np.complex128)
    for r, c in coefficients.items():
        if c == 0:
            continue
        candidate = two_mode_squeezed_vacuum(
            xi.rotated(1j).rotated(cmath.exp(1j * phases[r])), basis, tail_tolerance
        )
        total = total + c * candidate.amplitudes
    state = QuantumState(basis, total).normalized()
    return to_b_representation(state) if representation == "b" else state


def target_superposition(spec: RevivalSpec, basis: TruncatedFockBasis, representation: str = "B",
                         tail_tolerance: Optional[float] = None) -> QuantumState:
    """sum_r c_r S2(i exp(i phi_r) xi)|0,0), normalized"""
    coefficients = dict(enumerate(gauss_coefficients(spec.N, spec.M)))
    significant = {r: c for r, c in coefficients.items() if abs(c) > 1e-14}
    return _superposition(significant, spec.N, spec.xi, basis, representation, tail_tolerance)


def printed_superposition(spec: RevivalSpec, basis: TruncatedFockBasis, representation: str = "B",
                          tail_tolerance: Optional[float] = None) -> QuantumState:
    """The same construction with the quoted coefficient table"""
    try:
        coefficients = PRINTED_COEFFICIENTS[(spec.N, spec.M)]
    except KeyError:
        raise ParameterError(f"no printed coefficients for N={spec.N}, M={spec.M}") from None
    return _superposition(coefficients, spec.N, spec.xi, basis, representation, tail_tolerance)


def fidelity(psi: QuantumState, phi: QuantumState) -> float:
    """|<psi|phi>|^2, clipped to [0, 1]"""
    return min(1.0, abs(inner(psi, phi)) ** 2)


def decompose(state: QuantumState, N: int, xi: SqueezingParam,
              ladder_tolerance: Optional[float] = None,
              condition_limit: Optional[float] = None) -> DecompositionResult:
    """Fit a B-representation ladder state onto the 2N candidates S2(i exp(i phi_r) xi)|0,0)"""
    basis = state.basis
    if basis.mode_count != 2 or basis.is_sector:
        raise BasisMismatchError(f"decompose needs a full two-mode state, got {basis}")
    if N < 1:
        raise ParameterError(f"N must be positive, got {N}")
    ladder_tolerance = config.ladder_tolerance if ladder_tolerance is None else ladder_tolerance
    condition_limit = config.condition_limit if condition_limit is None else condition_limit

    n = np.arange(basis.cutoff + 1)
    ladder_indices = n * (basis.cutoff + 1) + n
    ladder = state.amplitudes[ladder_indices]
    off_ladder = state.norm ** 2 - float(np.sum(np.abs(ladder) ** 2))
    if off_ladder > ladder_tolerance:
        raise DecompositionError(f"state has weight {off_ladder:.3e} off the |n,n) ladder")

    phases = running_phases(N)
    candidates = np.column_stack([_candidate_amplitudes(xi, phase, basis.cutoff) for phase in phases])

    # Normal equations: the candidates are not orthogonal
    gram = candidates.conj().T @ candidates
    condition = float(np.linalg.cond(gram))
    if not condition <= condition_limit:
        raise DecompositionError(
            f"candidate Gram matrix condition {condition:.3e} exceeds {condition_limit:.1e}; "
            f"squeezing r={xi.r} is too small to separate {2 * N} branches"
        )
    coefficients = linalg.solve(gram, candidates.conj().T @ ladder, assume_a='her')
    residual = float(np.linalg.norm(ladder - candidates @ coefficients))

    logger.debug(f"Decomposed onto {2 * N} candidates, residual {residual:.3e}, condition {condition:.3e}")
    return DecompositionResult(phases=phases, coefficients=coefficients, residual=residual, condition=condition)


def printed_coefficient_array(N: int, M: int) -> np.ndarray:
    """Quoted table as a dense length-2N array"""
    try:
        table = PRINTED_COEFFICIENTS[(N, M)]
    except KeyError:
        raise ParameterError(f"no printed coefficients for N={N}, M={M}") from None
    array = np.zeros(2 * N, dtype=np.complex128)
    for r, c in table.items():
        array[r] = c
    return array
