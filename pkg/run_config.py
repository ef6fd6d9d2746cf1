"""Run documents: the JSON configuration accepted by the command line.

Every block forbids unknown keys. ``parse_config`` raises pydantic's
``ValidationError``, which lists each violated constraint with its path.
"""

import cmath
import logging
import math
from decimal import Decimal
from typing import Any, Dict, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from errors import ParameterError
from hamiltonians import EffectiveParams, RamanParams
from revivals import RevivalSpec
from states import SqueezingParam

logger = logging.getLogger(__name__)

EXPERIMENTS = ("spectrum", "evolve", "revival", "adiabatic", "validity")

ExperimentKind = Literal["spectrum", "evolve", "revival", "adiabatic", "validity"]


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid", allow_inf_nan=False, frozen=True)


def _sorted_grid(values: Optional[List[float]]) -> Optional[List[float]]:
    if values is None:
        return values
    if not values:
        raise ValueError("grid must not be empty")
    if any(b < a for a, b in zip(values, values[1:])):
        raise ValueError("grid must be sorted in ascending order")
    return values


class EffectiveParamsModel(StrictModel):
    """Symmetric two-mode parameters {g, q, chi}"""

    g: float
    q: float = 0.0
    chi: float = 0.0

    def to_params(self) -> EffectiveParams:
        return EffectiveParams(g=self.g, q=self.q, chi=self.chi)


class RamanParamsModel(StrictModel):
    """Three-level parameters; couplings are given as modulus and phase"""

    g1: float
    g2: float
    g1_phase: float = 0.0
    g2_phase: float = 0.0
    delta: Optional[float] = None
    delta2: Optional[float] = None
    lambda11: float = 0.0
    lambda22: float = 0.0
    lambda33: float = 0.0
    lambda12: float = 0.0
    lambda13: float = 0.0
    lambda23: float = 0.0

    def to_params(self, delta: Optional[float] = None) -> RamanParams:
        delta1 = self.delta if delta is None else delta
        if delta1 is None:
            raise ParameterError("a detuning is required")
        delta2 = delta1 if delta is not None or self.delta2 is None else self.delta2
        return RamanParams(
            g1=cmath.rect(self.g1, self.g1_phase),
            g2=cmath.rect(self.g2, self.g2_phase),
            delta1=delta1,
            delta2=delta2,
            lambda1=self.lambda11,
            lambda2=self.lambda22,
            lambda3=self.lambda33,
            lambda12=self.lambda12,
            lambda13=self.lambda13,
            lambda23=self.lambda23,
        )


class SqueezingModel(StrictModel):
    r: float = Field(..., ge=0.0)
    theta: float = 0.0

    def to_param(self) -> SqueezingParam:
        return SqueezingParam(r=self.r, theta=self.theta)


class RevivalModel(StrictModel):
    N: int = Field(..., ge=1)
    M: int = Field(..., ge=1)
    convention: Literal["derived", "paper-literal"] = "derived"
    q: float = 0.1

    @field_validator('q')
    @classmethod
    def q_nonzero(cls, value: float) -> float:
        if value == 0:
            raise ValueError("q must be non-zero")
        return value

    @model_validator(mode='after')
    def coprime(self) -> "RevivalModel":
        if math.gcd(self.N, self.M) != 1:
            raise ValueError(f"N={self.N} and M={self.M} must be coprime")
        if self.M > self.N:
            raise ValueError(f"M={self.M} must not exceed N={self.N} (tau in (0, 2 pi])")
        return self

    def to_spec(self, xi: SqueezingParam) -> RevivalSpec:
        return RevivalSpec(N=self.N, M=self.M, xi=xi)


class InitialStateModel(StrictModel):
    kind: Literal["opposite_phase", "same_phase"] = "opposite_phase"


class AdiabaticModel(StrictModel):
    delta_ratios: List[float] = Field(default_factory=lambda: [20.0, 200.0])
    gt: float = Field(1.0, gt=0.0)
    max_total: int = Field(6, ge=0)

    @field_validator('delta_ratios')
    @classmethod
    def positive_sorted(cls, values: List[float]) -> List[float]:
        _sorted_grid(values)
        if any(v <= 0 for v in values):
            raise ValueError("delta ratios must be positive")
        return values


class ValidityParams(StrictModel):
    """Single-mode validity inputs in SI units"""

    scattering_length: float = Field(..., gt=0.0)
    trap_size: float = Field(..., gt=0.0)
    atom_number: int = Field(..., ge=0)

    def max_atoms(self) -> int:
        """floor(r0 / a_sc), computed on the decimal representations"""
        return int(Decimal(repr(self.trap_size)) // Decimal(repr(self.scattering_length)))


class TolerancesModel(StrictModel):
    tail: Optional[float] = Field(None, gt=0.0)
    normalization: Optional[float] = Field(None, gt=0.0)
    hermitian: Optional[float] = Field(None, gt=0.0)
    unitary: Optional[float] = Field(None, gt=0.0)
    eigenvalue_clamp: Optional[float] = Field(None, gt=0.0)
    condition: Optional[float] = Field(None, gt=0.0)
    ladder: Optional[float] = Field(None, gt=0.0)
    trace: Optional[float] = Field(None, gt=0.0)

    def overrides(self) -> Dict[str, float]:
        return {key: value for key, value in self.model_dump().items() if value is not None}


class AssertionsModel(StrictModel):
    """Thresholds checked after a run; a failed check gives exit code 1"""

    max_spectrum_error: float = Field(1e-10, gt=0.0)
    max_norm_drift: float = Field(1e-10, gt=0.0)
    max_sector_drift: float = Field(1e-10, gt=0.0)
    min_revival_fidelity: float = Field(1.0 - 1e-8, ge=0.0, le=1.0)
    min_adiabatic_fidelity: Optional[float] = Field(None, ge=0.0, le=1.0)
    max_mid_population: Optional[float] = Field(None, ge=0.0)
    require_monotone_adiabatic: bool = True
    require_valid: bool = True


class RunConfig(StrictModel):
    """A validated run document"""

    experiment: ExperimentKind
    params: Optional[Union[EffectiveParamsModel, RamanParamsModel]] = None
    squeezing: Optional[SqueezingModel] = None
    cutoff: int = Field(48, ge=4)
    t_grid: Optional[List[float]] = None
    tau_grid: Optional[List[float]] = None
    revival: Optional[RevivalModel] = None
    initial: InitialStateModel = Field(default_factory=InitialStateModel)
    adiabatic: AdiabaticModel = Field(default_factory=AdiabaticModel)
    validity: Optional[ValidityParams] = None
    output_dir: Optional[str] = None
    tolerances: TolerancesModel = Field(default_factory=TolerancesModel)
    assertions: AssertionsModel = Field(default_factory=AssertionsModel)

    @field_validator('t_grid', 'tau_grid')
    @classmethod
    def grids_sorted(cls, values: Optional[List[float]]) -> Optional[List[float]]:
        return _sorted_grid(values)

    @model_validator(mode='after')
    def experiment_inputs(self) -> "RunConfig":
        problems = []
        if self.experiment in ("spectrum", "evolve") and not isinstance(self.params, EffectiveParamsModel):
            problems.append(f"{self.experiment} needs params {{g, q, chi}}")
        if self.experiment in ("evolve", "revival", "adiabatic") and self.squeezing is None:
            problems.append(f"{self.experiment} needs squeezing {{r, theta}}")
        if self.experiment == "evolve" and self.t_grid is None:
            problems.append("evolve needs t_grid")
        if self.experiment == "revival" and self.revival is None:
            problems.append("revival needs a revival block {N, M, convention}")
        if self.experiment == "adiabatic":
            if not isinstance(self.params, RamanParamsModel):
                problems.append("adiabatic needs params {g1, g2, lambda11, ...}")
            elif self.params.g1 == 0:
                problems.append("adiabatic sweeps delta/|g1| and needs g1 != 0")
        if self.experiment == "validity" and self.validity is None:
            problems.append("validity needs a validity block {scattering_length, trap_size, atom_number}")
        if problems:
            raise ValueError("; ".join(problems))
        return self

    def effective_params(self) -> EffectiveParams:
        return self.params.to_params()

    def squeezing_param(self) -> SqueezingParam:
        return self.squeezing.to_param()

    def revival_spec(self) -> RevivalSpec:
        return self.revival.to_spec(self.squeezing_param())


def parse_config(document: Dict[str, Any], experiment: Optional[str] = None,
                 cutoff: Optional[int] = None) -> RunConfig:
    """Validate a run document; ``experiment`` and ``cutoff`` come from the command line"""
    if not isinstance(document, dict):
        raise ValueError(f"run document must be a JSON object, got {type(document).__name__}")
    document = dict(document)

    if experiment is not None:
        declared = document.setdefault('experiment', experiment)
        if declared != experiment:
            raise ValueError(f"document declares experiment {declared!r} but {experiment!r} was requested")
    if cutoff is not None:
        document['cutoff'] = cutoff

    run_config = RunConfig.model_validate(document)
    logger.debug(f"Parsed {run_config.experiment} run with cutoff {run_config.cutoff}")
    return run_config
