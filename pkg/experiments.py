"""Experiment drivers behind the command line.

Each driver takes a validated ``RunConfig`` and returns an
``ExperimentResult``: one or more tables, a short summary and the list of
failed checks. Sweep points run concurrently and are sorted by their sweep
key before anything is written, so output never depends on scheduling.
"""

import json
import logging
import math
import platform
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Any, Callable, Dict, Iterable, List, Optional, Tuple

import numpy as np
import pandas as pd
import pydantic
import scipy

from config import LAB_VERSION, SCHEMA_VERSION, config
from dynamics import EvolutionTime, Propagator, adiabatic_fidelity, evolve_rwa
from entanglement import entanglement_entropy
from errors import DimensionLimitError, LabError, TruncationError
from fock import QuantumState, TruncatedFockBasis, mode_populations
from hamiltonians import build_effective, build_rwa, eigenvalue, general_from_raman, rwa_residual
from revivals import (
    CONVENTIONS,
    PRINTED_COEFFICIENTS,
    coefficient_ratio,
    decompose,
    fidelity,
    gauss_coefficients,
    printed_coefficient_array,
    printed_superposition,
    resonant_params,
    target_superposition,
)
from run_config import RunConfig, ValidityParams
from states import initial_state, to_B_representation, to_b_representation

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi


@dataclass
class ExperimentResult:
    """Tables, summary and failed checks of one run"""

    experiment: str
    tables: Dict[str, pd.DataFrame]
    summary: Dict[str, Any] = field(default_factory=dict)
    extra: Dict[str, Any] = field(default_factory=dict)
    failures: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures


def _status(error: Exception) -> str:
    return f"{type(error).__name__}: {error}"


def _sweep(point: Callable[[float], Dict[str, Any]], keys: Iterable[float], key: str) -> List[Dict[str, Any]]:
    """Evaluate sweep points concurrently; a LabError marks its row and the sweep continues"""

    def guarded(value: float) -> Dict[str, Any]:
        try:
            row = point(value)
            row.setdefault('status', 'ok')
            return row
        except LabError as e:
            logger.warning(f"{key}={value}: {e}")
            return {key: value, 'status': _status(e)}

    values = list(keys)
    with ThreadPoolExecutor(max_workers=config.max_workers) as executor:
        rows = list(executor.map(guarded, values))
    return sorted(rows, key=lambda row: row[key])


def _row_failures(frame: pd.DataFrame, key: str) -> List[str]:
    failed = frame[frame['status'] != 'ok']
    return [f"{key}={row[key]}: {row['status']}" for _, row in failed.iterrows()]


def _pair_basis(cutoff: int) -> TruncatedFockBasis:
    """Full two-mode basis, refused before any table is built when it exceeds the basis limit"""
    required = (cutoff + 1) ** 2
    if required > config.max_basis_dimension:
        raise DimensionLimitError(
            f"two-mode basis at cutoff {cutoff} has {required} states, limit is {config.max_basis_dimension}",
            required=required,
            limit=config.max_basis_dimension,
        )
    return TruncatedFockBasis(mode_count=2, cutoff=cutoff)


def _sector_weights(state: QuantumState) -> np.ndarray:
    totals = state.basis.total_numbers()
    return np.bincount(totals, weights=state.probabilities, minlength=2 * state.basis.cutoff + 1)


def run_spectrum(cfg: RunConfig) -> ExperimentResult:
    """Diagonal of the RWA operator against the closed-form eigenvalues"""
    p = cfg.effective_params()
    basis = _pair_basis(cfg.cutoff)
    numeric = build_rwa(p, basis).diagonal_values().real

    rows = []
    for index in np.flatnonzero(basis.complete_sector_mask()):
        n, m = basis.decode(int(index))
        formula = eigenvalue(n, m, p)
        rows.append({
            'n': n,
            'm': m,
            'E_formula': formula,
            'E_numeric': float(numeric[index]),
            'abs_error': abs(formula - float(numeric[index])),
        })
    frame = pd.DataFrame(rows).sort_values(['n', 'm'], kind='mergesort').reset_index(drop=True)

    complete = np.flatnonzero(basis.complete_sector_mask())
    residual = rwa_residual(p, basis).matrix[complete][:, complete]
    max_residual = float(np.abs(residual.toarray()).max()) if residual.nnz else 0.0

    result = ExperimentResult(
        experiment='spectrum',
        tables={'spectrum': frame},
        summary={
            'max_abs_error': float(frame['abs_error'].max()),
            'max_rwa_residual': max_residual,
            'states': len(frame),
        },
    )
    if result.summary['max_abs_error'] > cfg.assertions.max_spectrum_error:
        result.failures.append(
            f"spectrum error {result.summary['max_abs_error']:.3e} exceeds {cfg.assertions.max_spectrum_error:.1e}"
        )
    return result


def run_evolve(cfg: RunConfig) -> ExperimentResult:
    """Time series of populations, sector weights, entropy and RWA agreement"""
    p = cfg.effective_params()
    basis = _pair_basis(cfg.cutoff)
    psi0 = initial_state(cfg.squeezing_param(), basis, kind=cfg.initial.kind, representation="b")
    psi0_B = to_B_representation(psi0)
    propagator = Propagator.from_hamiltonian(build_effective(p, basis))
    initial_weights = _sector_weights(psi0)
    logger.info(f"Evolving {cfg.initial.kind} state over {len(cfg.t_grid)} times")

    def point(t: float) -> Dict[str, Any]:
        state = propagator.evolve(psi0, t)
        weights = _sector_weights(state)
        n1, n3 = mode_populations(state)
        approximate = to_b_representation(evolve_rwa(p, psi0_B, t))
        sectors = [
            {'t': t, 'N': n, 'weight': float(weights[n]), 'drift': float(abs(weights[n] - initial_weights[n]))}
            for n in range(basis.cutoff + 1)
        ]
        return {
            'sectors': sectors,
            't': t,
            'n1': float(n1),
            'n3': float(n3),
            'norm': state.norm,
            'norm_drift': abs(state.norm - psi0.norm),
            'sector_drift': float(np.abs(weights - initial_weights).max()),
            'entropy': entanglement_entropy(state),
            'rwa_fidelity': fidelity(state, approximate),
            'tail_weight': state.tail_weight,
        }

    rows = _sweep(point, cfg.t_grid, 't')
    sectors = pd.DataFrame([sector for row in rows for sector in row.pop('sectors', [])])
    frame = pd.DataFrame(rows)

    result = ExperimentResult(
        experiment='evolve',
        tables={'evolve': frame, 'evolve_sectors': sectors},
        failures=_row_failures(frame, 't'),
    )
    if result.failures:
        return result

    result.summary = {
        'max_norm_drift': float(frame['norm_drift'].max()),
        'max_sector_drift': float(frame['sector_drift'].max()),
        'min_rwa_fidelity': float(frame['rwa_fidelity'].min()),
        'final_entropy': float(frame['entropy'].iloc[-1]),
    }
    if result.summary['max_norm_drift'] > cfg.assertions.max_norm_drift:
        result.failures.append(f"norm drift {result.summary['max_norm_drift']:.3e} exceeds tolerance")
    if result.summary['max_sector_drift'] > cfg.assertions.max_sector_drift:
        result.failures.append(f"sector weight drift {result.summary['max_sector_drift']:.3e} exceeds tolerance")
    return result


def _column(convention: str) -> str:
    return f"fidelity_{convention.replace('-', '_')}"


def run_revival(cfg: RunConfig) -> ExperimentResult:
    """Fidelity of the evolved opposite-phase state with the revival target over a tau grid"""
    spec = cfg.revival_spec()
    q = cfg.revival.q
    basis = _pair_basis(cfg.cutoff)
    params = {convention: resonant_params(q, convention) for convention in CONVENTIONS}

    psi0 = initial_state(spec.xi, basis, kind="opposite_phase", representation="B")
    target = target_superposition(spec, basis, representation="B")
    target_b = to_b_representation(target)
    printed = None
    if (spec.N, spec.M) in PRINTED_COEFFICIENTS:
        printed = printed_superposition(spec, basis, representation="B")
    taus = cfg.tau_grid or sorted({spec.tau, TWO_PI})
    logger.info(f"Revival scan N={spec.N}, M={spec.M}, r={spec.xi.r} over {len(taus)} tau values")

    def point(tau: float) -> Dict[str, Any]:
        time = EvolutionTime.from_tau(tau, q)
        row: Dict[str, Any] = {'tau': tau, 't': time.t}
        evolved = {}
        for convention, p in params.items():
            evolved[convention] = evolve_rwa(p, psi0, time)
            row[_column(convention)] = fidelity(evolved[convention], target)

        state = evolved['derived']
        state_b = to_b_representation(state)
        row['fidelity_target_b'] = fidelity(state_b, target_b)
        row['fidelity_initial'] = fidelity(state, psi0)
        if printed is not None:
            row['fidelity_printed'] = fidelity(state, printed)
        row['entropy_B'] = entanglement_entropy(state)
        row['entropy_b'] = entanglement_entropy(state_b)
        row['tail_weight'] = max(state.tail_weight, state_b.tail_weight)
        try:
            state_b.require_tail_below(label=f"evolved state at tau={tau}")
        except TruncationError as e:
            row['status'] = _status(e)
        return row

    frame = pd.DataFrame(_sweep(point, taus, 'tau'))
    result = ExperimentResult(
        experiment='revival',
        tables={'revival': frame},
        failures=_row_failures(frame, 'tau'),
    )

    coefficients = gauss_coefficients(spec.N, spec.M)
    coefficient_rows = {
        'r': np.arange(2 * spec.N),
        'phi': spec.phases,
        'c_re': coefficients.real,
        'c_im': coefficients.imag,
    }
    if printed is not None:
        table = printed_coefficient_array(spec.N, spec.M)
        coefficient_rows.update({'c_printed_re': table.real, 'c_printed_im': table.imag})
    try:
        evolved_at_target = evolve_rwa(params['derived'], psi0, EvolutionTime.from_tau(spec.tau, q))
        fitted = decompose(evolved_at_target, spec.N, spec.xi)
        coefficient_rows.update({'c_fit_re': fitted.coefficients.real, 'c_fit_im': fitted.coefficients.imag})
        result.summary['decomposition_residual'] = fitted.residual
    except LabError as e:
        logger.warning(f"Decomposition at tau={spec.tau} failed: {e}")
        result.failures.append(f"decomposition: {_status(e)}")
    result.tables['revival_coefficients'] = pd.DataFrame(coefficient_rows)

    result.extra = {
        'tau_target': spec.tau,
        'coefficient_ratio': {convention: coefficient_ratio(p) for convention, p in params.items()},
        'resonant_params': {convention: asdict(p) for convention, p in params.items()},
        'coefficients': [[float(c.real), float(c.imag)] for c in coefficients],
    }

    at_target = frame[np.isclose(frame['tau'], spec.tau, rtol=0.0, atol=1e-12)]
    if not at_target.empty and (at_target['status'] == 'ok').all():
        for convention in CONVENTIONS:
            result.summary[f"{_column(convention)}_at_target"] = float(at_target[_column(convention)].iloc[0])
        chosen = result.summary[f"{_column(cfg.revival.convention)}_at_target"]
        if chosen < cfg.assertions.min_revival_fidelity:
            result.failures.append(
                f"{cfg.revival.convention} fidelity {chosen:.10f} at tau={spec.tau} below "
                f"{cfg.assertions.min_revival_fidelity}"
            )

    full = frame[np.isclose(frame['tau'], TWO_PI, rtol=0.0, atol=1e-12)]
    if not full.empty and (full['status'] == 'ok').all():
        result.summary['full_revival_fidelity'] = float(full['fidelity_initial'].iloc[0])
        if result.summary['full_revival_fidelity'] < cfg.assertions.min_revival_fidelity:
            result.failures.append(f"full revival fidelity {result.summary['full_revival_fidelity']:.10f} too low")
    return result


def run_adiabatic(cfg: RunConfig) -> ExperimentResult:
    """Three-mode against eliminated two-mode evolution over a sweep of delta/|g1|"""
    raman = cfg.params
    basis = _pair_basis(cfg.cutoff)
    psi0 = initial_state(cfg.squeezing_param(), basis, kind=cfg.initial.kind, representation="b")

    def point(ratio: float) -> Dict[str, Any]:
        delta = ratio * abs(raman.g1)
        p = raman.to_params(delta=delta)
        reduced = general_from_raman(p)
        scale = abs(reduced.g) or abs(reduced.omega1)
        t = cfg.adiabatic.gt / scale
        report = adiabatic_fidelity(p, psi0, t, max_total=cfg.adiabatic.max_total)
        return {
            'delta_ratio': ratio,
            'delta': delta,
            't': t,
            'fidelity': report.fidelity,
            'max_mid_population': report.max_mid_population,
        }

    frame = pd.DataFrame(_sweep(point, cfg.adiabatic.delta_ratios, 'delta_ratio'))
    result = ExperimentResult(
        experiment='adiabatic',
        tables={'adiabatic': frame},
        failures=_row_failures(frame, 'delta_ratio'),
    )
    if result.failures:
        return result

    fidelities = frame['fidelity'].to_numpy()
    last = frame.iloc[-1]
    result.summary = {
        'fidelity_at_largest_ratio': float(last['fidelity']),
        'mid_population_at_largest_ratio': float(last['max_mid_population']),
    }
    if cfg.assertions.require_monotone_adiabatic and np.any(np.diff(fidelities) < -1e-12):
        result.failures.append("fidelity is not non-decreasing in delta/|g1|")
    threshold = cfg.assertions.min_adiabatic_fidelity
    if threshold is not None and last['fidelity'] < threshold:
        result.failures.append(f"fidelity {last['fidelity']:.6f} at delta/|g1|={last['delta_ratio']} below {threshold}")
    ceiling = cfg.assertions.max_mid_population
    if ceiling is not None and last['max_mid_population'] > ceiling:
        result.failures.append(
            f"mid population {last['max_mid_population']:.3e} at delta/|g1|={last['delta_ratio']} above {ceiling}"
        )
    return result


def run_validity(v: ValidityParams) -> Tuple[int, bool]:
    """Largest atom number for which the single-mode picture holds: floor(r0 / a_sc)"""
    max_n = v.max_atoms()
    return max_n, v.atom_number <= max_n


def run_validity_experiment(cfg: RunConfig) -> ExperimentResult:
    v = cfg.validity
    max_n, ok = run_validity(v)
    frame = pd.DataFrame([{
        'scattering_length': v.scattering_length,
        'trap_size': v.trap_size,
        'atom_number': v.atom_number,
        'max_N': max_n,
        'ok': ok,
    }])
    result = ExperimentResult(experiment='validity', tables={'validity': frame},
                              summary={'max_N': max_n, 'ok': ok})
    if cfg.assertions.require_valid and not ok:
        result.failures.append(f"atom number {v.atom_number} exceeds single-mode limit {max_n}")
    return result


RUNNERS: Dict[str, Callable[[RunConfig], ExperimentResult]] = {
    'spectrum': run_spectrum,
    'evolve': run_evolve,
    'revival': run_revival,
    'adiabatic': run_adiabatic,
    'validity': run_validity_experiment,
}


def run_experiment(cfg: RunConfig) -> ExperimentResult:
    """Run the configured experiment with the document's tolerance overrides in effect"""
    with config.overridden(cfg.tolerances.overrides()):
        logger.info(f"Starting {cfg.experiment} experiment")
        result = RUNNERS[cfg.experiment](cfg)
        logger.info(f"Finished {cfg.experiment}: {'passed' if result.passed else 'failed'}")
        return result


def _versions() -> Dict[str, str]:
    return {
        'lab': LAB_VERSION,
        'python': platform.python_version(),
        'numpy': np.__version__,
        'scipy': scipy.__version__,
        'pandas': pd.__version__,
        'pydantic': pydantic.VERSION,
    }


def build_manifest(result: ExperimentResult, cfg: RunConfig, files: Dict[str, Path]) -> Dict[str, Any]:
    """Everything needed to reproduce the tables of a run"""
    with config.overridden(cfg.tolerances.overrides()):
        tolerances = config.tolerances()
        settings = config.to_dict()
    return {
        'schema_version': SCHEMA_VERSION,
        'experiment': result.experiment,
        'created_at': datetime.now().isoformat(),
        'versions': _versions(),
        'inputs': cfg.model_dump(mode='json'),
        'tolerances': tolerances,
        'settings': settings,
        'files': {
            name: {'path': path.name, 'rows': len(result.tables[name]), 'columns': list(result.tables[name].columns)}
            for name, path in files.items()
        },
        'summary': result.summary,
        'details': result.extra,
        'failures': result.failures,
        'passed': result.passed,
    }


def _json_default(value: Any) -> Any:
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, complex):
        return [value.real, value.imag]
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")


def write_outputs(result: ExperimentResult, cfg: RunConfig, out_dir: Optional[str] = None) -> Dict[str, Path]:
    """Write one CSV per table plus the JSON manifest; returns the written paths"""
    directory = Path(out_dir or cfg.output_dir or config.output_dir)
    directory.mkdir(parents=True, exist_ok=True)

    files: Dict[str, Path] = {}
    for name, frame in result.tables.items():
        path = directory / f"{name}.csv"
        frame.to_csv(path, index=False, float_format=config.csv_float_format, encoding='utf-8', lineterminator='\n')
        files[name] = path

    manifest_path = directory / f"{result.experiment}_manifest.json"
    manifest = build_manifest(result, cfg, files)
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True, default=_json_default), encoding='utf-8')
    files['manifest'] = manifest_path

    logger.info(f"Wrote {len(files)} files to {directory}")
    return files
