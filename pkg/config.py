import os
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Dict, Iterator, Optional
from dotenv import load_dotenv
import logging

# Load environment variables
load_dotenv()

logger = logging.getLogger(__name__)

SCHEMA_VERSION = "1.0"
LAB_VERSION = "1.0.0"

# Tolerance table keys and the Config attributes they set
TOLERANCE_ATTRIBUTES = {
    'tail': 'tail_tolerance',
    'normalization': 'normalization_tolerance',
    'hermitian': 'hermitian_tolerance',
    'unitary': 'unitary_tolerance',
    'eigenvalue_clamp': 'eigenvalue_clamp',
    'condition': 'condition_limit',
    'ladder': 'ladder_tolerance',
    'trace': 'trace_tolerance',
}


class Config:
    """Configuration management for the squeezed-state revival laboratory"""

    def __init__(self):
        # Environment
        self.environment = os.getenv('ENVIRONMENT', 'development')

        # Numerical tolerances
        self.tail_tolerance = float(os.getenv('TAIL_TOLERANCE', '1e-8'))
        self.normalization_tolerance = float(os.getenv('NORMALIZATION_TOLERANCE', '1e-12'))
        self.hermitian_tolerance = float(os.getenv('HERMITIAN_TOLERANCE', '1e-12'))
        self.unitary_tolerance = float(os.getenv('UNITARY_TOLERANCE', '1e-10'))
        self.eigenvalue_clamp = float(os.getenv('EIGENVALUE_CLAMP', '1e-10'))
        self.condition_limit = float(os.getenv('CONDITION_LIMIT', '1e8'))
        self.ladder_tolerance = float(os.getenv('LADDER_TOLERANCE', '1e-8'))
        self.trace_tolerance = float(os.getenv('TRACE_TOLERANCE', '1e-10'))

        # Resource limits
        self.max_dense_dimension = int(os.getenv('MAX_DENSE_DIMENSION', '5000'))
        self.max_sector_dimension = int(os.getenv('MAX_SECTOR_DIMENSION', '5000'))
        self.max_basis_dimension = int(os.getenv('MAX_BASIS_DIMENSION', '250000'))
        self.trajectory_samples = max(20, int(os.getenv('TRAJECTORY_SAMPLES', '25')))

        # Sweep execution
        self.max_workers = int(os.getenv('MAX_WORKERS', '4'))

        # Output configuration
        self.output_dir = os.getenv('OUTPUT_DIR', 'results')
        self.csv_float_format = os.getenv('CSV_FLOAT_FORMAT', '%.17g')
        self.summary_digits = int(os.getenv('SUMMARY_DIGITS', '6'))

        # Logging Configuration
        self.log_level = os.getenv('LOG_LEVEL', 'INFO')
        self.log_format = os.getenv('LOG_FORMAT', '%(asctime)s - %(name)s - %(levelname)s - %(message)s')
        self.log_file = os.getenv('LOG_FILE')

    def validate_config(self) -> dict:
        """Validate configuration and return validation results"""
        results = {
            'valid': True,
            'errors': [],
            'warnings': []
        }

        positive = {
            'TAIL_TOLERANCE': self.tail_tolerance,
            'NORMALIZATION_TOLERANCE': self.normalization_tolerance,
            'HERMITIAN_TOLERANCE': self.hermitian_tolerance,
            'UNITARY_TOLERANCE': self.unitary_tolerance,
            'EIGENVALUE_CLAMP': self.eigenvalue_clamp,
            'CONDITION_LIMIT': self.condition_limit,
            'TRACE_TOLERANCE': self.trace_tolerance,
        }
        for name, value in positive.items():
            if not value > 0:
                results['errors'].append(f'{name} must be positive, got {value}')
                results['valid'] = False

        if min(self.max_dense_dimension, self.max_sector_dimension, self.max_basis_dimension) < 1:
            results['errors'].append('Dimension limits must be at least 1')
            results['valid'] = False

        if self.max_workers < 1:
            results['errors'].append('MAX_WORKERS must be at least 1')
            results['valid'] = False

        if not isinstance(logging.getLevelName(self.log_level.upper()), int):
            results['errors'].append(f'Unknown LOG_LEVEL {self.log_level}')
            results['valid'] = False

        # Warnings for settings that weaken the checks
        if self.tail_tolerance > 1e-6:
            results['warnings'].append('Large tail tolerance hides truncation error')

        if self.max_dense_dimension > 10000:
            results['warnings'].append('Large dense dimension may exhaust memory')

        return results

    def get_logging_config(self, quiet: bool = False) -> dict:
        """Get logging configuration"""
        console_level = 'WARNING' if quiet else self.log_level
        handlers: Dict[str, Any] = {
            'console': {
                'class': 'logging.StreamHandler',
                'level': console_level,
                'formatter': 'detailed',
                'stream': 'ext://sys.stderr'
            }
        }
        if self.log_file:
            Path(self.log_file).parent.mkdir(parents=True, exist_ok=True)
            handlers['file'] = {
                'class': 'logging.FileHandler',
                'level': self.log_level,
                'formatter': 'detailed',
                'filename': self.log_file,
                'mode': 'a'
            }

        return {
            'version': 1,
            'disable_existing_loggers': False,
            'formatters': {
                'detailed': {
                    'format': self.log_format
                },
                'simple': {
                    'format': '%(levelname)s - %(message)s'
                }
            },
            'handlers': handlers,
            'loggers': {
                '': {
                    'handlers': list(handlers),
                    'level': self.log_level,
                    'propagate': False
                }
            }
        }

    def tolerances(self, overrides: Optional[Dict[str, float]] = None) -> Dict[str, float]:
        """Effective tolerance table, with per-run overrides applied"""
        table = {key: getattr(self, attribute) for key, attribute in TOLERANCE_ATTRIBUTES.items()}
        if overrides:
            table.update(overrides)
        return table

    @contextmanager
    def overridden(self, overrides: Optional[Dict[str, float]] = None) -> Iterator["Config"]:
        """Apply tolerance overrides for the duration of one run"""
        overrides = {key: value for key, value in (overrides or {}).items() if value is not None}
        unknown = set(overrides) - set(TOLERANCE_ATTRIBUTES)
        if unknown:
            raise KeyError(f"Unknown tolerance keys: {sorted(unknown)}")

        saved = {key: getattr(self, TOLERANCE_ATTRIBUTES[key]) for key in overrides}
        for key, value in overrides.items():
            setattr(self, TOLERANCE_ATTRIBUTES[key], float(value))
        if overrides:
            logger.info(f"Tolerance overrides in effect: {overrides}")
        try:
            yield self
        finally:
            for key, value in saved.items():
                setattr(self, TOLERANCE_ATTRIBUTES[key], value)

    def to_dict(self) -> dict:
        """Convert configuration to dictionary"""
        return {
            'environment': self.environment,
            'tail_tolerance': self.tail_tolerance,
            'normalization_tolerance': self.normalization_tolerance,
            'hermitian_tolerance': self.hermitian_tolerance,
            'unitary_tolerance': self.unitary_tolerance,
            'eigenvalue_clamp': self.eigenvalue_clamp,
            'condition_limit': self.condition_limit,
            'ladder_tolerance': self.ladder_tolerance,
            'trace_tolerance': self.trace_tolerance,
            'max_dense_dimension': self.max_dense_dimension,
            'max_sector_dimension': self.max_sector_dimension,
            'max_basis_dimension': self.max_basis_dimension,
            'trajectory_samples': self.trajectory_samples,
            'max_workers': self.max_workers,
            'output_dir': self.output_dir,
            'csv_float_format': self.csv_float_format,
            'summary_digits': self.summary_digits,
            'log_level': self.log_level,
        }


# Create global config instance
config = Config()
