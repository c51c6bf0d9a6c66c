from __future__ import annotations

import json
import math
import os
from pathlib import Path

from dotenv import dotenv_values

from models.engine import EngineParams
from models.errors import ConfigurationError, UsageError
from models.evaluation import GridSpec
from models.ngrc import Metaparameters

ENV_PREFIX = 'NGRC_'

DEFAULTS = {
    'INPUT': '',
    'OUT_DIR': 'output',
    'INPUT_CHANNELS': 'requested_speed,actual_speed,egt,far',
    'TARGET_CHANNEL': 'thrust',
    'TARGET_RATE': '',
    'N_SLICES': '9',
    'SLICE_PATTERN': 'alternating',
    'SLICE_FIRST': 'test',
    'SLICES': '',
    'SPLIT_MODE': 'slices',
    'SEED': '0',
    'PROFILE': 'default',
    'DURATION': '',
    'DT': '0.015',
    'NOISE_SIGMA': '0.005',
    'CALIBRATION': '',
    'VOLTAGE_CHANNEL': 'load_cell',
    'MODEL': '',
    'WORKERS': '4',
    'TRAIN_BUDGET_MS': '100',
    'STEP_BUDGET_US': '100',
    'REPORTS': 'true'
}

FIXED_KEYS = ('K', 'S', 'ALPHA')
GRID_KEYS = ('GRID_K', 'GRID_S', 'GRID_ALPHA')

# engine overrides fall back to EngineParams defaults
ENGINE_KEYS = {
    'TAU_SPOOL': 'tau_spool',
    'KP': 'kp',
    'KI': 'ki',
    'C_FUEL': 'c_fuel',
    'FAR_MIN': 'far_min',
    'FAR_MAX': 'far_max',
    'THRUST_COEFFS': 'thrust_coeffs',
    'EGT_COEFFS': 'egt_coeffs',
    'INITIAL_SPEED': 'initial_speed'
}

KNOWN_KEYS = set(DEFAULTS) | set(FIXED_KEYS) | set(GRID_KEYS) | set(ENGINE_KEYS)

SPLIT_MODES = ('slices', 'cross_run', 'mixed_halves')
SLICE_PATTERNS = ('alternating', 'random')


def read_config_file(path):
    """
    Read a config file into a key -> string map

    Args:
        path: dotenv-style key-value file, or a manifest JSON written by a previous command

    Returns:
        Dictionary of upper-cased keys to string values
    """
    path = Path(path)
    if not path.exists():
        raise ConfigurationError('config', f'file not found: {path}')

    if path.suffix == '.json':
        try:
            data = json.loads(path.read_text())
        except json.JSONDecodeError as e:
            raise ConfigurationError('config', f'invalid JSON in {path}: {e}')
        data = data.get('config', data)
        return {str(k).upper(): _to_text(v) for k, v in data.items() if v is not None}

    values = dotenv_values(path)
    missing = [k for k, v in values.items() if v is None]
    if missing:
        raise ConfigurationError(missing[0], f'no value given in {path}')
    return {k.upper(): v for k, v in values.items()}


def _to_text(value):
    if isinstance(value, (list, tuple)):
        return ','.join(str(v) for v in value)
    if isinstance(value, bool):
        return 'true' if value else 'false'
    return str(value)


class PipelineConfig:
    """Resolved pipeline configuration.

    Precedence: defaults < config file < NGRC_* environment < command-line overrides.
    Only explicitly given keys are kept in `explicit`; everything else is read
    through the defaults.
    """

    def __init__(self, explicit=None):
        self.explicit = {k.upper(): str(v) for k, v in (explicit or {}).items()}
        unknown = sorted(set(self.explicit) - KNOWN_KEYS)
        if unknown:
            raise ConfigurationError(unknown[0], 'unknown configuration key')
        self._validate()

    @classmethod
    def load(cls, config_path=None, overrides=None, environ=None):
        values = {}
        if config_path:
            values.update(read_config_file(config_path))

        environ = os.environ if environ is None else environ
        for key, value in environ.items():
            if key.startswith(ENV_PREFIX) and key[len(ENV_PREFIX):] in KNOWN_KEYS:
                values[key[len(ENV_PREFIX):]] = value

        for key, value in (overrides or {}).items():
            if value is not None:
                values[key.upper()] = _to_text(value)
        return cls(values)

    def with_overrides(self, **overrides):
        values = dict(self.explicit)
        values.update({k.upper(): _to_text(v) for k, v in overrides.items() if v is not None})
        return PipelineConfig(values)

    def get(self, key):
        return self.explicit.get(key, DEFAULTS.get(key, ''))

    def is_set(self, key):
        return key in self.explicit and self.explicit[key] != ''

    def resolved(self):
        """Every known key with its effective value"""
        values = dict(DEFAULTS)
        values.update(self.explicit)
        return dict(sorted(values.items()))

    # Typed accessors

    def _float(self, key, default=None):
        text = self.get(key)
        if text == '':
            return default
        try:
            value = float(text)
        except ValueError:
            raise ConfigurationError(key, f"expected a number, got '{text}'")
        if not math.isfinite(value):
            raise ConfigurationError(key, 'must be finite')
        return value

    def _int(self, key, default=None):
        text = self.get(key)
        if text == '':
            return default
        try:
            return int(text)
        except ValueError:
            raise ConfigurationError(key, f"expected an integer, got '{text}'")

    def _list(self, key, cast):
        text = self.get(key)
        try:
            return [cast(item.strip()) for item in text.split(',') if item.strip()]
        except ValueError:
            raise ConfigurationError(key, f"could not parse list '{text}'")

    def _validate(self):
        if self.split_mode not in SPLIT_MODES:
            raise ConfigurationError('SPLIT_MODE', f'expected one of {", ".join(SPLIT_MODES)}')
        if self.slice_pattern not in SLICE_PATTERNS:
            raise ConfigurationError('SLICE_PATTERN', f'expected one of {", ".join(SLICE_PATTERNS)}')
        if self.slice_first not in ('train', 'test'):
            raise ConfigurationError('SLICE_FIRST', "expected 'train' or 'test'")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigurationError('SEED', 'must be an unsigned 64-bit integer')
        if self.workers < 1:
            raise ConfigurationError('WORKERS', 'must be >= 1')
        if self.target_rate is not None and self.target_rate <= 0:
            raise ConfigurationError('TARGET_RATE', 'must be > 0')
        if not self.input_channels:
            raise ConfigurationError('INPUT_CHANNELS', 'at least one input channel is required')
        if any(self.is_set(k) for k in FIXED_KEYS) and any(self.is_set(k) for k in GRID_KEYS):
            raise UsageError('give either fixed metaparameters (K, S, ALPHA) or a grid (GRID_*), not both')

    @property
    def inputs(self):
        return [Path(p) for p in self._list('INPUT', str)]

    @property
    def out_dir(self):
        return Path(self.get('OUT_DIR'))

    @property
    def input_channels(self):
        return self._list('INPUT_CHANNELS', str)

    @property
    def target_channel(self):
        return self.get('TARGET_CHANNEL')

    @property
    def target_rate(self):
        return self._float('TARGET_RATE')

    @property
    def n_slices(self):
        return self._int('N_SLICES')

    @property
    def slice_pattern(self):
        return self.get('SLICE_PATTERN')

    @property
    def slice_first(self):
        return self.get('SLICE_FIRST')

    @property
    def slice_layout(self):
        """Explicit `start:end:label` slices from SLICES, or None to cut N_SLICES slices"""
        text = self.get('SLICES').strip()
        if not text:
            return None
        layout = []
        for item in text.split(','):
            parts = [p.strip() for p in item.split(':')]
            if len(parts) != 3:
                raise ConfigurationError('SLICES', f"expected start:end:label, got '{item.strip()}'")
            try:
                layout.append((int(parts[0]), int(parts[1]), parts[2]))
            except ValueError:
                raise ConfigurationError('SLICES', f"slice bounds must be integers in '{item.strip()}'")
        return layout

    @property
    def split_mode(self):
        return self.get('SPLIT_MODE')

    @property
    def seed(self):
        return self._int('SEED')

    @property
    def profile(self):
        return self.get('PROFILE')

    @property
    def duration(self):
        return self._float('DURATION')

    @property
    def calibration(self):
        text = self.get('CALIBRATION')
        return Path(text) if text else None

    @property
    def voltage_channel(self):
        return self.get('VOLTAGE_CHANNEL')

    @property
    def model_path(self):
        text = self.get('MODEL')
        return Path(text) if text else None

    @property
    def workers(self):
        return self._int('WORKERS')

    @property
    def train_budget(self):
        return self._float('TRAIN_BUDGET_MS') / 1e3

    @property
    def step_budget(self):
        return self._float('STEP_BUDGET_US') / 1e6

    @property
    def reports(self):
        return self.get('REPORTS').strip().lower() in ('1', 'true', 'yes', 'on')

    def engine_params(self):
        """Build EngineParams from DT, NOISE_SIGMA, SEED and any engine overrides"""
        values = {
            'dt': self._float('DT'),
            'noise_sigma': self._float('NOISE_SIGMA'),
            'seed': self.seed
        }
        for key, field_name in ENGINE_KEYS.items():
            if not self.is_set(key):
                continue
            if field_name.endswith('_coeffs'):
                coeffs = self._list(key, float)
                if len(coeffs) != 3:
                    raise ConfigurationError(key, 'expected three comma-separated coefficients')
                values[field_name] = tuple(coeffs)
            else:
                values[field_name] = self._float(key)
        return EngineParams(**values)

    def metaparameters(self):
        if any(self.is_set(k) for k in GRID_KEYS):
            raise UsageError('this command takes fixed metaparameters (K, S, ALPHA); use gridsearch for GRID_* keys')
        return Metaparameters(self._int('K', 1), self._int('S', 1), self._float('ALPHA', 1e-5))

    def grid_spec(self):
        if any(self.is_set(k) for k in FIXED_KEYS):
            raise UsageError('gridsearch takes a grid (GRID_K, GRID_S, GRID_ALPHA), not fixed K, S, ALPHA')
        defaults = GridSpec()
        return GridSpec(
            tuple(self._list('GRID_K', int)) if self.is_set('GRID_K') else defaults.k_values,
            tuple(self._list('GRID_S', int)) if self.is_set('GRID_S') else defaults.s_values,
            tuple(self._list('GRID_ALPHA', float)) if self.is_set('GRID_ALPHA') else defaults.alpha_values
        )
