from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from models.errors import ConfigurationError
from models.ngrc import Metaparameters

DEFAULT_GRID_ALPHAS = (1e-8, 1e-7, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1)


@dataclass(frozen=True)
class GridSpec:
    k_values: tuple = (1, 2, 3)
    s_values: tuple = (1, 2, 3)
    alpha_values: tuple = DEFAULT_GRID_ALPHAS

    def __post_init__(self):
        for name in ('k_values', 's_values', 'alpha_values'):
            values = tuple(getattr(self, name))
            if not values:
                raise ConfigurationError(name, 'grid lists must be nonempty')
            object.__setattr__(self, name, values)
        if any(not (math.isfinite(a) and a > 0) for a in self.alpha_values):
            raise ConfigurationError('alpha_values', 'every alpha must be > 0')

    def combinations(self):
        """Every (k, s, alpha) in row-major order"""
        return [Metaparameters(k, s, a)
                for k in self.k_values for s in self.s_values for a in self.alpha_values]

    def to_dict(self):
        return {
            'k_values': list(self.k_values),
            's_values': list(self.s_values),
            'alpha_values': list(self.alpha_values)
        }


@dataclass(frozen=True)
class PredictionTrace:
    """Plot-ready prediction series in physical units"""

    time: np.ndarray
    truth: np.ndarray
    prediction: np.ndarray
    label: np.ndarray

    def __len__(self):
        return len(self.time)


@dataclass(frozen=True)
class EvalReport:
    nrmse: float
    slice_nrmse: list
    metaparams: Metaparameters
    n_train: int
    n_test: int
    train_time: float | None
    inference_per_step: float
    scored_label: str = 'test'
    trace: PredictionTrace | None = field(default=None, repr=False, compare=False)

    def to_dict(self):
        return {
            'nrmse': self.nrmse,
            'slice_nrmse': [
                {'slice': i, 'start': start, 'end': end, 'nrmse': value}
                for i, start, end, value in self.slice_nrmse
            ],
            'metaparams': self.metaparams.to_dict(),
            'n_train': self.n_train,
            'n_test': self.n_test,
            'scored_label': self.scored_label,
            'train_time': self.train_time,
            'inference_per_step': self.inference_per_step
        }


@dataclass(frozen=True)
class GridResult:
    index: int
    metaparams: Metaparameters
    d: int
    status: str
    nrmse: float | None = None
    error: str | None = None

    def to_dict(self):
        return {
            'index': self.index,
            'k': self.metaparams.k,
            's': self.metaparams.s,
            'alpha': self.metaparams.alpha,
            'd': self.d,
            'status': self.status,
            'nrmse': self.nrmse,
            'error': self.error
        }


@dataclass(frozen=True)
class BenchmarkReport:
    n_train: int
    n_steps: int
    repeats: int
    train_time: float
    inference_per_step: float
    single_step_latency: float
    train_budget: float
    step_budget: float
    prediction_digest: str = ''

    @property
    def train_within_budget(self):
        return self.train_time < self.train_budget

    @property
    def step_within_budget(self):
        return self.inference_per_step < self.step_budget

    def to_dict(self):
        return {
            'n_train': self.n_train,
            'n_steps': self.n_steps,
            'repeats': self.repeats,
            'train_time_ms': self.train_time * 1e3,
            'inference_per_step_us': self.inference_per_step * 1e6,
            'single_step_latency_us': self.single_step_latency * 1e6,
            'train_budget_ms': self.train_budget * 1e3,
            'step_budget_us': self.step_budget * 1e6,
            'train_within_budget': self.train_within_budget,
            'step_within_budget': self.step_within_budget,
            'prediction_digest': self.prediction_digest
        }
