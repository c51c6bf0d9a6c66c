from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from models.calibration import CalibrationFit
from models.dataset import NormalizationSpec
from models.errors import ConfigurationError


def feature_count(m, k):
    """Total NG-RC feature count for m input channels and lookback k"""
    d_linear = m * (k + 1)
    return 1 + d_linear + d_linear * (d_linear + 1) // 2


@dataclass(frozen=True)
class Metaparameters:
    k: int = 1
    s: int = 1
    alpha: float = 1e-5

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 0:
            raise ConfigurationError('k', f'lookback must be an integer >= 0, got {self.k}')
        if int(self.s) != self.s or self.s < 1:
            raise ConfigurationError('s', f'skip must be an integer >= 1, got {self.s}')
        if not (math.isfinite(self.alpha) and self.alpha > 0):
            raise ConfigurationError('alpha', f'ridge parameter must be > 0, got {self.alpha}')
        object.__setattr__(self, 'k', int(self.k))
        object.__setattr__(self, 's', int(self.s))
        object.__setattr__(self, 'alpha', float(self.alpha))

    @property
    def history(self):
        """Samples consumed as delay history before the first valid step"""
        return self.k * self.s

    def to_dict(self):
        return {'k': self.k, 's': self.s, 'alpha': self.alpha}


@dataclass(frozen=True)
class FeatureMatrix:
    """Feature vectors o_n stacked column-wise (d x N_valid)"""

    features: np.ndarray
    d_linear: int
    first_valid_index: int

    @property
    def d(self):
        return self.features.shape[0]

    @property
    def d_quadratic(self):
        return self.d_linear * (self.d_linear + 1) // 2

    @property
    def n_valid(self):
        return self.features.shape[1]


@dataclass(frozen=True)
class TrainingStats:
    n_train: int
    train_time: float | None = None

    def to_dict(self):
        return {'n_train': self.n_train, 'train_time': self.train_time}


@dataclass(frozen=True)
class TrainedModel:
    w_out: np.ndarray
    metaparams: Metaparameters
    input_channels: tuple
    target_channel: str
    normalization: NormalizationSpec
    training_stats: TrainingStats
    sample_rate: float | None = None
    calibration: CalibrationFit | None = None
    seed: int | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, 'w_out', np.asarray(self.w_out, dtype=float))
        object.__setattr__(self, 'input_channels', tuple(self.input_channels))
        expected = feature_count(len(self.input_channels), self.metaparams.k)
        if self.w_out.shape != (expected,):
            raise ConfigurationError(
                'w_out', f'expected {expected} weights for {len(self.input_channels)} channels '
                         f'at k={self.metaparams.k}, got shape {self.w_out.shape}')

    @property
    def d(self):
        return len(self.w_out)
