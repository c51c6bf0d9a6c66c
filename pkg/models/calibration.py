from __future__ import annotations

import math
from dataclasses import dataclass

from models.errors import ArgumentError


@dataclass(frozen=True)
class CalibrationPoint:
    """Mean load-cell voltage for one known load (negative force = compression)"""

    applied_force: float
    mean_voltage: float
    n_samples: int = 1

    def __post_init__(self):
        if self.n_samples < 1:
            raise ArgumentError('calibration point needs n_samples >= 1')
        if not math.isfinite(self.mean_voltage) or not math.isfinite(self.applied_force):
            raise ArgumentError('calibration point values must be finite')


@dataclass(frozen=True)
class CalibrationFit:
    """Force-on-voltage line: newtons = slope * volts + intercept"""

    slope: float
    intercept: float
    mse: float = 0.0
    n_points: int = 2

    def __post_init__(self):
        if self.n_points < 2:
            raise ArgumentError('calibration fit needs n_points >= 2')
        if self.mse < 0:
            raise ArgumentError('calibration mse must be >= 0')

    def to_dict(self):
        return {
            'slope': self.slope,
            'intercept': self.intercept,
            'mse': self.mse,
            'n_points': self.n_points
        }

    @classmethod
    def from_dict(cls, data):
        return cls(float(data['slope']), float(data['intercept']),
                   float(data.get('mse', 0.0)), int(data.get('n_points', 2)))
