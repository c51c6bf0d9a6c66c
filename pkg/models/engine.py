from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from models.errors import ConfigurationError

SPEED_FLOOR = 0.1
SPEED_CEILING = 1.0
MAX_ACTUAL_SPEED = 1.2


@dataclass(frozen=True)
class FlightProfile:
    """Piecewise-constant requested shaft-speed schedule.

    `segments` holds (start_time [s], requested_speed [fraction of full speed])
    pairs; `duration` is the nominal schedule length used when a simulation
    is not given one.
    """

    segments: tuple
    duration: float | None = None
    kind: str = 'custom'

    def __post_init__(self):
        segments = tuple((float(t), float(v)) for t, v in self.segments)
        object.__setattr__(self, 'segments', segments)
        if not segments:
            raise ConfigurationError('segments', 'profile must have at least one segment')
        if segments[0][0] != 0.0:
            raise ConfigurationError('segments', 'first segment must start at t=0')
        starts = [t for t, _ in segments]
        if any(b <= a for a, b in zip(starts, starts[1:])):
            raise ConfigurationError('segments', 'segment start times must be strictly increasing')
        for t, v in segments:
            if not SPEED_FLOOR <= v <= SPEED_CEILING:
                raise ConfigurationError(
                    'segments', f'requested speed {v} at t={t} outside [{SPEED_FLOOR}, {SPEED_CEILING}]')
        if self.duration is not None and self.duration <= starts[-1]:
            raise ConfigurationError('duration', 'duration must extend past the last segment start')

    @property
    def start_times(self):
        return np.array([t for t, _ in self.segments])

    @property
    def speeds(self):
        return np.array([v for _, v in self.segments])

    def requested_at(self, times):
        """Requested speed at each time in `times` (the last segment holds forever)"""
        idx = np.searchsorted(self.start_times, np.asarray(times, dtype=float), side='right') - 1
        return self.speeds[np.clip(idx, 0, None)]

    def to_dict(self):
        return {
            'kind': self.kind,
            'duration': self.duration,
            'segments': [list(s) for s in self.segments]
        }


@dataclass(frozen=True)
class EngineParams:
    """Surrogate single-spool engine: first-order spool, PI speed loop, quadratic output maps"""

    dt: float = 0.015
    tau_spool: float = 0.8
    kp: float = 0.02
    ki: float = 0.05
    c_fuel: float = 30.0
    far_min: float = 0.003
    far_max: float = 0.04
    thrust_coeffs: tuple = (16000.0, 2000.0, 1500.0)
    egt_coeffs: tuple = (12000.0, 250.0, 400.0)
    noise_sigma: float = 0.0
    seed: int = 0
    initial_speed: float | None = None

    def __post_init__(self):
        object.__setattr__(self, 'thrust_coeffs', tuple(float(c) for c in self.thrust_coeffs))
        object.__setattr__(self, 'egt_coeffs', tuple(float(c) for c in self.egt_coeffs))
        for name in ('dt', 'tau_spool', 'kp', 'ki', 'c_fuel', 'far_min', 'far_max', 'noise_sigma'):
            if not math.isfinite(getattr(self, name)):
                raise ConfigurationError(name, 'must be finite')
        if self.dt <= 0:
            raise ConfigurationError('dt', 'must be > 0')
        if self.tau_spool <= 0:
            raise ConfigurationError('tau_spool', 'must be > 0')
        if self.far_min >= self.far_max:
            raise ConfigurationError('far_min', 'must be below far_max')
        if self.kp < 0 or self.ki < 0:
            raise ConfigurationError('kp' if self.kp < 0 else 'ki', 'controller gains must be >= 0')
        if self.c_fuel <= 0:
            raise ConfigurationError('c_fuel', 'must be > 0')
        if len(self.thrust_coeffs) != 3:
            raise ConfigurationError('thrust_coeffs', 'expected (a2, a1, a0)')
        if self.thrust_coeffs[0] <= 0:
            raise ConfigurationError('thrust_coeffs', 'a2 must be > 0')
        if len(self.egt_coeffs) != 3:
            raise ConfigurationError('egt_coeffs', 'expected (b_far, b_n2, b0)')
        if self.noise_sigma < 0:
            raise ConfigurationError('noise_sigma', 'must be >= 0')
        if self.initial_speed is not None and not 0.0 <= self.initial_speed <= MAX_ACTUAL_SPEED:
            raise ConfigurationError('initial_speed', f'must lie in [0, {MAX_ACTUAL_SPEED}]')

    def to_dict(self):
        return {
            'dt': self.dt,
            'tau_spool': self.tau_spool,
            'kp': self.kp,
            'ki': self.ki,
            'c_fuel': self.c_fuel,
            'far_min': self.far_min,
            'far_max': self.far_max,
            'thrust_coeffs': list(self.thrust_coeffs),
            'egt_coeffs': list(self.egt_coeffs),
            'noise_sigma': self.noise_sigma,
            'seed': self.seed,
            'initial_speed': self.initial_speed
        }


@dataclass(frozen=True)
class SimRecord:
    time: float
    requested_speed: float
    actual_speed: float
    thrust: float
    egt: float
    far: float


SIM_CHANNELS = ('requested_speed', 'actual_speed', 'thrust', 'egt', 'far')
SIM_UNITS = {
    'requested_speed': '-',
    'actual_speed': '-',
    'thrust': 'N',
    'egt': 'degC',
    'far': '-'
}


@dataclass(frozen=True)
class SimulatedRun:
    """Columnar simulation output; indexing yields SimRecord rows"""

    time: np.ndarray
    requested_speed: np.ndarray
    actual_speed: np.ndarray
    thrust: np.ndarray
    egt: np.ndarray
    far: np.ndarray
    params: EngineParams
    profile: FlightProfile
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.time)

    def __getitem__(self, n):
        return SimRecord(
            float(self.time[n]),
            float(self.requested_speed[n]),
            float(self.actual_speed[n]),
            float(self.thrust[n]),
            float(self.egt[n]),
            float(self.far[n])
        )

    def __iter__(self):
        return (self[n] for n in range(len(self)))

    def columns(self):
        return {name: getattr(self, name) for name in SIM_CHANNELS}
