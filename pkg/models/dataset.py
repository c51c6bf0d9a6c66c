from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from models.errors import ArgumentError, ConfigurationError, ContractError, DataFormatError

TRAIN = 'train'
TEST = 'test'


@dataclass(frozen=True)
class Channel:
    """One sensor stream at its native rate"""

    name: str
    unit: str
    rate: float
    samples: np.ndarray
    start_time: float = 0.0

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=float)
        object.__setattr__(self, 'samples', samples)
        if not (math.isfinite(self.rate) and self.rate > 0):
            raise DataFormatError(f"channel '{self.name}': rate must be > 0, got {self.rate}")
        if not np.all(np.isfinite(samples)):
            raise DataFormatError(f"channel '{self.name}': samples must be finite")

    def __len__(self):
        return len(self.samples)


@dataclass(frozen=True)
class RawRun:
    """A loaded run before alignment: channels at their native rates"""

    run_id: str
    channels: tuple
    meta: dict = field(default_factory=dict)

    def channel(self, name):
        for ch in self.channels:
            if ch.name == name:
                return ch
        raise KeyError(name)

    @property
    def channel_names(self):
        return [ch.name for ch in self.channels]


@dataclass(frozen=True)
class RunDataset:
    """Aligned multichannel run at a common sample rate.

    `junctions` lists indices where a new contiguous segment begins (set by
    merge_runs); delay windows must never cross one.
    """

    run_id: str
    rate: float
    channels: dict
    units: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)
    start_time: float = 0.0
    junctions: tuple = ()

    def __post_init__(self):
        channels = {name: np.asarray(values, dtype=float) for name, values in self.channels.items()}
        object.__setattr__(self, 'channels', channels)
        object.__setattr__(self, 'junctions', tuple(int(j) for j in self.junctions))
        lengths = {len(v) for v in channels.values()}
        if len(lengths) > 1:
            raise DataFormatError(f"run '{self.run_id}': channel lengths differ {sorted(lengths)}")
        length = lengths.pop() if lengths else 0
        if any(not 0 < j < length for j in self.junctions):
            raise DataFormatError(f"run '{self.run_id}': junction outside (0, {length})")

    @property
    def length(self):
        return len(next(iter(self.channels.values()))) if self.channels else 0

    def __len__(self):
        return self.length

    @property
    def time(self):
        return self.start_time + np.arange(self.length) / self.rate

    def __getitem__(self, name):
        return self.channels[name]

    def require(self, names, role='channel'):
        missing = [n for n in names if n not in self.channels]
        if missing:
            raise ContractError(f"run '{self.run_id}' is missing {role}(s): {', '.join(missing)}")

    def matrix(self, names):
        """Stack channels into an m x T array in the given order"""
        self.require(names)
        return np.vstack([self.channels[n] for n in names])

    def with_channels(self, channels, **changes):
        values = {
            'run_id': self.run_id,
            'rate': self.rate,
            'channels': channels,
            'units': self.units,
            'meta': self.meta,
            'start_time': self.start_time,
            'junctions': self.junctions
        }
        values.update(changes)
        return RunDataset(**values)


@dataclass(frozen=True)
class NormalizationSpec:
    """Per-channel (min, max) recorded at fit time"""

    ranges: dict

    def __post_init__(self):
        ranges = {name: (float(lo), float(hi)) for name, (lo, hi) in self.ranges.items()}
        object.__setattr__(self, 'ranges', ranges)
        for name, (lo, hi) in ranges.items():
            if not hi > lo:
                raise ConfigurationError(name, f'normalization range must have max > min, got ({lo}, {hi})')

    def __contains__(self, name):
        return name in self.ranges

    def to_dict(self):
        return {name: [lo, hi] for name, (lo, hi) in self.ranges.items()}

    @classmethod
    def from_dict(cls, data):
        return cls({name: tuple(bounds) for name, bounds in data.items()})


@dataclass(frozen=True)
class Slice:
    start: int
    end: int
    label: str

    def __len__(self):
        return self.end - self.start


@dataclass(frozen=True)
class SliceSpec:
    """Ordered, disjoint, half-open temporal slices labelled train or test"""

    slices: tuple
    length: int

    def __post_init__(self):
        slices = tuple(s if isinstance(s, Slice) else Slice(int(s[0]), int(s[1]), s[2]) for s in self.slices)
        object.__setattr__(self, 'slices', slices)
        previous_end = 0
        for s in slices:
            if s.label not in (TRAIN, TEST):
                raise ArgumentError(f"slice label must be '{TRAIN}' or '{TEST}', got '{s.label}'")
            if s.start < previous_end or s.end <= s.start or s.end > self.length:
                raise ArgumentError(f'slices must be sorted, non-empty and disjoint within [0, {self.length}]')
            previous_end = s.end

    def __iter__(self):
        return iter(self.slices)

    def __len__(self):
        return len(self.slices)

    def labelled(self, label):
        return [(i, s) for i, s in enumerate(self.slices) if s.label == label]

    def indices(self, label):
        parts = [np.arange(s.start, s.end) for _, s in self.labelled(label)]
        return np.concatenate(parts) if parts else np.array([], dtype=int)

    def to_dict(self):
        return {
            'length': self.length,
            'slices': [[s.start, s.end, s.label] for s in self.slices]
        }
