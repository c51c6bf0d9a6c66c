import logging
import math

import numpy as np

from models.dataset import TEST, TRAIN, NormalizationSpec, RunDataset, Slice, SliceSpec
from models.errors import (
    ArgumentError, DataFormatError, DegenerateRangeError, MergeError, SpecMismatchError, UpsamplingError
)

logger = logging.getLogger(__name__)

RATE_TOLERANCE = 1e-6


class DatasetService:
    """Alignment, normalization, slicing and merging of engine runs"""

    def align(self, channels, target_rate=None, run_id='run', meta=None):
        """
        Bring channels to one common rate by block averaging

        Args:
            channels: Channel records at their native rates
            target_rate: Common rate in samples per second (defaults to the slowest channel)
            run_id: Identifier of the resulting dataset
            meta: Run-level annotations carried through unchanged

        Returns:
            RunDataset with every channel truncated to the common length
        """
        channels = list(channels)
        if not channels:
            raise DataFormatError(f"run '{run_id}' has no channels to align")
        if target_rate is None:
            target_rate = min(ch.rate for ch in channels)

        start_time = max(ch.start_time for ch in channels)
        aligned = {}
        units = {}
        for ch in channels:
            factor = ch.rate / target_rate
            if factor < 1.0 - RATE_TOLERANCE:
                raise UpsamplingError(
                    f"channel '{ch.name}' at {ch.rate} S/s is below the target rate {target_rate} S/s; "
                    f"upsampling is not supported")
            # drop leading samples recorded before the latest channel started
            skip = int(round((start_time - ch.start_time) * ch.rate))
            aligned[ch.name] = self._block_mean(ch.samples[skip:], factor)
            units[ch.name] = ch.unit

        length = min(len(v) for v in aligned.values())
        if length == 0:
            raise DataFormatError(f"run '{run_id}' has no complete sample at {target_rate} S/s")
        channels_out = {name: values[:length] for name, values in aligned.items()}
        logger.debug("Aligned run %s to %g S/s, %d samples", run_id, target_rate, length)
        return RunDataset(run_id=run_id, rate=float(target_rate), channels=channels_out,
                          units=units, meta=dict(meta or {}), start_time=start_time)

    @staticmethod
    def _block_mean(samples, factor):
        """Mean over consecutive windows of `factor` input samples (fractional factors allowed)"""
        rounded = round(factor)
        if abs(factor - rounded) < RATE_TOLERANCE:
            if rounded == 1:
                return samples.copy()
            n_out = len(samples) // rounded
            return samples[:n_out * rounded].reshape(n_out, rounded).mean(axis=1)

        # window j covers input indices j*factor <= i < (j+1)*factor
        n_out = int(math.floor(len(samples) / factor + RATE_TOLERANCE))
        if n_out == 0:
            return np.array([])
        bounds = np.ceil(np.arange(n_out + 1) * factor - RATE_TOLERANCE).astype(int)
        bounds[-1] = min(bounds[-1], len(samples))
        sums = np.add.reduceat(samples[:bounds[-1]], bounds[:-1])
        return sums / np.diff(bounds)

    def fit_normalization(self, ds, channels, slices=None):
        """
        Record per-channel (min, max) over the training portion

        Args:
            ds: RunDataset
            channels: Channel names to normalize
            slices: Optional SliceSpec; only its train slices are used when given

        Returns:
            NormalizationSpec
        """
        ds.require(channels)
        index = slices.indices(TRAIN) if slices is not None else np.arange(ds.length)
        if len(index) == 0:
            raise ArgumentError('normalization needs at least one training sample')

        ranges = {}
        for name in channels:
            values = ds[name][index]
            lo, hi = float(np.min(values)), float(np.max(values))
            if not hi > lo:
                raise DegenerateRangeError(f"channel '{name}' is constant ({lo}) over the training data")
            ranges[name] = (lo, hi)
        return NormalizationSpec(ranges)

    def apply_normalization(self, ds, spec, channels=None):
        """Map x -> (x - min) / (max - min) for every spec channel; values outside the fit range pass through"""
        names = list(spec.ranges) if channels is None else list(channels)
        missing = [n for n in names if n not in spec]
        if missing:
            raise SpecMismatchError(f"normalization spec does not cover: {', '.join(missing)}")
        ds.require(names)

        channels_out = dict(ds.channels)
        for name in names:
            lo, hi = spec.ranges[name]
            channels_out[name] = (ds[name] - lo) / (hi - lo)
        return ds.with_channels(channels_out)

    def invert_normalization(self, ds, spec, channels=None):
        """Restore physical units for normalized channels"""
        names = list(spec.ranges) if channels is None else list(channels)
        channels_out = dict(ds.channels)
        for name in names:
            if name not in spec:
                raise SpecMismatchError(f"normalization spec does not cover '{name}'")
            channels_out[name] = self.denormalize(ds[name], spec, name)
        return ds.with_channels(channels_out)

    @staticmethod
    def normalize(values, spec, name):
        if name not in spec:
            raise SpecMismatchError(f"normalization spec does not cover '{name}'")
        lo, hi = spec.ranges[name]
        return (np.asarray(values, dtype=float) - lo) / (hi - lo)

    @staticmethod
    def denormalize(values, spec, name):
        if name not in spec:
            raise SpecMismatchError(f"normalization spec does not cover '{name}'")
        lo, hi = spec.ranges[name]
        return np.asarray(values, dtype=float) * (hi - lo) + lo

    def make_slices(self, length, n_slices, pattern='alternating', seed=0, first=TRAIN):
        """
        Split [0, length) into contiguous near-equal slices

        Args:
            length: Number of samples
            n_slices: Number of slices (2 <= n_slices <= length)
            pattern: 'alternating' (first, other, first, ...) or 'random' (ceil(n/2) train, seeded shuffle)
            seed: Seed for the random pattern
            first: Label of the first slice for the alternating pattern

        Returns:
            SliceSpec
        """
        if n_slices < 2:
            raise ArgumentError(f'n_slices must be >= 2, got {n_slices}')
        if n_slices > length:
            raise ArgumentError(f'n_slices ({n_slices}) exceeds length ({length})')

        bounds = [i * length // n_slices for i in range(n_slices + 1)]
        if pattern == 'alternating':
            other = TEST if first == TRAIN else TRAIN
            labels = [first if i % 2 == 0 else other for i in range(n_slices)]
        elif pattern == 'random':
            n_train = math.ceil(n_slices / 2)
            labels = np.array([TRAIN] * n_train + [TEST] * (n_slices - n_train))
            labels = np.random.default_rng(seed).permutation(labels).tolist()
        else:
            raise ArgumentError(f"unknown slice pattern '{pattern}'")

        slices = tuple(Slice(bounds[i], bounds[i + 1], labels[i]) for i in range(n_slices))
        return SliceSpec(slices, length)

    def merge_runs(self, parts):
        """
        Concatenate index ranges of several runs

        Args:
            parts: Sequence of (RunDataset, (start, end)) pairs, in output order

        Returns:
            RunDataset with a junction marker at every part boundary
        """
        parts = list(parts)
        if not parts:
            raise MergeError('nothing to merge')

        first = parts[0][0]
        names = set(first.channels)
        for ds, _ in parts[1:]:
            if set(ds.channels) != names:
                raise MergeError(f"run '{ds.run_id}' channels differ from '{first.run_id}'")
            if abs(ds.rate - first.rate) > RATE_TOLERANCE * first.rate:
                raise MergeError(f"run '{ds.run_id}' rate {ds.rate} differs from '{first.run_id}' rate {first.rate}")

        if len(parts) == 1 and tuple(parts[0][1]) == (0, first.length):
            return first

        channels = {name: [] for name in first.channels}
        junctions = []
        offset = 0
        for ds, (start, end) in parts:
            if not 0 <= start < end <= ds.length:
                raise MergeError(f"range [{start}, {end}) outside run '{ds.run_id}' of length {ds.length}")
            if offset > 0:
                junctions.append(offset)
            # keep junctions already inside the selected range
            junctions.extend(offset + j - start for j in ds.junctions if start < j < end)
            for name in channels:
                channels[name].append(ds[name][start:end])
            offset += end - start

        return RunDataset(
            run_id='+'.join(ds.run_id for ds, _ in parts),
            rate=first.rate,
            channels={name: np.concatenate(chunks) for name, chunks in channels.items()},
            units=dict(first.units),
            meta={'merged_from': [[ds.run_id, int(s), int(e)] for ds, (s, e) in parts]},
            start_time=first.start_time,
            junctions=tuple(sorted(junctions))
        )

    @staticmethod
    def contiguous_pieces(ds, start, end):
        """Split [start, end) at the dataset's junctions into contiguous (start, end) pieces"""
        cuts = [start] + [j for j in ds.junctions if start < j < end] + [end]
        return list(zip(cuts[:-1], cuts[1:]))
