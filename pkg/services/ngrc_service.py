import logging
import time

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from models.dataset import TRAIN
from models.errors import (
    ArgumentError, ContractError, InsufficientHistoryError, NumericError, SolverError
)
from models.ngrc import FeatureMatrix, TrainedModel, TrainingStats
from services.dataset_service import DatasetService

logger = logging.getLogger(__name__)


class NgrcService:
    """Next-generation reservoir computer: delay-embedded linear and quadratic features with a ridge readout"""

    def __init__(self, dataset_service=None):
        self.dataset_service = dataset_service or DatasetService()

    def build_features(self, inputs, meta):
        """
        Build the feature vectors o_n for every step with a full delay window

        Args:
            inputs: m x T array of (normalized) input channels
            meta: Metaparameters; taps are at n, n-s, ..., n-k*s

        Returns:
            FeatureMatrix of shape d x (T - k*s), rows ordered constant, linear, quadratic
        """
        inputs = np.atleast_2d(np.asarray(inputs, dtype=float))
        m, T = inputs.shape
        history = meta.history
        if T <= history:
            raise InsufficientHistoryError(f'{T} steps cannot fill a delay window of k*s = {history}')
        if not np.all(np.isfinite(inputs)):
            raise NumericError('inputs contain non-finite values')

        # tap j holds x[n - j*s] for n = history .. T-1
        linear = np.vstack([inputs[:, history - j * meta.s:T - j * meta.s] for j in range(meta.k + 1)])
        rows, cols = np.triu_indices(linear.shape[0])
        quadratic = linear[rows] * linear[cols]
        constant = np.ones((1, T - history))
        return FeatureMatrix(np.vstack([constant, linear, quadratic]), linear.shape[0], history)

    def feature_names(self, channels, meta):
        """Human-readable label for every feature row, in build_features order"""
        linear = []
        for j in range(meta.k + 1):
            lag = '' if j == 0 else f'-{j * meta.s}'
            linear.extend(f'{name}[n{lag}]' for name in channels)
        rows, cols = np.triu_indices(len(linear))
        quadratic = [f'{linear[i]}*{linear[j]}' for i, j in zip(rows, cols)]
        return ['1'] + linear + quadratic

    def train(self, features, targets, alpha):
        """
        Solve for the ridge readout W_out = Y O^T (O O^T + alpha I)^-1

        Args:
            features: FeatureMatrix (or d x N array) O
            targets: Target values Y aligned to the valid steps
            alpha: Ridge parameter (> 0)

        Returns:
            Readout weight vector of length d
        """
        O = features.features if isinstance(features, FeatureMatrix) else np.asarray(features, dtype=float)
        Y = np.asarray(targets, dtype=float).ravel()
        if not alpha > 0:
            raise ArgumentError(f'alpha must be > 0, got {alpha}')
        if Y.shape[0] != O.shape[1]:
            raise ArgumentError(f'{Y.shape[0]} targets for {O.shape[1]} feature vectors')
        if not (np.all(np.isfinite(O)) and np.all(np.isfinite(Y))):
            raise NumericError('training data contain non-finite values')

        # (O O^T + alpha I) w = O Y^T, symmetric positive definite for alpha > 0
        gram = O @ O.T
        gram[np.diag_indices_from(gram)] += alpha
        try:
            factor = cho_factor(gram, lower=True, check_finite=False)
            w_out = cho_solve(factor, O @ Y, check_finite=False)
        except np.linalg.LinAlgError as e:
            raise SolverError(f'Cholesky solve failed at alpha={alpha:g}: {e}')
        if not np.all(np.isfinite(w_out)):
            raise SolverError(f'readout contains non-finite weights at alpha={alpha:g}')
        return w_out

    def predict(self, model, inputs, channels=None):
        """
        Apply y_n = W_out o_n step by step (open loop; predictions are never fed back)

        Args:
            model: TrainedModel
            inputs: m x T array of normalized inputs in model.input_channels order
            channels: Optional channel names of the rows of `inputs`, checked against the model

        Returns:
            (predictions in normalized target units, first_valid_index)
        """
        if channels is not None and tuple(channels) != model.input_channels:
            raise ContractError(f'input channels {list(channels)} do not match the model {list(model.input_channels)}')
        inputs = np.atleast_2d(np.asarray(inputs, dtype=float))
        if inputs.shape[0] != len(model.input_channels):
            raise ContractError(f'model expects {len(model.input_channels)} input channels, got {inputs.shape[0]}')
        features = self.build_features(inputs, model.metaparams)
        return model.w_out @ features.features, features.first_valid_index

    def training_blocks(self, ds, slices, input_channels, target_channel, meta, label=TRAIN):
        """
        Collect feature and target blocks from the labelled slices of a normalized dataset

        Delay windows are built inside each contiguous piece of each slice, so
        they never reach into a neighbouring slice or across a run junction.
        """
        inputs = ds.matrix(input_channels)
        target = ds[target_channel]
        blocks, targets = [], []
        for index, s in slices.labelled(label):
            for start, end in self.dataset_service.contiguous_pieces(ds, s.start, s.end):
                if end - start <= meta.history:
                    logger.warning("Skipping piece [%d, %d) of slice %d: shorter than k*s+1", start, end, index)
                    continue
                fm = self.build_features(inputs[:, start:end], meta)
                blocks.append(fm.features)
                targets.append(target[start + fm.first_valid_index:end])
        if not blocks:
            raise InsufficientHistoryError(f'no {label} slice is longer than k*s = {meta.history}')
        return np.hstack(blocks), np.concatenate(targets)

    def fit_model(self, ds, slices, input_channels, target_channel, meta, calibration=None, seed=None):
        """
        Normalize on the training slices, build features and train the readout

        Args:
            ds: RunDataset in physical units
            slices: SliceSpec; only train slices are used
            input_channels: Names of the input channels, in feature order
            target_channel: Name of the target channel
            meta: Metaparameters
            calibration: Optional CalibrationFit recorded with the model
            seed: Pipeline seed recorded with the model

        Returns:
            TrainedModel
        """
        input_channels = list(input_channels)
        ds.require(input_channels, 'input channel')
        ds.require([target_channel], 'target channel')
        spec = self.dataset_service.fit_normalization(ds, input_channels + [target_channel], slices)
        normalized = self.dataset_service.apply_normalization(ds, spec)

        started = time.perf_counter()
        features, targets = self.training_blocks(normalized, slices, input_channels, target_channel, meta)
        w_out = self.train(features, targets, meta.alpha)
        train_time = time.perf_counter() - started

        logger.info("Trained NG-RC k=%d s=%d alpha=%g on %d points (d=%d) in %.2f ms",
                    meta.k, meta.s, meta.alpha, len(targets), len(w_out), train_time * 1e3)
        return TrainedModel(
            w_out=w_out,
            metaparams=meta,
            input_channels=tuple(input_channels),
            target_channel=target_channel,
            normalization=spec,
            training_stats=TrainingStats(len(targets), train_time),
            sample_rate=ds.rate,
            calibration=calibration,
            seed=seed
        )

    def predict_range(self, model, ds, start, end):
        """
        Predict the target in physical units over [start, end) of a dataset

        Args:
            model: TrainedModel
            ds: RunDataset in physical units containing the model's input channels
            start, end: Half-open index range

        Returns:
            List of (index array, physical predictions) per contiguous piece long enough to predict
        """
        ds.require(model.input_channels, 'input channel')
        spec = model.normalization
        inputs = np.vstack([self.dataset_service.normalize(ds[name], spec, name) for name in model.input_channels])
        pieces = []
        for a, b in self.dataset_service.contiguous_pieces(ds, start, end):
            if b - a <= model.metaparams.history:
                continue
            values, first = self.predict(model, inputs[:, a:b])
            physical = self.dataset_service.denormalize(values, spec, model.target_channel)
            pieces.append((np.arange(a + first, b), physical))
        return pieces
