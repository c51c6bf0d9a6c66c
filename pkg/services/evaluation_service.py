import hashlib
import logging
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from models.dataset import TEST
from models.errors import ArgumentError, DegenerateRangeError, NumericError, SliceTooShortError, TwinError
from models.evaluation import BenchmarkReport, EvalReport, GridResult, PredictionTrace
from models.ngrc import feature_count
from services.dataset_service import DatasetService
from services.ngrc_service import NgrcService

logger = logging.getLogger(__name__)

BENCHMARK_REPEATS = 31


class EvaluationService:
    """Scoring, metaparameter search and timing of NG-RC models"""

    def __init__(self, ngrc_service=None, dataset_service=None):
        self.dataset_service = dataset_service or DatasetService()
        self.ngrc_service = ngrc_service or NgrcService(self.dataset_service)

    @staticmethod
    def nrmse(predicted, truth):
        """
        Root-mean-square error normalized by the range of the truth

        Args:
            predicted: Predicted values
            truth: Ground-truth values of the same length (>= 2, not constant)

        Returns:
            sqrt(mean((p - t)^2)) / (max(t) - min(t))
        """
        predicted = np.asarray(predicted, dtype=float)
        truth = np.asarray(truth, dtype=float)
        if predicted.shape != truth.shape or truth.ndim != 1:
            raise ArgumentError(f'predicted {predicted.shape} and truth {truth.shape} must be equal-length sequences')
        if len(truth) < 2:
            raise ArgumentError('nrmse needs at least two points')
        span = float(np.max(truth) - np.min(truth))
        if span <= 0:
            raise DegenerateRangeError('truth is constant; nrmse is undefined')
        return float(np.sqrt(np.mean((predicted - truth) ** 2)) / span)

    def evaluate(self, model, ds, slices, label=TEST):
        """
        Score a model on the labelled slices of a dataset

        The first k*s steps of every slice (and of every piece after a run
        junction) only feed the delay window and are not scored.

        Args:
            model: TrainedModel
            ds: RunDataset in physical units with the model's channels and target
            slices: SliceSpec
            label: Which slices to score ('test' by default)

        Returns:
            EvalReport with pooled and per-slice NRMSE in physical units and a plot trace of every slice
        """
        ds.require(list(model.input_channels) + [model.target_channel])
        history = model.metaparams.history
        scored = slices.labelled(label)
        if not scored:
            raise ArgumentError(f"slice spec has no '{label}' slices")
        for index, s in scored:
            pieces = self.dataset_service.contiguous_pieces(ds, s.start, s.end)
            scorable = sum(max(0, (b - a) - history) for a, b in pieces)
            if scorable < 2:
                raise SliceTooShortError(
                    f'{label} slice {index} [{s.start}, {s.end}) leaves {scorable} scorable samples '
                    f'across {len(pieces)} piece(s) after the k*s = {history} warm-up; needs at least 2')

        truth_all = ds[model.target_channel]
        times, truths, predictions, labels = [], [], [], []
        slice_nrmse = []
        pooled_truth, pooled_prediction = [], []
        predict_time = 0.0

        for index, s in enumerate(slices):
            started = time.perf_counter()
            pieces = self.ngrc_service.predict_range(model, ds, s.start, s.end)
            elapsed = time.perf_counter() - started
            if not pieces:
                continue
            idx = np.concatenate([i for i, _ in pieces])
            pred = np.concatenate([p for _, p in pieces])
            times.append(ds.time[idx])
            truths.append(truth_all[idx])
            predictions.append(pred)
            labels.append(np.full(len(idx), s.label, dtype=object))

            if s.label != label:
                continue
            predict_time += elapsed
            pooled_truth.append(truth_all[idx])
            pooled_prediction.append(pred)
            try:
                value = self.nrmse(pred, truth_all[idx])
            except (DegenerateRangeError, ArgumentError):
                logger.warning("Slice %d [%d, %d) has a degenerate target range; no per-slice NRMSE",
                               index, s.start, s.end)
                value = None
            slice_nrmse.append((index, s.start, s.end, value))

        if not pooled_truth:
            raise SliceTooShortError(f"no '{label}' slice produced a prediction")
        pooled_truth = np.concatenate(pooled_truth)
        pooled_prediction = np.concatenate(pooled_prediction)
        trace = PredictionTrace(
            time=np.concatenate(times),
            truth=np.concatenate(truths),
            prediction=np.concatenate(predictions),
            label=np.concatenate(labels)
        )
        return EvalReport(
            nrmse=self.nrmse(pooled_prediction, pooled_truth),
            slice_nrmse=slice_nrmse,
            metaparams=model.metaparams,
            n_train=model.training_stats.n_train,
            n_test=len(pooled_truth),
            train_time=model.training_stats.train_time,
            inference_per_step=predict_time / len(pooled_truth),
            scored_label=label,
            trace=trace
        )

    def grid_search(self, ds, slices, grid, input_channels, target_channel, workers=1):
        """
        Train on the train slices and score on the test slices for every grid point

        Args:
            ds: RunDataset in physical units
            slices: SliceSpec with train and test slices
            grid: GridSpec
            input_channels: Input channel names
            target_channel: Target channel name
            workers: Thread count; the results table is ordered by combination index regardless

        Returns:
            (best Metaparameters, list of GridResult for every combination)
        """
        combinations = grid.combinations()
        m = len(input_channels)

        def score(item):
            index, meta = item
            d = feature_count(m, meta.k)
            try:
                model = self.ngrc_service.fit_model(ds, slices, input_channels, target_channel, meta)
                report = self.evaluate(model, ds, slices)
                return GridResult(index, meta, d, 'ok', nrmse=report.nrmse)
            except TwinError as e:
                logger.warning("Grid point k=%d s=%d alpha=%g failed: %s", meta.k, meta.s, meta.alpha, e)
                return GridResult(index, meta, d, 'failed', error=f'{e.__class__.__name__}: {e}')

        items = list(enumerate(combinations))
        if workers > 1 and len(items) > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(score, items))
        else:
            results = [score(item) for item in items]

        succeeded = [r for r in results if r.status == 'ok']
        if not succeeded:
            raise NumericError(f'all {len(results)} grid combinations failed')
        # ties: fewer features, then smaller alpha
        best = min(succeeded, key=lambda r: (r.nrmse, r.d, r.metaparams.alpha, r.index))
        logger.info("Grid search over %d combinations (%d failed): best k=%d s=%d alpha=%g, NRMSE=%.4f",
                    len(results), len(results) - len(succeeded),
                    best.metaparams.k, best.metaparams.s, best.metaparams.alpha, best.nrmse)
        return best.metaparams, results

    def benchmark(self, model, ds, slices, repeats=BENCHMARK_REPEATS, train_budget=0.1, step_budget=100e-6):
        """
        Time training and inference with medians over repeated runs

        Args:
            model: TrainedModel whose metaparameters, channels and normalization are reused
            ds: RunDataset in physical units
            slices: SliceSpec; train slices are timed for training, test slices for inference
            repeats: Number of timed repetitions (median is reported)
            train_budget: Training-time ceiling in seconds
            step_budget: Per-step inference ceiling in seconds

        Returns:
            BenchmarkReport
        """
        meta = model.metaparams
        inputs = list(model.input_channels)
        normalized = self.dataset_service.apply_normalization(ds, model.normalization)

        train_times = []
        for _ in range(repeats):
            started = time.perf_counter()
            features, targets = self.ngrc_service.training_blocks(
                normalized, slices, inputs, model.target_channel, meta)
            self.ngrc_service.train(features, targets, meta.alpha)
            train_times.append(time.perf_counter() - started)

        test_inputs = [normalized.matrix(inputs)[:, a:b]
                       for _, s in slices.labelled(TEST)
                       for a, b in self.dataset_service.contiguous_pieces(ds, s.start, s.end)
                       if b - a > meta.history]
        if not test_inputs:
            raise SliceTooShortError(f'no test slice is longer than k*s = {meta.history}')

        step_times, digest = [], None
        for _ in range(repeats):
            started = time.perf_counter()
            outputs = [self.ngrc_service.predict(model, block)[0] for block in test_inputs]
            elapsed = time.perf_counter() - started
            n_steps = sum(len(o) for o in outputs)
            step_times.append(elapsed / n_steps)
            digest = hashlib.sha256(np.concatenate(outputs).tobytes()).hexdigest()

        window = test_inputs[-1][:, -(meta.history + 1):]
        latencies = []
        for _ in range(repeats):
            started = time.perf_counter()
            self.ngrc_service.predict(model, window)
            latencies.append(time.perf_counter() - started)

        report = BenchmarkReport(
            n_train=len(targets),
            n_steps=n_steps,
            repeats=repeats,
            train_time=float(np.median(train_times)),
            inference_per_step=float(np.median(step_times)),
            single_step_latency=float(np.median(latencies)),
            train_budget=train_budget,
            step_budget=step_budget,
            prediction_digest=digest
        )
        logger.info("Benchmark: training %.2f ms on %d points, %.2f us per inference step",
                    report.train_time * 1e3, report.n_train, report.inference_per_step * 1e6)
        return report
