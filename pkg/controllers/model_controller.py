import logging

import numpy as np

from controllers import failure
from models.dataset import TEST, TRAIN
from models.errors import InsufficientHistoryError, UsageError
from models.pipeline_config import PipelineConfig
from models.processing_result import ProcessingResult

logger = logging.getLogger(__name__)

TOP_FEATURES = 5


class ModelController:
    """Controller for training, prediction and evaluation of NG-RC models"""

    def __init__(self, orchestration_service, ngrc_service, evaluation_service, model_store_service,
                 run_file_service, manifest_service):
        """
        Initialize the controller with required dependencies

        Args:
            orchestration_service: PipelineOrchestrationService (ingest, split, report files)
            ngrc_service: NgrcService
            evaluation_service: EvaluationService
            model_store_service: ModelStoreService
            run_file_service: RunFileService for tabular outputs
            manifest_service: ManifestService
        """
        self.orchestration_service = orchestration_service
        self.ngrc_service = ngrc_service
        self.evaluation_service = evaluation_service
        self.model_store_service = model_store_service
        self.run_file_service = run_file_service
        self.manifest_service = manifest_service

    def train(self, config_path=None, overrides=None):
        """
        Train on the train slices, save the model and score the test slices

        Returns:
            Dictionary with model size and test NRMSE, or (dictionary, exit code) on failure
        """
        try:
            config = PipelineConfig.load(config_path, overrides)
            meta = config.metaparameters()
            ds, slices, calibration, inputs = self.orchestration_service.prepare(config)
            if not slices.labelled(TRAIN):
                raise UsageError('the slice layout has no train slices; nothing to train on')

            model = self.ngrc_service.fit_model(
                ds, slices, config.input_channels, config.target_channel, meta,
                calibration=calibration, seed=config.seed)

            out_dir = config.out_dir
            model_path = self.model_store_service.save(model, out_dir / 'model.json', include_timing=False)
            artifacts = {'model': model_path}
            data = {
                'run_id': ds.run_id,
                'metaparams': meta.to_dict(),
                'd': model.d,
                'n_train': model.training_stats.n_train,
                'train_time_ms': model.training_stats.train_time * 1e3,
                'seed': config.seed,
                'top_features': self._top_features(model)
            }

            if slices.labelled(TEST):
                report = self.evaluation_service.evaluate(model, ds, slices)
                artifacts.update(self.orchestration_service.write_evaluation(report, out_dir, ds.run_id, config.reports))
                data['nrmse'] = report.nrmse
                data['n_test'] = report.n_test
            else:
                logger.warning("No test slices; the model is saved without an evaluation report")

            manifest = self.manifest_service.write_manifest(out_dir, 'train', config, artifacts, inputs)
            message = f"Trained NG-RC (k={meta.k}, s={meta.s}, alpha={meta.alpha:g}, d={model.d})"
            if 'nrmse' in data:
                message += f", test NRMSE {data['nrmse'] * 100:.3f}%"
            return ProcessingResult(
                success=True,
                message=message,
                data=data,
                artifacts=dict({k: str(v) for k, v in artifacts.items()}, manifest=str(manifest))
            ).to_dict()
        except Exception as e:
            return failure(e, 'train model')

    def _top_features(self, model):
        """Largest-magnitude readout weights with their feature names"""
        names = self.ngrc_service.feature_names(model.input_channels, model.metaparams)
        order = np.argsort(-np.abs(model.w_out), kind='stable')[:TOP_FEATURES]
        return [{'feature': names[i], 'weight': float(model.w_out[i])} for i in order]

    def _load_model(self, config):
        if config.model_path is None:
            raise UsageError('a model file is required (--model or MODEL key)')
        return self.model_store_service.load(config.model_path)

    def predict(self, config_path=None, overrides=None):
        """
        Run open-loop inference over whole runs and write predictions.csv

        The NRMSE is reported when the runs carry the target channel.

        Returns:
            Dictionary with prediction count (and NRMSE), or (dictionary, exit code) on failure
        """
        try:
            config = PipelineConfig.load(config_path, overrides)
            model = self._load_model(config)
            ds, inputs = self.orchestration_service.prepare_unsplit(config, model)

            pieces = self.ngrc_service.predict_range(model, ds, 0, ds.length)
            if not pieces:
                raise InsufficientHistoryError(
                    f"run '{ds.run_id}' is too short for k*s = {model.metaparams.history}")
            idx = np.concatenate([i for i, _ in pieces])
            prediction = np.concatenate([p for _, p in pieces])

            target = model.target_channel
            columns = {'time': ds.time[idx], f'predicted_{target}': prediction}
            data = {'run_id': ds.run_id, 'n_predictions': len(idx), 'seed': config.seed}
            if target in ds.channels:
                truth = ds[target][idx]
                columns[f'true_{target}'] = truth
                data['nrmse'] = self.evaluation_service.nrmse(prediction, truth)

            out_dir = config.out_dir
            predictions_path = self.run_file_service.write_table(out_dir / 'predictions.csv', columns)
            inputs = dict(inputs, model=config.model_path)
            manifest = self.manifest_service.write_manifest(
                out_dir, 'predict', config, {'predictions': predictions_path}, inputs)

            message = f"Predicted {len(idx)} steps of '{target}'"
            if 'nrmse' in data:
                message += f", NRMSE {data['nrmse'] * 100:.3f}%"
            return ProcessingResult(
                success=True,
                message=message,
                data=data,
                artifacts={'predictions': str(predictions_path), 'manifest': str(manifest)}
            ).to_dict()
        except Exception as e:
            return failure(e, 'predict')

    def evaluate(self, config_path=None, overrides=None):
        """
        Score a saved model on the test slices of the configured runs

        Returns:
            Dictionary with pooled and per-slice NRMSE, or (dictionary, exit code) on failure
        """
        try:
            config = PipelineConfig.load(config_path, overrides)
            model = self._load_model(config)
            ds, slices, _, inputs = self.orchestration_service.prepare(config, model)
            if not slices.labelled(TEST):
                raise UsageError('the slice layout has no test slices; nothing to evaluate')

            report = self.evaluation_service.evaluate(model, ds, slices)
            out_dir = config.out_dir
            artifacts = self.orchestration_service.write_evaluation(report, out_dir, ds.run_id, config.reports)
            manifest = self.manifest_service.write_manifest(
                out_dir, 'evaluate', config, artifacts, dict(inputs, model=config.model_path))

            return ProcessingResult(
                success=True,
                message=f"Test NRMSE {report.nrmse * 100:.3f}% over {report.n_test} points",
                data=dict(report.to_dict(), run_id=ds.run_id, seed=config.seed),
                artifacts=dict({k: str(v) for k, v in artifacts.items()}, manifest=str(manifest))
            ).to_dict()
        except Exception as e:
            return failure(e, 'evaluate model')
