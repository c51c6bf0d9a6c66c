import json

from controllers import failure
from models.dataset import TEST, TRAIN
from models.errors import UsageError
from models.pipeline_config import PipelineConfig
from models.processing_result import ProcessingResult

GRID_COLUMNS = ['index', 'k', 's', 'alpha', 'd', 'status', 'nrmse', 'error']


class SearchController:
    """Controller for metaparameter search and timing benchmarks"""

    def __init__(self, orchestration_service, ngrc_service, evaluation_service, model_store_service,
                 run_file_service, manifest_service):
        self.orchestration_service = orchestration_service
        self.ngrc_service = ngrc_service
        self.evaluation_service = evaluation_service
        self.model_store_service = model_store_service
        self.run_file_service = run_file_service
        self.manifest_service = manifest_service

    def _prepare(self, config):
        ds, slices, calibration, inputs = self.orchestration_service.prepare(config)
        if not slices.labelled(TRAIN) or not slices.labelled(TEST):
            raise UsageError('the slice layout needs both train and test slices')
        return ds, slices, calibration, inputs

    def gridsearch(self, config_path=None, overrides=None):
        """
        Score every grid combination, write grid_results.csv/.json and keep the best model

        Failed combinations are listed in the table; the command still succeeds
        when at least one combination produced a score.

        Returns:
            Dictionary with the winning metaparameters, or (dictionary, exit code) on failure
        """
        try:
            config = PipelineConfig.load(config_path, overrides)
            grid = config.grid_spec()
            ds, slices, calibration, inputs = self._prepare(config)

            best, results = self.evaluation_service.grid_search(
                ds, slices, grid, config.input_channels, config.target_channel, workers=config.workers)

            out_dir = config.out_dir
            table_path = self.run_file_service.write_table(
                out_dir / 'grid_results.csv', [r.to_dict() for r in results], columns=GRID_COLUMNS)
            best_result = next(r for r in results if r.status == 'ok' and r.metaparams == best)
            document = {
                'grid': grid.to_dict(),
                'best': best_result.to_dict(),
                'results': [r.to_dict() for r in results]
            }
            document_path = out_dir / 'grid_results.json'
            document_path.write_text(json.dumps(document, indent=2) + '\n')

            model = self.ngrc_service.fit_model(
                ds, slices, config.input_channels, config.target_channel, best,
                calibration=calibration, seed=config.seed)
            model_path = self.model_store_service.save(model, out_dir / 'model.json', include_timing=False)
            report = self.evaluation_service.evaluate(model, ds, slices)

            artifacts = {'grid_results': table_path, 'grid_results_json': document_path, 'model': model_path}
            artifacts.update(self.orchestration_service.write_evaluation(report, out_dir, ds.run_id, config.reports))
            manifest = self.manifest_service.write_manifest(out_dir, 'gridsearch', config, artifacts, inputs)

            failed = sum(1 for r in results if r.status != 'ok')
            return ProcessingResult(
                success=True,
                message=(f"Best of {len(results)} combinations: k={best.k}, s={best.s}, alpha={best.alpha:g}, "
                         f"test NRMSE {report.nrmse * 100:.3f}%"),
                data={
                    'run_id': ds.run_id,
                    'grid': grid.to_dict(),
                    'combinations': len(results),
                    'failed': failed,
                    'best': best.to_dict(),
                    'd': model.d,
                    'nrmse': report.nrmse,
                    'seed': config.seed
                },
                artifacts=dict({k: str(v) for k, v in artifacts.items()}, manifest=str(manifest))
            ).to_dict()
        except Exception as e:
            return failure(e, 'run grid search')

    def benchmark(self, config_path=None, overrides=None, repeats=None):
        """
        Time training and per-step inference against the configured budgets

        Returns:
            Dictionary with median timings and budget verdicts, or (dictionary, exit code) on failure
        """
        try:
            config = PipelineConfig.load(config_path, overrides)
            meta = config.metaparameters()
            ds, slices, calibration, inputs = self._prepare(config)

            model = self.ngrc_service.fit_model(
                ds, slices, config.input_channels, config.target_channel, meta,
                calibration=calibration, seed=config.seed)
            kwargs = {'repeats': repeats} if repeats else {}
            report = self.evaluation_service.benchmark(
                model, ds, slices, train_budget=config.train_budget, step_budget=config.step_budget, **kwargs)

            out_dir = config.out_dir
            out_dir.mkdir(parents=True, exist_ok=True)
            document = dict(report.to_dict(), metaparams=meta.to_dict(), run_id=ds.run_id, seed=config.seed)
            report_path = out_dir / 'benchmark.json'
            report_path.write_text(json.dumps(document, indent=2) + '\n')
            manifest = self.manifest_service.write_manifest(
                out_dir, 'benchmark', config, {'benchmark': report_path}, inputs)

            verdict = 'within' if report.train_within_budget and report.step_within_budget else 'over'
            return ProcessingResult(
                success=True,
                message=(f"Training {report.train_time * 1e3:.2f} ms on {report.n_train} points, "
                         f"{report.inference_per_step * 1e6:.2f} us per step ({verdict} budget)"),
                data=document,
                artifacts={'benchmark': str(report_path), 'manifest': str(manifest)}
            ).to_dict()
        except Exception as e:
            return failure(e, 'run benchmark')
