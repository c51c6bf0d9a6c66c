import json
import logging
import math
from pathlib import Path

from models.calibration import CalibrationFit
from models.dataset import TEST, TRAIN, Channel, Slice, SliceSpec
from models.errors import ContractError, DataFormatError, UsageError

logger = logging.getLogger(__name__)


class PipelineOrchestrationService:
    """Service for orchestrating the ingest -> split -> train -> report workflow"""

    def __init__(self, engine_sim_service, run_file_service, dataset_service, calibration_service,
                 chart_service, pdf_service):
        """
        Initialize the orchestration service

        Args:
            engine_sim_service: EngineSimService used when no input run is given
            run_file_service: RunFileService for run and calibration files
            dataset_service: DatasetService
            calibration_service: CalibrationService
            chart_service: ChartGenerationService instance
            pdf_service: PdfReportService instance
        """
        self.engine_sim_service = engine_sim_service
        self.run_file_service = run_file_service
        self.dataset_service = dataset_service
        self.calibration_service = calibration_service
        self.chart_service = chart_service
        self.pdf_service = pdf_service

    def simulate_run(self, config):
        """Simulate the configured profile and return (SimulatedRun, RunDataset)"""
        profile = self.engine_sim_service.profile_library(config.profile, seed=config.seed)
        run = self.engine_sim_service.simulate(profile, config.engine_params(), config.duration)
        run_id = f"sim-{profile.kind}-{config.seed}"
        return run, self.engine_sim_service.to_dataset(run, run_id)

    def load_calibration(self, config):
        """Fit the configured calibration file, or None when no file is configured"""
        if config.calibration is None:
            return None
        readings = self.run_file_service.load_calibration_readings(config.calibration)
        points = self.calibration_service.average_readings(readings)
        return self.calibration_service.fit_calibration(points)

    def load_dataset(self, path, config, calibration=None):
        """
        Load one run file, convert load-cell volts to thrust when needed, and align it

        Args:
            path: Run file
            config: PipelineConfig (target rate, target and voltage channel names)
            calibration: CalibrationFit from a calibration file; run metadata is used otherwise

        Returns:
            (RunDataset, CalibrationFit or None actually applied)
        """
        raw = self.run_file_service.load_run(path)
        channels = list(raw.channels)
        names = raw.channel_names
        applied = None

        if config.target_channel not in names and config.voltage_channel in names:
            applied = calibration or self._calibration_from_meta(raw)
            if applied is None:
                raise DataFormatError(
                    f"run '{raw.run_id}' has load-cell channel '{config.voltage_channel}' but no calibration; "
                    f"set CALIBRATION or calibration_slope/calibration_intercept metadata")
            volts = raw.channel(config.voltage_channel)
            thrust = self.calibration_service.apply_calibration(applied, volts.samples)
            channels.append(Channel(config.target_channel, 'N', volts.rate, thrust, volts.start_time))
            logger.info("Converted '%s' to '%s' with slope %.6g N/V", volts.name, config.target_channel, applied.slope)

        ds = self.dataset_service.align(channels, config.target_rate, run_id=raw.run_id, meta=raw.meta)
        return ds, applied

    def _calibration_from_meta(self, raw):
        if 'calibration_slope' not in raw.meta or 'calibration_intercept' not in raw.meta:
            return None
        try:
            return CalibrationFit(float(raw.meta['calibration_slope']),
                                  float(raw.meta['calibration_intercept']),
                                  float(raw.meta.get('calibration_mse', 0.0)),
                                  int(raw.meta.get('calibration_points', 2)))
        except ValueError as e:
            raise DataFormatError(f"run '{raw.run_id}' has invalid calibration metadata: {e}")

    def load_inputs(self, config):
        """
        Load every configured run (or simulate one when none is configured)

        Returns:
            (list of RunDataset, CalibrationFit or None, mapping of input name -> path)
        """
        if not config.inputs:
            _, ds = self.simulate_run(config)
            return [ds], None, {}

        calibration = self.load_calibration(config)
        datasets, applied = [], None
        for path in config.inputs:
            ds, used = self.load_dataset(path, config, calibration)
            datasets.append(ds)
            applied = applied or used
        inputs = {f'input_{i}': p for i, p in enumerate(config.inputs)}
        if config.calibration is not None:
            inputs['calibration'] = config.calibration
        return datasets, applied, inputs

    def split(self, datasets, config):
        """
        Build the training/evaluation dataset and its slices for the configured split mode

        slices: one dataset (several are concatenated) cut into N_SLICES temporal slices,
            or laid out explicitly by SLICES
        cross_run: train on the first run, test on the second
        mixed_halves: train on the first half of run 1 and second half of run 2, test on the rest

        Returns:
            (RunDataset, SliceSpec)
        """
        mode = config.split_mode
        if mode == 'slices':
            ds = self.dataset_service.merge_runs([(d, (0, d.length)) for d in datasets])
            if config.slice_layout is not None:
                return ds, SliceSpec(tuple(config.slice_layout), ds.length)
            slices = self.dataset_service.make_slices(
                ds.length, config.n_slices, config.slice_pattern, seed=config.seed, first=config.slice_first)
            return ds, slices

        if len(datasets) != 2:
            raise UsageError(f"split mode '{mode}' needs exactly two input runs, got {len(datasets)}")
        a, b = datasets
        if mode == 'cross_run':
            ds = self.dataset_service.merge_runs([(a, (0, a.length)), (b, (0, b.length))])
            return ds, SliceSpec((Slice(0, a.length, TRAIN), Slice(a.length, ds.length, TEST)), ds.length)

        half_a, half_b = a.length // 2, b.length // 2
        ds = self.dataset_service.merge_runs([
            (a, (0, half_a)), (b, (half_b, b.length)), (a, (half_a, a.length)), (b, (0, half_b))
        ])
        n_train = half_a + b.length - half_b
        return ds, SliceSpec((Slice(0, n_train, TRAIN), Slice(n_train, ds.length, TEST)), ds.length)

    def prepare(self, config, model=None):
        """
        Load the configured inputs and split them

        When a model is given and TARGET_RATE is not set, runs are aligned at
        the model's sample rate.

        Returns:
            (RunDataset, SliceSpec, CalibrationFit or None, mapping of input name -> path)
        """
        datasets, calibration, inputs = self._load_for_model(config, model)
        ds, slices = self.split(datasets, config)
        logger.info("Prepared '%s': %d samples at %g S/s, %d train / %d test slices",
                    ds.run_id, ds.length, ds.rate, len(slices.labelled(TRAIN)), len(slices.labelled(TEST)))
        return ds, slices, calibration, inputs

    def prepare_unsplit(self, config, model=None):
        """
        Load the configured inputs as one dataset with a junction between runs

        Returns:
            (RunDataset, mapping of input name -> path)
        """
        datasets, _, inputs = self._load_for_model(config, model)
        return self.dataset_service.merge_runs([(d, (0, d.length)) for d in datasets]), inputs

    def _load_for_model(self, config, model):
        if model is not None and model.sample_rate and not config.is_set('TARGET_RATE'):
            config = config.with_overrides(TARGET_RATE=repr(float(model.sample_rate)))
        datasets, calibration, inputs = self.load_inputs(config)
        if model is not None and model.sample_rate:
            for ds in datasets:
                if not math.isclose(ds.rate, model.sample_rate, rel_tol=1e-6):
                    raise ContractError(
                        f"run '{ds.run_id}' rate {ds.rate:g} S/s does not match the model rate {model.sample_rate:g} S/s")
        return datasets, calibration, inputs

    def write_evaluation(self, report, out_dir, run_id, reports=True, prefix='report'):
        """
        Write the evaluation report as JSON, per-slice CSV, plot-ready trace CSV, chart and PDF

        Returns:
            Mapping of artifact name -> path
        """
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        artifacts = {}

        json_path = out_dir / f'{prefix}.json'
        json_path.write_text(json.dumps(dict(report.to_dict(), run_id=run_id), indent=2) + '\n')
        artifacts[prefix] = json_path

        rows = [{'slice': i, 'start': s, 'end': e, 'nrmse': v} for i, s, e, v in report.slice_nrmse]
        artifacts[f'{prefix}_slices'] = self.run_file_service.write_table(
            out_dir / f'{prefix}_slices.csv', rows, columns=['slice', 'start', 'end', 'nrmse'])

        trace = report.trace
        artifacts['trace'] = self.run_file_service.write_table(out_dir / 'trace.csv', {
            'time': trace.time,
            'truth': trace.truth,
            'prediction': trace.prediction,
            'label': trace.label
        })

        if reports:
            chart_path = self.chart_service.generate_chart(trace, str(out_dir / 'prediction_chart.png'))
            artifacts['chart'] = Path(chart_path)
            pdf_path = self.pdf_service.generate_pdf_report(report, chart_path, str(out_dir / f'{prefix}.pdf'), run_id)
            artifacts['pdf'] = Path(pdf_path)
        return artifacts
