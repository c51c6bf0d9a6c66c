import json

from controllers import failure
from models.errors import UsageError
from models.pipeline_config import PipelineConfig
from models.processing_result import ProcessingResult


class CalibrationController:
    """Controller for load-cell calibration"""

    def __init__(self, run_file_service, calibration_service, manifest_service):
        self.run_file_service = run_file_service
        self.calibration_service = calibration_service
        self.manifest_service = manifest_service

    def calibrate(self, points_path=None, config_path=None, overrides=None):
        """
        Fit force = slope * volts + intercept to a calibration points file

        Args:
            points_path: CSV of (volts, newtons) readings; falls back to the CALIBRATION key
            config_path: Optional config file
            overrides: Command-line config overrides

        Returns:
            Dictionary with slope, intercept and MSE, or (dictionary, exit code) on failure
        """
        try:
            config = PipelineConfig.load(config_path, overrides)
            path = points_path or config.calibration
            if path is None:
                raise UsageError('calibrate needs a points file (argument or CALIBRATION key)')

            readings = self.run_file_service.load_calibration_readings(path)
            points = self.calibration_service.average_readings(readings)
            fit = self.calibration_service.fit_calibration(points)
            slope_error = self.calibration_service.slope_standard_error(points)

            out_dir = config.out_dir
            out_dir.mkdir(parents=True, exist_ok=True)
            document = dict(fit.to_dict(), slope_standard_error=slope_error, n_readings=len(readings))
            fit_path = out_dir / 'calibration.json'
            fit_path.write_text(json.dumps(document, indent=2) + '\n')
            manifest = self.manifest_service.write_manifest(
                out_dir, 'calibrate', config, {'calibration': fit_path}, inputs={'points': path})

            return ProcessingResult(
                success=True,
                message=f'slope={fit.slope:.6g} N/V intercept={fit.intercept:.6g} N mse={fit.mse:.6g} N^2',
                data=document,
                artifacts={'calibration': str(fit_path), 'manifest': str(manifest)}
            ).to_dict()
        except Exception as e:
            return failure(e, 'fit calibration')
