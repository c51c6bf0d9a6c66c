import click
from flask import Blueprint

from commands.options import pipeline_options, respond
from controllers.calibration_controller import CalibrationController

calibration_bp = Blueprint('calibration', __name__, cli_group=None)

calibration_controller = None


def init_commands(run_file_service, calibration_service, manifest_service):
    """Initialize commands with required dependencies"""
    global calibration_controller
    calibration_controller = CalibrationController(run_file_service, calibration_service, manifest_service)


@calibration_bp.cli.command('calibrate')
@click.argument('points', required=False, type=click.Path(dir_okay=False))
@pipeline_options
def calibrate(config_path, overrides, quiet, points):
    """Fit a load-cell calibration line to POINTS (volts,newtons CSV)."""
    respond(calibration_controller.calibrate(points, config_path, overrides), quiet)
