from flask import Blueprint

from commands.options import pipeline_options, respond
from controllers.model_controller import ModelController

# Create blueprint
model_bp = Blueprint('model', __name__, cli_group=None)

# Store reference to controller
model_controller = None


def init_commands(orchestration_service, ngrc_service, evaluation_service, model_store_service,
                  run_file_service, manifest_service):
    """Initialize commands with required dependencies"""
    global model_controller
    model_controller = ModelController(orchestration_service, ngrc_service, evaluation_service,
                                       model_store_service, run_file_service, manifest_service)


@model_bp.cli.command('train')
@pipeline_options
def train(config_path, overrides, quiet):
    """Train an NG-RC model and score it on the test slices."""
    respond(model_controller.train(config_path, overrides), quiet)


@model_bp.cli.command('predict')
@pipeline_options
def predict(config_path, overrides, quiet):
    """Predict the target over whole runs with a saved model."""
    respond(model_controller.predict(config_path, overrides), quiet)


@model_bp.cli.command('evaluate')
@pipeline_options
def evaluate(config_path, overrides, quiet):
    """Score a saved model on the test slices of the configured runs."""
    respond(model_controller.evaluate(config_path, overrides), quiet)
