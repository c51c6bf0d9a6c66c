import click
from flask import Blueprint

from commands.options import pipeline_options, respond
from controllers.search_controller import SearchController

search_bp = Blueprint('search', __name__, cli_group=None)

search_controller = None


def init_commands(orchestration_service, ngrc_service, evaluation_service, model_store_service,
                  run_file_service, manifest_service):
    """Initialize commands with required dependencies"""
    global search_controller
    search_controller = SearchController(orchestration_service, ngrc_service, evaluation_service,
                                         model_store_service, run_file_service, manifest_service)


@search_bp.cli.command('gridsearch')
@pipeline_options
def gridsearch(config_path, overrides, quiet):
    """Search lookback, skip and ridge alpha; keep the best model."""
    respond(search_controller.gridsearch(config_path, overrides), quiet)


@search_bp.cli.command('benchmark')
@click.option('--repeats', type=click.IntRange(min=1), help='Timed repetitions (median is reported).')
@pipeline_options
def benchmark(config_path, overrides, quiet, repeats):
    """Time training and per-step inference against the budgets."""
    respond(search_controller.benchmark(config_path, overrides, repeats), quiet)
