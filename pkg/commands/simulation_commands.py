import click
from flask import Blueprint

from commands.options import pipeline_options, respond
from controllers.simulation_controller import SimulationController

# Create blueprint
simulation_bp = Blueprint('simulation', __name__, cli_group=None)

# Store reference to controller
simulation_controller = None


def init_commands(orchestration_service, run_file_service, manifest_service):
    """Initialize commands with required dependencies"""
    global simulation_controller
    simulation_controller = SimulationController(orchestration_service, run_file_service, manifest_service)


@simulation_bp.cli.command('simulate')
@click.option('--profile', help='default, unit_step, ascending, descending or eccentric (PROFILE).')
@click.option('--duration', type=float, help='Simulated seconds (DURATION); defaults to the profile length.')
@pipeline_options
def simulate(config_path, overrides, quiet, profile, duration):
    """Simulate the surrogate engine and write a run file."""
    if profile is not None:
        overrides['PROFILE'] = profile
    if duration is not None:
        overrides['DURATION'] = duration
    respond(simulation_controller.simulate(config_path, overrides), quiet)
