import logging
import os

from flask import Flask
from flask.cli import FlaskGroup

from commands import blueprints
from commands.calibration_commands import init_commands as init_calibration_commands
from commands.model_commands import init_commands as init_model_commands
from commands.search_commands import init_commands as init_search_commands
from commands.simulation_commands import init_commands as init_simulation_commands
from services.calibration_service import CalibrationService
from services.chart_generation_service import ChartGenerationService
from services.dataset_service import DatasetService
from services.engine_sim_service import EngineSimService
from services.evaluation_service import EvaluationService
from services.manifest_service import ManifestService
from services.model_store_service import ModelStoreService
from services.ngrc_service import NgrcService
from services.pdf_report_service import PdfReportService
from services.pipeline_orchestration_service import PipelineOrchestrationService
from services.run_file_service import RunFileService

LOG_FORMAT = '%(asctime)s %(levelname)s %(name)s: %(message)s'


def create_app(test_config=None):
    """Create and configure the Flask application"""
    app = Flask(__name__)
    app.config.from_mapping(LOG_LEVEL=os.environ.get('NGRC_LOG_LEVEL', 'INFO'))
    if test_config:
        app.config.update(test_config)

    logging.basicConfig(format=LOG_FORMAT)
    logging.getLogger().setLevel(app.config['LOG_LEVEL'])

    # Initialize services
    engine_sim_service = EngineSimService()
    run_file_service = RunFileService()
    dataset_service = DatasetService()
    calibration_service = CalibrationService()
    ngrc_service = NgrcService(dataset_service)
    evaluation_service = EvaluationService(ngrc_service, dataset_service)
    model_store_service = ModelStoreService()
    manifest_service = ManifestService()
    chart_service = ChartGenerationService()
    pdf_service = PdfReportService()
    orchestration_service = PipelineOrchestrationService(
        engine_sim_service, run_file_service, dataset_service, calibration_service, chart_service, pdf_service)

    # Initialize command dependencies
    init_simulation_commands(orchestration_service, run_file_service, manifest_service)
    init_calibration_commands(run_file_service, calibration_service, manifest_service)
    init_model_commands(orchestration_service, ngrc_service, evaluation_service, model_store_service,
                        run_file_service, manifest_service)
    init_search_commands(orchestration_service, ngrc_service, evaluation_service, model_store_service,
                         run_file_service, manifest_service)

    # Register blueprints
    for blueprint in blueprints:
        app.register_blueprint(blueprint)

    app.logger.debug('NG-RC engine twin ready with %d command groups', len(blueprints))
    return app


def main():
    """Entry point of the ngrc-twin command"""
    cli = FlaskGroup(
        name='ngrc-twin',
        help='NG-RC digital twin of a turbine engine: simulate, calibrate, train, predict, evaluate, '
             'gridsearch, benchmark.',
        create_app=create_app,
        add_default_commands=False,
        add_version_option=False,
        load_dotenv=True,
        set_debug_flag=False
    )
    cli.main(prog_name='ngrc-twin')


if __name__ == '__main__':
    main()
