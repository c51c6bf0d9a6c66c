from pathlib import Path

import pytest

from app import create_app
from models.engine import EngineParams
from services.calibration_service import CalibrationService
from services.dataset_service import DatasetService
from services.engine_sim_service import EngineSimService
from services.evaluation_service import EvaluationService
from services.model_store_service import ModelStoreService
from services.ngrc_service import NgrcService
from services.run_file_service import RunFileService

DATA_DIR = Path(__file__).resolve().parent.parent / 'data'

INPUT_CHANNELS = ['requested_speed', 'actual_speed', 'egt', 'far']


@pytest.fixture
def app():
    return create_app({'TESTING': True, 'LOG_LEVEL': 'WARNING'})


@pytest.fixture
def runner(app):
    return app.test_cli_runner()


@pytest.fixture
def data_dir():
    return DATA_DIR


@pytest.fixture
def engine_sim_service():
    return EngineSimService()


@pytest.fixture
def dataset_service():
    return DatasetService()


@pytest.fixture
def run_file_service():
    return RunFileService()


@pytest.fixture
def calibration_service():
    return CalibrationService()


@pytest.fixture
def ngrc_service(dataset_service):
    return NgrcService(dataset_service)


@pytest.fixture
def evaluation_service(ngrc_service, dataset_service):
    return EvaluationService(ngrc_service, dataset_service)


@pytest.fixture
def model_store_service():
    return ModelStoreService()


@pytest.fixture(scope='session')
def default_run():
    """Default 26 s profile at 15 ms with 0.5 % sensor noise"""
    service = EngineSimService()
    return service.simulate(service.default_profile(), EngineParams(noise_sigma=0.005, seed=0))


@pytest.fixture
def default_dataset(engine_sim_service, default_run):
    return engine_sim_service.to_dataset(default_run, 'sim-default-0')


@pytest.fixture
def default_slices(dataset_service, default_dataset):
    return dataset_service.make_slices(default_dataset.length, 9, 'alternating', first='test')
