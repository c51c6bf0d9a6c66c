from models.calibration import CalibrationFit, CalibrationPoint
from models.dataset import Channel, NormalizationSpec, RawRun, RunDataset, Slice, SliceSpec
from models.engine import EngineParams, FlightProfile, SimRecord, SimulatedRun
from models.evaluation import BenchmarkReport, EvalReport, GridResult, GridSpec, PredictionTrace
from models.ngrc import FeatureMatrix, Metaparameters, TrainedModel, TrainingStats, feature_count
from models.pipeline_config import PipelineConfig
from models.processing_result import ProcessingResult

__all__ = [
    'BenchmarkReport', 'CalibrationFit', 'CalibrationPoint', 'Channel', 'EngineParams',
    'EvalReport', 'FeatureMatrix', 'FlightProfile', 'GridResult', 'GridSpec', 'Metaparameters',
    'NormalizationSpec', 'PipelineConfig', 'PredictionTrace', 'ProcessingResult', 'RawRun',
    'RunDataset', 'SimRecord', 'SimulatedRun', 'Slice', 'SliceSpec', 'TrainedModel',
    'TrainingStats', 'feature_count'
]
