import json
from pathlib import Path

from models.calibration import CalibrationFit
from models.dataset import NormalizationSpec
from models.errors import ConfigurationError, SchemaError, SchemaVersionError
from models.ngrc import Metaparameters, TrainedModel, TrainingStats, feature_count

SCHEMA_NAME = 'ngrc-engine-twin/model'
SCHEMA_VERSION = 1


class ModelStoreService:
    """Versioned JSON persistence for trained models"""

    def to_document(self, model, include_timing=True):
        """Build the JSON document for a model; floats keep full precision"""
        stats = model.training_stats.to_dict()
        if not include_timing:
            stats['train_time'] = None
        return {
            'schema': SCHEMA_NAME,
            'version': SCHEMA_VERSION,
            'metaparams': model.metaparams.to_dict(),
            'input_channels': list(model.input_channels),
            'target_channel': model.target_channel,
            'd': model.d,
            'w_out': [float(w) for w in model.w_out],
            'normalization': model.normalization.to_dict(),
            'training_stats': stats,
            'sample_rate': model.sample_rate,
            'calibration': model.calibration.to_dict() if model.calibration else None,
            'seed': model.seed,
            'meta': model.meta
        }

    def serialize(self, model, include_timing=True):
        """
        Encode a model as JSON bytes

        Args:
            model: TrainedModel
            include_timing: When False the wall-clock training time is stored as null
                so identical runs produce identical files
        """
        document = self.to_document(model, include_timing)
        return (json.dumps(document, indent=2) + '\n').encode('utf-8')

    def deserialize(self, data):
        """Decode JSON bytes into a TrainedModel, rejecting unknown schemas and versions"""
        try:
            document = json.loads(data)
        except (json.JSONDecodeError, UnicodeDecodeError) as e:
            raise SchemaError(f'model file is not valid JSON: {e}')
        if not isinstance(document, dict) or document.get('schema') != SCHEMA_NAME:
            raise SchemaError(f"not a model document (expected schema '{SCHEMA_NAME}')")

        version = document.get('version')
        if not isinstance(version, int):
            raise SchemaError('model document has no integer version')
        if version > SCHEMA_VERSION:
            raise SchemaVersionError(
                f'model schema version {version} is newer than supported version {SCHEMA_VERSION}')
        if version < 1:
            raise SchemaVersionError(f'unsupported model schema version {version}')

        try:
            meta = Metaparameters(**document['metaparams'])
            channels = tuple(document['input_channels'])
            w_out = [float(w) for w in document['w_out']]
            expected = feature_count(len(channels), meta.k)
            if document['d'] != expected or len(w_out) != expected:
                raise SchemaError(
                    f"feature count mismatch: d={document['d']}, {len(w_out)} weights, "
                    f"{expected} implied by {len(channels)} channels at k={meta.k}")
            stats = document['training_stats']
            calibration = document.get('calibration')
            return TrainedModel(
                w_out=w_out,
                metaparams=meta,
                input_channels=channels,
                target_channel=document['target_channel'],
                normalization=NormalizationSpec.from_dict(document['normalization']),
                training_stats=TrainingStats(int(stats['n_train']), stats.get('train_time')),
                sample_rate=document.get('sample_rate'),
                calibration=CalibrationFit.from_dict(calibration) if calibration else None,
                seed=document.get('seed'),
                meta=document.get('meta') or {}
            )
        except (KeyError, TypeError, ValueError, ConfigurationError) as e:
            raise SchemaError(f'malformed model document: {e}')

    def save(self, model, path, include_timing=True):
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(self.serialize(model, include_timing))
        return path

    def load(self, path):
        path = Path(path)
        if not path.exists():
            raise SchemaError(f'model file not found: {path}')
        return self.deserialize(path.read_bytes())
