import hashlib
import json
from pathlib import Path

MANIFEST_NAME = 'manifest.json'


class ManifestService:
    """Provenance record written next to every command's outputs"""

    @staticmethod
    def file_digest(path):
        digest = hashlib.sha256()
        with open(path, 'rb') as f:
            for chunk in iter(lambda: f.read(1 << 16), b''):
                digest.update(chunk)
        return digest.hexdigest()

    def write_manifest(self, out_dir, command, config, artifacts, inputs=None, parameters=None):
        """
        Write manifest.json describing one command invocation

        Args:
            out_dir: Output directory
            command: Subcommand name
            config: PipelineConfig used (explicit keys are replayable, resolved keys are informative)
            artifacts: Mapping of artifact name -> path
            inputs: Optional mapping of input name -> path, hashed as well
            parameters: Optional JSON-ready mapping of the effective parameters behind the outputs

        Returns:
            Path to the manifest
        """
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        manifest = {
            'command': command,
            'seed': config.seed,
            'config': dict(sorted(config.explicit.items())),
            'resolved_config': config.resolved(),
            'inputs': {name: {'path': str(p), 'sha256': self.file_digest(p)}
                       for name, p in sorted((inputs or {}).items())},
            'artifacts': {name: {'path': Path(p).name, 'sha256': self.file_digest(p)}
                          for name, p in sorted(artifacts.items())}
        }
        if parameters is not None:
            manifest['parameters'] = parameters
        path = out_dir / MANIFEST_NAME
        path.write_text(json.dumps(manifest, indent=2) + '\n')
        return path
