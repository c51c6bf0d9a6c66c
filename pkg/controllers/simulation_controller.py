from controllers import failure
from models.pipeline_config import PipelineConfig
from models.processing_result import ProcessingResult


class SimulationController:
    """Controller for surrogate engine runs"""

    def __init__(self, orchestration_service, run_file_service, manifest_service):
        """
        Initialize the controller with required dependencies

        Args:
            orchestration_service: PipelineOrchestrationService
            run_file_service: RunFileService used to write the run file
            manifest_service: ManifestService
        """
        self.orchestration_service = orchestration_service
        self.run_file_service = run_file_service
        self.manifest_service = manifest_service

    def simulate(self, config_path=None, overrides=None):
        """
        Simulate the configured flight profile and write it as a run file

        Returns:
            Dictionary with run size and artifact paths, or (dictionary, exit code) on failure
        """
        try:
            config = PipelineConfig.load(config_path, overrides)
            run, ds = self.orchestration_service.simulate_run(config)

            out_dir = config.out_dir
            params = run.params
            header = {
                'dt': params.dt,
                'duration': float(run.time[-1] - run.time[0]),
                'initial_speed': params.initial_speed if params.initial_speed is not None else '',
                'segments': ';'.join(f'{t:g}:{v:g}' for t, v in run.profile.segments)
            }
            run_path = self.run_file_service.write_run(out_dir / 'run.csv', ds, header)
            artifacts = {'run': run_path}
            manifest = self.manifest_service.write_manifest(
                out_dir, 'simulate', config, artifacts,
                parameters={'engine': params.to_dict(), 'profile': run.profile.to_dict()})

            return ProcessingResult(
                success=True,
                message=f'Simulated {len(run)} samples of the {run.profile.kind} profile',
                data={
                    'run_id': ds.run_id,
                    'samples': len(run),
                    'rate': ds.rate,
                    'seed': config.seed
                },
                artifacts={'run': str(run_path), 'manifest': str(manifest)}
            ).to_dict()
        except Exception as e:
            return failure(e, 'simulate run')
