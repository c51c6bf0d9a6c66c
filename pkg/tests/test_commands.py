import hashlib
import json

import pytest

from models.dataset import RunDataset

QUIET_REPORTS = ['--set', 'REPORTS=false']


def invoke(runner, *args):
    return runner.invoke(args=[str(a) for a in args])


def payload(result):
    assert result.exit_code == 0, result.output
    return json.loads(result.stdout)


def error(result):
    return json.loads(result.output[result.output.index('{'):])


@pytest.fixture
def trained(runner, tmp_path):
    """Model trained on the default simulated run"""
    out = tmp_path / 'trained'
    payload(invoke(runner, 'train', '--out', out, *QUIET_REPORTS))
    return out


class TestSimulate:
    def test_writes_a_loadable_run(self, runner, run_file_service, tmp_path):
        data = payload(invoke(runner, 'simulate', '--out', tmp_path))

        raw = run_file_service.load_run(tmp_path / 'run.csv')
        assert data['data']['samples'] == 1734
        assert data['data']['run_id'] == 'sim-default-0'
        assert len(raw.channel('thrust')) == 1734
        assert raw.meta['profile'] == 'default'
        assert (tmp_path / 'manifest.json').exists()

    def test_manifest_records_engine_parameters(self, runner, tmp_path):
        payload(invoke(runner, 'simulate', '--out', tmp_path, '--set', 'KP=0.03', '--set', 'TAU_SPOOL=0.6'))

        parameters = json.loads((tmp_path / 'manifest.json').read_text())['parameters']
        engine = parameters['engine']
        assert set(engine) >= {'tau_spool', 'kp', 'ki', 'c_fuel', 'far_min', 'far_max',
                               'thrust_coeffs', 'egt_coeffs', 'noise_sigma', 'seed', 'dt'}
        assert engine['kp'] == 0.03
        assert engine['tau_spool'] == 0.6
        assert engine['thrust_coeffs'] == [16000.0, 2000.0, 1500.0]
        assert parameters['profile']['kind'] == 'default'
        assert parameters['profile']['segments'][0][0] == 0.0

    def test_same_seed_same_file(self, runner, tmp_path):
        invoke(runner, 'simulate', '--out', tmp_path / 'a', '--seed', 3, '--profile', 'eccentric')
        invoke(runner, 'simulate', '--out', tmp_path / 'b', '--seed', 3, '--profile', 'eccentric')

        assert (tmp_path / 'a' / 'run.csv').read_bytes() == (tmp_path / 'b' / 'run.csv').read_bytes()

    def test_duration_below_one_step(self, runner, tmp_path):
        result = invoke(runner, 'simulate', '--out', tmp_path, '--duration', 0)

        assert result.exit_code == 2
        assert error(result)['kind'] == 'usage'

    def test_unknown_profile(self, runner, tmp_path):
        assert invoke(runner, 'simulate', '--out', tmp_path, '--profile', 'barrel_roll').exit_code == 2


class TestCalibrate:
    def test_sample_points(self, runner, data_dir, tmp_path):
        data = payload(invoke(runner, 'calibrate', data_dir / 'calibration_points.csv', '--out', tmp_path))

        document = json.loads((tmp_path / 'calibration.json').read_text())
        assert document['slope'] == pytest.approx(24.75, rel=5e-3)
        assert document['n_readings'] == 26
        assert data['message'].startswith('slope=')

    def test_single_point(self, runner, tmp_path):
        points = tmp_path / 'one.csv'
        points.write_text('volts,newtons\n1.0,10.0\n1.0,10.0\n')

        assert invoke(runner, 'calibrate', points, '--out', tmp_path).exit_code == 2

    def test_points_file_is_required(self, runner, tmp_path):
        assert invoke(runner, 'calibrate', '--out', tmp_path).exit_code == 2


class TestTrain:
    def test_default_run(self, runner, tmp_path):
        data = payload(invoke(runner, 'train', '--out', tmp_path, *QUIET_REPORTS))

        assert data['data']['d'] == 45
        assert data['data']['nrmse'] < 0.02
        assert len(data['data']['top_features']) == 5
        for name in ('model.json', 'report.json', 'report_slices.csv', 'trace.csv', 'manifest.json'):
            assert (tmp_path / name).exists()
        assert not (tmp_path / 'report.pdf').exists()

    def test_chart_and_pdf(self, runner, tmp_path):
        data = payload(invoke(runner, 'train', '--out', tmp_path))

        assert (tmp_path / 'prediction_chart.png').stat().st_size > 0
        assert (tmp_path / 'report.pdf').read_bytes().startswith(b'%PDF')
        assert set(data['artifacts']) >= {'chart', 'pdf', 'model', 'manifest'}

    def test_rerun_gives_identical_model(self, runner, tmp_path):
        invoke(runner, 'train', '--out', tmp_path / 'a', *QUIET_REPORTS)
        invoke(runner, 'train', '--out', tmp_path / 'b', *QUIET_REPORTS)

        assert (tmp_path / 'a' / 'model.json').read_bytes() == (tmp_path / 'b' / 'model.json').read_bytes()

    def test_manifest_replays_the_run(self, runner, trained, tmp_path):
        manifest = json.loads((trained / 'manifest.json').read_text())
        model_bytes = (trained / 'model.json').read_bytes()

        assert manifest['command'] == 'train'
        assert manifest['artifacts']['model']['sha256'] == hashlib.sha256(model_bytes).hexdigest()

        payload(invoke(runner, 'train', '--config', trained / 'manifest.json', '--out', tmp_path / 'replay'))
        assert (tmp_path / 'replay' / 'model.json').read_bytes() == model_bytes

    def test_config_file(self, runner, data_dir, tmp_path):
        data = payload(invoke(runner, 'train', '--config', data_dir / 'pipeline.env', '--out', tmp_path,
                              *QUIET_REPORTS))

        assert data['data']['seed'] == 7
        assert data['data']['run_id'] == 'sim-default-7'

    def test_quiet(self, runner, tmp_path):
        result = invoke(runner, 'train', '--out', tmp_path, '--quiet', *QUIET_REPORTS)

        assert result.exit_code == 0
        assert result.stdout == ''

    def test_layout_without_train_slices(self, runner, tmp_path):
        result = invoke(runner, 'train', '--out', tmp_path, '--set', 'SLICES=0:1734:test')

        assert result.exit_code == 2

    def test_fixed_and_grid_metaparameters(self, runner, tmp_path):
        result = invoke(runner, 'train', '--out', tmp_path, '--set', 'K=2', '--set', 'GRID_K=1,2')

        assert result.exit_code == 2

    def test_malformed_set(self, runner, tmp_path):
        assert invoke(runner, 'train', '--out', tmp_path, '--set', 'K2').exit_code == 2

    def test_missing_input_file(self, runner, tmp_path):
        result = invoke(runner, 'train', '--out', tmp_path, '--input', tmp_path / 'absent.csv')

        assert result.exit_code == 3
        assert error(result)['kind'] == 'data-format'

    def test_input_that_is_not_utf8(self, runner, tmp_path):
        path = tmp_path / 'latin1.csv'
        path.write_bytes(b"# operator: M\xfcller\ntime,thrust [N]\n0.0,1.0\n0.1,2.0\n")

        result = invoke(runner, 'train', '--out', tmp_path, '--input', path)

        assert result.exit_code == 3
        assert error(result)['kind'] == 'data-format'

    def test_load_cell_run_uses_its_calibration(self, runner, model_store_service, data_dir, tmp_path):
        payload(invoke(runner, 'train', '--out', tmp_path, '--input', data_dir / 'sample_run_multirate.csv',
                       '--set', 'SLICES=0:60:train', *QUIET_REPORTS))

        model = model_store_service.load(tmp_path / 'model.json')
        assert model.sample_rate == 10.0
        assert model.calibration.slope == 24.75
        assert not (tmp_path / 'report.json').exists()


class TestPredict:
    def test_simulated_run_file(self, runner, trained, tmp_path):
        payload(invoke(runner, 'simulate', '--out', tmp_path / 'sim', '--seed', 1))

        data = payload(invoke(runner, 'predict', '--model', trained / 'model.json',
                              '--input', tmp_path / 'sim' / 'run.csv', '--out', tmp_path / 'pred'))

        lines = (tmp_path / 'pred' / 'predictions.csv').read_text().splitlines()
        assert lines[0] == 'time,predicted_thrust,true_thrust'
        assert len(lines) == 1 + 1733
        assert data['data']['n_predictions'] == 1733
        assert data['data']['nrmse'] < 0.02

    def test_model_is_required(self, runner, tmp_path):
        result = invoke(runner, 'predict', '--out', tmp_path)

        assert result.exit_code == 2
        assert error(result)['kind'] == 'usage'

    def test_run_without_a_model_channel(self, runner, trained, engine_sim_service, run_file_service,
                                         default_run, tmp_path):
        ds = engine_sim_service.to_dataset(default_run, 'no-egt')
        partial = RunDataset('no-egt', ds.rate, {n: v for n, v in ds.channels.items() if n != 'egt'},
                             units={n: u for n, u in ds.units.items() if n != 'egt'})
        path = run_file_service.write_run(tmp_path / 'no_egt.csv', partial)

        result = invoke(runner, 'predict', '--model', trained / 'model.json', '--input', path, '--out', tmp_path)

        assert result.exit_code == 3

    def test_slower_run_cannot_be_upsampled(self, runner, trained, data_dir, tmp_path):
        result = invoke(runner, 'predict', '--model', trained / 'model.json',
                        '--input', data_dir / 'sample_run_multirate.csv', '--out', tmp_path)

        assert result.exit_code == 3


class TestEvaluate:
    def test_saved_model(self, runner, trained, tmp_path):
        data = payload(invoke(runner, 'evaluate', '--model', trained / 'model.json', '--out', tmp_path,
                              *QUIET_REPORTS))

        report = json.loads((tmp_path / 'report.json').read_text())
        assert report['nrmse'] == pytest.approx(data['data']['nrmse'])
        assert data['data']['nrmse'] < 0.02
        assert json.loads((tmp_path / 'manifest.json').read_text())['inputs']['model']['path'].endswith('model.json')

    def test_bad_model_file(self, runner, tmp_path):
        model = tmp_path / 'model.json'
        model.write_text('{"schema": "ngrc-engine-twin/model", "version": 99}')

        assert invoke(runner, 'evaluate', '--model', model, '--out', tmp_path).exit_code == 3


class TestGridsearch:
    def test_small_grid(self, runner, tmp_path):
        data = payload(invoke(runner, 'gridsearch', '--out', tmp_path, '--set', 'GRID_K=1,2', '--set', 'GRID_S=1',
                              '--set', 'GRID_ALPHA=1e-6,1e-4', '--set', 'WORKERS=2', *QUIET_REPORTS))

        lines = (tmp_path / 'grid_results.csv').read_text().splitlines()
        assert lines[0] == 'index,k,s,alpha,d,status,nrmse,error'
        assert len(lines) == 1 + 4
        assert data['data']['combinations'] == 4
        assert data['data']['failed'] == 0
        assert (tmp_path / 'model.json').exists()

        document = json.loads((tmp_path / 'grid_results.json').read_text())
        assert document['grid'] == {'k_values': [1, 2], 's_values': [1], 'alpha_values': [1e-6, 1e-4]}
        assert [r['index'] for r in document['results']] == [0, 1, 2, 3]
        assert document['best'] == min(document['results'], key=lambda r: r['nrmse'])
        assert (document['best']['k'], document['best']['alpha']) == (data['data']['best']['k'],
                                                                      data['data']['best']['alpha'])
        assert 'grid_results_json' in data['artifacts']

    def test_singleton_grid_matches_train(self, runner, trained, tmp_path):
        payload(invoke(runner, 'gridsearch', '--out', tmp_path, '--set', 'GRID_K=1', '--set', 'GRID_S=1',
                       '--set', 'GRID_ALPHA=1e-5', *QUIET_REPORTS))

        assert (tmp_path / 'model.json').read_bytes() == (trained / 'model.json').read_bytes()

    def test_fixed_metaparameters_are_rejected(self, runner, tmp_path):
        assert invoke(runner, 'gridsearch', '--out', tmp_path, '--set', 'K=1').exit_code == 2


class TestBenchmark:
    def test_writes_timings(self, runner, tmp_path):
        data = payload(invoke(runner, 'benchmark', '--out', tmp_path, '--repeats', 3))

        document = json.loads((tmp_path / 'benchmark.json').read_text())
        assert document['repeats'] == 3
        assert document['metaparams'] == {'k': 1, 's': 1, 'alpha': 1e-5}
        assert data['data']['n_train'] == document['n_train']

    def test_repeats_must_be_positive(self, runner, tmp_path):
        assert invoke(runner, 'benchmark', '--out', tmp_path, '--repeats', 0).exit_code == 2
