"""End-to-end accuracy, timing and invariant checks of the twin"""
import time

import numpy as np
import pytest

from models.calibration import CalibrationPoint
from models.dataset import TEST, TRAIN, Channel, RunDataset, Slice, SliceSpec
from models.engine import EngineParams
from models.evaluation import GridSpec
from models.ngrc import Metaparameters
from tests.conftest import INPUT_CHANNELS

TRUE_SLOPE = 24.75
TRUE_INTERCEPT = -1.8


def simulate(engine_sim_service, kind, seed, run_id, **params):
    profile = engine_sim_service.profile_library(kind, seed=seed)
    run = engine_sim_service.simulate(profile, EngineParams(noise_sigma=0.005, seed=seed, **params))
    return engine_sim_service.to_dataset(run, run_id)


class TestSurrogateAccuracy:
    def test_default_profile_with_alpha_search(self, engine_sim_service, dataset_service, ngrc_service,
                                               evaluation_service):
        started = time.perf_counter()
        ds = simulate(engine_sim_service, 'default', 0, 'sim-default-0')
        slices = dataset_service.make_slices(ds.length, 9, 'alternating', first=TEST)

        best, _ = evaluation_service.grid_search(ds, slices, GridSpec((1,), (1,)), INPUT_CHANNELS, 'thrust')
        model = ngrc_service.fit_model(ds, slices, INPUT_CHANNELS, 'thrust', best)
        report = evaluation_service.evaluate(model, ds, slices)
        elapsed = time.perf_counter() - started

        assert ds.length == 1734
        assert (len(slices.labelled(TRAIN)), len(slices.labelled(TEST))) == (4, 5)
        assert report.nrmse <= 0.03
        assert elapsed < 5.0


class TestFeatureDimension:
    def test_four_channels_one_tap(self, ngrc_service):
        fm = ngrc_service.build_features(np.random.default_rng(0).random((4, 30)), Metaparameters(1, 1))

        assert fm.d_linear == 8
        assert fm.d_quadratic == 36
        assert fm.d == 45


class TestRidgeSolution:
    def test_matches_explicit_inverse(self, ngrc_service):
        rng = np.random.default_rng(42)
        O = rng.normal(size=(5, 200))
        Y = rng.normal(size=200)

        w_out = ngrc_service.train(O, Y, 0.1)
        expected = Y @ O.T @ np.linalg.inv(O @ O.T + 0.1 * np.eye(5))

        np.testing.assert_allclose(w_out, expected, rtol=1e-9, atol=0)

    def test_recovers_an_exact_linear_model(self, ngrc_service):
        rng = np.random.default_rng(7)
        O = rng.normal(size=(5, 200))
        w_true = rng.normal(size=5)

        w_out = ngrc_service.train(O, w_true @ O, 1e-12)

        np.testing.assert_allclose(w_out, w_true, rtol=1e-6)


class TestCrossRunGeneralization:
    def test_eccentric_to_ascending_with_shifted_egt(self, engine_sim_service, dataset_service, ngrc_service,
                                                     evaluation_service):
        train_run = simulate(engine_sim_service, 'eccentric', 11, 'eccentric-11')
        # ambient EGT offset raised by 2 %
        test_run = simulate(engine_sim_service, 'ascending', 12, 'ascending-12', egt_coeffs=(12000.0, 250.0, 408.0))
        ds = dataset_service.merge_runs([(train_run, (0, train_run.length)), (test_run, (0, test_run.length))])
        slices = SliceSpec((Slice(0, train_run.length, TRAIN), Slice(train_run.length, ds.length, TEST)), ds.length)

        model = ngrc_service.fit_model(ds, slices, INPUT_CHANNELS, 'thrust', Metaparameters(1, 1, 1e-5))
        report = evaluation_service.evaluate(model, ds, slices)

        assert ds.junctions == (train_run.length,)
        assert report.n_test == test_run.length - 1
        assert report.nrmse <= 0.05


class TestSmallTrainingSet:
    def test_140_samples_across_a_step(self, engine_sim_service, ngrc_service, evaluation_service):
        ds = simulate(engine_sim_service, 'unit_step', 5, 'unit-step-5')
        # floor plateau until the step at 2 s, then the climb to full speed
        slices = SliceSpec((Slice(0, 100, TEST), Slice(100, 240, TRAIN), Slice(240, ds.length, TEST)), ds.length)

        model = ngrc_service.fit_model(ds, slices, INPUT_CHANNELS, 'thrust', Metaparameters(1, 1, 1e-4))
        report = evaluation_service.evaluate(model, ds, slices)

        train_speeds = ds['requested_speed'][100:240]
        assert len(np.unique(train_speeds)) == 2
        assert model.training_stats.n_train == 139
        assert report.nrmse <= 0.05


@pytest.mark.slow
class TestTimingBudgets:
    def test_training_and_inference_budgets(self, ngrc_service, evaluation_service, default_dataset,
                                            default_slices):
        model = ngrc_service.fit_model(default_dataset, default_slices, INPUT_CHANNELS, 'thrust',
                                       Metaparameters(1, 1, 1e-5))

        report = evaluation_service.benchmark(model, default_dataset, default_slices,
                                              train_budget=0.1, step_budget=100e-6)

        assert report.n_train <= 900
        assert report.train_within_budget, report.to_dict()
        assert report.step_within_budget, report.to_dict()


class TestCalibrationRecovery:
    def test_slope_within_three_standard_errors(self, calibration_service):
        volts = np.linspace(-1.2, 4.8, 13)
        within = 0
        for seed in range(100):
            noise = np.random.default_rng(seed).normal(0.0, 0.1, len(volts))
            points = [CalibrationPoint(TRUE_SLOPE * v + TRUE_INTERCEPT + e, v) for v, e in zip(volts, noise)]

            fit = calibration_service.fit_calibration(points)
            standard_error = calibration_service.slope_standard_error(points, sigma=0.1)
            within += abs(fit.slope - TRUE_SLOPE) <= 3 * standard_error

        assert within >= 99

    def test_two_points_are_exact(self, calibration_service):
        fit = calibration_service.fit_calibration([CalibrationPoint(-20.0, -0.2), CalibrationPoint(80.0, 3.8)])

        assert fit.slope == pytest.approx(25.0, rel=1e-12)
        assert fit.intercept == pytest.approx(-15.0, rel=1e-12)


class TestPipelineInvariants:
    @pytest.mark.parametrize('seed', range(10))
    def test_block_mean_preserves_the_mean(self, dataset_service, seed):
        rng = np.random.default_rng(seed)
        samples = rng.normal(50.0, 5.0, 100 * int(rng.integers(1, 60)))

        ds = dataset_service.align([Channel('thrust', 'N', 1000.0, samples)], target_rate=10.0)

        assert ds.length == len(samples) // 100
        assert ds['thrust'].mean() == pytest.approx(samples.mean(), rel=1e-9)

    def test_normalization_round_trip(self, dataset_service):
        rng = np.random.default_rng(3)
        ds = RunDataset('rt', 20.0, {'egt': rng.uniform(300.0, 900.0, 500), 'far': rng.uniform(0.003, 0.04, 500)})
        spec = dataset_service.fit_normalization(ds, ['egt', 'far'])

        restored = dataset_service.invert_normalization(dataset_service.apply_normalization(ds, spec), spec)

        for name in ('egt', 'far'):
            lo, hi = spec.ranges[name]
            np.testing.assert_allclose(restored[name], ds[name], rtol=1e-12, atol=1e-12 * (hi - lo))

    def test_randomized_slices_and_merges(self, dataset_service):
        rng = np.random.default_rng(2024)
        runs = [RunDataset(f'r{i}', 10.0, {'u': np.arange(n, dtype=float)})
                for i, n in enumerate((37, 120, 500))]

        for case in range(1000):
            length = int(rng.integers(2, 400))
            n_slices = int(rng.integers(2, min(length, 25) + 1))
            pattern = 'random' if case % 2 else 'alternating'
            slices = dataset_service.make_slices(length, n_slices, pattern, seed=case)

            assert len(slices) == n_slices
            assert slices.slices[0].start == 0 and slices.slices[-1].end == length
            assert all(a.end == b.start for a, b in zip(slices.slices, slices.slices[1:]))
            assert len(slices.indices(TRAIN)) + len(slices.indices(TEST)) == length
            assert len(slices.labelled(TRAIN)) == (n_slices + 1) // 2

            parts = []
            for _ in range(int(rng.integers(1, 5))):
                run = runs[int(rng.integers(len(runs)))]
                start = int(rng.integers(0, run.length - 1))
                parts.append((run, (start, int(rng.integers(start + 1, run.length + 1)))))
            merged = dataset_service.merge_runs(parts)

            sizes = [end - start for _, (start, end) in parts]
            assert merged.length == sum(sizes)
            if len(parts) > 1:
                assert list(merged.junctions) == np.cumsum(sizes)[:-1].tolist()
            pieces = dataset_service.contiguous_pieces(merged, 0, merged.length)
            assert len(pieces) == len(merged.junctions) + 1
            assert [end - start for start, end in pieces] == (sizes if len(parts) > 1 else [merged.length])
            expected = np.concatenate([run['u'][start:end] for run, (start, end) in parts])
            assert np.array_equal(merged['u'], expected)
