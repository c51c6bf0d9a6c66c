import numpy as np
import pytest

from models.dataset import TEST, TRAIN, Slice, SliceSpec
from models.errors import DegenerateRangeError, NumericError, SliceTooShortError
from models.evaluation import GridSpec
from models.ngrc import Metaparameters
from tests.conftest import INPUT_CHANNELS


def fit(ngrc_service, ds, slices, meta=Metaparameters(1, 1, 1e-5)):
    return ngrc_service.fit_model(ds, slices, INPUT_CHANNELS, 'thrust', meta)


@pytest.fixture
def split_dataset(dataset_service, default_dataset):
    """Default run re-merged with junctions at 1000 and 1002"""
    ds = default_dataset
    return dataset_service.merge_runs([(ds, (0, 1000)), (ds, (1000, 1002)), (ds, (1002, ds.length))])


def straddling_slices(ds):
    return SliceSpec((Slice(0, 998, TRAIN), Slice(998, 1004, TEST), Slice(1004, ds.length, TRAIN)), ds.length)


class TestNrmse:
    def test_range_normalized(self, evaluation_service):
        truth = np.array([0.0, 1.0, 2.0, 3.0, 4.0])

        assert evaluation_service.nrmse(truth + 0.4, truth) == pytest.approx(0.1)

    def test_two_point_example(self, evaluation_service):
        assert evaluation_service.nrmse([0.1, 0.9], [0.0, 1.0]) == pytest.approx(0.1, rel=1e-12)

    def test_translation_and_scale_invariant(self, evaluation_service):
        rng = np.random.default_rng(5)
        truth = rng.normal(size=50)
        predicted = truth + rng.normal(0.0, 0.1, 50)
        base = evaluation_service.nrmse(predicted, truth)

        assert evaluation_service.nrmse(predicted + 123.0, truth + 123.0) == pytest.approx(base, rel=1e-9)
        assert evaluation_service.nrmse(predicted * 7.5, truth * 7.5) == pytest.approx(base, rel=1e-12)

    def test_constant_truth_is_degenerate(self, evaluation_service):
        with pytest.raises(DegenerateRangeError):
            evaluation_service.nrmse(np.zeros(4), np.ones(4))


class TestEvaluate:
    def test_default_run(self, evaluation_service, ngrc_service, default_dataset, default_slices):
        model = fit(ngrc_service, default_dataset, default_slices)

        report = evaluation_service.evaluate(model, default_dataset, default_slices)

        test_slices = default_slices.labelled(TEST)
        assert report.n_test == sum(len(s) - 1 for _, s in test_slices)
        assert [i for i, _, _, _ in report.slice_nrmse] == [i for i, _ in test_slices]
        assert report.nrmse < 0.02
        assert report.inference_per_step > 0
        # the trace covers train and test slices
        assert len(report.trace) == default_dataset.length - len(default_slices)
        assert set(report.trace.label) == {TRAIN, TEST}

    def test_short_test_slice(self, evaluation_service, ngrc_service, default_dataset):
        slices = SliceSpec((Slice(0, 1000, TRAIN), Slice(1000, 1003, TEST)), default_dataset.length)
        model = fit(ngrc_service, default_dataset, slices, Metaparameters(2, 1, 1e-5))

        with pytest.raises(SliceTooShortError):
            evaluation_service.evaluate(model, default_dataset, slices)

    def test_junctions_inside_a_test_slice_leave_too_few_points(self, evaluation_service, ngrc_service,
                                                                 split_dataset):
        slices = straddling_slices(split_dataset)
        model = fit(ngrc_service, split_dataset, slices, Metaparameters(2, 1, 1e-5))

        with pytest.raises(SliceTooShortError) as info:
            evaluation_service.evaluate(model, split_dataset, slices)

        assert '[998, 1004)' in str(info.value)

    def test_junction_pieces_are_scored_separately(self, evaluation_service, ngrc_service, split_dataset):
        slices = straddling_slices(split_dataset)
        model = fit(ngrc_service, split_dataset, slices)

        report = evaluation_service.evaluate(model, split_dataset, slices)

        # one warm-up sample dropped in each of the three pieces
        assert report.n_test == 3

    def test_report_dict(self, evaluation_service, ngrc_service, default_dataset, default_slices):
        model = fit(ngrc_service, default_dataset, default_slices)

        report = evaluation_service.evaluate(model, default_dataset, default_slices).to_dict()

        assert report['metaparams'] == {'k': 1, 's': 1, 'alpha': 1e-5}
        assert len(report['slice_nrmse']) == 5
        assert report['scored_label'] == TEST


class TestGridSearch:
    def test_singleton_grid_matches_a_single_fit(self, evaluation_service, ngrc_service, default_dataset,
                                                  default_slices):
        grid = GridSpec((1,), (1,), (1e-5,))

        best, results = evaluation_service.grid_search(default_dataset, default_slices, grid, INPUT_CHANNELS, 'thrust')
        report = evaluation_service.evaluate(fit(ngrc_service, default_dataset, default_slices),
                                             default_dataset, default_slices)

        assert best == Metaparameters(1, 1, 1e-5)
        assert len(results) == 1
        assert results[0].nrmse == pytest.approx(report.nrmse, rel=1e-12)

    def test_results_keep_combination_order_with_workers(self, evaluation_service, default_dataset,
                                                          default_slices):
        grid = GridSpec((1, 2), (1, 2), (1e-6, 1e-4))

        _, serial = evaluation_service.grid_search(
            default_dataset, default_slices, grid, INPUT_CHANNELS, 'thrust', workers=1)
        _, parallel = evaluation_service.grid_search(
            default_dataset, default_slices, grid, INPUT_CHANNELS, 'thrust', workers=4)

        assert [r.index for r in parallel] == list(range(8))
        assert [r.metaparams for r in parallel] == grid.combinations()
        assert [r.nrmse for r in parallel] == pytest.approx([r.nrmse for r in serial], rel=1e-12)

    def test_failed_combinations_are_recorded(self, evaluation_service, default_dataset):
        slices = SliceSpec((Slice(0, 1000, TRAIN), Slice(1000, 1010, TEST), Slice(1010, 1734, TRAIN)),
                           default_dataset.length)
        grid = GridSpec((1, 3), (1, 3), (1e-5,))

        best, results = evaluation_service.grid_search(default_dataset, slices, grid, INPUT_CHANNELS, 'thrust')

        statuses = {(r.metaparams.k, r.metaparams.s): r.status for r in results}
        assert statuses == {(1, 1): 'ok', (1, 3): 'ok', (3, 1): 'ok', (3, 3): 'failed'}
        assert 'SliceTooShortError' in results[-1].error
        assert (best.k, best.s) != (3, 3)

    def test_junction_split_combination_is_recorded_as_failed(self, evaluation_service, split_dataset):
        grid = GridSpec((1, 2), (1,), (1e-5,))

        best, results = evaluation_service.grid_search(
            split_dataset, straddling_slices(split_dataset), grid, INPUT_CHANNELS, 'thrust')

        assert [r.status for r in results] == ['ok', 'failed']
        assert 'SliceTooShortError' in results[1].error
        assert best == Metaparameters(1, 1, 1e-5)

    def test_every_combination_matches_a_standalone_evaluation(self, evaluation_service, ngrc_service,
                                                               default_dataset, default_slices):
        grid = GridSpec((1, 2), (1, 2), (1e-6, 1e-3))

        _, results = evaluation_service.grid_search(default_dataset, default_slices, grid, INPUT_CHANNELS, 'thrust')

        for result in results:
            model = fit(ngrc_service, default_dataset, default_slices, result.metaparams)
            report = evaluation_service.evaluate(model, default_dataset, default_slices)
            assert result.nrmse == pytest.approx(report.nrmse, rel=1e-12)

    def test_all_failed_is_a_numeric_error(self, evaluation_service, default_dataset):
        slices = SliceSpec((Slice(0, 1000, TRAIN), Slice(1000, 1004, TEST)), default_dataset.length)

        with pytest.raises(NumericError):
            evaluation_service.grid_search(default_dataset, slices, GridSpec((3,), (1,), (1e-5,)),
                                           INPUT_CHANNELS, 'thrust')

    def test_ties_prefer_fewer_features(self, evaluation_service, monkeypatch, default_dataset, default_slices):
        monkeypatch.setattr(evaluation_service, 'evaluate', lambda model, ds, slices: type('R', (), {'nrmse': 0.01}))

        best, _ = evaluation_service.grid_search(
            default_dataset, default_slices, GridSpec((2, 1), (1,), (1e-4, 1e-6)), INPUT_CHANNELS, 'thrust')

        assert best == Metaparameters(1, 1, 1e-6)


class TestBenchmark:
    def test_report(self, evaluation_service, ngrc_service, default_dataset, default_slices):
        model = fit(ngrc_service, default_dataset, default_slices)

        first = evaluation_service.benchmark(model, default_dataset, default_slices, repeats=3)
        second = evaluation_service.benchmark(model, default_dataset, default_slices, repeats=3)

        assert first.n_train == model.training_stats.n_train
        assert first.n_steps == sum(len(s) - 1 for _, s in default_slices.labelled(TEST))
        assert first.repeats == 3
        assert first.train_time > 0
        assert first.single_step_latency > 0
        assert first.prediction_digest == second.prediction_digest
        assert set(first.to_dict()) >= {'train_within_budget', 'step_within_budget'}
