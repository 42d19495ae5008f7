import math

import numpy as np
import pytest

from mondrianforest import (
    BoxRegion,
    MondrianForestModel,
    RngStream,
    fit_forest,
    fit_tree,
    forest_size_schedule,
    lifetime_schedule,
    model_from_json,
    model_to_json,
    predict_class,
    predict_forest,
    predict_tree,
    sample_mondrian,
    update_tree,
)

UNIT1 = BoxRegion.unit(1)
UNIT2 = BoxRegion.unit(2)


def make_partition(seed=3, lifetime=4.0, box=UNIT2):
    return sample_mondrian(box, lifetime, RngStream(seed))


def make_data(n=150, d=2, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.random((n, d))
    y = 1.0 + X[:, 0] + 0.1 * rng.standard_normal(n)
    return X, y


# -- trees -------------------------------------------------------------------

def test_empty_fit_predicts_zero_everywhere():
    model = fit_tree(make_partition(), np.empty((0, 2)), np.empty(0))
    assert model.n_seen == 0
    X = np.random.default_rng(1).random((50, 2))
    assert np.all(predict_tree(model, X) == 0.0)


def test_constant_labels_predict_constant():
    part = make_partition()
    X, _ = make_data()
    model = fit_tree(part, X, np.full(X.shape[0], 2.5))
    preds = predict_tree(model, X)
    assert np.all(preds == 2.5)


def test_single_leaf_partition_predicts_global_mean():
    part = make_partition(lifetime=0.0)
    X, y = make_data()
    model = fit_tree(part, X, y)
    expected = math.fsum(y) / len(y)
    assert predict_tree(model, np.array([0.123, 0.456])) == pytest.approx(expected, rel=1e-15)


def test_prediction_is_piecewise_constant():
    part = make_partition()
    X, y = make_data()
    model = fit_tree(part, X, y)
    cells = [leaf.box for leaf in part.leaves()]
    target = max(range(len(cells)), key=lambda i: cells[i].volume)
    box = cells[target]
    mid = (box.lower + box.upper) / 2
    shifted = mid + (box.upper - box.lower) * 0.2
    assert predict_tree(model, mid) == predict_tree(model, shifted)


def test_fit_rejects_points_outside_box_with_index():
    part = make_partition()
    X = np.array([[0.5, 0.5], [0.5, 1.5]])
    with pytest.raises(ValueError, match=r"\[1\]"):
        fit_tree(part, X, np.zeros(2))


def test_fit_rejects_nonfinite_labels():
    part = make_partition()
    with pytest.raises(ValueError):
        fit_tree(part, np.array([[0.5, 0.5]]), np.array([math.nan]))


def test_leaf_statistics_counts_and_sums():
    part = make_partition()
    X, y = make_data(80)
    model = fit_tree(part, X, y)
    stats = model.leaf_statistics()
    assert sum(s.count for s in stats) == model.n_seen == 80
    assert math.fsum(s.label_sum for s in stats) == pytest.approx(math.fsum(y), rel=1e-14)
    by_leaf = model.leaf_stats
    assert set(by_leaf) == set(part.leaves())


def test_class_counts_for_binary_labels():
    part = make_partition(lifetime=0.0)
    y = np.array([1.0, 0.0, 1.0, 1.0])
    model = fit_tree(part, np.random.default_rng(0).random((4, 2)), y)
    stats = model.leaf_statistics()[0]
    assert stats.class_counts == (1, 3)


# -- streaming updates -------------------------------------------------------

def test_update_on_empty_model_equals_single_point_fit():
    part = make_partition()
    x, y = np.array([0.3, 0.8]), 1.7
    empty = fit_tree(part, np.empty((0, 2)), np.empty(0))
    updated = update_tree(empty, x, y)
    direct = fit_tree(part, x[None, :], np.array([y]))
    assert updated._totals == direct._totals
    assert np.array_equal(updated._counts, direct._counts)


def test_fold_of_updates_equals_batch_fit_exactly():
    part = make_partition()
    X, y = make_data(120)
    batch = fit_tree(part, X, y)
    model = fit_tree(part, np.empty((0, 2)), np.empty(0))
    for xi, yi in zip(X, y):
        model = update_tree(model, xi, yi)
    assert model._totals == batch._totals
    assert np.array_equal(model._counts, batch._counts)
    probe = np.random.default_rng(5).random((64, 2))
    assert np.array_equal(predict_tree(model, probe), predict_tree(batch, probe))


def test_update_does_not_mutate_input_model():
    part = make_partition()
    X, y = make_data(30)
    base = fit_tree(part, X, y)
    snapshot = list(base._totals)
    update_tree(base, np.array([0.5, 0.5]), 9.0)
    assert base._totals == snapshot


def test_update_then_predict_reflects_new_mean():
    part = make_partition(lifetime=0.0)
    model = fit_tree(part, np.array([[0.2, 0.2]]), np.array([1.0]))
    model = update_tree(model, np.array([0.9, 0.9]), 2.0)
    assert predict_tree(model, np.array([0.5, 0.5])) == 1.5


def test_permutation_invariance_is_bit_exact():
    part = make_partition()
    rng = np.random.default_rng(8)
    # adversarial magnitudes: naive float accumulation would differ across orders
    X = rng.random((300, 2))
    y = rng.standard_normal(300) * np.exp(rng.uniform(-20, 20, 300))
    reference = fit_tree(part, X, y)
    probe = rng.random((100, 2))
    expected = predict_tree(reference, probe)
    for perm_seed in range(5):
        perm = np.random.default_rng(perm_seed).permutation(300)
        permuted = fit_tree(part, X[perm], y[perm])
        assert permuted._totals == reference._totals
        assert np.array_equal(predict_tree(permuted, probe), expected)


# -- forests -----------------------------------------------------------------

def test_forest_of_one_tree_equals_tree():
    X, y = make_data()
    forest = fit_forest(UNIT2, 2, 4.0, 1, X, y, master_seed=11)
    tree_part = sample_mondrian(UNIT2, 4.0, RngStream(11).child(0))
    tree = fit_tree(tree_part, X, y)
    probe = np.random.default_rng(2).random((40, 2))
    assert np.array_equal(predict_forest(forest, probe), predict_tree(tree, probe))


def test_forest_prefix_trees_shared_across_sizes():
    X, y = make_data()
    small = fit_forest(UNIT2, 2, 3.0, 3, X, y, master_seed=21)
    large = fit_forest(UNIT2, 2, 3.0, 7, X, y, master_seed=21)
    for a, b in zip(small.trees, large.trees):
        assert a.partition.structurally_equal(b.partition)
        assert a._totals == b._totals
    probe = np.random.default_rng(3).random((20, 2))
    stacked = large.per_tree_predictions(probe)[:3]
    assert np.array_equal(stacked, small.per_tree_predictions(probe))


def test_forest_empty_data_predicts_zero():
    forest = fit_forest(UNIT2, 2, 3.0, 4, np.empty((0, 2)), np.empty(0), master_seed=5)
    probe = np.random.default_rng(4).random((10, 2))
    assert np.all(predict_forest(forest, probe) == 0.0)


def test_forest_rejects_zero_trees():
    with pytest.raises(ValueError):
        fit_forest(UNIT2, 2, 3.0, 0, np.empty((0, 2)), np.empty(0), master_seed=5)


def test_forest_mean_matches_per_tree_predictions():
    X, y = make_data(400)
    forest = fit_forest(UNIT2, 2, 5.0, 16, X, y, master_seed=31)
    probe = np.random.default_rng(6).random((128, 2))
    mean = forest.per_tree_predictions(probe).mean(axis=0)
    assert np.max(np.abs(predict_forest(forest, probe) - mean)) < 1e-14


def test_forest_unanimous_trees_return_common_value():
    # single-leaf trees all see every sample, so every tree predicts 3.25
    X = np.random.default_rng(0).random((30, 2))
    forest = fit_forest(UNIT2, 2, 0.0, 5, X, np.full(30, 3.25), master_seed=41)
    assert np.all(forest.per_tree_predictions(np.array([0.5, 0.5])) == 3.25)
    assert predict_forest(forest, np.array([0.5, 0.5])) == 3.25


def test_forest_dimension_checks():
    with pytest.raises(ValueError):
        fit_forest(UNIT2, 3, 2.0, 1, np.empty((0, 3)), np.empty(0), master_seed=1)


# -- classification ----------------------------------------------------------

def test_classifier_empty_data_predicts_class_zero():
    forest = fit_forest(UNIT2, 2, 3.0, 3, np.empty((0, 2)), np.empty(0), master_seed=7)
    assert predict_class(forest, np.array([0.5, 0.5])) == 0


def test_classifier_unanimous_ones():
    X = np.random.default_rng(1).random((50, 2))
    forest = fit_forest(UNIT2, 2, 2.0, 3, X, np.ones(50), master_seed=8)
    assert predict_class(forest, np.array([0.5, 0.5])) == 1


def test_classifier_tie_at_half_goes_to_class_one():
    X, part = np.array([[0.5, 0.5]]), make_partition(lifetime=0.0)
    zero_tree = fit_tree(part, X, np.array([0.0]))
    one_tree = fit_tree(part, X, np.array([1.0]))
    forest = MondrianForestModel([zero_tree, one_tree], 0.0, 0)
    assert predict_forest(forest, np.array([0.25, 0.75])) == 0.5
    assert predict_class(forest, np.array([0.25, 0.75])) == 1


def test_classifier_agrees_with_half_threshold_everywhere():
    rng = np.random.default_rng(9)
    X = rng.random((500, 2))
    y = (rng.random(500) < 0.4).astype(float)
    forest = fit_forest(UNIT2, 2, 5.0, 7, X, y, master_seed=51)
    probe = rng.random((300, 2))
    values = predict_forest(forest, probe)
    assert np.array_equal(predict_class(forest, probe), (values >= 0.5).astype(np.int64))


# -- schedules ---------------------------------------------------------------

def test_lifetime_schedule_exact_powers():
    assert lifetime_schedule("lipschitz", 2**12, 1) == pytest.approx(16.0, rel=1e-12)
    assert lifetime_schedule("c2", 2**12, 2) == pytest.approx(4.0, rel=1e-12)
    # n^(1/(d+4)) at n=16, d=4 is 16^(1/8) = sqrt(2)
    assert lifetime_schedule("c2", 16, 4) == pytest.approx(math.sqrt(2.0), rel=1e-12)
    assert lifetime_schedule("consistency", 2**8, 2) == pytest.approx(4.0, rel=1e-12)
    assert lifetime_schedule("lipschitz", 1000, 1, scale=2.0) == \
        pytest.approx(2.0 * 1000 ** (1 / 3), rel=1e-12)


def test_lifetime_schedule_rejects_bad_input():
    with pytest.raises(ValueError):
        lifetime_schedule("quadratic", 100, 2)
    with pytest.raises(ValueError):
        lifetime_schedule("lipschitz", 0, 2)
    with pytest.raises(ValueError):
        lifetime_schedule("lipschitz", 100, 2, scale=0.0)


def test_consistency_schedule_keeps_cells_per_sample_vanishing():
    for d in (1, 2, 3):
        ratios = [
            lifetime_schedule("consistency", n, d) ** d / n
            for n in (2**8, 2**10, 2**12, 2**14, 2**16)
        ]
        assert ratios == sorted(ratios, reverse=True)
        assert ratios[-1] < ratios[0] / 3


def test_forest_size_schedule_values():
    assert forest_size_schedule("c2", 32, 4) == 3
    assert forest_size_schedule("c2", 1, 3) == 1
    sizes = [forest_size_schedule("c2", n, 2) for n in (10, 100, 1000, 10000)]
    assert sizes == sorted(sizes)
    with pytest.raises(ValueError):
        forest_size_schedule("lipschitz", 32, 4)


# -- serialization -----------------------------------------------------------

def test_tree_model_roundtrip_bit_exact():
    part = make_partition()
    X, y = make_data(90)
    model = fit_tree(part, X, y)
    clone = model_from_json(model_to_json(model))
    probe = np.random.default_rng(7).random((64, 2))
    assert np.array_equal(predict_tree(clone, probe), predict_tree(model, probe))
    assert clone._totals == model._totals


def test_forest_model_roundtrip_bit_exact():
    X, y = make_data(60)
    forest = fit_forest(UNIT2, 2, 3.0, 4, X, y, master_seed=61)
    clone = model_from_json(model_to_json(forest))
    probe = np.random.default_rng(8).random((32, 2))
    assert np.array_equal(predict_forest(clone, probe), predict_forest(forest, probe))
    assert clone.master_seed == forest.master_seed


def test_model_json_rejects_unknown_schema():
    with pytest.raises(ValueError):
        model_from_json('{"schema": "bogus/1"}')
