"""Training loop, validation split, fine-tuning, and estimator tests."""

import numpy as np
import pytest

from gesture_forge import TongueNetClassifier, TrainConfig, fine_tune, predict, train_network
from gesture_forge.errors import DatasetError, DivergenceError, TransferError
from gesture_forge.nn import build_tongue_net
from gesture_forge.training import stratified_validation_split

from synth_util import separable_dataset

FAST = dict(max_epochs=6, batch_size=64, learning_rate=0.02, validation_fraction=0.15)


@pytest.fixture(scope="module")
def separable():
    return separable_dataset(n_per_class=100, seed=3)


class TestValidationSplit:
    def test_fraction_of_1000_is_150(self, rng):
        y = np.concatenate([np.zeros(850, dtype=int), np.ones(150, dtype=int)])
        groups = np.array([f"p{i % 5}" for i in range(1000)])
        train_idx, val_idx = stratified_validation_split(y, groups, 0.15, rng)
        assert len(val_idx) == 150
        assert len(train_idx) == 850
        assert not set(train_idx) & set(val_idx)

    def test_strata_are_respected(self, rng):
        y = np.array([0] * 40 + [1] * 40)
        groups = np.array(["a"] * 20 + ["b"] * 20 + ["a"] * 20 + ["b"] * 20)
        _, val_idx = stratified_validation_split(y, groups, 0.25, rng)
        for g in ("a", "b"):
            for c in (0, 1):
                stratum_val = [i for i in val_idx if groups[i] == g and y[i] == c]
                assert len(stratum_val) == 5

    def test_remainder_goes_to_largest_strata(self, rng):
        # Strata sizes 7 and 3; target round(10 * 0.5) = 5; floors 3 + 1 = 4,
        # so the largest stratum absorbs the remaining pick.
        y = np.array([0] * 7 + [1] * 3)
        _, val_idx = stratified_validation_split(y, None, 0.5, rng)
        assert len(val_idx) == 5
        assert (y[val_idx] == 0).sum() == 4
        assert (y[val_idx] == 1).sum() == 1


class TestTrainNetwork:
    def test_overfits_separable_set(self, separable):
        X, y, groups = separable
        net = build_tongue_net(seed=0)
        net, log = train_network(net, X, y, groups, TrainConfig(seed=0, **FAST))
        assert log.epochs[-1].train_accuracy >= 0.99
        assert log.best_epoch >= 0
        labels, _ = predict(net, X)
        assert (labels == y).mean() >= 0.99

    def test_same_seed_is_bit_identical(self, separable):
        X, y, groups = separable
        cfg = TrainConfig(seed=11, max_epochs=2, batch_size=64, learning_rate=0.02)
        net_a, log_a = train_network(build_tongue_net(seed=11), X, y, groups, cfg)
        net_b, log_b = train_network(build_tongue_net(seed=11), X, y, groups, cfg)
        assert log_a == log_b
        for name, arr in net_a.state_dict().items():
            np.testing.assert_array_equal(arr, net_b.state_dict()[name])

    def test_returns_best_validation_epoch_weights(self, separable):
        X, y, groups = separable
        cfg = TrainConfig(seed=5, max_epochs=4, batch_size=64, learning_rate=0.02)
        net, log = train_network(build_tongue_net(seed=5), X, y, groups, cfg)
        assert log.best_val_loss == min(e.val_loss for e in log.epochs)
        assert log.epochs[log.best_epoch].val_loss == log.best_val_loss

    def test_empty_class_raises(self, separable):
        X, y, groups = separable
        mask = y == 0
        with pytest.raises(DatasetError):
            train_network(build_tongue_net(), X[mask], y[mask], groups[mask],
                          TrainConfig(max_epochs=1))

    @pytest.mark.filterwarnings("ignore:overflow", "ignore:invalid value")
    def test_divergence_names_epoch(self, separable):
        # Batch norm keeps the net scale-invariant, so only a float32
        # overflow (inf - inf in the statistics) produces the NaN loss.
        X, y, groups = separable
        cfg = TrainConfig(seed=0, max_epochs=3, batch_size=64, learning_rate=1e30,
                          augment=False)
        with pytest.raises(DivergenceError) as err:
            train_network(build_tongue_net(seed=0), X, y, groups, cfg)
        assert err.value.epoch >= 0

    def test_zero_epochs_returns_unchanged_net(self, separable):
        X, y, groups = separable
        net = build_tongue_net(seed=9)
        before = {k: v.copy() for k, v in net.state_dict().items()}
        net, log = train_network(net, X, y, groups, TrainConfig(max_epochs=0))
        assert log.epochs == []
        for name, arr in net.state_dict().items():
            np.testing.assert_array_equal(arr, before[name])


class TestFineTune:
    def test_zero_epoch_fine_tune_preserves_predictions(self, separable):
        X, y, groups = separable
        net, _ = train_network(build_tongue_net(seed=0), X, y, groups,
                               TrainConfig(seed=0, max_epochs=1, batch_size=64))
        tuned, _ = fine_tune(net, X, y, groups, TrainConfig(max_epochs=0))
        base_labels, base_probs = predict(net, X[:32])
        tuned_labels, tuned_probs = predict(tuned, X[:32])
        np.testing.assert_array_equal(base_labels, tuned_labels)
        np.testing.assert_array_equal(base_probs, tuned_probs)

    def test_fine_tune_does_not_regress_on_separable_set(self, separable):
        X, y, groups = separable
        pre, _ = train_network(build_tongue_net(seed=1), X, y, groups,
                               TrainConfig(seed=1, max_epochs=2, batch_size=64,
                                           learning_rate=0.02))
        _, pre_probs = predict(pre, X)
        pre_loss = -np.log(pre_probs[np.arange(len(y)), y] + 1e-12).mean()
        tuned, log = fine_tune(pre, X, y, groups,
                               TrainConfig(seed=2, max_epochs=3, batch_size=64,
                                           learning_rate=0.02))
        assert log.best_val_loss <= pre_loss + 0.05

    def test_topology_mismatch_raises(self, separable):
        X, y, groups = separable
        wrong = build_tongue_net(class_count=3, seed=0)
        wrong.layers = wrong.layers[:-2]  # truncate the topology
        with pytest.raises((TransferError, Exception)):
            fine_tune(wrong, X, y, groups, TrainConfig(max_epochs=0))

    def test_class_count_mismatch_raises(self, separable):
        X, y, groups = separable
        three_way = build_tongue_net(class_count=3, seed=0)
        with pytest.raises(TransferError):
            fine_tune(three_way, X, y, groups, TrainConfig(max_epochs=0))


class TestClassifierEstimator:
    def test_fit_predict_round_trip(self, separable):
        X, y, groups = separable
        clf = TongueNetClassifier(max_epochs=4, batch_size=64, learning_rate=0.02,
                                  seed=0)
        clf.fit(X, y, groups=groups)
        assert clf.score(X, y) >= 0.95
        probs = clf.predict_proba(X[:8])
        np.testing.assert_allclose(probs.sum(axis=1), 1.0, atol=1e-6)

    def test_string_labels(self, separable):
        X, y, groups = separable
        names = np.array(["neutral", "tongue_out"])[y]
        clf = TongueNetClassifier(max_epochs=2, batch_size=64, learning_rate=0.02,
                                  seed=0)
        clf.fit(X, names, groups=groups)
        assert set(clf.predict(X[:16])) <= {"neutral", "tongue_out"}

    def test_tie_breaks_toward_lower_class_index(self):
        clf = TongueNetClassifier()
        clf.classes_ = np.array([0, 1])
        probs = np.array([[0.5, 0.5]])
        assert probs.argmax(axis=1)[0] == 0  # documented argmax tie rule

    def test_get_params_round_trip(self):
        clf = TongueNetClassifier(max_epochs=7, seed=3)
        params = clf.get_params()
        clone = TongueNetClassifier(**params)
        assert clone.max_epochs == 7 and clone.seed == 3

    def test_duplicated_sample_rows_identical(self, separable):
        X, y, groups = separable
        clf = TongueNetClassifier(max_epochs=1, batch_size=64, seed=0)
        clf.fit(X, y, groups=groups)
        batch = np.tile(X[:1], (8, 1, 1, 1))
        probs = clf.predict_proba(batch)
        for row in probs[1:]:
            np.testing.assert_array_equal(row, probs[0])
