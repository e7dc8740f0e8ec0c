import numpy as np
from django.test import SimpleTestCase
from hypothesis import given, settings
from hypothesis import strategies as st

from core.exceptions import InsufficientDataError
from learning.forest import (
    Forest,
    ForestModel,
    Node,
    RfConfig,
    best_split,
    entropy,
    grow_tree,
    rf_predict,
    rf_train,
)
from learning.tests.samples import sample_labeled, threshold_rule


class EntropyTests(SimpleTestCase):
    def test_known_values(self):
        self.assertEqual(entropy([5, 5]), 1.0)
        self.assertEqual(entropy([10, 0]), 0.0)
        self.assertEqual(entropy([1, 1, 1, 1]), 2.0)
        self.assertEqual(entropy([0, 0]), 0.0)

    @given(st.integers(0, 500), st.integers(0, 500))
    @settings(max_examples=100)
    def test_binary_bounds(self, down, up):
        value = entropy([down, up])

        self.assertGreaterEqual(value, 0.0)
        self.assertLessEqual(value, 1.0 + 1e-12)
        self.assertAlmostEqual(value, entropy([up, down]))


class SplitTests(SimpleTestCase):
    def test_separable_threshold(self):
        X = np.array([[0.1], [0.2], [0.3], [0.7], [0.8], [0.9]])
        y = np.array([0, 0, 0, 1, 1, 1])

        gain, feature, threshold = best_split(X, y, [0])

        self.assertEqual((gain, feature), (1.0, 0))
        self.assertAlmostEqual(threshold, 0.5)

    def test_pure_node_has_no_split(self):
        X = np.array([[0.1], [0.5], [0.9]])

        self.assertIsNone(best_split(X, np.array([1, 1, 1]), [0]))

    def test_constant_feature_has_no_split(self):
        X = np.full((6, 1), 0.4)

        self.assertIsNone(best_split(X, np.array([0, 1, 0, 1, 0, 1]), [0]))

    def test_leaf_size_limits_cuts(self):
        X = np.array([[0.1], [0.2], [0.3], [0.4]])
        y = np.array([0, 1, 1, 1])

        _, _, threshold = best_split(X, y, [0], min_samples_leaf=2)

        self.assertAlmostEqual(threshold, 0.25)

    def test_one_dimensional_tree(self):
        rng = np.random.default_rng(0)
        X = np.r_[rng.uniform(0, 0.45, 40), rng.uniform(0.55, 1, 40)][:, None]
        y = (X[:, 0] > 0.5).astype(int)
        config = RfConfig(
            n_trees=1, max_features=1, max_depth=None, min_samples_split=2
        )

        tree = grow_tree(X, y, config, rng)

        self.assertFalse(tree.is_leaf)
        self.assertGreater(tree.threshold, X[y == 0].max())
        self.assertLess(tree.threshold, X[y == 1].min())
        forest = Forest((tree,), ("x1",), config)
        np.testing.assert_array_equal(forest.votes(X)[0], y)


class ForestTests(SimpleTestCase):
    def setUp(self):
        self.frame = sample_labeled(
            n=300, features=4, seed=2, rule=threshold_rule(2, 0.4)
        )

    def test_tree_structure(self):
        config = RfConfig(n_trees=15, min_samples_split=10)

        forest = rf_train(self.frame, config)

        self.assertEqual(len(forest.trees), 15)
        for tree in forest.trees:
            self.assertEqual(tree.n_samples, 300)
            for node in tree.walk():
                self.assertLessEqual(node.depth, config.max_depth)
                if node.is_leaf:
                    self.assertGreaterEqual(node.n_samples, config.min_samples_leaf)
                    continue
                self.assertGreaterEqual(node.n_samples, config.min_samples_split)
                self.assertEqual(
                    np.add(node.left.counts, node.right.counts).tolist(),
                    list(node.counts),
                )
                weighted = (
                    node.left.n_samples * entropy(node.left.counts)
                    + node.right.n_samples * entropy(node.right.counts)
                ) / node.n_samples
                self.assertAlmostEqual(node.gain, entropy(node.counts) - weighted)
                self.assertGreater(node.gain, 0)

    def test_learns_threshold_rule(self):
        train = self.frame.take(np.arange(200))
        test = self.frame.take(np.arange(200, 300))

        forest = rf_train(train, RfConfig(n_trees=25, max_features=4))
        signals, fractions = rf_predict(forest, test)

        self.assertGreater(np.mean(signals.values == test.y), 0.9)
        self.assertTrue(((fractions > 0.5) & (fractions <= 1)).all())

    def test_vote_majority(self):
        up = Node((0, 5), 0)
        down = Node((5, 0), 0)
        frame = sample_labeled(n=3)
        config = RfConfig(n_trees=169)

        forest = Forest((up,) * 85 + (down,) * 84, frame.features, config)
        signals, fractions = rf_predict(forest, frame)
        self.assertEqual(signals.values.tolist(), [1, 1, 1])
        np.testing.assert_allclose(fractions, 85 / 169)

        forest = Forest((up,) * 84 + (down,) * 85, frame.features, config)
        signals, _ = rf_predict(forest, frame)
        self.assertEqual(signals.values.tolist(), [0, 0, 0])

    def test_leaf_tie_predicts_down(self):
        self.assertEqual(Node((3, 3), 2).prediction, 0)

    def test_seeded_training_is_reproducible(self):
        config = RfConfig(n_trees=10, seed=7)

        first = rf_train(self.frame, config).to_dict()
        second = rf_train(self.frame, config).to_dict()

        self.assertEqual(first, second)

    def test_too_few_rows(self):
        with self.assertRaises(InsufficientDataError):
            rf_train(self.frame.take(np.arange(48)))

    def test_too_many_features(self):
        with self.assertRaises(ValueError):
            rf_train(self.frame, RfConfig(max_features=5))

    def test_only_entropy(self):
        with self.assertRaises(ValueError):
            RfConfig(criterion="gini")


class ForestModelTests(SimpleTestCase):
    def test_fit_predict(self):
        frame = sample_labeled(n=150, features=4, seed=3, rule=threshold_rule(0))
        model = ForestModel(RfConfig(n_trees=9)).fit(frame.take(np.arange(100)))

        signals = model.predict(frame.take(np.arange(100, 150)))

        self.assertEqual(len(signals), 50)
        document = model.to_dict()
        self.assertEqual(len(document["trees"]), 9)
        self.assertEqual(document["features"], ["x1", "x2", "x3", "x4"])
        self.assertIn("x1", document["scaling"])
