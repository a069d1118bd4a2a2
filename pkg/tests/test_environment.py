import numpy as np
import pytest

from hedgebandits.environment import (
    DatasetWorld,
    PredictionRule,
    SyntheticWorld,
    UnsupportedOracleError,
    certify_hoelder,
    corrupt_labels,
    default_synthetic_world,
    draw_round,
    local_oracle,
    synthetic_world_from_spec,
    synthetic_world_spec,
)


def two_rule_world(pi1, pi2, d=1):
    rules = [
        [
            PredictionRule(0, "stochastic", accuracy=pi1),
            PredictionRule(1, "stochastic", accuracy=pi2),
        ]
    ]
    return SyntheticWorld(dims=[d], rules=rules, alpha=1.0, hoelder_L=1.0)


class TestDrawRound:
    def test_certain_rule_always_rewarded(self):
        world = two_rule_world(lambda x: 1.0, lambda x: 0.0)
        rng = np.random.default_rng(0)
        for _ in range(200):
            rnd = draw_round(world, rng)
            assert rnd.reward(0, 0) == 1
            assert rnd.reward(0, 1) == 0

    def test_empirical_accuracy_matches_function(self):
        # fix the instance by using a constant accuracy; mean reward -> pi
        world = two_rule_world(lambda x: 0.37, lambda x: 0.8)
        rng = np.random.default_rng(1)
        hits = sum(draw_round(world, rng).reward(0, 0) for _ in range(100_000))
        assert abs(hits / 100_000 - 0.37) < 0.005

    def test_reward_coupling_is_pathwise(self):
        # shared uniform per learner: higher accuracy can never lose
        world = two_rule_world(lambda x: 0.3 + 0.4 * float(x[0]), lambda x: 0.3)
        rng = np.random.default_rng(2)
        for _ in range(5000):
            rnd = draw_round(world, rng)
            assert rnd.reward(0, 0) >= rnd.reward(0, 1)

    def test_identical_seeds_identical_streams(self):
        world = default_synthetic_world(d=2)
        a = [draw_round(world, np.random.default_rng(7)).instances[0] for _ in range(5)]
        b = [draw_round(world, np.random.default_rng(7)).instances[0] for _ in range(5)]
        assert all(np.array_equal(x, y) for x, y in zip(a, b))

    def test_prediction_matches_reward(self):
        world = default_synthetic_world()
        rng = np.random.default_rng(3)
        rnd = draw_round(world, rng)
        assert rnd.true_label == 1
        for f in range(2):
            assert rnd.rule_predictions[0][f] == rnd.reward(0, f)


class TestLocalOracle:
    def test_clear_winner(self):
        world = two_rule_world(lambda x: 0.9, lambda x: 0.3)
        assert local_oracle(world, 0, np.array([0.5])) == (0, 0.9)

    def test_tie_takes_lowest_id(self):
        world = two_rule_world(lambda x: 0.6, lambda x: 0.6)
        assert local_oracle(world, 0, np.array([0.1]))[0] == 0

    def test_crossing_point_switches_rule(self):
        world = default_synthetic_world(d=1)
        # rule 0: 0.5 + 0.4x, rule 1: 0.9 - 0.4x, crossing at 0.5
        for x in np.linspace(0.0, 0.49, 10):
            assert local_oracle(world, 0, np.array([x]))[0] == 1
        for x in np.linspace(0.51, 1.0, 10):
            assert local_oracle(world, 0, np.array([x]))[0] == 0
        expected = [0.9 - 0.4 * 0.2, 0.5 + 0.4 * 0.8]
        assert local_oracle(world, 0, np.array([0.2]))[1] == pytest.approx(expected[0])
        assert local_oracle(world, 0, np.array([0.8]))[1] == pytest.approx(expected[1])

    def test_dataset_world_has_no_oracle(self, wdbc):
        from hedgebandits.ingest import assign_features

        rng = np.random.default_rng(0)
        assignment = assign_features(wdbc, 3, 10, 3, rng)
        world = DatasetWorld(wdbc, assignment)
        with pytest.raises(UnsupportedOracleError):
            local_oracle(world, 0, np.zeros(10))


class TestCorruptLabels:
    def rounds(self, world, n, seed=0):
        rng = np.random.default_rng(seed)
        return [draw_round(world, rng) for _ in range(n)]

    def test_all_missing(self):
        world = default_synthetic_world()
        out = list(corrupt_labels(self.rounds(world, 300), 1.0, 0.0, np.random.default_rng(1), labels=(0, 1)))
        assert all(r.feedback_label is None for r in out)
        assert all(r.true_label == 1 for r in out)

    def test_identity(self):
        world = default_synthetic_world()
        out = list(corrupt_labels(self.rounds(world, 300), 0.0, 0.0, np.random.default_rng(1), labels=(0, 1)))
        assert all(r.feedback_label == r.true_label for r in out)

    def test_half_flipped_destroys_information(self):
        # a constant rule's observed reward becomes a fair coin
        world = two_rule_world(lambda x: 1.0, lambda x: 0.0)
        stream = corrupt_labels(
            self.rounds(world, 100_000, seed=2), 0.0, 0.5, np.random.default_rng(3), labels=(0, 1)
        )
        hits = total = 0
        for rnd in stream:
            pred = rnd.rule_predictions[0][0]
            hits += pred == rnd.feedback_label
            total += 1
        assert abs(hits / total - 0.5) < 0.02

    def test_rate_validation(self):
        world = default_synthetic_world()
        with pytest.raises(ValueError):
            list(corrupt_labels(self.rounds(world, 1), 0.7, 0.6, np.random.default_rng(0), labels=(0, 1)))
        with pytest.raises(ValueError):
            list(corrupt_labels(self.rounds(world, 1), -0.1, 0.0, np.random.default_rng(0), labels=(0, 1)))


class TestHoelderCertification:
    def test_default_world_certified(self):
        for d in (1, 2, 3):
            world = default_synthetic_world(d=d)
            assert certify_hoelder(world, n_pairs=10_000) <= 1e-12

    def test_violation_detected(self):
        # a step function cannot satisfy any finite Hoelder constant
        step = lambda x: 0.0 if x[0] < 0.5 else 1.0
        world = SyntheticWorld(
            dims=[1],
            rules=[[PredictionRule(0, "stochastic", accuracy=step)]],
            alpha=1.0,
            hoelder_L=0.4,
        )
        assert certify_hoelder(world, n_pairs=2000) > 0.0


class TestWorldSpec:
    def test_roundtrip_matches_default(self):
        spec = synthetic_world_spec(d=2, alpha=1.0, n_learners=2)
        world = synthetic_world_from_spec(spec)
        ref = default_synthetic_world(d=2, alpha=1.0, n_learners=2)
        x = np.array([0.3, 0.7])
        for i in range(2):
            for f in range(2):
                assert world.accuracy(i, f, x) == ref.accuracy(i, f, x)
        assert world.hoelder_L == ref.hoelder_L

    def test_out_of_range_accuracy_rejected(self):
        spec = synthetic_world_spec()
        spec["rules"][0][0] = {"kind": "affine_mean", "intercept": 0.9, "slope": 0.4}
        with pytest.raises(ValueError):
            synthetic_world_from_spec(spec)

    def test_unknown_kind_rejected(self):
        spec = synthetic_world_spec()
        spec["rules"][0][0] = {"kind": "mystery", "intercept": 0.5, "slope": 0.1}
        with pytest.raises(ValueError):
            synthetic_world_from_spec(spec)


def test_rule_validation():
    with pytest.raises(ValueError):
        PredictionRule(0, "constant")
    with pytest.raises(ValueError):
        PredictionRule(0, "stochastic", accuracy=None)
    with pytest.raises(ValueError):
        PredictionRule(0, "sometimes")


def test_dataset_world_constant_rule_rewards(wdbc):
    from hedgebandits.ingest import assign_features

    rng = np.random.default_rng(5)
    assignment = assign_features(wdbc, 3, 10, 2, rng)
    world = DatasetWorld(wdbc, assignment)
    rnd = world.round_for_row(0)
    y = wdbc.labels[0]
    assert rnd.reward(0, 0) == int(y == "M")
    assert rnd.reward(0, 1) == int(y == "B")
    assert len(rnd.instances) == 3
    assert rnd.instances[0].shape == (10,)
    assert rnd.el_context.shape == (2,)
