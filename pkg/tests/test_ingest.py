import numpy as np
import pytest

from hedgebandits.ingest import (
    Assignment,
    assign_features,
    bundled_wdbc_path,
    dump_normalized,
    load_wdbc,
    resample_rows,
    resample_stream,
)


class TestLoadWdbc:
    def test_bundled_file_shape(self, wdbc):
        assert wdbc.n_rows == 569
        assert wdbc.n_features == 30
        assert set(wdbc.labels) == {"M", "B"}
        assert (wdbc.labels == "M").sum() == 212

    def test_normalized_range(self, wdbc):
        assert wdbc.features.min() >= 0.0
        assert wdbc.features.max() <= 1.0
        assert np.isclose(wdbc.features.min(axis=0), 0.0).all()
        assert np.isclose(wdbc.features.max(axis=0), 1.0).all()

    def test_wrong_column_count_names_line(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("1,M," + ",".join(["0.5"] * 29) + "\n")
        with pytest.raises(ValueError, match="line 1"):
            load_wdbc(bad)

    def test_non_numeric_feature_names_line(self, tmp_path):
        good = "1,M," + ",".join(["0.5"] * 30)
        bad = "2,B," + ",".join(["0.5"] * 29 + ["abc"])
        f = tmp_path / "bad.csv"
        f.write_text(good + "\n" + bad + "\n")
        with pytest.raises(ValueError, match="line 2"):
            load_wdbc(f)

    def test_unknown_label_rejected(self, tmp_path):
        f = tmp_path / "bad.csv"
        f.write_text("1,Q," + ",".join(["0.5"] * 30) + "\n")
        with pytest.raises(ValueError, match="line 1"):
            load_wdbc(f)

    def test_constant_column_maps_to_zero(self, tmp_path):
        rows = []
        for i in range(4):
            feats = ["7.0"] + [str(0.1 * (i + j)) for j in range(29)]
            rows.append(f"{i},{'M' if i % 2 else 'B'}," + ",".join(feats))
        f = tmp_path / "const.csv"
        f.write_text("\n".join(rows) + "\n")
        ds = load_wdbc(f)
        assert (ds.features[:, 0] == 0.0).all()

    def test_minmax_idempotent(self, wdbc):
        from hedgebandits.ingest import _minmax

        once = wdbc.features
        assert np.allclose(_minmax(once), once)

    def test_rank_idempotent_and_centered(self, wdbc_rank):
        from hedgebandits.ingest import _rank

        once = wdbc_rank.features
        assert np.allclose(_rank(once), once)
        assert 0.0 < once.min() and once.max() < 1.0
        # medians sit at the grid midpoint, so an even grid splits each feature
        assert np.all(np.abs(np.median(once, axis=0) - 0.5) < 0.01)

    def test_unknown_scheme(self):
        with pytest.raises(ValueError):
            load_wdbc(bundled_wdbc_path(), scheme="zscore")


class TestAssignFeatures:
    def test_three_by_ten_covers_everything(self, wdbc):
        a = assign_features(wdbc, 3, 10, 3, np.random.default_rng(0))
        all_features = sorted(f for lst in a.ll_features for f in lst)
        assert all_features == list(range(30))
        assert all(len(lst) == 10 for lst in a.ll_features)
        assert len(a.el_features) == 3

    def test_singletons_extreme(self, wdbc):
        a = assign_features(wdbc, 30, 1, 0, np.random.default_rng(1))
        assert sorted(f for lst in a.ll_features for f in lst) == list(range(30))

    def test_capacity_error(self, wdbc):
        with pytest.raises(ValueError):
            assign_features(wdbc, 4, 10, 0, np.random.default_rng(0))

    def test_disjoint_context_option(self, wdbc):
        a = assign_features(wdbc, 2, 10, 5, np.random.default_rng(2), el_disjoint=True)
        used = {f for lst in a.ll_features for f in lst}
        assert not used.intersection(a.el_features)

    def test_overlap_allowed_by_default(self, wdbc):
        hits = 0
        for seed in range(20):
            a = assign_features(wdbc, 3, 10, 3, np.random.default_rng(seed))
            used = {f for lst in a.ll_features for f in lst}
            hits += bool(used.intersection(a.el_features))
        assert hits > 0  # with all 30 features assigned, overlap is certain

    def test_assignment_validates_disjointness(self):
        with pytest.raises(ValueError):
            Assignment(ll_features=[[0, 1], [1, 2]], el_features=[])


class TestResample:
    def test_stream_length(self, wdbc):
        rows, pool = resample_rows(wdbc, 10_000, np.random.default_rng(0))
        assert len(rows) == 10_000
        assert len(pool) == 569

    def test_holdout_pool_size(self, wdbc):
        _, pool = resample_rows(wdbc, 10, np.random.default_rng(0), holdout=0.5)
        assert len(pool) == 284  # 569 - ceil(569/2)

    def test_seed_replay(self, wdbc):
        a, _ = resample_rows(wdbc, 1000, np.random.default_rng(42), holdout=0.5)
        b, _ = resample_rows(wdbc, 1000, np.random.default_rng(42), holdout=0.5)
        assert np.array_equal(a, b)

    def test_label_frequencies_converge(self, wdbc):
        rows, pool = resample_rows(wdbc, 10_000, np.random.default_rng(3))
        pool_freq = (wdbc.labels[pool] == "M").mean()
        draw_freq = (wdbc.labels[rows] == "M").mean()
        assert abs(draw_freq - pool_freq) < 0.02

    def test_stream_builds_rounds(self, wdbc):
        a = assign_features(wdbc, 3, 10, 2, np.random.default_rng(4))
        stream = resample_stream(wdbc, a, 25, np.random.default_rng(5))
        assert len(stream) == 25
        rnd = stream[0]
        assert len(rnd.instances) == 3
        assert rnd.feedback_label == rnd.true_label
        assert rnd.reward(1, 0) == int(rnd.true_label == "M")

    def test_invalid_horizon(self, wdbc):
        with pytest.raises(ValueError):
            resample_rows(wdbc, 0, np.random.default_rng(0))


def test_dump_normalized_roundtrips(tmp_path, wdbc):
    out = tmp_path / "normalized.csv"
    dump_normalized(wdbc, out)
    lines = out.read_text().strip().split("\n")
    assert len(lines) == 569
    first = lines[0].split(",")
    assert first[1] in ("M", "B")
    assert len(first) == 32
    values = [float(v) for v in first[2:]]
    assert all(0.0 <= v <= 1.0 for v in values)
