from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from afva import experiments, network, pipeline
from afva.errors import DataError, FormatError


class TestMakeFolds:
    def test_ten_ids_five_folds(self):
        plan = experiments.make_folds([f"i{n}" for n in range(10)], k=5, seed=0)
        sizes = Counter(plan.assignments.values())
        assert sorted(sizes.values()) == [2, 2, 2, 2, 2]

    def test_large_uneven_split(self):
        plan = experiments.make_folds([f"i{n}" for n in range(10766)], k=5, seed=3)
        sizes = sorted(Counter(plan.assignments.values()).values())
        assert sizes == [2153, 2153, 2153, 2153, 2154]

    def test_partition_properties(self):
        for n in (10, 23, 101):
            ids = [f"i{j}" for j in range(n)]
            plan = experiments.make_folds(ids, k=5, seed=1)
            assert set(plan.assignments) == set(ids)
            sizes = Counter(plan.assignments.values())
            assert max(sizes.values()) - min(sizes.values()) <= 1
            assert sum(sizes.values()) == n

    def test_same_seed_identical(self):
        ids = [f"i{n}" for n in range(37)]
        assert experiments.make_folds(ids, 5, seed=9) == experiments.make_folds(
            ids, 5, seed=9
        )

    def test_k_exceeding_ids_rejected(self):
        with pytest.raises(ValueError):
            experiments.make_folds(["a", "b"], k=3, seed=0)

    def test_k_below_two_rejected(self):
        with pytest.raises(ValueError):
            experiments.make_folds(["a", "b", "c"], k=1, seed=0)


class TestPearson:
    def test_identity(self):
        x = np.arange(10.0)
        assert experiments.pearson(x, x) == pytest.approx(1.0, abs=1e-12)

    def test_negation(self):
        x = np.arange(10.0)
        assert experiments.pearson(x, -x) == pytest.approx(-1.0, abs=1e-12)

    def test_known_value(self):
        r = experiments.pearson([1, 2, 3], [1, 2, 4])
        assert r == pytest.approx(9 / np.sqrt(84), abs=1e-9)

    @given(st.integers(0, 10_000))
    @settings(max_examples=100, deadline=None)
    def test_affine_invariance(self, seed):
        rng = np.random.default_rng(seed)
        x = rng.normal(size=12)
        y = rng.normal(size=12)
        r = experiments.pearson(x, y)
        a = rng.uniform(0.1, 5.0)
        b = rng.uniform(-10, 10)
        assert experiments.pearson(a * x + b, y) == pytest.approx(r, abs=1e-9)
        assert experiments.pearson(-a * x + b, y) == pytest.approx(-r, abs=1e-9)

    def test_constant_input_rejected(self):
        with pytest.raises(DataError):
            experiments.pearson([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            experiments.pearson([1.0, 2.0], [1.0, 2.0, 3.0])


class TestLinearBaseline:
    def test_exactly_linear_targets(self):
        rng = np.random.default_rng(0)
        x_train = rng.normal(size=(100, 6))
        coef = rng.normal(size=6)
        x_test = rng.normal(size=(20, 6))
        preds = experiments.linear_baseline(
            x_train, x_train @ coef + 2.0, x_test
        )
        assert np.abs(preds - (x_test @ coef + 2.0)).max() < 1e-6

    def test_two_point_line(self):
        preds = experiments.linear_baseline(
            np.array([[0.0], [1.0]]), np.array([1.0, 3.0]), np.array([[2.0]])
        )
        assert preds[0] == pytest.approx(5.0, abs=1e-4)  # slope 2, intercept 1

    def test_duplicated_columns_still_solve(self):
        rng = np.random.default_rng(1)
        base = rng.normal(size=(30, 3))
        x = np.hstack([base, base])  # rank-deficient without the ridge term
        y = base @ np.array([1.0, -2.0, 0.5])
        preds = experiments.linear_baseline(x, y, x)
        assert np.abs(preds - y).max() < 1e-3

    def test_standardization_invariance_at_full_rank(self):
        rng = np.random.default_rng(2)
        x_train = rng.normal(size=(50, 4)) * 3 + 1
        y = x_train @ rng.normal(size=4) + rng.normal(size=50)
        x_test = rng.normal(size=(10, 4)) * 3 + 1
        mean, std = x_train.mean(0), x_train.std(0)
        raw = experiments.linear_baseline(x_train, y, x_test, ridge=1e-12)
        scaled = experiments.linear_baseline(
            (x_train - mean) / std, y, (x_test - mean) / std, ridge=1e-12
        )
        np.testing.assert_allclose(raw, scaled, atol=1e-8)


def make_records(labels, tags=("calm",), keyword="calm"):
    return [
        pipeline.DatasetRecord(
            id=f"r{i}",
            label=pipeline.VaLabel(valence=v, arousal=a),
            keyword=keyword,
            tags=tags,
        )
        for i, (v, a) in enumerate(labels)
    ]


class TestWordCorrelation:
    def dictionary(self, entries):
        return {
            word: experiments.WordEmotionEntry(word=word, valence=v, arousal=a)
            for word, v, a in entries
        }

    def test_self_consistent_labels_give_unit_correlation(self):
        words = [("calm", 2.0, 3.0), ("angry", 7.0, 8.0), ("glad", 5.0, 4.0)]
        dictionary = self.dictionary(words)
        records = []
        for i, (word, v, a) in enumerate(words * 2):
            records.append(
                pipeline.DatasetRecord(
                    id=f"r{i}",
                    label=pipeline.VaLabel(valence=v, arousal=a),
                    keyword=word,
                )
            )
        r_v, r_a, n = experiments.object_emotion_correlation(records, dictionary)
        assert r_v == pytest.approx(1.0, abs=1e-12)
        assert r_a == pytest.approx(1.0, abs=1e-12)
        assert n == 6

    def test_reversed_valence_gives_minus_one(self):
        words = [("calm", 2.0, 3.0), ("angry", 7.0, 8.0), ("glad", 5.0, 4.0)]
        dictionary = self.dictionary(words)
        records = [
            pipeline.DatasetRecord(
                id=f"r{i}",
                label=pipeline.VaLabel(valence=10.0 - v, arousal=a),
                keyword=word,
            )
            for i, (word, v, a) in enumerate(words)
        ]
        r_v, _, _ = experiments.object_emotion_correlation(records, dictionary)
        assert r_v == pytest.approx(-1.0, abs=1e-12)

    def test_case_folded_match_and_exclusion(self):
        dictionary = self.dictionary([("calm", 2.0, 3.0), ("angry", 7.0, 8.0)])
        records = [
            pipeline.DatasetRecord(
                id="a", label=pipeline.VaLabel(2.0, 3.0), keyword="CALM"
            ),
            pipeline.DatasetRecord(
                id="b", label=pipeline.VaLabel(7.0, 8.0), keyword="Angry"
            ),
            pipeline.DatasetRecord(
                id="c", label=pipeline.VaLabel(5.0, 5.0), keyword="unlisted"
            ),
        ]
        _, _, n = experiments.object_emotion_correlation(records, dictionary)
        assert n == 2

    def test_zero_matches_rejected(self):
        dictionary = self.dictionary([("calm", 2.0, 3.0)])
        records = make_records([(5.0, 5.0)], keyword="unknown")
        with pytest.raises(DataError):
            experiments.object_emotion_correlation(records, dictionary)

    def test_dictionary_file_round_trip(self, tmp_path):
        path = tmp_path / "words.csv"
        path.write_text("word,valence,arousal\ncalm,2.5,3.5\nangry,7.0,8.0\n")
        entries = experiments.load_word_dictionary(path)
        assert entries["calm"].valence == 2.5
        assert len(entries) == 2

    def test_dictionary_header_required(self, tmp_path):
        path = tmp_path / "words.csv"
        path.write_text("calm,2.5,3.5\n")
        with pytest.raises(FormatError):
            experiments.load_word_dictionary(path)

    @pytest.mark.skipif(
        "AFVA_WORD_JOIN_DATA" not in __import__("os").environ,
        reason="real word/image joined data not distributed; set "
        "AFVA_WORD_JOIN_DATA to a manifest+dictionary pair dir to enable",
    )
    def test_valence_correlates_more_than_arousal_on_real_join(self):
        # Orderings on real joined data only; synthetic data cannot pin this.
        import os

        root = os.environ["AFVA_WORD_JOIN_DATA"]
        records = pipeline.read_manifest(os.path.join(root, "manifest.jsonl"))
        dictionary = experiments.load_word_dictionary(
            os.path.join(root, "words.csv")
        )
        r_v, r_a, _ = experiments.object_emotion_correlation(records, dictionary)
        assert r_v > r_a


class TestVaGrid:
    def test_angry_lands_low_valence_high_arousal(self):
        records = make_records([(2.5, 7.5)], tags=("angry",))
        grid = experiments.va_grid_words(records)
        assert grid[0][3] == [("angry", 1)]

    def test_boundary_three_goes_to_second_cell(self):
        records = make_records([(3.0, 1.0)], tags=("edge",))
        grid = experiments.va_grid_words(records)
        assert grid[1][0] == [("edge", 1)]
        assert grid[0][0] == []

    def test_top_boundary_nine_in_last_cell(self):
        records = make_records([(9.0, 9.0)], tags=("peak",))
        grid = experiments.va_grid_words(records)
        assert grid[3][3] == [("peak", 1)]

    def test_empty_cells_are_empty_lists(self):
        grid = experiments.va_grid_words([])
        assert all(cell == [] for row in grid for cell in row)

    def test_frequency_then_alphabetical_ranking(self):
        records = make_records([(2.0, 2.0)] * 3, tags=())
        records = [
            pipeline.DatasetRecord(
                id=f"r{i}",
                label=pipeline.VaLabel(2.0, 2.0),
                tags=tags,
            )
            for i, tags in enumerate([("b", "a"), ("b",), ("a",)])
        ]
        grid = experiments.va_grid_words(records)
        assert grid[0][0] == [("a", 2), ("b", 2)]

    def test_word_conservation(self):
        rng = np.random.default_rng(0)
        records = [
            pipeline.DatasetRecord(
                id=f"r{i}",
                label=pipeline.VaLabel(
                    float(rng.uniform(1, 9)), float(rng.uniform(1, 9))
                ),
                tags=tuple(rng.choice(["a", "b", "c"], size=2)),
            )
            for i in range(40)
        ]
        grid = experiments.va_grid_words(records)
        total = sum(count for row in grid for cell in row for _, count in cell)
        assert total == sum(len(r.tags) for r in records)


class TestDistribution:
    def test_single_record_single_cell(self):
        table = experiments.export_va_distribution(make_records([(5.0, 5.0)]), bins=8)
        assert table.sum() == 1
        assert (table > 0).sum() == 1

    def test_count_conservation(self):
        rng = np.random.default_rng(1)
        records = make_records(
            [(float(rng.uniform(1, 9)), float(rng.uniform(1, 9))) for _ in range(57)]
        )
        table = experiments.export_va_distribution(records, bins=6)
        assert table.sum() == 57

    def test_uniform_labels_fill_cells_evenly(self):
        rng = np.random.default_rng(2)
        n, bins = 4000, 4
        records = make_records(
            [
                (float(rng.uniform(1, 9)), float(rng.uniform(1, 9)))
                for _ in range(n)
            ]
        )
        table = experiments.export_va_distribution(records, bins=bins)
        expected = n / bins**2
        sigma = np.sqrt(n * (1 / bins**2) * (1 - 1 / bins**2))
        assert np.all(np.abs(table - expected) < 5 * sigma)

    def test_csv_export(self, tmp_path):
        table = experiments.export_va_distribution(make_records([(1.0, 9.0)]), bins=2)
        path = tmp_path / "dist.csv"
        experiments.write_distribution_csv(table, path)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "valence_bin,arousal_bin,count"
        assert len(lines) == 5


class TestCrossValidate:
    def matrix(self, x, y_v, y_a=None):
        return pipeline.FeatureMatrix(
            values=x,
            ids=tuple(f"r{i}" for i in range(x.shape[0])),
            schema=(("color", x.shape[1]),),
            labels={"valence": y_v, "arousal": y_a if y_a is not None else y_v},
        )

    def desk_config(self, **overrides):
        base = dict(
            learning_rate=0.01,
            momentum=0.9,
            batch_size=32,
            max_epochs=150,
            patience=15,
            mean_loss=True,
            seed=0,
        )
        base.update(overrides)
        return network.TrainConfig(**base)

    def test_constant_labels_are_realizable_by_bias(self):
        rng = np.random.default_rng(3)
        x = rng.normal(size=(400, 6))
        matrix = self.matrix(x, np.full(400, 5.0))
        report = experiments.cross_validate(
            matrix,
            "valence",
            self.desk_config(learning_rate=0.05, batch_size=1000, max_epochs=300),
            k=5,
            seed=0,
            hidden_dims=(8,),
            val_fraction=0.0,
        )
        assert report.avg_test_mse < 0.01

    def test_every_row_tested_exactly_once(self):
        ids = [f"r{i}" for i in range(23)]
        plan = experiments.make_folds(ids, k=5, seed=4)
        tested = [i for fold in range(5) for i in plan.fold_ids(fold)]
        assert sorted(tested) == sorted(ids)

    def test_averages_recompute_from_folds(self):
        rng = np.random.default_rng(5)
        x = rng.normal(size=(40, 5))
        y = x @ rng.normal(size=5) * 0.3 + 5.0
        y = np.clip(y, 1, 9)
        matrix = self.matrix(x, y)
        report = experiments.cross_validate(
            matrix, "valence", self.desk_config(max_epochs=40), k=4, seed=1,
            hidden_dims=(8,), val_fraction=0.0,
        )
        assert report.avg_test_mse == pytest.approx(
            np.mean([f.test_mse for f in report.folds]), abs=1e-12
        )
        assert report.avg_train_mse == pytest.approx(
            np.mean([f.train_mse for f in report.folds]), abs=1e-12
        )

    def test_nonlinear_data_beats_linear_baseline(self):
        # Smooth single-index quadratic: invisible to the linear baseline,
        # learnable by a small net.
        rng = np.random.default_rng(6)
        n, d = 400, 12
        x = rng.normal(size=(n, d))
        w1 = rng.normal(size=d)
        w1 /= np.linalg.norm(w1)
        w2 = rng.normal(size=d)
        w2 /= np.linalg.norm(w2)
        y = (x @ w1) ** 2 + 0.5 * (x @ w2) + 0.1 * rng.normal(size=n)
        matrix = self.matrix(x, y)
        report = experiments.cross_validate(
            matrix,
            "valence",
            self.desk_config(max_epochs=300, batch_size=64),
            k=5,
            seed=2,
            hidden_dims=(32, 16),
            val_fraction=0.1,
        )
        plan = experiments.make_folds(matrix.ids, k=5, seed=2)
        row_fold = np.array([plan.assignments[i] for i in matrix.ids])
        linear_mses = []
        for fold in range(5):
            mask = row_fold == fold
            preds = experiments.linear_baseline(x[~mask], y[~mask], x[mask])
            linear_mses.append(np.mean((preds - y[mask]) ** 2))
        assert report.avg_test_mse < np.mean(linear_mses)

    def test_unlabeled_records_rejected(self, tmp_path):
        from tests.conftest import build_dataset

        records = build_dataset(tmp_path, n_records=4, seed=7, labels=None)
        with pytest.raises(DataError):
            experiments.run_cv(records, ("color",), "valence", k=2)

    def test_report_json_round_trip(self, tmp_path):
        rng = np.random.default_rng(8)
        x = rng.normal(size=(20, 4))
        matrix = self.matrix(x, np.clip(x @ np.ones(4) + 5, 1, 9))
        report = experiments.cross_validate(
            matrix, "valence", self.desk_config(max_epochs=10), k=2, seed=0,
            hidden_dims=(4,), val_fraction=0.0,
        )
        path = tmp_path / "report.json"
        experiments.write_report_json(report, path)
        import json

        loaded = json.loads(path.read_text())
        assert loaded["k"] == 2 and len(loaded["folds"]) == 2
