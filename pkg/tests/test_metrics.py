import numpy as np
import pytest

from fairbandit.data import Example, fit_encoding, parse_schema, prepare_dataset
from fairbandit.metrics import (
    NeighborIndex,
    accuracy,
    consistency,
    discrimination,
    evaluate,
    gower_similarity,
    k_nearest,
)

from conftest import MIXED_SCHEMA_TEXT, make_row


def fit_mixed(rows):
    schema = parse_schema(MIXED_SCHEMA_TEXT)
    return fit_encoding(rows, schema)


def random_raw_rows(rng, n, age_range=(0, 100), score_range=(-5, 5)):
    rows = []
    for _ in range(n):
        rows.append(make_row(
            rng.uniform(*age_range),
            rng.choice(["r", "g", "b", "y"]),
            rng.uniform(*score_range),
            rng.choice(["a", "b"]),
            rng.choice(["yes", "no"]),
        ))
    return rows


def brute_force_neighbors(examples, k, schema):
    """Independent O(n^2) oracle built on the scalar similarity."""
    n = len(examples)
    out = np.empty((n, k), dtype=np.int64)
    for i in range(n):
        sims = []
        for j in range(n):
            if j == i:
                continue
            sims.append((-gower_similarity(examples[i].raw_features,
                                           examples[j].raw_features, schema), j))
        sims.sort()
        out[i] = [j for _, j in sims[:k]]
    return out


class TestGowerSimilarity:
    def test_identical_rows_give_one(self, fitted_mixed_schema):
        raw = (30.0, "red", 2.0)
        assert gower_similarity(raw, raw, fitted_mixed_schema) == 1.0

    def test_all_categorical_rows_differing_everywhere_give_zero(self):
        schema = parse_schema(
            "c1 = categorical\nc2 = categorical\ns = sensitive\ny = label\n"
            "positive_label = 1\nsensitive_group_1 = f\n"
        )
        rows = [{"c1": "a", "c2": "x", "s": "f", "y": "1"},
                {"c1": "b", "c2": "z", "s": "m", "y": "0"}]
        fitted = fit_encoding(rows, schema)
        assert gower_similarity(("a", "x"), ("b", "z"), fitted) == 0.0

    def test_hand_computed_mixed_value(self):
        # continuous |3-5|/10 -> contribution 0.8; equal categorical -> 1; mean 0.9
        schema = parse_schema(
            "v = continuous\nc = categorical\ns = sensitive\ny = label\n"
            "positive_label = 1\nsensitive_group_1 = f\n"
        )
        rows = [{"v": "0", "c": "k", "s": "f", "y": "1"},
                {"v": "10", "c": "k", "s": "m", "y": "0"}]
        fitted = fit_encoding(rows, schema)
        assert gower_similarity((3.0, "k"), (5.0, "k"), fitted) == pytest.approx(0.9)

    def test_symmetry_and_range_over_random_rows(self, rng):
        rows = random_raw_rows(rng, 60)
        fitted = fit_mixed(rows)
        raws = [(float(r["age"]), r["color"], float(r["score"])) for r in rows]
        for _ in range(300):
            i, j = rng.integers(len(raws), size=2)
            s_ij = gower_similarity(raws[i], raws[j], fitted)
            s_ji = gower_similarity(raws[j], raws[i], fitted)
            assert s_ij == s_ji
            assert 0.0 <= s_ij <= 1.0

    def test_out_of_range_test_values_are_clamped(self, rng):
        rows = random_raw_rows(rng, 20, age_range=(0, 10))
        fitted = fit_mixed(rows)
        sim = gower_similarity((0.0, "r", 0.0), (1000.0, "r", 0.0), fitted)
        assert 0.0 <= sim <= 1.0

    def test_zero_range_column_contributes_one(self):
        schema = parse_schema(
            "v = continuous\nc = categorical\ns = sensitive\ny = label\n"
            "positive_label = 1\nsensitive_group_1 = f\n"
        )
        rows = [{"v": "7", "c": "k", "s": "f", "y": "1"},
                {"v": "7", "c": "m", "s": "m", "y": "0"}]
        fitted = fit_encoding(rows, schema)
        assert gower_similarity((7.0, "k"), (7.0, "m"), fitted) == pytest.approx(0.5)

    def test_mismatched_tuple_length_rejected(self, fitted_mixed_schema):
        with pytest.raises(Exception):
            gower_similarity((1.0,), (1.0, "r", 2.0), fitted_mixed_schema)


class TestKNearest:
    def build(self, rows, seed=0):
        schema = parse_schema(MIXED_SCHEMA_TEXT)
        dataset, fitted = prepare_dataset(rows, schema, seed=seed)
        return dataset, fitted

    def test_identical_rows_are_nearest(self):
        rows = [make_row(1, "r", 1, "a", "yes"),
                make_row(1, "r", 1, "b", "no"),  # identical features to row 0
                make_row(50, "g", 5, "a", "yes")] + [
                make_row(20 + i, "b", 2 + i, "a", "no") for i in range(9)]
        schema = parse_schema(MIXED_SCHEMA_TEXT)
        fitted = fit_encoding(rows, schema)
        from fairbandit.data import encode
        examples = [encode(r, fitted) for r in rows]
        nn = k_nearest(examples, k=1, schema=fitted)
        assert nn.indices[0, 0] == 1
        assert nn.indices[1, 0] == 0

    def test_no_example_is_its_own_neighbor(self, rng):
        rows = random_raw_rows(rng, 40)
        schema = parse_schema(MIXED_SCHEMA_TEXT)
        fitted = fit_encoding(rows, schema)
        from fairbandit.data import encode
        examples = [encode(r, fitted) for r in rows]
        nn = k_nearest(examples, k=5, schema=fitted)
        for i in range(len(examples)):
            assert i not in nn.indices[i]
            assert len(set(nn.indices[i])) == 5

    def test_tie_broken_toward_lower_index(self):
        # rows 4 and 9 are identical, both at similarity 0.5 from the query row 0
        rows = [make_row(0, "r", 0, "a", "yes")]
        rows += [make_row(100, "g", 10, "a", "no") for _ in range(9)]
        rows[4] = make_row(0, "g", 0, "a", "no")
        rows[9] = make_row(0, "g", 0, "a", "no")
        schema = parse_schema(MIXED_SCHEMA_TEXT)
        fitted = fit_encoding(rows, schema)
        from fairbandit.data import encode
        examples = [encode(r, fitted) for r in rows]
        nn = k_nearest(examples, k=1, schema=fitted)
        assert nn.indices[0, 0] == 4

    def test_agrees_with_brute_force_oracle_on_200_random_rows(self, rng):
        rows = random_raw_rows(rng, 200)
        schema = parse_schema(MIXED_SCHEMA_TEXT)
        fitted = fit_encoding(rows, schema)
        from fairbandit.data import encode
        examples = [encode(r, fitted) for r in rows]
        nn = k_nearest(examples, k=4, schema=fitted)
        oracle = brute_force_neighbors(examples, 4, fitted)
        assert np.array_equal(nn.indices, oracle)

    def test_k_too_large_rejected(self, rng):
        rows = random_raw_rows(rng, 5)
        schema = parse_schema(MIXED_SCHEMA_TEXT)
        fitted = fit_encoding(rows, schema)
        from fairbandit.data import encode
        examples = [encode(r, fitted) for r in rows]
        with pytest.raises(ValueError):
            k_nearest(examples, k=5, schema=fitted)


class TestConsistency:
    def test_all_identical_predictions_give_one(self):
        nn = NeighborIndex(indices=np.array([[1, 2], [0, 2], [0, 1]]), k=2)
        assert consistency([1, 1, 1], nn) == 1.0

    def test_opposite_pair_gives_zero(self):
        nn = NeighborIndex(indices=np.array([[1], [0]]), k=1)
        assert consistency([1, 0], nn) == 0.0

    def test_hand_evaluated_case(self):
        # formula on preds (1,1,0,0) with lists ({1,2},{0,2},{1,3},{1,2}):
        # each term is 0.5, so consistency = 1 - 0.5 = 0.5
        nn = NeighborIndex(indices=np.array([[1, 2], [0, 2], [1, 3], [1, 2]]), k=2)
        assert consistency([1, 1, 0, 0], nn) == pytest.approx(0.5)

    def test_hand_evaluated_case_with_unanimous_neighborhood(self):
        # third list {0,1}: terms (0.5, 0.5, 1.0, 0.5) -> 1 - 2.5/4 = 0.375
        nn = NeighborIndex(indices=np.array([[1, 2], [0, 2], [0, 1], [1, 2]]), k=2)
        assert consistency([1, 1, 0, 0], nn) == pytest.approx(0.375)

    def test_invariant_under_neighbor_order(self, rng):
        preds = rng.integers(0, 2, size=30)
        idx = np.stack([rng.choice(30, size=5, replace=False) for _ in range(30)])
        shuffled = idx[:, ::-1].copy()
        a = consistency(preds, NeighborIndex(indices=idx, k=5))
        b = consistency(preds, NeighborIndex(indices=shuffled, k=5))
        assert a == pytest.approx(b, abs=1e-12)

    def test_length_mismatch_rejected(self):
        nn = NeighborIndex(indices=np.array([[1], [0]]), k=1)
        with pytest.raises(ValueError):
            consistency([1, 0, 1], nn)


class TestDiscrimination:
    def test_equal_positive_rates_give_zero(self):
        preds = [1, 0, 1, 0]
        sens = [0, 0, 1, 1]
        assert discrimination(preds, sens) == 0.0

    def test_extreme_case_gives_one(self):
        preds = [1, 1, 0, 0]
        sens = [0, 0, 1, 1]
        assert discrimination(preds, sens) == 1.0

    def test_formula_arithmetic(self):
        # rates 0.60 vs 0.35 -> 0.25
        preds = [1] * 12 + [0] * 8 + [1] * 7 + [0] * 13
        sens = [0] * 20 + [1] * 20
        assert discrimination(preds, sens) == pytest.approx(0.25)

    def test_invariant_under_group_swap(self, rng):
        preds = rng.integers(0, 2, size=50)
        sens = rng.integers(0, 2, size=50)
        if sens.sum() in (0, 50):
            sens[0] = 1 - sens[0]
        assert discrimination(preds, sens) == pytest.approx(
            discrimination(preds, 1 - sens), abs=1e-15)

    def test_empty_group_is_undefined(self):
        with pytest.raises(ValueError, match="undefined"):
            discrimination([1, 0], [0, 0])


class TestAccuracy:
    def test_perfect(self):
        assert accuracy([1, 0, 1], [1, 0, 1]) == 1.0

    def test_inverted(self):
        assert accuracy([1, 0, 1], [0, 1, 0]) == 0.0

    def test_counting(self):
        assert accuracy([1, 0, 1, 1], [1, 1, 1, 0]) == 0.5

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            accuracy([1, 0], [1])


class TestEvaluate:
    def test_perfect_balanced_predictions(self, rng):
        rows = random_raw_rows(rng, 40)
        schema = parse_schema(MIXED_SCHEMA_TEXT)
        dataset, fitted = prepare_dataset(rows, schema, seed=2)
        examples = dataset.train
        # force a perfectly balanced, perfectly correct outcome
        for i, e in enumerate(examples):
            e.sensitive = i % 2
            e.label = 1
        preds = [e.label for e in examples]
        report = evaluate(preds, examples, fitted, k=3, split_name="train")
        assert report.accuracy == 1.0
        assert report.discrimination == 0.0
        assert report.consistency == 1.0
        assert report.delta == 1.0

    def test_delta_always_equals_accuracy_minus_discrimination(self, rng):
        rows = random_raw_rows(rng, 60)
        schema = parse_schema(MIXED_SCHEMA_TEXT)
        dataset, fitted = prepare_dataset(rows, schema, seed=3)
        for _ in range(10):
            preds = rng.integers(0, 2, size=len(dataset.train))
            report = evaluate(preds, dataset.train, fitted, k=4)
            assert report.delta == report.accuracy - report.discrimination

    def test_report_length_mismatch_rejected(self, rng):
        rows = random_raw_rows(rng, 30)
        schema = parse_schema(MIXED_SCHEMA_TEXT)
        dataset, fitted = prepare_dataset(rows, schema, seed=4)
        with pytest.raises(ValueError):
            evaluate([0, 1], dataset.train, fitted, k=3)
