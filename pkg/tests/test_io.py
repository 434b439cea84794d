import json

import numpy as np
import pytest

from nlconcepts import io
from nlconcepts.types import (
    HumanNumberJudgment,
    LearningCurve,
    NumberExampleSet,
    ShapeObject,
    Trial,
)


def test_pool_round_trip(tmp_path):
    path = tmp_path / "pool.jsonl"
    pool = [
        io.make_hypothesis("the number is even", "even(x)", "number", logq=-1.5),
        io.make_hypothesis("broken", "???", "number", batch=3),
    ]
    io.save_pool(path, pool)
    loaded = io.load_pool(path, "number")
    assert len(loaded) == 2
    assert loaded[0].nl_text == "the number is even"
    assert loaded[0].proposal_logprob == -1.5
    assert loaded[0].parsed
    assert not loaded[1].parsed  # parse failure retained, not dropped
    assert loaded[1].source_batch == 3


def test_pool_load_skips_blank_lines(tmp_path):
    path = tmp_path / "pool.jsonl"
    path.write_text('{"nl": "the number is even", "dsl": "even(x)"}\n\n')
    assert len(io.load_pool(path, "number")) == 1


def test_judgments_round_trip(tmp_path):
    path = tmp_path / "j.csv"
    judgments = [
        HumanNumberJudgment(NumberExampleSet([16, 8, 2, 64]), 32, 0.75, "s1"),
        HumanNumberJudgment(NumberExampleSet([3, 9]), 27, 0.5, "s2"),
    ]
    io.save_number_judgments(path, judgments)
    loaded = io.load_number_judgments(path)
    assert loaded[0].set_id == "s1"
    assert loaded[0].example_set.examples == (16, 8, 2, 64)
    assert loaded[0].test_number == 32
    # written on the raw 1-7 scale, normalized back on load
    assert loaded[0].mean_rating == pytest.approx(0.75, abs=1e-6)
    assert loaded[1].mean_rating == pytest.approx(0.5, abs=1e-6)


def test_learning_curve_round_trip(tmp_path):
    path = tmp_path / "curve.json"
    a = ShapeObject("triangle", "green", 1)
    b = ShapeObject("circle", "blue", 2)
    batches = [[Trial([a, b], a, True), Trial([a, b], b, False)]]
    curve = LearningCurve("c1", "green things", batches, [0.9, 0.1])
    io.save_learning_curve(path, curve)
    loaded = io.load_learning_curve(path)
    assert loaded.concept_id == "c1"
    assert loaded.ground_truth_nl == "green things"
    assert loaded.trials == curve.trials
    assert loaded.human_positive_rate == (0.9, 0.1)
    # every trial in a batch shares the full batch as context
    assert loaded.batches[0][0].batch == (a, b)
    assert loaded.batches[0][1].batch == (a, b)


def test_feature_file(tmp_path):
    path = tmp_path / "feat.jsonl"
    path.write_text(json.dumps({"nl": "The number is EVEN", "vec": [1, 0, 0]}) + "\n")
    table = io.load_feature_file(path)
    np.testing.assert_array_equal(table["the number is even"], [1, 0, 0])


def test_score_file_round_trip(tmp_path):
    path = tmp_path / "scores.jsonl"
    io.save_score_file(path, {"the number is even": -2.5})
    assert io.load_score_file(path) == {"the number is even": -2.5}
