"""Readers and writers for the on-disk data formats.

Hypothesis pool: JSON Lines, one object per line:
    {"nl": str, "dsl": str, "logq": float|null, "batch": int|null}

Number judgments: CSV with header set_id,examples,test_number,mean_rating
where examples is a ';'-separated integer list and mean_rating is the
raw 1-7 mean (normalized to [0,1] at load).

Learning curve: JSON with concept_id, ground_truth_nl, batches (lists of
{"shape","color","size","label"} objects) and human_positive_rate per
trial.

Feature file: JSON Lines {"nl": str, "vec": [D floats]}.
Score file: JSON Lines {"nl": str, "logp": float}.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Dict, List

import numpy as np

from .dsl import DslSyntaxError, parse_concept
from .types import (
    Hypothesis,
    HumanNumberJudgment,
    LearningCurve,
    NumberExampleSet,
    ShapeObject,
    Trial,
    Unparsed,
    canonicalize_nl,
    normalize_rating,
)


def load_pool(path, domain: str) -> List[Hypothesis]:
    """Load a hypothesis pool, compiling each rule's DSL source.

    Rules that fail to parse are kept as Unparsed so the pool size still
    matches the proposal budget.
    """
    out = []
    for line in Path(path).read_text().splitlines():
        if not line.strip():
            continue
        row = json.loads(line)
        out.append(
            make_hypothesis(
                row["nl"],
                row.get("dsl", ""),
                domain,
                logq=row.get("logq"),
                batch=row.get("batch"),
            )
        )
    return out


def make_hypothesis(nl, dsl_src, domain, logq=None, batch=None) -> Hypothesis:
    try:
        program = parse_concept(dsl_src, domain)
    except DslSyntaxError:
        program = Unparsed(dsl_src)
    return Hypothesis(
        nl_text=canonicalize_nl(nl),
        program=program,
        proposal_logprob=logq,
        source_batch=batch,
    )


def save_pool(path, pool: List[Hypothesis]) -> None:
    from .dsl import format_concept

    lines = []
    for h in pool:
        dsl_src = h.program.source if isinstance(h.program, Unparsed) else format_concept(h.program)
        lines.append(
            json.dumps(
                {
                    "nl": h.nl_text,
                    "dsl": dsl_src,
                    "logq": h.proposal_logprob,
                    "batch": h.source_batch,
                }
            )
        )
    Path(path).write_text("\n".join(lines) + "\n")


def load_number_judgments(path) -> List[HumanNumberJudgment]:
    out = []
    with open(path, newline="") as handle:
        for row in csv.DictReader(handle):
            examples = NumberExampleSet(
                [int(x) for x in row["examples"].split(";")]
            )
            out.append(
                HumanNumberJudgment(
                    example_set=examples,
                    test_number=int(row["test_number"]),
                    mean_rating=normalize_rating(float(row["mean_rating"])),
                    set_id=row["set_id"],
                )
            )
    return out


def save_number_judgments(path, judgments: List[HumanNumberJudgment]) -> None:
    """Inverse of load_number_judgments; ratings are written back on the
    raw 1-7 scale."""
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["set_id", "examples", "test_number", "mean_rating"])
        for j in judgments:
            writer.writerow(
                [
                    j.set_id,
                    ";".join(str(x) for x in j.example_set.examples),
                    j.test_number,
                    f"{j.mean_rating * 6.0 + 1.0:.6f}",
                ]
            )


def load_learning_curve(path) -> LearningCurve:
    data = json.loads(Path(path).read_text())
    batches = []
    for raw_batch in data["batches"]:
        objects = [ShapeObject(o["shape"], o["color"], o["size"]) for o in raw_batch]
        trials = [
            Trial(batch=objects, test=obj, label=bool(raw["label"]))
            for obj, raw in zip(objects, raw_batch)
        ]
        batches.append(trials)
    return LearningCurve(
        concept_id=data["concept_id"],
        ground_truth_nl=data["ground_truth_nl"],
        batches=batches,
        human_positive_rate=data["human_positive_rate"],
    )


def save_learning_curve(path, curve: LearningCurve) -> None:
    batches = []
    for batch in curve.batches:
        batches.append(
            [
                {
                    "shape": t.test.shape,
                    "color": t.test.color,
                    "size": t.test.size,
                    "label": int(t.label),
                }
                for t in batch
            ]
        )
    Path(path).write_text(
        json.dumps(
            {
                "concept_id": curve.concept_id,
                "ground_truth_nl": curve.ground_truth_nl,
                "batches": batches,
                "human_positive_rate": list(curve.human_positive_rate),
            },
            indent=2,
        )
    )


def load_feature_file(path) -> Dict[str, np.ndarray]:
    table = {}
    for line in Path(path).read_text().splitlines():
        if line.strip():
            row = json.loads(line)
            table[canonicalize_nl(row["nl"])] = np.asarray(row["vec"], dtype=float)
    return table


def load_score_file(path) -> Dict[str, float]:
    scores = {}
    for line in Path(path).read_text().splitlines():
        if line.strip():
            row = json.loads(line)
            scores[canonicalize_nl(row["nl"])] = float(row["logp"])
    return scores


def save_score_file(path, scores: Dict[str, float]) -> None:
    lines = [
        json.dumps({"nl": nl, "logp": logp}) for nl, logp in scores.items()
    ]
    Path(path).write_text("\n".join(lines) + "\n")
