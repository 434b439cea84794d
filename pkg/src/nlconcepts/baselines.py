"""Comparison systems: latent-language maximum likelihood, directly
querying the LM with yes/no questions, and the unconditioned-proposal
ablation."""

from __future__ import annotations

from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import expit, logit

from . import io
from .fit import AdamState, adam_step, kfold_split, r_squared
from .harness import (
    ExperimentConfig,
    PredictionRecord,
    _load_number_pools,
    group_judgments,
    run_number_experiment,
)
from .likelihood import EvalCache, pool_number_logliks, pool_shape_logliks
from .posterior import ZERO_CUTOFF, dedup_pool
from .propose.prompts import serialize_numbers, serialize_shape_batches
from .types import Hypothesis, LearningCurve


class AllSamplesDiscarded(RuntimeError):
    """Every sample failed the yes/no format check."""


class NoViableHypothesis(RuntimeError):
    """No parsed hypothesis in the pool has nonzero likelihood."""


# ---------------------------------------------------------------------------
# Shared Platt calibration (logistic regression on the raw prediction)


def fit_platt(raw: Sequence[float], targets: Sequence[float], epochs: int = 1000,
              lr: float = 0.001) -> Tuple[float, float]:
    """Fit (a, b) of expit(b + a*logit(p)) by full-batch Adam on BCE."""
    raw = np.clip(np.asarray(raw, dtype=float), 1e-6, 1.0 - 1e-6)
    targets = np.asarray(targets, dtype=float)
    x = logit(raw)
    u = np.array([1.0, 0.0])  # a, b
    state = AdamState.zeros(2)
    for _ in range(epochs):
        pred = expit(u[1] + u[0] * x)
        dl_dz = pred - targets
        grad = np.array([float(dl_dz @ x), float(dl_dz.sum())])
        u = adam_step(u, grad, state, lr=lr)
    return float(u[0]), float(u[1])


def apply_platt(raw: float, a: float, b: float) -> float:
    p = min(max(raw, 1e-6), 1.0 - 1e-6)
    return float(expit(b + a * logit(p)))


def _calibrated_records(
    raw_by_id: Dict[str, Tuple[float, float]],  # id -> (raw pred, human)
    k_folds: int,
    seed: int,
) -> List[PredictionRecord]:
    """Cross-validated Platt calibration of raw predictions."""
    ids = list(raw_by_id)
    records = []
    for train_ids, holdout_ids in kfold_split(ids, min(k_folds, len(ids)), seed):
        a, b = fit_platt(
            [raw_by_id[i][0] for i in train_ids],
            [raw_by_id[i][1] for i in train_ids],
        )
        for i in holdout_ids:
            raw, human = raw_by_id[i]
            records.append(
                PredictionRecord(i, apply_platt(raw, a, b), human, "holdout")
            )
    return records


def _r2_metrics(records: Sequence[PredictionRecord]) -> Dict[str, float]:
    return {
        "holdout_r2": r_squared(
            [r.prediction for r in records], [r.human for r in records]
        ),
        "n_predictions": len(records),
    }


# ---------------------------------------------------------------------------
# Latent language baseline: MLE over a single hypothesis


def mle_hypothesis(
    pool: Sequence[Hypothesis], loglik: Sequence[float]
) -> Tuple[Hypothesis, int]:
    """Single best hypothesis by data likelihood; ties break toward the
    earliest pool entry."""
    loglik = np.asarray(loglik, dtype=float)
    alive = np.array([h.parsed for h in pool]) & (loglik > ZERO_CUTOFF)
    if not np.any(alive):
        raise NoViableHypothesis("pool has no consistent parsed hypothesis")
    masked = np.where(alive, loglik, -np.inf)
    best = int(np.argmax(masked))  # argmax keeps the first maximizer
    return pool[best], best


def latent_language_number(
    cfg: ExperimentConfig,
    judgments=None,
    pools: Optional[Dict[str, List[Hypothesis]]] = None,
):
    """Per example set, keep only the maximum-likelihood hypothesis and
    predict its membership indicator through a cross-validated Platt
    transform. Returns (metrics, records, chosen NL per set)."""
    if judgments is None:
        judgments = io.load_number_judgments(cfg.data_path)
    if pools is None:
        pools = _load_number_pools(cfg)
    epsilon = cfg.params.epsilon if cfg.params is not None else 0.1
    cache = EvalCache()
    raw_by_id: Dict[str, Tuple[float, float]] = {}
    chosen: Dict[str, str] = {}
    for set_id, group in group_judgments(judgments, pools).items():
        pool, _ = dedup_pool(pools[set_id])
        loglik = pool_number_logliks(pool, group[0].example_set, epsilon, cache)
        best, _ = mle_hypothesis(pool, loglik)
        chosen[set_id] = best.nl_text
        extension = cache.extension(best)
        for j in group:
            raw = float(j.test_number in extension)
            raw_by_id[f"{set_id}:{j.test_number}"] = (raw, j.mean_rating)
    records = _calibrated_records(raw_by_id, cfg.k_folds, cfg.seed)
    return _r2_metrics(records), records, chosen


def latent_language_shape(
    cfg: ExperimentConfig,
    curves: Sequence[LearningCurve],
    pools: Dict[str, List[Hypothesis]],
):
    """Online MLE: each batch keeps only the hypothesis that best
    explains the previous trials. Predictions use the usual response
    noise model. Returns (metrics, records, per-curve chosen NL)."""
    params = cfg.params
    eps = params.epsilon if params else 0.1
    alpha = params.alpha if params else 0.5
    beta = params.beta if params else 0.0
    cache = EvalCache()
    records: List[PredictionRecord] = []
    labels: List[bool] = []
    chosen: Dict[str, List[Optional[str]]] = {}
    for curve in curves:
        pool_all, _ = dedup_pool(pools[curve.concept_id])
        trials = curve.trials
        seen = 0
        trial_index = 0
        per_batch_nl: List[Optional[str]] = []
        for b, batch in enumerate(curve.batches, start=1):
            visible = [
                h for h in pool_all if h.source_batch is None or h.source_batch <= b
            ]
            loglik = pool_shape_logliks(
                visible, trials[:seen], eps, alpha, beta, cache
            )
            try:
                best, _ = mle_hypothesis(visible, loglik)
            except NoViableHypothesis:
                best = None
            per_batch_nl.append(best.nl_text if best else None)
            for t in batch:
                if best is None:
                    pred = eps * alpha
                else:
                    c = float(cache.trial_member(best, t))
                    pred = (1.0 - eps) * c + eps * alpha
                human = (
                    curve.human_positive_rate[trial_index]
                    if trial_index < len(curve.human_positive_rate)
                    else None
                )
                records.append(
                    PredictionRecord(
                        f"{curve.concept_id}:{trial_index}", pred, human, "holdout"
                    )
                )
                labels.append(t.label)
                trial_index += 1
            seen += len(batch)
        chosen[curve.concept_id] = per_batch_nl
    metrics = {
        "accuracy": float(
            np.mean([(r.prediction >= 0.5) == y for r, y in zip(records, labels)])
        ),
        "n_trials": len(records),
    }
    return metrics, records, chosen


# ---------------------------------------------------------------------------
# Direct LM baseline: yes/no querying

NUMBER_DIRECT_TEMPLATE = """\
Here are a few example number concepts:
-- The number is even
-- The number is between 30 and 45
-- The number is a power of 3
-- The number is less than 10

Here are some random examples of numbers belonging to a possibly different number concept:
{examples}

Question: Does the number {test} belong to the same concept as the above numbers?
Answer (one word, yes/no):"""

SHAPE_DIRECT_TEMPLATE = """\
Here are some example concepts defined by a logical rule:

Rule for Concept #1: Something is positive if it is the biggest yellow object in the example
Rule for Concept #2: Something is positive if there is another object with the same color in the example
Rule for Concept #3: Something is positive if it is the same color as the smallest triangle in the example

Now please look at the following examples for a new logical rule.

{examples}

Now we get a new collection of examples for Concept #4:
{batch}
Question: Based on the above example, is a ({test}) in the concept?
Answer (one word, just write yes/no):"""

DIRECT_SAMPLES = 10


def yes_no_ratio(samples: Sequence[str]) -> float:
    """Fraction of kept samples starting with 'y'; samples starting with
    neither 'y' nor 'n' (case-insensitive) are discarded."""
    kept = []
    for s in samples:
        first = s.strip()[:1].lower()
        if first in ("y", "n"):
            kept.append(first == "y")
    if not kept:
        raise AllSamplesDiscarded("no sample began with y or n")
    return sum(kept) / len(kept)


def direct_number_prompt(example_set, test_number: int) -> str:
    return NUMBER_DIRECT_TEMPLATE.format(
        examples=serialize_numbers(example_set), test=test_number
    )


def direct_shape_prompt(past_batches, current_batch, test) -> str:
    batch_line = " ".join(f"({t.test.describe()})" for t in current_batch)
    return SHAPE_DIRECT_TEMPLATE.format(
        examples=serialize_shape_batches(past_batches),
        batch=batch_line,
        test=test.describe(),
    )


def _direct_samples(backend, prompt: str) -> List[str]:
    params = {"temperature": 1.0, "n": DIRECT_SAMPLES, "max_tokens": 8}
    return [c["text"] for c in backend._completions(prompt, params)]


def direct_llm_number(cfg: ExperimentConfig, backend, judgments=None):
    """Ask the LM directly whether each test number belongs, estimate
    p(yes) from 10 temperature-1 samples, then Platt-calibrate."""
    if judgments is None:
        judgments = io.load_number_judgments(cfg.data_path)
    raw_by_id: Dict[str, Tuple[float, float]] = {}
    for set_id, group in group_judgments(judgments).items():
        for j in group:
            prompt = direct_number_prompt(j.example_set, j.test_number)
            ratio = yes_no_ratio(_direct_samples(backend, prompt))
            raw_by_id[f"{set_id}:{j.test_number}"] = (ratio, j.mean_rating)
    records = _calibrated_records(raw_by_id, cfg.k_folds, cfg.seed)
    return _r2_metrics(records), records


def direct_llm_shape(curves: Sequence[LearningCurve], backend):
    """Per-trial yes/no querying for the logical domain; returns
    (metrics, records) with raw sample ratios as predictions."""
    records: List[PredictionRecord] = []
    labels: List[bool] = []
    for curve in curves:
        trial_index = 0
        for b, batch in enumerate(curve.batches):
            for t in batch:
                prompt = direct_shape_prompt(curve.batches[:b], batch, t.test)
                ratio = yes_no_ratio(_direct_samples(backend, prompt))
                human = (
                    curve.human_positive_rate[trial_index]
                    if trial_index < len(curve.human_positive_rate)
                    else None
                )
                records.append(
                    PredictionRecord(
                        f"{curve.concept_id}:{trial_index}", ratio, human, "holdout"
                    )
                )
                labels.append(t.label)
                trial_index += 1
    metrics = {
        "accuracy": float(
            np.mean([(r.prediction >= 0.5) == y for r, y in zip(records, labels)])
        ),
        "n_trials": len(records),
    }
    return metrics, records


# ---------------------------------------------------------------------------
# Proposal-distribution ablation


def no_proposal_ablation(cfg: ExperimentConfig, shared_pool_path, judgments=None):
    """Full model, but every example set draws from one shared pool of
    hypotheses proposed without conditioning on the examples."""
    if judgments is None:
        judgments = io.load_number_judgments(cfg.data_path)
    from .dsl import NUMBER as NUMBER_DOMAIN

    shared = io.load_pool(shared_pool_path, NUMBER_DOMAIN)[: cfg.budget]
    pools = {
        set_id: list(shared) for set_id in group_judgments(judgments)
    }
    return run_number_experiment(cfg, judgments=judgments, pools=pools)
