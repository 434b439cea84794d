"""End-to-end experiments: Number Game fits and online logical
concept learning, plus tidy CSV emission for downstream plotting."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import io
from .dsl import NUMBER as NUMBER_DOMAIN
from .dsl import SHAPE as SHAPE_DOMAIN
from .fit import (
    FitConfig,
    FitResult,
    NumberTask,
    ShapeTask,
    fit_params,
    kfold_split,
    r_squared,
)
from .likelihood import EvalCache, pool_shape_logliks
from .posterior import dedup_pool, dedup_weights, predict_response
from .prior import FEATURE_DIM, External, FeatureExtractor, Tuned, Uniform
from .types import (
    HumanNumberJudgment,
    Hypothesis,
    LearningCurve,
    ModelParams,
    NumberExampleSet,
)


@dataclass
class PredictionRecord:
    datum_id: str
    prediction: float
    human: Optional[float] = None
    split: str = "holdout"

    def __post_init__(self):
        if not math.isfinite(self.prediction):
            raise ValueError("prediction must be finite")


@dataclass
class ExperimentConfig:
    domain: str  # "number" | "shape"
    data_path: str = ""  # judgments CSV or directory of curve JSONs
    pools: Dict[str, str] = field(default_factory=dict)  # set/concept id -> pool file
    prior: str = "uniform"  # uniform | tuned | external
    weighting: str = "dedup"  # dedup | importance
    budget: int = 100
    scores_path: str = ""  # external prior scores (JSONL)
    feature_dim: int = FEATURE_DIM
    fit: FitConfig = field(default_factory=FitConfig)
    params: Optional[ModelParams] = None  # skip fitting if provided
    out_dir: str = ""
    seed: int = 0
    k_folds: int = 10

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        raw = json.loads(Path(path).read_text())
        fit_cfg = FitConfig(**raw.pop("fit", {}))
        if "trainable" in raw:
            fit_cfg = replace(fit_cfg, trainable=tuple(raw.pop("trainable")))
        params = raw.pop("params", None)
        if params is not None:
            params = ModelParams(**{k: (np.asarray(v) if k == "theta" else v) for k, v in params.items()})
        return cls(fit=fit_cfg, params=params, **raw)


def _prior_pieces(cfg: ExperimentConfig, pool: Sequence[Hypothesis], extractor):
    """(features or None, base log-prior vector) for a deduped pool."""
    if cfg.prior == "tuned":
        return extractor.matrix(pool), np.zeros(len(pool))
    if cfg.prior == "external":
        scores = io.load_score_file(cfg.scores_path)
        return None, np.array([scores[h.key] for h in pool])
    return None, np.zeros(len(pool))


def prior_spec_for(cfg: ExperimentConfig, params: ModelParams, extractor):
    if cfg.prior == "tuned":
        return Tuned(params.theta, extractor)
    if cfg.prior == "external":
        return External(io.load_score_file(cfg.scores_path))
    return Uniform()


# ---------------------------------------------------------------------------
# Task construction


def build_number_task(
    cfg: ExperimentConfig,
    pool: Sequence[Hypothesis],
    example_set: NumberExampleSet,
    tests: Sequence[Tuple[int, float, str]],  # (test number, target, id)
    extractor: FeatureExtractor,
    cache: EvalCache,
) -> NumberTask:
    if cfg.weighting == "importance":
        unique = list(pool)
        log_q = np.array(
            [h.proposal_logprob if h.proposal_logprob is not None else 0.0 for h in unique]
        )
        missing = [h.nl_text for h in unique if h.proposal_logprob is None]
        if missing:
            from .posterior import MissingLogQ

            raise MissingLogQ(f"no proposal log-prob for {missing[0]!r}")
    else:
        unique, _ = dedup_pool(pool)
        log_q = np.zeros(len(unique))
    features, base = _prior_pieces(cfg, unique, extractor)
    base = base - log_q
    parsed = np.array([h.parsed for h in unique])
    extensions = [cache.extension(h) for h in unique]
    sizes = np.array([len(e) for e in extensions], dtype=float)
    inv_size = np.where(sizes > 0, 1.0 / np.maximum(sizes, 1.0), 0.0)
    member = np.array(
        [[float(x in e) for x in example_set.examples] for e in extensions]
    )
    test_member = np.array(
        [[float(t in e) for e in extensions] for t, _, _ in tests]
    )
    return NumberTask(
        features=features,
        base_logprior=base,
        parsed=parsed,
        member=member,
        inv_size=inv_size,
        test_member=test_member,
        targets=np.array([r for _, r, _ in tests]),
        ids=[i for _, _, i in tests],
    )


def build_shape_task(
    cfg: ExperimentConfig,
    pool: Sequence[Hypothesis],
    curve: LearningCurve,
    extractor: FeatureExtractor,
    cache: EvalCache,
    targets: str = "human",  # "human" rates or "labels" (tune for accuracy)
) -> ShapeTask:
    unique, _ = dedup_pool(pool)
    features, base = _prior_pieces(cfg, unique, extractor)
    parsed = np.array([h.parsed for h in unique])
    trials = curve.trials
    consist = np.array(
        [[float(cache.trial_member(h, t)) for t in trials] for h in unique]
    )
    labels = np.array([float(t.label) for t in trials])
    points = []
    trial_index = 0
    k_start = 0
    for b, batch in enumerate(curve.batches, start=1):
        mask = np.array(
            [h.source_batch is None or h.source_batch <= b for h in unique]
        )
        for t in batch:
            target = (
                curve.human_positive_rate[trial_index]
                if targets == "human"
                else labels[trial_index]
            )
            points.append(
                (k_start, mask, float(target), f"{curve.concept_id}:{trial_index}")
            )
            trial_index += 1
        k_start += len(batch)
    return ShapeTask(
        features=features,
        base_logprior=base,
        parsed=parsed,
        consist=consist,
        labels=labels,
        points=points,
    )


def _subset_number_task(task: NumberTask, keep_ids) -> Optional[NumberTask]:
    keep = [i for i, d in enumerate(task.ids) if d in keep_ids]
    if not keep:
        return None
    return NumberTask(
        features=task.features,
        base_logprior=task.base_logprior,
        parsed=task.parsed,
        member=task.member,
        inv_size=task.inv_size,
        test_member=task.test_member[keep],
        targets=task.targets[keep],
        ids=[task.ids[i] for i in keep],
    )


def default_params(cfg: ExperimentConfig) -> ModelParams:
    dim = cfg.feature_dim if cfg.prior == "tuned" else 0
    return ModelParams(theta=np.zeros(dim), epsilon=0.5, alpha=0.5, beta=1.0)


# ---------------------------------------------------------------------------
# Number Game


def group_judgments(judgments: Sequence[HumanNumberJudgment], pools=None):
    """Group judgments by example set; when `pools` is given, restrict
    to the sets a pool exists for (others cannot be modeled)."""
    by_set: Dict[str, List[HumanNumberJudgment]] = {}
    for j in judgments:
        if pools is not None and j.set_id not in pools:
            continue
        by_set.setdefault(j.set_id, []).append(j)
    if not by_set:
        raise ValueError("no judgments match the configured pools")
    return by_set


def _load_number_pools(cfg: ExperimentConfig) -> Dict[str, List[Hypothesis]]:
    from .propose.backends import EmptyPool

    if not cfg.pools:
        raise EmptyPool("no pool sources configured")
    pools = {}
    for set_id, path in cfg.pools.items():
        pool = io.load_pool(path, NUMBER_DOMAIN)[: cfg.budget]
        if not pool:
            raise EmptyPool(path)
        pools[set_id] = pool
    return pools


def run_number_experiment(
    cfg: ExperimentConfig,
    judgments: Optional[Sequence[HumanNumberJudgment]] = None,
    pools: Optional[Dict[str, List[Hypothesis]]] = None,
):
    """Cross-validated Number Game fit.

    Returns (metrics dict, prediction records, per-set top verbalizations).
    """
    if judgments is None:
        judgments = io.load_number_judgments(cfg.data_path)
    if pools is None:
        pools = _load_number_pools(cfg)
    by_set = group_judgments(judgments, pools)
    extractor = FeatureExtractor(dim=cfg.feature_dim)
    cache = EvalCache()

    full_tasks = {}
    for set_id, group in by_set.items():
        tests = [
            (j.test_number, j.mean_rating, f"{set_id}:{j.test_number}") for j in group
        ]
        full_tasks[set_id] = build_number_task(
            cfg, pools[set_id], group[0].example_set, tests, extractor, cache
        )

    all_ids = [d for task in full_tasks.values() for d in task.ids]
    records: List[PredictionRecord] = []
    if cfg.params is not None:
        params = cfg.params
        from .fit import loss_and_grad, pack_params

        _, _, preds = loss_and_grad(
            pack_params(params), list(full_tasks.values()), len(params.theta), want_grad=False
        )
        records = [PredictionRecord(i, p, t, "holdout") for i, p, t in preds]
        final_params = params
        traces = []
    else:
        folds = kfold_split(all_ids, min(cfg.k_folds, len(all_ids)), cfg.seed)
        traces = []
        for train_ids, holdout_ids in folds:
            train_tasks = [
                t
                for t in (
                    _subset_number_task(task, set(train_ids))
                    for task in full_tasks.values()
                )
                if t is not None
            ]
            holdout_tasks = [
                t
                for t in (
                    _subset_number_task(task, set(holdout_ids))
                    for task in full_tasks.values()
                )
                if t is not None
            ]
            result = fit_params(
                cfg.fit, train_tasks, default_params(cfg), holdout_tasks
            )
            traces.append(result.loss_trace)
            for datum_id, pred, target in result.holdout_predictions:
                records.append(PredictionRecord(datum_id, pred, target, "holdout"))
        # final fit on everything, used for verbalizations
        final = fit_params(cfg.fit, list(full_tasks.values()), default_params(cfg))
        final_params = final.params

    preds = [r.prediction for r in records]
    targets = [r.human for r in records]
    metrics = {
        "holdout_r2": r_squared(preds, targets),
        "n_predictions": len(records),
    }
    verbalizations = number_top_verbalizations(
        cfg, pools, {s: g[0].example_set for s, g in by_set.items()}, final_params, extractor, cache
    )
    return metrics, records, verbalizations


def number_top_verbalizations(
    cfg: ExperimentConfig,
    pools: Dict[str, List[Hypothesis]],
    example_sets: Dict[str, NumberExampleSet],
    params: ModelParams,
    extractor: FeatureExtractor,
    cache: EvalCache,
    top_k: int = 5,
) -> Dict[str, List[Tuple[str, float]]]:
    """Highest-weight hypotheses per example set under given params."""
    from .likelihood import pool_number_logliks

    prior = prior_spec_for(cfg, params, extractor)
    out = {}
    for set_id, pool in pools.items():
        loglik = pool_number_logliks(pool, example_sets[set_id], params.epsilon, cache)
        state = dedup_weights(pool, prior, loglik, params.temperature)
        order = np.argsort(-state.weights, kind="stable")[:top_k]
        out[set_id] = [
            (state.pool[i].nl_text, float(state.weights[i])) for i in order
        ]
    return out


# ---------------------------------------------------------------------------
# Online logical concepts


def run_online_experiment(
    cfg: ExperimentConfig,
    curves: Optional[Sequence[LearningCurve]] = None,
    pools: Optional[Dict[str, List[Hypothesis]]] = None,
    params: Optional[ModelParams] = None,
):
    """Online protocol: per batch, extend the pool with that batch's
    proposals, weigh by the decayed likelihood of all *previous* trials,
    and predict each trial in the batch before its label is revealed.

    Returns (metrics, records, per-curve details).
    """
    if curves is None:
        paths = sorted(Path(cfg.data_path).glob("*.json"))
        curves = [io.load_learning_curve(p) for p in paths]
    if pools is None:
        pools = {
            cid: io.load_pool(path, SHAPE_DOMAIN) for cid, path in cfg.pools.items()
        }
    params = params or cfg.params or default_params(cfg)
    extractor = FeatureExtractor(dim=cfg.feature_dim)
    cache = EvalCache()
    prior = prior_spec_for(cfg, params, extractor)

    records: List[PredictionRecord] = []
    details = {}
    for curve in curves:
        pool_all, _ = dedup_pool(pools[curve.concept_id])
        trials = curve.trials
        trial_index = 0
        seen = 0
        per_batch = []
        curve_records = []
        for b, batch in enumerate(curve.batches, start=1):
            visible = [
                h
                for h in pool_all
                if h.source_batch is None or h.source_batch <= b
            ]
            past = trials[:seen]
            loglik = pool_shape_logliks(
                visible, past, params.epsilon, params.alpha, params.beta, cache
            )
            state = dedup_weights(visible, prior, loglik, params.temperature)
            batch_preds = []
            for t in batch:
                if state.degenerate:
                    pred = params.epsilon * params.alpha
                else:
                    pred = predict_response(
                        state, t, params.epsilon, params.alpha, cache
                    )
                human = (
                    curve.human_positive_rate[trial_index]
                    if trial_index < len(curve.human_positive_rate)
                    else None
                )
                rec = PredictionRecord(
                    f"{curve.concept_id}:{trial_index}", pred, human, "holdout"
                )
                records.append(rec)
                curve_records.append(rec)
                batch_preds.append((pred, t.label))
                trial_index += 1
            accuracy = float(
                np.mean([(p >= 0.5) == bool(y) for p, y in batch_preds])
            )
            map_nl = None if state.degenerate else state.map_hypothesis().nl_text
            per_batch.append({"batch": b, "accuracy": accuracy, "map_nl": map_nl})
            seen += len(batch)
        details[curve.concept_id] = {
            "per_batch": per_batch,
            "records": curve_records,
        }
    labels = [
        bool(t.label) for curve in curves for t in curve.trials
    ]
    preds = [r.prediction for r in records]
    metrics = {
        "accuracy": float(
            np.mean([(p >= 0.5) == y for p, y in zip(preds, labels)])
        ),
        "n_trials": len(records),
    }
    humans = [r.human for r in records if r.human is not None]
    if len(humans) == len(records) and len(set(humans)) > 1:
        metrics["r2_vs_human"] = r_squared(preds, humans)
    return metrics, records, details


def fit_online_params(
    cfg: ExperimentConfig,
    curves: Sequence[LearningCurve],
    pools: Dict[str, List[Hypothesis]],
    targets: str = "human",
) -> FitResult:
    """Fit epsilon/alpha/beta/temperature (and theta under a tuned
    prior) against the learning curves."""
    extractor = FeatureExtractor(dim=cfg.feature_dim)
    cache = EvalCache()
    tasks = [
        build_shape_task(cfg, pools[c.concept_id], c, extractor, cache, targets)
        for c in curves
    ]
    return fit_params(cfg.fit, tasks, default_params(cfg))


# ---------------------------------------------------------------------------
# Plot data


def emit_plot_data(records: Sequence[PredictionRecord], path) -> None:
    """Tidy CSV of predictions vs. human values, one row per datum."""
    if not records:
        raise ValueError("no records to emit")
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["datum_id", "prediction", "human", "split"])
        for r in records:
            writer.writerow(
                [
                    r.datum_id,
                    f"{r.prediction:.10f}",
                    "" if r.human is None else f"{r.human:.10f}",
                    r.split,
                ]
            )


def emit_learning_curves(details: Dict, path) -> None:
    """Per-batch accuracy and MAP verbalization, 15 rows per concept."""
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["concept_id", "batch", "accuracy", "map_nl"])
        for cid, info in details.items():
            for row in info["per_batch"]:
                writer.writerow([cid, row["batch"], f"{row['accuracy']:.10f}", row["map_nl"] or ""])


def emit_sweep_table(rows: Sequence[Dict], path) -> None:
    """Budget-sweep results: mean and SEM of holdout R^2 per budget."""
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["budget", "mean_r2", "sem_r2", "n_runs"])
        for row in rows:
            writer.writerow(
                [row["budget"], f"{row['mean_r2']:.10f}", f"{row['sem_r2']:.10f}", row["n_runs"]]
            )


def budget_sweep(
    cfg: ExperimentConfig,
    budgets: Sequence[int] = (1, 3, 10, 30, 100),
    seeds: Sequence[int] = (0, 1, 2),
) -> List[Dict]:
    """Holdout fit quality as a function of the proposal budget,
    mean +/- SEM over seeds."""
    judgments = io.load_number_judgments(cfg.data_path)
    rows = []
    for budget in budgets:
        r2s = []
        for seed in seeds:
            run_cfg = replace(cfg, budget=budget, seed=seed)
            metrics, _, _ = run_number_experiment(run_cfg, judgments=judgments)
            r2s.append(metrics["holdout_r2"])
        r2s = np.array(r2s)
        sem = float(r2s.std(ddof=1) / math.sqrt(len(r2s))) if len(r2s) > 1 else 0.0
        rows.append(
            {
                "budget": budget,
                "mean_r2": float(r2s.mean()),
                "sem_r2": sem,
                "n_runs": len(r2s),
            }
        )
    return rows
