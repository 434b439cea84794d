"""Parameter fitting by full-batch Adam on the human-matching objective.

The loss is a weighted binary cross-entropy between model predictions
and average human responses, summed over prediction points. Gradients
are computed analytically through the log-sum-exp posterior weights,
the likelihood terms, the temperature, and (for the number domain) the
Platt transform; tests verify them against central finite differences.

Constrained parameters are optimized in an unconstrained space:
epsilon and alpha through a logistic, beta and temperature through exp.
The unconstrained vector layout is

    [theta (D entries), eps_u, alpha_u, beta_u, temp_u, platt_a, platt_b]
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import expit, logit, logsumexp

from .types import ModelParams

ALL_PARAM_GROUPS = ("theta", "epsilon", "alpha", "beta", "temperature", "platt")


class NonFinite(ArithmeticError):
    """Loss or gradient left the finite range."""


class InvalidK(ValueError):
    pass


class DegenerateTargets(ValueError):
    pass


# ---------------------------------------------------------------------------
# Small numeric pieces


def reparam(unconstrained: float, kind: str) -> float:
    """Map an unconstrained value into its legal range."""
    if kind == "unit_interval":
        return float(expit(unconstrained))
    if kind == "positive":
        return float(np.exp(np.clip(unconstrained, -700, 700)))
    raise ValueError(f"unknown reparam kind {kind!r}")


def weighted_bce_loss(pred: float, r: float, delta: float = 1e-6) -> float:
    """-[r log pred + (1-r) log(1-pred)], with pred clamped away from
    0 and 1."""
    pred = min(max(pred, delta), 1.0 - delta)
    return -(r * math.log(pred) + (1.0 - r) * math.log(1.0 - pred))


def kfold_split(ids: Sequence, k: int, seed: int) -> List[Tuple[list, list]]:
    """Deterministic k-fold partition; fold sizes differ by at most 1."""
    ids = list(ids)
    if not 1 <= k <= len(ids):
        raise InvalidK(f"k={k} incompatible with {len(ids)} ids")
    order = np.random.default_rng(seed).permutation(len(ids))
    folds = [list() for _ in range(k)]
    for pos, idx in enumerate(order):
        folds[pos % k].append(ids[idx])
    out = []
    for i in range(k):
        holdout = folds[i]
        train = [x for j, f in enumerate(folds) if j != i for x in f]
        out.append((train, holdout))
    return out


def r_squared(pred: Sequence[float], target: Sequence[float]) -> float:
    pred = np.asarray(pred, dtype=float)
    target = np.asarray(target, dtype=float)
    if pred.shape != target.shape or pred.size < 2:
        raise ValueError("need equal-length inputs with at least 2 points")
    ss_tot = float(np.sum((target - target.mean()) ** 2))
    if ss_tot == 0.0:
        raise DegenerateTargets("targets are all equal")
    ss_res = float(np.sum((pred - target) ** 2))
    return 1.0 - ss_res / ss_tot


# ---------------------------------------------------------------------------
# Prediction tasks (pools frozen, arrays precomputed)


@dataclass
class NumberTask:
    """All judgments sharing one training example set.

    member[s, k] = 1 if training example k lies in hypothesis s's
    extension; test_member[i, s] likewise for test number i.
    """

    features: Optional[np.ndarray]  # (S, D); None under a non-tuned prior
    base_logprior: np.ndarray  # (S,) zeros for uniform/tuned, scores for external
    parsed: np.ndarray  # (S,) bool
    member: np.ndarray  # (S, K)
    inv_size: np.ndarray  # (S,) 1/|C|, 0 for empty extensions
    test_member: np.ndarray  # (n_tests, S)
    targets: np.ndarray  # (n_tests,)
    ids: List[str]

    domain: str = "number"


@dataclass
class ShapeTask:
    """One learning curve: shared consistency matrix plus per-trial
    prediction points."""

    features: Optional[np.ndarray]
    base_logprior: np.ndarray
    parsed: np.ndarray
    consist: np.ndarray  # (S, K_total) concept truth value per trial
    labels: np.ndarray  # (K_total,) observed Y
    # per point: (first trial index of its batch, pool mask, target, id)
    points: List[Tuple[int, np.ndarray, float, str]] = field(default_factory=list)

    domain: str = "shape"


def _unpack(u: np.ndarray, dim: int) -> ModelParams:
    return ModelParams(
        theta=u[:dim].copy(),
        epsilon=reparam(u[dim], "unit_interval"),
        alpha=reparam(u[dim + 1], "unit_interval"),
        beta=reparam(u[dim + 2], "positive"),
        temperature=reparam(u[dim + 3], "positive"),
        platt_a=float(u[dim + 4]),
        platt_b=float(u[dim + 5]),
    )


def pack_params(params: ModelParams) -> np.ndarray:
    dim = len(params.theta)
    u = np.zeros(dim + 6)
    u[:dim] = params.theta
    u[dim] = logit(params.epsilon)
    u[dim + 1] = logit(params.alpha)
    u[dim + 2] = math.log(params.beta) if params.beta > 0 else -30.0
    u[dim + 3] = math.log(params.temperature)
    u[dim + 4] = params.platt_a
    u[dim + 5] = params.platt_b
    return u


def _softmax_masked(scores: np.ndarray, alive: np.ndarray) -> np.ndarray:
    w = np.zeros_like(scores)
    if np.any(alive):
        w[alive] = np.exp(scores[alive] - logsumexp(scores[alive]))
        w /= w.sum()
    return w


def _task_predictions(task, u: np.ndarray, dim: int, grad: Optional[np.ndarray]):
    """Predictions for one task; accumulates d(loss)/du into grad.

    Returns (loss, list of (id, prediction, target)).
    """
    eps_u, alpha_u, beta_u, temp_u = u[dim], u[dim + 1], u[dim + 2], u[dim + 3]
    a, b = u[dim + 4], u[dim + 5]
    eps = reparam(eps_u, "unit_interval")
    alpha = reparam(alpha_u, "unit_interval")
    beta = reparam(beta_u, "positive")
    temp = reparam(temp_u, "positive")

    log_prior = task.base_logprior.copy()
    if task.features is not None:
        log_prior = log_prior + task.features @ u[:dim]
    alive = task.parsed

    if task.domain == "number":
        return _number_task(task, u, dim, grad, log_prior, alive, eps, temp, a, b)
    return _shape_task(task, u, dim, grad, log_prior, alive, eps, alpha, beta, temp)


def _number_task(task, u, grad_dim, grad, log_prior, alive, eps, temp, a, b):
    records = []
    n_tests = len(task.targets)
    if not np.any(alive):
        # nothing parseable: fall back to the noise-only prediction 0.5
        # pushed through the Platt transform
        loss = 0.0
        for i in range(n_tests):
            z = b  # logit(0.5) = 0
            pred = float(expit(z))
            r = task.targets[i]
            loss += r * _softplus(-z) + (1 - r) * _softplus(z)
            if grad is not None:
                grad[grad_dim + 5] += pred - r
            records.append((task.ids[i], pred, r))
        return loss, records

    # per-example likelihood terms g[s, k]
    g = (1.0 - eps) * task.member * task.inv_size[:, None] + eps / 100.0
    loglik = np.where(alive, np.log(np.maximum(g, 1e-300)).sum(axis=1), 0.0)
    log_unnorm = log_prior + loglik
    scores = log_unnorm / temp
    w = _softmax_masked(scores, alive)

    p_raw = task.test_member @ w  # (n_tests,)
    p_c = np.clip(p_raw, 1e-6, 1.0 - 1e-6)
    z = b + a * logit(p_c)
    pred = expit(z)
    r = task.targets
    loss = float(np.sum(r * _softplus(-z) + (1 - r) * _softplus(z)))
    for i in range(n_tests):
        records.append((task.ids[i], float(pred[i]), float(r[i])))

    if grad is not None:
        dl_dz = pred - r  # (n_tests,)
        grad[grad_dim + 4] += float(dl_dz @ logit(p_c))
        grad[grad_dim + 5] += float(dl_dz.sum())
        inside = (p_raw > 1e-6) & (p_raw < 1.0 - 1e-6)
        dl_dp = np.where(inside, dl_dz * a / (p_c * (1.0 - p_c)), 0.0)
        # dp_i/ds_s = w_s (t_is - p_i); collapse over tests
        coeff = ((task.test_member - p_raw[:, None]) * w[None, :]).T @ dl_dp  # (S,)
        coeff[~alive] = 0.0
        if task.features is not None:
            grad[:grad_dim] += task.features.T @ (coeff / temp)
        dll_deps = np.where(
            alive,
            ((1.0 / 100.0 - task.member * task.inv_size[:, None]) / g).sum(axis=1),
            0.0,
        )
        grad[grad_dim] += float(coeff @ dll_deps) / temp * eps * (1.0 - eps)
        safe_u = np.where(alive, log_unnorm, 0.0)
        grad[grad_dim + 3] += float(coeff @ (-safe_u / temp))
    return loss, records


def _shape_task(task, u, grad_dim, grad, log_prior, alive, eps, alpha, beta, temp):
    records = []
    loss = 0.0
    n_total = task.consist.shape[1]
    sign = np.where(task.labels > 0, 1.0, -1.0)  # (K_total,)

    for k_now, pool_mask, target, point_id in task.points:
        mask = alive & pool_mask
        if not np.any(mask):
            # noise-only prediction when nothing in the pool parses
            pred = eps * alpha
            pred_c = min(max(pred, 1e-6), 1.0 - 1e-6)
            loss += weighted_bce_loss(pred, target)
            if grad is not None:
                dl_dp = (pred_c - target) / (pred_c * (1.0 - pred_c))
                grad[grad_dim] += dl_dp * alpha * eps * (1.0 - eps)
                grad[grad_dim + 1] += dl_dp * eps * alpha * (1.0 - alpha)
            records.append((point_id, pred, target))
            continue

        K = k_now  # trials observed so far (all previous batches)
        c_past = task.consist[:, :K]
        q_past = (1.0 - eps) * c_past + eps * alpha  # P(Y=1)
        r_past = np.where(task.labels[:K] > 0, q_past, 1.0 - q_past)
        lag = np.arange(K, 0, -1, dtype=float)
        decay = lag**-beta
        log_r = np.log(np.maximum(r_past, 1e-300))
        loglik = np.where(mask, (decay * log_r).sum(axis=1) if K else 0.0, 0.0)
        log_unnorm = log_prior + loglik
        scores = log_unnorm / temp
        w = _softmax_masked(scores, mask)

        c_now = task.consist[:, k_now] if k_now < n_total else None
        q_now = (1.0 - eps) * task.consist[:, k_now] + eps * alpha
        p = float(w @ q_now)
        p_c = min(max(p, 1e-6), 1.0 - 1e-6)
        loss += weighted_bce_loss(p, target)
        records.append((point_id, p, target))

        if grad is not None:
            dl_dp = (p_c - target) / (p_c * (1.0 - p_c))
            if not (1e-6 < p < 1.0 - 1e-6):
                dl_dp = 0.0
            # direct dependence of q_now on eps, alpha
            grad[grad_dim] += (
                dl_dp * float(w @ (alpha - task.consist[:, k_now])) * eps * (1.0 - eps)
            )
            grad[grad_dim + 1] += dl_dp * eps * float(w.sum()) * alpha * (1.0 - alpha)
            # dependence through the weights
            coeff = dl_dp * w * (q_now - p)  # (S,)
            coeff[~mask] = 0.0
            if task.features is not None:
                grad[:grad_dim] += task.features.T @ (coeff / temp)
            if K:
                dr_deps = sign[None, :K] * (alpha - c_past)
                dll_deps = (decay * dr_deps / r_past).sum(axis=1)
                grad[grad_dim] += (
                    float(coeff @ dll_deps) / temp * eps * (1.0 - eps)
                )
                dr_dalpha = sign[None, :K] * eps
                dll_dalpha = (decay * dr_dalpha / r_past).sum(axis=1)
                grad[grad_dim + 1] += (
                    float(coeff @ dll_dalpha) / temp * alpha * (1.0 - alpha)
                )
                dll_dbeta = (-np.log(lag) * decay * log_r).sum(axis=1)
                grad[grad_dim + 2] += float(coeff @ dll_dbeta) / temp * beta
            safe_u = np.where(mask, log_unnorm, 0.0)
            grad[grad_dim + 3] += float(coeff @ (-safe_u / temp))
    return loss, records


def _softplus(x):
    return np.logaddexp(0.0, x)


def loss_and_grad(u: np.ndarray, tasks: Sequence, dim: int, want_grad: bool = True):
    """Total loss over all tasks and its gradient in unconstrained space."""
    grad = np.zeros_like(u) if want_grad else None
    loss = 0.0
    records = []
    for task in tasks:
        task_loss, task_records = _task_predictions(task, u, dim, grad)
        loss += task_loss
        records.extend(task_records)
    if not math.isfinite(loss) or (grad is not None and not np.all(np.isfinite(grad))):
        raise NonFinite("non-finite loss or gradient")
    return loss, grad, records


# ---------------------------------------------------------------------------
# Adam


@dataclass
class AdamState:
    m: np.ndarray
    v: np.ndarray
    t: int = 0

    @classmethod
    def zeros(cls, n: int) -> "AdamState":
        return cls(m=np.zeros(n), v=np.zeros(n))


def adam_step(
    u: np.ndarray,
    grad: np.ndarray,
    state: AdamState,
    lr: float = 0.001,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> np.ndarray:
    state.t += 1
    state.m = beta1 * state.m + (1.0 - beta1) * grad
    state.v = beta2 * state.v + (1.0 - beta2) * grad**2
    m_hat = state.m / (1.0 - beta1**state.t)
    v_hat = state.v / (1.0 - beta2**state.t)
    return u - lr * m_hat / (np.sqrt(v_hat) + eps)


# ---------------------------------------------------------------------------
# Full fit


@dataclass
class FitConfig:
    learning_rate: float = 0.001
    epochs: int = 1000
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    seed: int = 0
    clamp_delta: float = 1e-6
    trainable: Tuple[str, ...] = ("theta", "epsilon", "temperature", "platt")

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        unknown = set(self.trainable) - set(ALL_PARAM_GROUPS)
        if unknown:
            raise ValueError(f"unknown trainable groups: {sorted(unknown)}")


@dataclass
class FitResult:
    params: ModelParams
    loss_trace: List[float]
    holdout_predictions: List[Tuple[str, float, float]]  # (id, pred, target)

    def holdout_r2(self) -> float:
        preds = [p for _, p, _ in self.holdout_predictions]
        targets = [t for _, _, t in self.holdout_predictions]
        return r_squared(preds, targets)


def trainable_mask(dim: int, groups: Sequence[str]) -> np.ndarray:
    mask = np.zeros(dim + 6, dtype=bool)
    groups = set(groups)
    if "theta" in groups:
        mask[:dim] = True
    offsets = {"epsilon": 0, "alpha": 1, "beta": 2, "temperature": 3}
    for name, off in offsets.items():
        if name in groups:
            mask[dim + off] = True
    if "platt" in groups:
        mask[dim + 4] = True
        mask[dim + 5] = True
    return mask


def fit_params(
    config: FitConfig,
    train_tasks: Sequence,
    init: ModelParams,
    holdout_tasks: Sequence = (),
) -> FitResult:
    """Full-batch Adam on the trainable unconstrained parameters.

    Deterministic given (config, tasks, init); holdout predictions are
    produced with the final parameters only.
    """
    dim = len(init.theta)
    u = pack_params(init)
    mask = trainable_mask(dim, config.trainable)
    trace = []
    if np.any(mask):
        state = AdamState.zeros(len(u))
        for _ in range(config.epochs):
            loss, grad, _ = loss_and_grad(u, train_tasks, dim)
            trace.append(loss)
            grad = np.where(mask, grad, 0.0)
            u = adam_step(
                u,
                grad,
                state,
                lr=config.learning_rate,
                beta1=config.adam_beta1,
                beta2=config.adam_beta2,
                eps=config.adam_eps,
            )
    else:
        loss, _, _ = loss_and_grad(u, train_tasks, dim, want_grad=False)
        trace.append(loss)
    _, _, holdout = loss_and_grad(u, holdout_tasks, dim, want_grad=False)
    return FitResult(params=_unpack(u, dim), loss_trace=trace, holdout_predictions=holdout)
