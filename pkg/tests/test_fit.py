import math

import numpy as np
import pytest
from scipy.special import expit

from nlconcepts.fit import (
    AdamState,
    DegenerateTargets,
    FitConfig,
    InvalidK,
    adam_step,
    fit_params,
    kfold_split,
    loss_and_grad,
    pack_params,
    r_squared,
    reparam,
    trainable_mask,
    weighted_bce_loss,
)
from nlconcepts.harness import ExperimentConfig, build_number_task, build_shape_task
from nlconcepts.io import make_hypothesis
from nlconcepts.likelihood import EvalCache
from nlconcepts.prior import FeatureExtractor
from nlconcepts.types import (
    Hypothesis,
    LearningCurve,
    ModelParams,
    NumberExampleSet,
    ShapeObject,
    Trial,
    Unparsed,
)

DIM = 12


def number_task(cfg=None, ext=None, cache=None, tests=None):
    cfg = cfg or ExperimentConfig(domain="number", prior="tuned", feature_dim=DIM)
    ext = ext or FeatureExtractor(dim=DIM)
    cache = cache or EvalCache()
    pool = [
        make_hypothesis("the number is even", "even(x)", "number"),
        make_hypothesis("the number is a power of 2", "power(2, x)", "number"),
        make_hypothesis("the number is less than 30", "x < 30", "number"),
        make_hypothesis("nonsense", "???", "number"),
    ]
    tests = tests or [(32, 0.85, "t32"), (10, 0.55, "t10"), (97, 0.08, "t97")]
    return build_number_task(
        cfg, pool, NumberExampleSet([2, 4, 8, 16]), tests, ext, cache
    )


def shape_task(cfg=None, ext=None, cache=None):
    cfg = cfg or ExperimentConfig(domain="shape", prior="tuned", feature_dim=DIM)
    ext = ext or FeatureExtractor(dim=DIM)
    cache = cache or EvalCache()
    objs = [
        ShapeObject("triangle", "green", 1),
        ShapeObject("circle", "blue", 2),
        ShapeObject("rectangle", "green", 3),
    ]
    batches = [
        [Trial(objs, objs[0], True), Trial(objs, objs[1], False)],
        [Trial(objs, objs[2], False), Trial(objs, objs[0], True)],
    ]
    curve = LearningCurve("c1", "green triangles", batches, [0.7, 0.2, 0.35, 0.9])
    pool = [
        make_hypothesis(
            "something is positive if it is a green triangle",
            "this.color == green and this.shape == triangle",
            "shape",
        ),
        make_hypothesis(
            "something is positive if it is green", "this.color == green", "shape"
        ),
        Hypothesis("something is positive if it sparkles", Unparsed("???"), None, 2),
    ]
    return build_shape_task(cfg, pool, curve, ext, cache)


def fd_check(u, tasks, dim, h=1e-4, rtol=1e-3):
    _, grad, _ = loss_and_grad(u, tasks, dim)
    for i in range(len(u)):
        up, dn = u.copy(), u.copy()
        up[i] += h
        dn[i] -= h
        lp, _, _ = loss_and_grad(up, tasks, dim, want_grad=False)
        ln, _, _ = loss_and_grad(dn, tasks, dim, want_grad=False)
        fd = (lp - ln) / (2 * h)
        denom = max(1e-8, abs(fd), abs(grad[i]))
        assert abs(fd - grad[i]) / denom < rtol or abs(fd - grad[i]) < 1e-7, (
            f"param {i}: analytic {grad[i]} vs fd {fd}"
        )


def random_u(rng):
    params = ModelParams(
        theta=rng.normal(0, 0.3, DIM),
        epsilon=float(rng.uniform(0.05, 0.6)),
        alpha=float(rng.uniform(0.2, 0.8)),
        beta=float(rng.uniform(0.2, 2.0)),
        temperature=float(rng.uniform(0.5, 2.0)),
        platt_a=float(rng.uniform(0.5, 2.0)),
        platt_b=float(rng.uniform(-0.5, 0.5)),
    )
    return pack_params(params)


def test_gradients_match_finite_differences_number():
    rng = np.random.default_rng(0)
    tasks = [number_task()]
    for _ in range(3):
        fd_check(random_u(rng), tasks, DIM)


def test_gradients_match_finite_differences_shape():
    rng = np.random.default_rng(1)
    tasks = [shape_task()]
    for _ in range(3):
        fd_check(random_u(rng), tasks, DIM)


def test_gradients_match_finite_differences_mixed():
    rng = np.random.default_rng(2)
    tasks = [number_task(), shape_task()]
    for _ in range(3):
        fd_check(random_u(rng), tasks, DIM)


def test_reparam():
    assert reparam(0.0, "unit_interval") == pytest.approx(0.5)
    assert reparam(0.0, "positive") == pytest.approx(1.0)
    assert 0 < reparam(-50, "unit_interval") < 1e-6
    with pytest.raises(ValueError):
        reparam(0.0, "banana")


def test_pack_unpack_round_trip():
    from nlconcepts.fit import _unpack

    p = ModelParams(
        theta=np.arange(3, dtype=float),
        epsilon=0.23,
        alpha=0.61,
        beta=1.7,
        temperature=0.8,
        platt_a=1.4,
        platt_b=-0.2,
    )
    q = _unpack(pack_params(p), 3)
    np.testing.assert_allclose(q.theta, p.theta)
    assert q.epsilon == pytest.approx(p.epsilon)
    assert q.alpha == pytest.approx(p.alpha)
    assert q.beta == pytest.approx(p.beta)
    assert q.temperature == pytest.approx(p.temperature)
    assert q.platt_a == p.platt_a
    assert q.platt_b == p.platt_b


def test_weighted_bce_loss():
    assert weighted_bce_loss(0.5, 0.5) == pytest.approx(math.log(2))
    assert weighted_bce_loss(1.0, 1.0) == pytest.approx(-math.log(1 - 1e-6))
    # clamp keeps pred=0 finite
    assert math.isfinite(weighted_bce_loss(0.0, 1.0))


def test_kfold_split_laws():
    ids = [f"d{i}" for i in range(23)]
    folds = kfold_split(ids, 10, seed=0)
    assert len(folds) == 10
    all_holdout = [x for _, h in folds for x in h]
    assert sorted(all_holdout) == sorted(ids)  # exact partition
    sizes = [len(h) for _, h in folds]
    assert max(sizes) - min(sizes) <= 1
    for train, holdout in folds:
        assert not set(train) & set(holdout)
        assert sorted(train + holdout) == sorted(ids)
    # deterministic given the seed, different across seeds
    assert folds == kfold_split(ids, 10, seed=0)
    assert folds != kfold_split(ids, 10, seed=1)
    with pytest.raises(InvalidK):
        kfold_split(ids, 0, seed=0)
    with pytest.raises(InvalidK):
        kfold_split(ids, 24, seed=0)


def test_r_squared():
    assert r_squared([1, 2, 3], [1, 2, 3]) == pytest.approx(1.0)
    target = [1.0, 2.0, 3.0, 4.0]
    assert r_squared([2.5] * 4, target) == pytest.approx(0.0)
    assert r_squared([4, 3, 2, 1], target) < 0
    with pytest.raises(DegenerateTargets):
        r_squared([1, 2], [3, 3])
    with pytest.raises(ValueError):
        r_squared([1], [1])


def test_adam_step_hand_computed():
    u = np.array([1.0, -2.0])
    grad = np.array([0.5, -1.0])
    state = AdamState.zeros(2)
    out = adam_step(u, grad, state, lr=0.1)
    # first step: m_hat = grad, v_hat = grad^2 -> step ~ lr * sign(grad)
    expected = u - 0.1 * grad / (np.abs(grad) + 1e-8)
    np.testing.assert_allclose(out, expected, rtol=1e-6)
    assert state.t == 1
    # second step with same gradient keeps moving the same direction
    out2 = adam_step(out, grad, state, lr=0.1)
    assert out2[0] < out[0] and out2[1] > out[1]


def test_trainable_mask():
    mask = trainable_mask(3, ("theta", "platt"))
    assert mask.tolist() == [True] * 3 + [False] * 4 + [True, True]
    mask2 = trainable_mask(0, ("epsilon", "beta"))
    assert mask2.tolist() == [True, False, True, False, False, False]


def test_fit_config_validation():
    with pytest.raises(ValueError):
        FitConfig(learning_rate=0.0)
    with pytest.raises(ValueError):
        FitConfig(epochs=0)
    with pytest.raises(ValueError):
        FitConfig(trainable=("theta", "banana"))


def test_fit_reduces_loss_and_respects_mask():
    task = number_task()
    init = ModelParams(theta=np.zeros(DIM), epsilon=0.5, alpha=0.5, beta=1.0)
    cfg = FitConfig(epochs=200, trainable=("epsilon", "platt"))
    result = fit_params(cfg, [task], init)
    assert result.loss_trace[-1] < result.loss_trace[0]
    # untouched groups stay at their initial values
    np.testing.assert_array_equal(result.params.theta, init.theta)
    assert result.params.alpha == pytest.approx(0.5)
    assert result.params.beta == pytest.approx(1.0)
    assert result.params.temperature == pytest.approx(1.0)


def test_fit_is_deterministic():
    task = number_task()
    init = ModelParams(theta=np.zeros(DIM), epsilon=0.5, alpha=0.5, beta=1.0)
    cfg = FitConfig(epochs=50)
    r1 = fit_params(cfg, [task], init, holdout_tasks=[task])
    r2 = fit_params(cfg, [task], init, holdout_tasks=[task])
    np.testing.assert_array_equal(r1.params.theta, r2.params.theta)
    assert r1.loss_trace == r2.loss_trace
    assert r1.holdout_predictions == r2.holdout_predictions


def test_all_unparsed_number_pool_predicts_platt_of_half():
    cfg = ExperimentConfig(domain="number", prior="uniform", feature_dim=0)
    ext = FeatureExtractor(dim=0)
    cache = EvalCache()
    pool = [make_hypothesis("nonsense", "???", "number")]
    task = build_number_task(
        cfg, pool, NumberExampleSet([5]), [(10, 0.5, "a")], ext, cache
    )
    params = ModelParams(theta=np.zeros(0), platt_b=0.7)
    _, _, records = loss_and_grad(pack_params(params), [task], 0, want_grad=False)
    assert records[0][1] == pytest.approx(float(expit(0.7)))


def test_importance_weighting_task_uses_logq():
    cfg = ExperimentConfig(domain="number", weighting="importance", prior="uniform")
    ext = FeatureExtractor(dim=0)
    cache = EvalCache()
    pool = [
        Hypothesis(
            "the number is even",
            make_hypothesis("e", "even(x)", "number").program,
            proposal_logprob=-2.0,
        ),
        Hypothesis(
            "the number is odd",
            make_hypothesis("o", "odd(x)", "number").program,
            proposal_logprob=-1.0,
        ),
    ]
    task = build_number_task(
        cfg, pool, NumberExampleSet([2]), [(4, 0.8, "a")], ext, cache
    )
    np.testing.assert_allclose(task.base_logprior, [2.0, 1.0])
    # missing logq is an error under importance weighting
    from nlconcepts.posterior import MissingLogQ

    bad = [make_hypothesis("the number is even", "even(x)", "number")]
    with pytest.raises(MissingLogQ):
        build_number_task(cfg, bad, NumberExampleSet([2]), [(4, 0.8, "a")], ext, cache)
