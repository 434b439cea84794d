import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nlconcepts.io import make_hypothesis
from nlconcepts.likelihood import (
    NEG_LARGE,
    DomainMismatch,
    EvalCache,
    decay_weights,
    decayed_sequence_loglik,
    number_loglikelihood,
    pool_number_logliks,
    pool_shape_logliks,
    trial_response_prob,
)
from nlconcepts.types import NumberExampleSet, ShapeObject, Trial


EVEN = make_hypothesis("the number is even", "even(x)", "number")
POW2 = make_hypothesis("the number is a power of 2", "power(2, x)", "number")
JUNK = make_hypothesis("junk", "???", "number")
GT = make_hypothesis(
    "something is positive if it is a green triangle",
    "this.color == green and this.shape == triangle",
    "shape",
)

TRI = ShapeObject("triangle", "green", 1)
CIR = ShapeObject("circle", "blue", 2)


def test_number_likelihood_size_principle():
    x = NumberExampleSet([2, 4, 8, 16])
    # both consistent; the smaller extension (|pow2| = 7) scores higher
    assert number_loglikelihood(POW2, x, 0.02) > number_loglikelihood(EVEN, x, 0.02)


def test_number_likelihood_exact_value():
    x = NumberExampleSet([2, 4])
    eps = 0.1
    per = (1 - eps) / 50 + eps / 100
    assert number_loglikelihood(EVEN, x, eps) == pytest.approx(2 * math.log(per))
    # inconsistent example mixes in only the noise term
    x2 = NumberExampleSet([2, 3])
    assert number_loglikelihood(EVEN, x2, eps) == pytest.approx(
        math.log(per) + math.log(eps / 100)
    )


def test_number_likelihood_zero_epsilon_inconsistent_is_neg_inf():
    x = NumberExampleSet([3])
    assert number_loglikelihood(EVEN, x, 0.0) == -math.inf


def test_empty_extension_hypothesis():
    empty = make_hypothesis("impossible", "false", "number")
    x = NumberExampleSet([5])
    # indicator-first: empty extension leaves only the noise floor
    assert number_loglikelihood(empty, x, 0.1) == pytest.approx(math.log(0.001))


def test_unparsed_gets_sentinel_in_pool_vector():
    x = NumberExampleSet([2, 4])
    out = pool_number_logliks([EVEN, JUNK], x, 0.1)
    assert out[1] == NEG_LARGE
    assert np.isfinite(out).all()


def test_domain_mismatch_raises():
    cache = EvalCache()
    with pytest.raises(DomainMismatch):
        cache.extension(GT)
    with pytest.raises(DomainMismatch):
        cache.trial_member(EVEN, Trial([TRI], TRI, True))


def test_trial_response_prob():
    t_pos = Trial([TRI, CIR], TRI, True)
    t_neg = Trial([TRI, CIR], CIR, False)
    eps, alpha = 0.2, 0.4
    assert trial_response_prob(GT, t_pos, eps, alpha) == pytest.approx(
        (1 - eps) + eps * alpha
    )
    assert trial_response_prob(GT, t_neg, eps, alpha) == pytest.approx(
        1 - eps * alpha
    )


def test_decay_weights_formula_and_recency():
    w = decay_weights(5, 0.7)
    expected = np.array([(1 + 5 - k) ** -0.7 for k in range(1, 6)])
    np.testing.assert_allclose(w, expected)
    assert w[-1] == 1.0  # most recent trial always has weight 1
    assert np.all(np.diff(w) > 0)  # strictly increasing toward recency


@settings(max_examples=1000, deadline=None)
@given(st.integers(1, 40), st.floats(0.0, 5.0, allow_nan=False))
def test_decay_weights_properties(k, beta):
    w = decay_weights(k, beta)
    expected = (1.0 + k - np.arange(1, k + 1)) ** -beta
    np.testing.assert_allclose(w, expected, rtol=1e-12)
    assert w[-1] == pytest.approx(1.0)
    assert np.all(np.diff(w) >= 0)


def test_beta_zero_reduces_to_iid_sum():
    trials = [
        Trial([TRI, CIR], TRI, True),
        Trial([TRI, CIR], CIR, False),
        Trial([TRI, CIR], TRI, False),
    ]
    eps, alpha = 0.15, 0.3
    decayed = decayed_sequence_loglik(GT, trials, eps, alpha, beta=0.0)
    iid = sum(
        math.log(trial_response_prob(GT, t, eps, alpha)) for t in trials
    )
    assert decayed == pytest.approx(iid, abs=1e-12)


def test_empty_trial_sequence_is_zero():
    assert decayed_sequence_loglik(GT, [], 0.1, 0.5, 1.0) == 0.0


def test_pool_shape_logliks_marks_unparsed():
    junk = make_hypothesis("mystery", "???", "shape")
    trials = [Trial([TRI], TRI, True)]
    out = pool_shape_logliks([GT, junk], trials, 0.1, 0.5, 1.0)
    assert out[0] > NEG_LARGE
    assert out[1] == NEG_LARGE


def test_cache_shares_entries_across_equal_text():
    cache = EvalCache()
    a = make_hypothesis("The number is EVEN", "even(x)", "number")
    assert cache.extension(EVEN) is cache.extension(a)
