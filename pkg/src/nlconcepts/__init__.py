"""Bayesian few-shot concept induction over natural-language hypotheses.

The model treats natural-language rules as latent concepts: an LM
proposes candidate rules from a handful of examples, each rule compiles
to a small formal language so it can be evaluated exactly, and Bayesian
inference over the resulting pool yields graded predictions about new
examples. Priors, noise levels, memory decay, and calibration are fit
to human judgments by gradient descent.

Two experimental domains are included: the Number Game (concepts over
1..100) and online learning of logical rules about colored shapes.
"""

from .fit import FitConfig, FitResult, fit_params, kfold_split, r_squared
from .likelihood import (
    EvalCache,
    decayed_sequence_loglik,
    number_loglikelihood,
    pool_number_logliks,
    pool_shape_logliks,
)
from .posterior import (
    PosteriorState,
    dedup_pool,
    dedup_weights,
    importance_weights,
    predict_membership,
    predict_response,
)
from .prior import External, FeatureExtractor, Tuned, Uniform, extract_features
from .types import (
    Hypothesis,
    HumanNumberJudgment,
    LearningCurve,
    ModelParams,
    NumberExampleSet,
    ShapeObject,
    Trial,
    Unparsed,
    canonicalize_nl,
    shape_universe,
)

__version__ = "0.1.0"

__all__ = [
    "EvalCache",
    "External",
    "FeatureExtractor",
    "FitConfig",
    "FitResult",
    "HumanNumberJudgment",
    "Hypothesis",
    "LearningCurve",
    "ModelParams",
    "NumberExampleSet",
    "PosteriorState",
    "ShapeObject",
    "Trial",
    "Tuned",
    "Uniform",
    "Unparsed",
    "canonicalize_nl",
    "decayed_sequence_loglik",
    "dedup_pool",
    "dedup_weights",
    "extract_features",
    "fit_params",
    "importance_weights",
    "kfold_split",
    "number_loglikelihood",
    "pool_number_logliks",
    "pool_shape_logliks",
    "predict_membership",
    "predict_response",
    "r_squared",
    "shape_universe",
    "__version__",
]
