"""Proposal providers: static pools, replay caches, and the live API.

A backend turns a ProposalRequest into a list of Hypothesis values.
Live responses are always recorded into the replay store before use, so
experiments run from replay are bitwise reproducible. Freshly proposed
hypotheses carry no program yet; translate_nl_to_dsl compiles them.
"""

from __future__ import annotations

import math
from typing import Dict, List, Optional, Sequence

from .. import io
from ..dsl import NUMBER as NUMBER_DOMAIN
from ..dsl import SHAPE as SHAPE_DOMAIN
from ..dsl import DslSyntaxError, parse_concept
from ..types import Hypothesis, Unparsed, canonicalize_nl
from .client import ChatClient, MissingLogprobSupport
from .prompts import (
    ABLATION,
    NUMBER,
    SHAPE_FIRST_BATCH,
    SHAPE_FIRST_ORDER,
    SHAPE_PROPOSITIONAL,
    ProposalRequest,
    build_prompt,
    parse_rule_lines,
    parse_rule_list,
    round_robin_take,
)
from .replay import ReplayMiss, ReplayStore

RULES_PER_LIST = 10


class EmptyPool(ValueError):
    pass


class StaticPoolBackend:
    """Serves the prefix of a fixed hypothesis file, in file order."""

    def __init__(self, path, domain: str):
        self.pool = io.load_pool(path, domain)
        if not self.pool:
            raise EmptyPool(str(path))

    def propose(self, req: ProposalRequest) -> List[Hypothesis]:
        return list(self.pool[: req.budget])


class ReplayBackend:
    """Replays recorded completions; raises ReplayMiss on unseen requests."""

    def __init__(self, store: ReplayStore):
        self.store = store

    def _completions(self, prompt: str, params: Dict) -> List[Dict]:
        return self.store.lookup(prompt, params)

    def propose(self, req: ProposalRequest) -> List[Hypothesis]:
        return _proposals_from_source(req, self._completions)

    def translate(self, prompt: str, params: Dict) -> str:
        return self._completions(prompt, params)[0]["text"]

    def score(self, prompt: str, params: Dict) -> float:
        completion = self._completions(prompt, params)[0]
        if completion["logprob"] is None:
            raise MissingLogprobSupport("recorded response carries no log-prob")
        return completion["logprob"]


class LiveBackend:
    """Queries the API and records every raw response before use."""

    def __init__(self, client: ChatClient, store: ReplayStore):
        self.client = client
        self.store = store

    def _completions(self, prompt: str, params: Dict) -> List[Dict]:
        cached = self.store.get(prompt, params)
        if cached is not None:
            return cached
        completions = self.client.complete(
            prompt,
            temperature=params["temperature"],
            n=params["n"],
            max_tokens=params.get("max_tokens", 512),
            stop=params.get("stop"),
            logprobs=params.get("logprobs", False),
        )
        self.store.record(prompt, params, completions)
        return completions

    def propose(self, req: ProposalRequest) -> List[Hypothesis]:
        return _proposals_from_source(req, self._completions)

    def translate(self, prompt: str, params: Dict) -> str:
        return self._completions(prompt, params)[0]["text"]

    def score(self, prompt: str, params: Dict) -> float:
        cached = self.store.get(prompt, params)
        if cached is not None:
            if cached[0]["logprob"] is None:
                raise MissingLogprobSupport("recorded response carries no log-prob")
            return cached[0]["logprob"]
        logprob = self.client.score(params["prefix"], params["continuation"])
        self.store.record(
            prompt, params, [{"text": params["continuation"], "logprob": logprob}]
        )
        return logprob


def _request_params(req: ProposalRequest) -> Dict:
    if req.domain in (NUMBER, ABLATION):
        return {
            "temperature": req.temperature,
            "n": req.budget,
            "max_tokens": 64,
            "stop": "\n",
            "logprobs": True,
            "seed": req.seed,
        }
    if req.domain == SHAPE_FIRST_ORDER:
        n_lists = math.ceil(req.budget / RULES_PER_LIST)
        return {"temperature": req.temperature, "n": n_lists, "seed": req.seed}
    if req.domain == SHAPE_PROPOSITIONAL:
        return {"temperature": req.temperature, "n": req.budget, "seed": req.seed}
    # first batch: deterministic single completion listing many rules
    return {"temperature": 0.0, "n": 1, "seed": req.seed}


def _untranslated(nl: str, logq=None, batch=None) -> Optional[Hypothesis]:
    nl = canonicalize_nl(nl)
    if not nl:
        return None
    return Hypothesis(
        nl_text=nl, program=Unparsed(""), proposal_logprob=logq, source_batch=batch
    )


def _proposals_from_source(req: ProposalRequest, get_completions) -> List[Hypothesis]:
    prompt = build_prompt(req)
    params = _request_params(req)
    completions = get_completions(prompt, params)
    hypotheses: List[Hypothesis] = []
    if req.domain in (NUMBER, ABLATION):
        for c in completions:
            line = c["text"].splitlines()[0] if c["text"].strip() else ""
            h = _untranslated(f"the number is {line}", logq=c.get("logprob"))
            if h:
                hypotheses.append(h)
    elif req.domain == SHAPE_FIRST_ORDER:
        lists = [parse_rule_list(c["text"]) for c in completions]
        for rule in round_robin_take(lists, req.budget):
            h = _untranslated(f"something is positive if {_strip_prefix(rule)}")
            if h:
                hypotheses.append(h)
    elif req.domain == SHAPE_PROPOSITIONAL:
        for c in completions:
            rules = parse_rule_lines(c["text"])
            if rules:
                h = _untranslated(f"something is positive if it is {rules[0]}")
                if h:
                    hypotheses.append(h)
    else:  # first batch
        rules = parse_rule_lines(completions[0]["text"])
        for rule in rules[: req.budget]:
            h = _untranslated(f"something is positive if it is {rule}")
            if h:
                hypotheses.append(h)
    return hypotheses[: req.budget]


def _strip_prefix(rule: str) -> str:
    lowered = rule.lower()
    prefix = "something is positive if"
    if lowered.startswith(prefix):
        return rule[len(prefix):].strip()
    return rule


def propose(req: ProposalRequest, backend) -> List[Hypothesis]:
    """Draw up to req.budget hypotheses from the configured backend."""
    return backend.propose(req)


# ---------------------------------------------------------------------------
# NL -> DSL translation

NUMBER_TRANSLATION_TEMPLATE = """\
Translate each rule into the number concept language.
The language has: the variable x; integers; arithmetic + - * mod ^;
comparisons < <= == != >= >; the predicates even(x), odd(x), prime(x),
square(x), cube(x), power(b, x), multiple(k, x), between(lo, hi, x),
ends_in(d, x), contains_digit(d, x), in_set({{a, b, c}}, x); and the
connectives and, or, not. Answer with a single line of code.

Rule: the number is even
Program: even(x)

Rule: the number is between 30 and 45
Program: between(30, 45, x)

Rule: the number is a power of 3
Program: power(3, x)

Rule: the number is less than 10
Program: x < 10

Rule: {nl}
Program:"""

SHAPE_TRANSLATION_TEMPLATE = """\
Translate each rule into the shape concept language.
Objects have fields .shape (triangle, rectangle, circle), .color (green,
yellow, blue), and .size (1 small, 2 medium, 3 large). `this` is the
object being classified; `others` is every other object in the example;
`all` is every object including `this`. Available constructs:
forall(v in S, P), exists(v in S, P), count(v in S, P), comparisons,
and the connectives and, or, not, where S is one of others, all,
colors, shapes, sizes. Answer with a single line of code.

Rule: something is positive if it is a green triangle
Program: this.color == green and this.shape == triangle

Rule: something is positive if there is another object with the same color
Program: exists(o in others, o.color == this.color)

Rule: something is positive if it is one of the largest
Program: forall(o in all, this.size >= o.size)

Rule: something is positive if it has the majority color
Program: forall(c in colors, count(o in all, o.color == this.color) >= count(o in all, o.color == c))

Rule: {nl}
Program:"""


def translation_prompt(nl: str, domain: str) -> str:
    nl = canonicalize_nl(nl)
    if domain == NUMBER_DOMAIN:
        return NUMBER_TRANSLATION_TEMPLATE.format(nl=nl)
    if domain == SHAPE_DOMAIN:
        return SHAPE_TRANSLATION_TEMPLATE.format(nl=nl)
    raise ValueError(f"unknown domain {domain!r}")


def translate_nl_to_dsl(nl: str, domain: str, backend) -> object:
    """Deterministic (temperature 0) NL-to-program translation.

    Parse failures are not errors: they yield an Unparsed program.
    """
    prompt = translation_prompt(nl, domain)
    params = {"temperature": 0.0, "n": 1, "max_tokens": 128, "stop": "\n"}
    text = backend.translate(prompt, params).strip()
    source = text.splitlines()[0].strip() if text else ""
    try:
        return parse_concept(source, domain)
    except DslSyntaxError:
        return Unparsed(source)


def translate_pool(pool: Sequence[Hypothesis], domain: str, backend) -> List[Hypothesis]:
    out = []
    for h in pool:
        program = translate_nl_to_dsl(h.nl_text, domain, backend)
        out.append(
            Hypothesis(
                nl_text=h.nl_text,
                program=program,
                proposal_logprob=h.proposal_logprob,
                source_batch=h.source_batch,
            )
        )
    return out


# ---------------------------------------------------------------------------
# External prior scoring

NUMBER_SCORE_PREFIX = "# Here is an example number concept:\n# The number is "

SHAPE_SCORE_PREFIX = """\
# Here are some simple example shape concepts:
# 1. neither a triangle nor a green rectangle
# 2. not blue and large.
# 3. if it is large, then it must be yellow.
# 4. small and blue
# 5. either big or green.
# 6. """


def score_prompt(nl: str, domain: str):
    """(prefix, continuation) pair whose continuation gets scored."""
    nl = canonicalize_nl(nl)
    if domain == NUMBER_DOMAIN:
        body = _strip_number_prefix(nl)
        return NUMBER_SCORE_PREFIX, body
    body = _strip_prefix(nl).strip()
    return SHAPE_SCORE_PREFIX, body


def _strip_number_prefix(nl: str) -> str:
    prefix = "the number is"
    if nl.startswith(prefix):
        return nl[len(prefix):].strip()
    return nl


def score_nl_prior(nl_list: Sequence[str], domain: str, backend) -> Dict[str, float]:
    """Score each concept's log-likelihood under the external LM.

    Returns canonical NL -> log-probability, one entry per input.
    """
    scores: Dict[str, float] = {}
    for nl in nl_list:
        key = canonicalize_nl(nl)
        if key in scores:
            continue
        prefix, continuation = score_prompt(key, domain)
        params = {
            "mode": "score",
            "prefix": prefix,
            "continuation": continuation,
            "temperature": 0.0,
            "n": 1,
        }
        scores[key] = backend.score(prefix + continuation, params)
    return scores
