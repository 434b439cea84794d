import json

import pytest

from nlconcepts.dsl import format_concept
from nlconcepts.propose import (
    ChatClient,
    ProposalRequest,
    ReplayBackend,
    ReplayMiss,
    ReplayStore,
    StaticPoolBackend,
    TemplateMismatch,
    build_prompt,
    fingerprint,
    parse_rule_lines,
    parse_rule_list,
    propose,
    round_robin_take,
    translate_nl_to_dsl,
)
from nlconcepts.propose.backends import EmptyPool, score_prompt
from nlconcepts.propose.client import BackendUnavailable
from nlconcepts.types import NumberExampleSet, ShapeObject, Trial


# ---------------------------------------------------------------------------
# Prompt construction


def test_number_prompt_golden():
    req = ProposalRequest(
        domain="number", examples=NumberExampleSet([98, 81, 86, 93]), budget=10
    )
    expected = (
        "# Python 3\n"
        "# Here are a few example number concepts:\n"
        "# -- The number is even\n"
        "# -- The number is between 30 and 45\n"
        "# -- The number is a power of 3\n"
        "# -- The number is less than 10\n"
        "#\n"
        "# Here are some random examples of numbers belonging to a different number concept:\n"
        "# 98, 81, 86, 93\n"
        "# The above are examples of the following number concept:\n"
        "# -- The number is "
    )
    assert build_prompt(req) == expected


def test_ablation_prompt_has_no_examples():
    req = ProposalRequest(domain="ablation_unconditioned", examples=None, budget=10)
    prompt = build_prompt(req)
    assert "random examples" not in prompt
    assert prompt.endswith("# -- The number is ")


def _mini_batches():
    a = ShapeObject("triangle", "green", 1)
    b = ShapeObject("circle", "blue", 2)
    c = ShapeObject("rectangle", "yellow", 3)
    return [
        [Trial([a, b], a, True), Trial([a, b], b, False)],
        [Trial([c], c, False)],
    ]


def test_first_order_prompt_serializes_batches():
    req = ProposalRequest(
        domain="shape_first_order", examples=_mini_batches(), budget=10
    )
    prompt = build_prompt(req)
    assert (
        "    An Example of Concept #4:\n"
        "        POSITIVES: (small green triangle)\n"
        "        NEGATIVES: (medium blue circle)\n"
        "    Another Example of Concept #4:\n"
        "        POSITIVES: none\n"
        "        NEGATIVES: (large yellow rectangle)"
    ) in prompt
    assert prompt.rstrip().endswith("End each line with a period.")


def test_propositional_prompt_truth_table():
    req = ProposalRequest(
        domain="shape_propositional", examples=_mini_batches(), budget=10
    )
    prompt = build_prompt(req)
    assert "size | color | shape | positive" in prompt
    assert "small | green | triangle | yes" in prompt
    assert "medium | blue | circle | no" in prompt


def test_unknown_domain_rejected():
    with pytest.raises(TemplateMismatch):
        ProposalRequest(domain="poetry", examples=None, budget=10)


# ---------------------------------------------------------------------------
# Completion parsing


def test_parse_rule_list():
    text = (
        "1. Something is positive if it is green.\n"
        "not a rule line\n"
        "2. Something is positive if it is a triangle.\n"
        "10. Something is positive if it is small\n"
    )
    assert parse_rule_list(text) == [
        "Something is positive if it is green",
        "Something is positive if it is a triangle",
        "Something is positive if it is small",
    ]


def test_parse_rule_lines():
    text = "Rule: a triangle.\nchatter\nrule: not blue\nRule:\n"
    assert parse_rule_lines(text) == ["a triangle", "not blue"]


def test_round_robin_take():
    lists = [["a1", "a2", "a3"], ["b1"], ["c1", "c2"]]
    assert round_robin_take(lists, 5) == ["a1", "b1", "c1", "a2", "c2"]
    assert round_robin_take(lists, 2) == ["a1", "b1"]
    assert round_robin_take(lists, 99) == ["a1", "b1", "c1", "a2", "c2", "a3"]


# ---------------------------------------------------------------------------
# Replay store


def test_fingerprint_sensitivity():
    base = fingerprint("prompt", {"n": 5})
    assert base == fingerprint("prompt", {"n": 5})
    assert base != fingerprint("prompt!", {"n": 5})
    assert base != fingerprint("prompt", {"n": 6})
    # key order does not matter
    assert fingerprint("p", {"a": 1, "b": 2}) == fingerprint("p", {"b": 2, "a": 1})


def test_replay_store_round_trip(tmp_path):
    store = ReplayStore(tmp_path / "rs")
    completions = [{"text": "even", "logprob": -1.0}]
    key = store.record("prompt", {"n": 1}, completions)
    assert store.get("prompt", {"n": 1}) == completions
    assert store.lookup("prompt", {"n": 1}) == completions
    assert store.keys() == [key]
    assert store.entry(key)["prompt"] == "prompt"
    with pytest.raises(ReplayMiss):
        store.lookup("other prompt", {"n": 1})
    # first write wins
    store.record("prompt", {"n": 1}, [{"text": "odd", "logprob": -2.0}])
    assert store.get("prompt", {"n": 1}) == completions


# ---------------------------------------------------------------------------
# HTTP client against a fake session


class FakeResponse:
    def __init__(self, status_code, payload):
        self.status_code = status_code
        self._payload = payload
        self.text = json.dumps(payload)

    def json(self):
        return self._payload


class FakeSession:
    def __init__(self, responses):
        self.responses = list(responses)
        self.calls = []

    def post(self, url, json=None, headers=None, timeout=None):
        self.calls.append({"url": url, "json": json, "headers": headers})
        return self.responses.pop(0)


def test_client_complete_parses_choices():
    payload = {
        "choices": [
            {
                "message": {"content": "a power of 2"},
                "logprobs": {"content": [{"logprob": -1.0}, {"logprob": -0.5}]},
            },
            {"message": {"content": "even"}, "logprobs": None},
        ]
    }
    session = FakeSession([FakeResponse(200, payload)])
    client = ChatClient("https://x.test/v1", "m", api_key="k", session=session)
    out = client.complete("p", n=2, logprobs=True)
    assert out == [
        {"text": "a power of 2", "logprob": -1.5},
        {"text": "even", "logprob": None},
    ]
    call = session.calls[0]
    assert call["url"] == "https://x.test/v1/chat/completions"
    assert call["headers"]["Authorization"] == "Bearer k"
    assert call["json"]["n"] == 2


def test_client_retries_then_fails(monkeypatch):
    import nlconcepts.propose.client as client_mod

    sleeps = []
    monkeypatch.setattr(client_mod.time, "sleep", sleeps.append)
    session = FakeSession([FakeResponse(500, {})] * 5)
    client = ChatClient("https://x.test/v1", "m", api_key="k", session=session)
    with pytest.raises(BackendUnavailable):
        client.complete("p")
    assert len(session.calls) == 5
    assert len(sleeps) == 4  # no sleep after the final attempt
    # jittered exponential backoff starting at ~1s
    assert all(s > 0 for s in sleeps)
    assert sleeps[1] > sleeps[0] * 0.5


def test_client_recovers_after_transient_error(monkeypatch):
    import nlconcepts.propose.client as client_mod

    monkeypatch.setattr(client_mod.time, "sleep", lambda s: None)
    ok = FakeResponse(200, {"choices": [{"message": {"content": "x"}}]})
    session = FakeSession([FakeResponse(503, {}), ok])
    client = ChatClient("https://x.test/v1", "m", api_key="k", session=session)
    assert client.complete("p")[0]["text"] == "x"


def test_client_score_sums_continuation_tokens():
    payload = {
        "choices": [
            {
                "logprobs": {
                    "text_offset": [0, 4, 8],
                    "token_logprobs": [None, -1.0, -2.0],
                }
            }
        ]
    }
    session = FakeSession([FakeResponse(200, payload)])
    client = ChatClient("https://x.test/v1", "m", api_key="k", session=session)
    # prefix is 5 chars, so only the offset-8 token counts
    assert client.score("abcde", "fgh") == pytest.approx(-2.0)


def test_api_key_from_environment(monkeypatch):
    monkeypatch.setenv("INDUCT_API_KEY", "secret")
    client = ChatClient("https://x.test/v1", "m")
    assert client.api_key == "secret"


# ---------------------------------------------------------------------------
# Backends


def test_static_pool_backend(tmp_path):
    from nlconcepts import io

    path = tmp_path / "pool.jsonl"
    pool = [
        io.make_hypothesis(f"the number is {n}", f"x == {n}", "number")
        for n in (1, 2, 3)
    ]
    io.save_pool(path, pool)
    backend = StaticPoolBackend(path, "number")
    req = ProposalRequest(domain="number", examples=NumberExampleSet([1]), budget=2)
    out = backend.propose(req)
    assert [h.nl_text for h in out] == ["the number is 1", "the number is 2"]
    empty = tmp_path / "empty.jsonl"
    empty.write_text("")
    with pytest.raises(EmptyPool):
        StaticPoolBackend(empty, "number")


def test_replay_backend_proposal_pipeline(fixtures_dir):
    store = ReplayStore(fixtures_dir / "replay")
    backend = ReplayBackend(store)
    req = ProposalRequest(
        domain="number", examples=NumberExampleSet([16, 8, 2, 64]), budget=5, seed=0
    )
    pool = propose(req, backend)
    assert len(pool) == 5
    assert pool[0].nl_text == "the number is a power of 2"
    assert pool[0].proposal_logprob == -3.1
    # duplicates arrive as-is; dedup happens downstream
    texts = [h.nl_text for h in pool]
    assert texts.count("the number is a power of 2") == 2
    # freshly proposed hypotheses are untranslated
    assert not any(h.parsed for h in pool)
    # translation through the same replay store compiles them
    program = translate_nl_to_dsl(pool[0].nl_text, "number", backend)
    assert format_concept(program) == "power(2, x)"


def test_replay_backend_misses_unseen_requests(fixtures_dir):
    backend = ReplayBackend(ReplayStore(fixtures_dir / "replay"))
    req = ProposalRequest(
        domain="number", examples=NumberExampleSet([1, 2, 3]), budget=5
    )
    with pytest.raises(ReplayMiss):
        propose(req, backend)


def test_translate_unparseable_yields_unparsed(tmp_path):
    store = ReplayStore(tmp_path / "rs")
    from nlconcepts.propose.backends import translation_prompt

    t_params = {"temperature": 0.0, "n": 1, "max_tokens": 128, "stop": "\n"}
    store.record(
        translation_prompt("the number is cursed", "number"),
        t_params,
        [{"text": "cursed(x", "logprob": None}],
    )
    from nlconcepts.types import Unparsed

    program = translate_nl_to_dsl("the number is cursed", "number", ReplayBackend(store))
    assert isinstance(program, Unparsed)
    assert program.source == "cursed(x"


def test_score_prompt_strips_domain_prefix():
    prefix, continuation = score_prompt("The number is EVEN.", "number")
    assert continuation == "even"
    assert prefix.endswith("# The number is ")
    prefix2, cont2 = score_prompt(
        "something is positive if it is a triangle", "shape"
    )
    assert cont2 == "it is a triangle"
    assert prefix2.endswith("# 6. ")
