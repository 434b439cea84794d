"""Minimal JSON-over-HTTPS client for an OpenAI-compatible LM API.

Credentials come from the INDUCT_API_KEY environment variable; the
endpoint and model name come from configuration. Failed requests are
retried up to 5 times with jittered exponential backoff starting at 1s.
"""

from __future__ import annotations

import os
import random
import time
from typing import Dict, List, Optional

import requests

API_KEY_VAR = "INDUCT_API_KEY"


class BackendUnavailable(RuntimeError):
    pass


class MissingLogprobSupport(RuntimeError):
    pass


class ChatClient:
    def __init__(
        self,
        endpoint: str,
        model: str,
        api_key: Optional[str] = None,
        max_retries: int = 5,
        backoff: float = 1.0,
        timeout: float = 120.0,
        session=None,
    ):
        self.endpoint = endpoint
        self.model = model
        self.api_key = api_key if api_key is not None else os.environ.get(API_KEY_VAR, "")
        self.max_retries = max_retries
        self.backoff = backoff
        self.timeout = timeout
        self.session = session or requests.Session()

    def _post(self, path: str, payload: Dict) -> Dict:
        url = self.endpoint.rstrip("/") + path
        headers = {"Authorization": f"Bearer {self.api_key}"}
        last_error = None
        for attempt in range(self.max_retries):
            try:
                response = self.session.post(
                    url, json=payload, headers=headers, timeout=self.timeout
                )
                if response.status_code == 200:
                    return response.json()
                last_error = f"HTTP {response.status_code}: {response.text[:200]}"
            except requests.RequestException as exc:
                last_error = str(exc)
            if attempt + 1 < self.max_retries:
                delay = self.backoff * (2**attempt) * (0.5 + random.random())
                time.sleep(delay)
        raise BackendUnavailable(f"request to {url} failed: {last_error}")

    def complete(
        self,
        prompt: str,
        temperature: float = 1.0,
        n: int = 1,
        max_tokens: int = 512,
        stop: Optional[str] = None,
        logprobs: bool = False,
    ) -> List[Dict]:
        """Chat completion. Returns [{"text": str, "logprob": float|None}]."""
        payload = {
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": temperature,
            "n": n,
            "max_tokens": max_tokens,
        }
        if stop is not None:
            payload["stop"] = stop
        if logprobs:
            payload["logprobs"] = True
        data = self._post("/chat/completions", payload)
        out = []
        for choice in data["choices"]:
            text = choice["message"]["content"]
            logprob = None
            lp = choice.get("logprobs")
            if lp and lp.get("content"):
                logprob = float(sum(tok["logprob"] for tok in lp["content"]))
            out.append({"text": text, "logprob": logprob})
        return out

    def score(self, prefix: str, continuation: str) -> float:
        """Log-probability of `continuation` given `prefix`.

        Uses an echo+logprobs completions call; raises
        MissingLogprobSupport if the endpoint does not report token
        log-probabilities with offsets.
        """
        full = prefix + continuation
        payload = {
            "model": self.model,
            "prompt": full,
            "max_tokens": 0,
            "echo": True,
            "logprobs": 0,
        }
        data = self._post("/completions", payload)
        try:
            lp = data["choices"][0]["logprobs"]
            offsets = lp["text_offset"]
            token_logprobs = lp["token_logprobs"]
        except (KeyError, IndexError, TypeError):
            raise MissingLogprobSupport(
                "endpoint did not return token log-probabilities"
            )
        cut = len(prefix)
        total = 0.0
        for offset, token_lp in zip(offsets, token_logprobs):
            if offset >= cut and token_lp is not None:
                total += float(token_lp)
        return total
