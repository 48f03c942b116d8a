"""Language-model gateway: token budgeting, remote transport, replay fixtures.

Backends:
  remote    — chat-completion HTTP endpoint (temperature pinned to 0)
  replay    — answers from recorded prompt-hash → response fixtures
  heuristic — never completes; callers run their own deterministic paths
"""

import hashlib
import json
import math
import os
from dataclasses import dataclass, field, replace

import httpx

from .errors import BudgetExceeded, HeuristicBackend, ReplayMiss, TransportFailure

TRUNCATION_MARKER = "…[truncated]"

DEFAULT_TOKEN_BUDGET = 16000
DEFAULT_RESPONSE_RESERVE = 1000

ENV_ENDPOINT = "DECKFORGE_LM_ENDPOINT"
ENV_KEY = "DECKFORGE_LM_KEY"
ENV_MODEL = "DECKFORGE_LM_MODEL"


@dataclass(frozen=True)
class LmConfig:
    backend_kind: str = "heuristic"  # remote | heuristic | replay
    endpoint: str = ""
    model_name: str = ""
    api_key: str = ""
    temperature: float = 0.0
    token_budget: int = DEFAULT_TOKEN_BUDGET
    replay_path: str = ""
    max_retries: int = 2

    def __post_init__(self):
        if self.token_budget <= 1000:
            raise ValueError(f"token_budget must exceed 1000, got {self.token_budget}")
        if self.backend_kind not in ("remote", "heuristic", "replay"):
            raise ValueError(f"unknown backend_kind: {self.backend_kind!r}")


def config_from_env(base: LmConfig | None = None) -> LmConfig:
    """Overlay endpoint/key/model environment overrides on a base config."""
    cfg = base or LmConfig()
    updates = {}
    if os.environ.get(ENV_ENDPOINT):
        updates["endpoint"] = os.environ[ENV_ENDPOINT]
    if os.environ.get(ENV_KEY):
        updates["api_key"] = os.environ[ENV_KEY]
    if os.environ.get(ENV_MODEL):
        updates["model_name"] = os.environ[ENV_MODEL]
    return replace(cfg, **updates) if updates else cfg


@dataclass(frozen=True)
class PromptRequest:
    instruction: str
    parts: tuple[tuple[str, str], ...]
    reserved_response_tokens: int = DEFAULT_RESPONSE_RESERVE


def estimate_tokens(text: str) -> int:
    return math.ceil(len(text) / 4)


def estimate_request(request: PromptRequest) -> int:
    return estimate_tokens(request.instruction) + sum(
        estimate_tokens(text) for _, text in request.parts
    )


def assemble_prompt(request: PromptRequest) -> str:
    sections = [request.instruction]
    sections.extend(text for _, text in request.parts)
    return "\n\n".join(sections)


def prompt_hash(prompt: str) -> str:
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()


def fit_to_budget(
    parts: list[tuple[str, str]],
    instruction: str,
    config: LmConfig,
    reserved_response_tokens: int = DEFAULT_RESPONSE_RESERVE,
) -> PromptRequest:
    """Truncate parts to an equal per-part character cap so the estimated
    request fits `token_budget` minus the response reserve. No part is ever
    dropped entirely."""
    if not parts:
        raise ValueError("parts must be non-empty")
    available = config.token_budget - reserved_response_tokens - estimate_tokens(instruction)
    if available < 0:
        raise BudgetExceeded(
            f"instruction ({estimate_tokens(instruction)} tokens) plus reserve "
            f"({reserved_response_tokens}) exceeds budget {config.token_budget}"
        )
    total = sum(estimate_tokens(text) for _, text in parts)
    if total <= available:
        return PromptRequest(instruction, tuple(parts), reserved_response_tokens)

    cap = max(0, (available * 4) // len(parts) - len(TRUNCATION_MARKER))
    while True:
        fitted = tuple(
            (pid, text if len(text) <= cap else text[:cap] + TRUNCATION_MARKER)
            for pid, text in parts
        )
        request = PromptRequest(instruction, fitted, reserved_response_tokens)
        if estimate_request(request) <= config.token_budget - reserved_response_tokens or cap == 0:
            return request
        cap = max(0, cap - 4)


class ReplayStore:
    """Flat JSON file of prompt-hash → response, so tests stay network-free."""

    def __init__(self, path: str = ""):
        self.path = path
        self._fixtures: dict[str, str] = {}
        if path and os.path.exists(path):
            with open(path, encoding="utf-8") as fh:
                self._fixtures = json.load(fh)

    def record(self, prompt: str, response: str) -> None:
        self._fixtures[prompt_hash(prompt)] = response

    def lookup(self, prompt: str) -> str | None:
        return self._fixtures.get(prompt_hash(prompt))

    def save(self) -> None:
        with open(self.path, "w", encoding="utf-8") as fh:
            json.dump(self._fixtures, fh, indent=0, sort_keys=True)


_replay_cache: dict[str, ReplayStore] = {}


def _replay_store(config: LmConfig) -> ReplayStore:
    store = _replay_cache.get(config.replay_path)
    if store is None:
        store = ReplayStore(config.replay_path)
        _replay_cache[config.replay_path] = store
    return store


def _remote_complete(prompt: str, config: LmConfig) -> str:
    body = {
        "model": config.model_name,
        "temperature": 0,
        "messages": [{"role": "user", "content": prompt}],
    }
    headers = {"Content-Type": "application/json"}
    if config.api_key:
        headers["Authorization"] = f"Bearer {config.api_key}"
    last_error = None
    for _ in range(config.max_retries + 1):
        try:
            response = httpx.post(config.endpoint, json=body, headers=headers, timeout=60.0)
            response.raise_for_status()
            payload = response.json()
            if isinstance(payload, dict) and "choices" in payload:
                return payload["choices"][0]["message"]["content"]
            return response.text
        except (httpx.HTTPError, KeyError, IndexError, ValueError) as exc:
            last_error = exc
    raise TransportFailure(f"remote completion failed after retries: {last_error}")


def complete(request: PromptRequest, config: LmConfig) -> str:
    """Run a budget-fitted request against the configured backend."""
    if estimate_request(request) > config.token_budget - request.reserved_response_tokens:
        raise BudgetExceeded(
            f"request estimate {estimate_request(request)} exceeds budget "
            f"{config.token_budget} minus reserve {request.reserved_response_tokens}"
        )
    prompt = assemble_prompt(request)
    if config.backend_kind == "replay":
        response = _replay_store(config).lookup(prompt)
        if response is None:
            raise ReplayMiss(f"no fixture for prompt hash {prompt_hash(prompt)}")
        return response
    if config.backend_kind == "remote":
        return _remote_complete(prompt, config)
    raise HeuristicBackend("heuristic backend has no completion transport")
