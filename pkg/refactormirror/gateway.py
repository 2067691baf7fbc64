"""Chat-completion providers and code extraction from their responses."""
from __future__ import annotations

import asyncio
import hashlib
import json
import re
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Iterable, Optional, Protocol

import logfire
import requests
from pydantic import BaseModel, Field
from pydantic_ai import Agent, UsageLimits
from pydantic_ai.models.openai import OpenAIChatModel
from pydantic_ai.providers.openai import OpenAIProvider

from . import config
from .agent_logging import log_run
from .errors import NoCodeInResponse, ProviderError
from .prompts import PromptSpec, render
from .subcategories import Subcategory

SYSTEM_PROMPT = "You are a helpful assistant that refactors Java source code and answers with code."

REQ_LIMIT = 1
HTTP_TIMEOUT = 120

_FENCE = re.compile(r"```[ \t]*([\w+#-]*)[ \t]*\n(.*?)```", re.DOTALL)


class CompletionExchange(BaseModel):
    key: str
    provider: str
    model: str = ""
    system: str = SYSTEM_PROMPT
    prompt: str
    response: str
    code: Optional[str] = None
    timestamp: datetime = Field(default_factory=lambda: datetime.now(timezone.utc))
    messages: Optional[list[dict[str, Any]]] = None
    usage: Optional[dict[str, Any]] = None


class ProviderReply(BaseModel):
    text: str
    model: str = ""
    messages: Optional[list[dict[str, Any]]] = None
    usage: Optional[dict[str, Any]] = None
    timestamp: Optional[datetime] = None


class Provider(Protocol):
    name: str

    async def complete(self, system: str, prompt: str) -> ProviderReply: ...


def prompt_key(prompt: str) -> str:
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()


def extract_code(response: str) -> str:
    """Longest fenced block of the response; the last one wins a tie."""
    blocks = [m.group(2) for m in _FENCE.finditer(response)]
    if not blocks:
        raise NoCodeInResponse("response holds no fenced code block")
    best = blocks[0]
    for block in blocks[1:]:
        if len(block) >= len(best):
            best = block
    return best


# ---- providers ----


class ReplayProvider:
    """Serves recorded responses from a directory of ``<sha256(prompt)>.json`` exchange records."""

    name = "replay"

    def __init__(self, store_dir: Path):
        self.store_dir = Path(store_dir)

    def path_for(self, prompt: str) -> Path:
        return self.store_dir / f"{prompt_key(prompt)}.json"

    async def complete(self, system: str, prompt: str) -> ProviderReply:
        path = self.path_for(prompt)
        if not path.exists():
            raise ProviderError(f"no recorded response for prompt {prompt_key(prompt)[:12]} in {self.store_dir}")
        record = CompletionExchange.model_validate_json(path.read_text(encoding="utf-8"))
        return ProviderReply(text=record.response, model=record.model, timestamp=record.timestamp)

    def record(self, prompt: str, response: str, model: str = "recorded",
               timestamp: Optional[datetime] = None) -> Path:
        self.store_dir.mkdir(parents=True, exist_ok=True)
        exchange = CompletionExchange(
            key=prompt_key(prompt),
            provider=self.name,
            model=model,
            prompt=prompt,
            response=response,
            timestamp=timestamp or datetime(2024, 1, 1, tzinfo=timezone.utc),
        )
        path = self.path_for(prompt)
        path.write_text(exchange.model_dump_json(indent=2), encoding="utf-8")
        return path


class OpenAIChatProvider:
    """OpenAI-compatible chat completions through a pydantic-ai agent."""

    name = "openai"

    def __init__(self, model: str = config.LLM_MODEL, endpoint: Optional[str] = config.LLM_ENDPOINT,
                 api_key: Optional[str] = config.LLM_API_KEY, temperature: float = config.LLM_TEMPERATURE):
        provider = OpenAIProvider(base_url=endpoint, api_key=api_key) if endpoint or api_key else None
        chat_model = OpenAIChatModel(model, provider=provider) if provider else OpenAIChatModel(model)
        self.model = model
        self.temperature = temperature
        self.agent: Agent[None, str] = Agent(model=chat_model, name="refactormirror", instructions=SYSTEM_PROMPT)

    async def complete(self, system: str, prompt: str) -> ProviderReply:
        try:
            result = await self.agent.run(
                prompt,
                model_settings={"temperature": self.temperature},
                usage_limits=UsageLimits(request_limit=REQ_LIMIT),
            )
        except Exception as err:
            raise ProviderError(f"{self.name}: {err}") from err
        logged = log_run(result)
        return ProviderReply(text=result.output, model=self.model, **logged)


class HttpChatProvider:
    """Plain HTTPS chat-completions call: POST ``{endpoint}/chat/completions`` with a system and a user message."""

    name = "http"

    def __init__(self, endpoint: Optional[str] = config.LLM_ENDPOINT, model: str = config.LLM_MODEL,
                 api_key: Optional[str] = config.LLM_API_KEY, temperature: float = config.LLM_TEMPERATURE):
        if not endpoint:
            raise ProviderError("REFACTOR_LLM_ENDPOINT is not set")
        self.url = endpoint.rstrip("/") + "/chat/completions"
        self.model = model
        self.api_key = api_key
        self.temperature = temperature

    def _post(self, system: str, prompt: str) -> dict:
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        body = {
            "model": self.model,
            "temperature": self.temperature,
            "messages": [{"role": "system", "content": system}, {"role": "user", "content": prompt}],
        }
        try:
            resp = requests.post(self.url, headers=headers, json=body, timeout=HTTP_TIMEOUT)
            resp.raise_for_status()
            return resp.json()
        except requests.RequestException as err:
            raise ProviderError(f"{self.name}: {err}") from err

    async def complete(self, system: str, prompt: str) -> ProviderReply:
        data = await asyncio.to_thread(self._post, system, prompt)
        try:
            text = data["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as err:
            raise ProviderError(f"{self.name}: unexpected response shape") from err
        return ProviderReply(text=text or "", model=data.get("model", self.model), usage=data.get("usage"))


def make_provider(name: str, replay_dir: Optional[Path] = None, model: str = config.LLM_MODEL,
                  endpoint: Optional[str] = config.LLM_ENDPOINT) -> Provider:
    if name == "replay":
        return ReplayProvider(replay_dir or Path(config.REPLAY_DIR))
    if name == "openai":
        return OpenAIChatProvider(model=model, endpoint=endpoint)
    if name == "http":
        return HttpChatProvider(endpoint=endpoint, model=model)
    raise ProviderError(f"unknown provider {name!r}")


# ---- exchanges ----


async def complete_prompt(prompt: str, provider: Provider) -> CompletionExchange:
    """Send one rendered prompt; the exchange carries ``code=None`` when the response has no fenced block."""
    with logfire.span("complete", provider=provider.name):
        reply = await provider.complete(SYSTEM_PROMPT, prompt)
    try:
        code = extract_code(reply.text)
    except NoCodeInResponse:
        logfire.warn("no code in response", provider=provider.name, key=prompt_key(prompt)[:12])
        code = None
    return CompletionExchange(
        key=prompt_key(prompt),
        provider=provider.name,
        model=reply.model,
        prompt=prompt,
        response=reply.text,
        code=code,
        timestamp=reply.timestamp or datetime.now(timezone.utc),
        messages=reply.messages,
        usage=reply.usage,
    )


async def complete(spec: PromptSpec, provider: Provider,
                   registry: Optional[dict[str, Subcategory]] = None) -> CompletionExchange:
    exchange = await complete_prompt(render(spec, registry), provider)
    if exchange.code is None:
        raise NoCodeInResponse(f"no fenced code block in the {provider.name} response")
    return exchange


class RecordedResponse(BaseModel):
    entry_id: str
    template: str
    response: str


def load_responses(path: Path) -> list[RecordedResponse]:
    raw = json.loads(Path(path).read_text(encoding="utf-8"))
    return [RecordedResponse.model_validate(r) for r in raw]


def seed_replay_store(store: ReplayProvider, prompts: dict[tuple[str, str], str],
                      responses: Iterable[RecordedResponse]) -> list[Path]:
    """Record each response under the prompt rendered for its (entry id, template)."""
    paths = []
    for recorded in responses:
        prompt = prompts.get((recorded.entry_id, recorded.template))
        if prompt is None:
            logfire.warn("recorded response has no prompt", entry=recorded.entry_id, template=recorded.template)
            continue
        paths.append(store.record(prompt, recorded.response))
    return paths
