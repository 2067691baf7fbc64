from __future__ import annotations

import json
import secrets
from datetime import datetime, timezone
from pathlib import Path
from typing import TYPE_CHECKING, Any

import logfire
import pydantic
from pydantic import BaseModel
from pydantic_ai.messages import ModelMessagesTypeAdapter
from pydantic_ai.usage import RunUsage

from . import config

if TYPE_CHECKING:
    from pydantic_ai.run import AgentRunResult

    from .gateway import CompletionExchange

UsageTypeAdapter = pydantic.TypeAdapter(RunUsage)

_configured = False


def configure_logging() -> None:
    """Set up logfire once per process; spans stay local unless a write token is present."""
    global _configured
    if _configured:
        return
    logfire.configure(send_to_logfire="if-token-present", console=False)
    _configured = True


def log_run(result: "AgentRunResult") -> dict:
    """Messages and usage of a pydantic-ai run, as plain JSON-ready dicts."""
    return {
        "messages": ModelMessagesTypeAdapter.dump_python(result.all_messages(), mode="json"),
        "usage": UsageTypeAdapter.dump_python(result.usage(), mode="json"),
    }


def create_log_entry(exchange: "CompletionExchange") -> dict:
    return {
        "provider": exchange.provider,
        "model": exchange.model,
        "key": exchange.key,
        "timestamp": exchange.timestamp,
        "system_prompt": exchange.system,
        "prompt": exchange.prompt,
        "response": exchange.response,
        "code": exchange.code,
        "messages": exchange.messages,
        "usage": exchange.usage,
    }


def _serializer(obj: Any):
    if isinstance(obj, datetime):
        return obj.isoformat()
    if isinstance(obj, BaseModel):
        return obj.model_dump(mode="json")
    if isinstance(obj, Path):
        return str(obj)
    raise TypeError(f"Type {type(obj)} not serializable")


def save_log(entry: dict, logs_dir: str | Path | None = None) -> Path:
    """
    Save one exchange log as JSON.

    - Default directory: REFACTOR_LOGS_DIR (``logs``).
    - File name: ``<provider>_<YYYYmmdd_HHMMSS>_<hex>.json``.
    """
    base = Path(logs_dir if logs_dir is not None else config.LOGS_DIR)
    base.mkdir(parents=True, exist_ok=True)

    ts = entry.get("timestamp") or datetime.now(timezone.utc)
    if isinstance(ts, str):
        ts = datetime.fromisoformat(ts)
    ts_str = ts.strftime("%Y%m%d_%H%M%S")
    rand_hex = secrets.token_hex(3)

    provider = (entry.get("provider") or "provider").replace(" ", "_").lower()

    filepath = base / f"{provider}_{ts_str}_{rand_hex}.json"
    with filepath.open("w", encoding="utf-8") as f_out:
        json.dump(entry, f_out, indent=2, default=_serializer)

    return filepath
