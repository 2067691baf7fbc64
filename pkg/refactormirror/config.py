from __future__ import annotations

import os
from pathlib import Path
from typing import Literal, Optional

from dotenv import load_dotenv
from pydantic import BaseModel, Field, field_validator

load_dotenv()

LLM_ENDPOINT = os.getenv("REFACTOR_LLM_ENDPOINT")
LLM_API_KEY = os.getenv("REFACTOR_LLM_API_KEY")
LLM_MODEL = os.getenv("REFACTOR_LLM_MODEL", "gpt-4o-mini")
LLM_TEMPERATURE = float(os.getenv("REFACTOR_LLM_TEMPERATURE", "0"))
BODY_SIMILARITY = float(os.getenv("REFACTOR_BODY_SIMILARITY", "0.75"))
LOGS_DIR = os.getenv("REFACTOR_LOGS_DIR", "logs")
REPLAY_DIR = os.getenv("REFACTOR_REPLAY_DIR", "replay")
SUBCATEGORIES_FILE = os.getenv("REFACTOR_SUBCATEGORIES")
PARALLELISM = int(os.getenv("REFACTOR_PARALLELISM", "4"))

DATA_DIR = Path(__file__).parent / "data"
TEMPLATES_DIR = Path(__file__).parent / "templates"

TemplateName = Literal["P1", "P2", "P2_SUB", "P2_SUB_NARROW", "P3"]
ProviderName = Literal["replay", "openai", "http"]


class EngineConfig(BaseModel):
    """Engine switches. ``strict`` turns method calls inside moved or duplicated expressions into violations."""

    strict: bool = False


class DetectorConfig(BaseModel):
    body_similarity: float = Field(default=BODY_SIMILARITY, ge=0.0, le=1.0)
    # extract/inline instances take precedence over renames inside their region
    subsume_renames: bool = True


class RunConfig(BaseModel):
    dataset: Path
    provider: ProviderName = "replay"
    template: TemplateName = "P2"
    parallelism: int = PARALLELISM
    strict: bool = False
    output_dir: Path = Path("out")
    replay_dir: Path = Path(REPLAY_DIR)
    model: str = LLM_MODEL
    endpoint: Optional[str] = LLM_ENDPOINT

    @field_validator("parallelism")
    @classmethod
    def _positive(cls, value: int) -> int:
        if value < 1:
            raise ValueError("parallelism must be at least 1")
        return value

    @field_validator("dataset")
    @classmethod
    def _exists(cls, value: Path) -> Path:
        if not value.exists():
            raise ValueError(f"dataset not found: {value}")
        return value

    def engine(self) -> EngineConfig:
        return EngineConfig(strict=self.strict)
