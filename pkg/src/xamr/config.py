"""Service configuration file handling (YAML)."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .corpus import DEFAULT_DEV_TOPICS


@dataclass
class ServiceConfig:
    corpus_path: str
    frames_path: str
    decision_log: str
    annotators: list[str]
    dev_topics: list[int] = field(default_factory=lambda: sorted(DEFAULT_DEV_TOPICS))
    store_scope: str = "topic"  # "topic" | "global"
    assignment: str = "single"  # "single" | "double" (route every mention to all annotators)
    phase_mode: str = "phase_complete"  # "phase_complete" | "interleaved"
    suggestion_k: int = 10
    shuffle_seed: int | None = None
    split: str | None = None
    port: int = 8000
    ui_dir: str | None = None

    def __post_init__(self):
        if not self.annotators:
            raise ValueError("at least one annotator must be configured")
        if self.store_scope not in ("topic", "global"):
            raise ValueError(f"unknown store_scope: {self.store_scope}")
        if self.assignment not in ("single", "double"):
            raise ValueError(f"unknown assignment: {self.assignment}")
        if self.phase_mode not in ("phase_complete", "interleaved"):
            raise ValueError(f"unknown phase_mode: {self.phase_mode}")
        bad = [t for t in self.dev_topics if not 1 <= t <= 35]
        if bad:
            raise ValueError(f"dev topics must lie in 1-35: {bad}")


def load_config(path: str | Path) -> ServiceConfig:
    data = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
    return ServiceConfig(**data)
