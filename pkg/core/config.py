"""Run configuration: JSON file, command-line overrides, settings defaults."""
from __future__ import annotations

import copy
import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from django.conf import settings
from rest_framework.exceptions import ParseError, ValidationError
from rest_framework.parsers import JSONParser

from core.serializers import MODEL_NAMES, RunConfigSerializer


@dataclass(frozen=True)
class SearchOptions:
    enabled: bool = False
    budget: int = 20
    folds: int = 5
    spaces: dict = field(default_factory=dict)


@dataclass(frozen=True)
class RunConfig:
    out: Path
    model: str = "all"
    source: Optional[str] = None
    split: float = 0.8
    strategies: tuple[str, ...] = ("only_long", "long_short", "buy_and_hold")
    seed: int = 42
    k: int = 5
    search: SearchOptions = field(default_factory=SearchOptions)
    params: dict = field(default_factory=dict)

    @property
    def models(self) -> tuple[str, ...]:
        return MODEL_NAMES if self.model == "all" else (self.model,)

    def section(self, name: str) -> dict:
        """A settings block with this run's overrides applied."""
        merged = copy.deepcopy(settings.OILSIGNAL[name.upper()])
        merged.update(self.params.get(name, {}))
        return merged


def read_config_file(path) -> dict:
    path = Path(path)
    if not path.is_file():
        raise ValidationError({"config": [f"config file not found: {path}"]})
    try:
        return JSONParser().parse(io.BytesIO(path.read_bytes()))
    except ParseError as exc:
        raise ValidationError({"config": [str(exc.detail)]}) from None


def load_run_config(path=None, **overrides) -> RunConfig:
    """
    Flags given as keyword arguments win over the file; anything left
    unset comes from ``settings.OILSIGNAL``.
    """
    data = read_config_file(path) if path else {}
    if not isinstance(data, dict):
        raise ValidationError({"config": ["top level must be an object"]})
    data.update({key: value for key, value in overrides.items() if value is not None})

    serializer = RunConfigSerializer(data=data)
    serializer.is_valid(raise_exception=True)
    values = serializer.validated_data
    defaults = settings.OILSIGNAL

    search_block = values.get("search", {})
    search_defaults = defaults["SEARCH"]
    search = SearchOptions(
        enabled=search_block.get("enabled", False),
        budget=search_block.get("budget", search_defaults["budget"]),
        folds=search_block.get("folds", search_defaults["folds"]),
        spaces={**search_defaults["spaces"], **search_block.get("spaces", {})},
    )
    return RunConfig(
        out=Path(values.get("out", settings.OILSIGNAL_OUT)),
        model=values.get("model", "all"),
        source=values.get("source"),
        split=values.get("split", defaults["SPLIT"]),
        strategies=tuple(values.get("strategies", defaults["STRATEGIES"])),
        seed=values.get("seed", defaults["SEED"]),
        k=values.get("k", defaults["K_FOLDS"]),
        search=search,
        params=values.get("params", {}),
    )
