"""Engine configuration: dataclass bundles plus TOML/JSON loading."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

try:
    import tomllib  # py311+
except ModuleNotFoundError:  # pragma: no cover - py310 fallback
    import tomli as tomllib

PROTO_VERSION = 1

CONDITION_FACE = "face"
CONDITION_FIXED = "fixed"


@dataclass(frozen=True)
class IngestConfig:
    user_only: bool = True
    loudness_threshold: float = 0.3
    source: str = "replay"  # "provider" | "replay"
    window_ms: int = 10_000

    def __post_init__(self) -> None:
        if not 0.0 <= self.loudness_threshold <= 1.0:
            raise ValueError("loudness_threshold must lie in [0, 1]")
        if self.window_ms <= 0:
            raise ValueError("window_ms must be positive")


@dataclass(frozen=True)
class GenConfig:
    grapheme_limit: int = 130
    persistence_ms: int = 300_000
    min_request_gap_ms: int = 2_000
    recognition_enabled: bool = True

    def __post_init__(self) -> None:
        if self.grapheme_limit < 1:
            raise ValueError("grapheme_limit must be >= 1")
        if self.persistence_ms <= 0:
            raise ValueError("persistence_ms must be positive")
        if self.min_request_gap_ms < 0:
            raise ValueError("min_request_gap_ms must be >= 0")


@dataclass(frozen=True)
class GeometryConfig:
    region_width_mm: float = 90.0
    region_height_mm: float = 50.0
    shift_distance_mm: float = 100.0
    fixed_offset_mm: float = 150.0
    hold_ms: int = 1_000


@dataclass(frozen=True)
class CameraModel:
    focal_px: float = 1000.0
    principal_point: tuple[float, float] = (480.0, 300.0)
    viewport: tuple[int, int] = (960, 600)

    def __post_init__(self) -> None:
        if self.focal_px <= 0:
            raise ValueError("focal_px must be positive")
        if self.viewport[0] <= 0 or self.viewport[1] <= 0:
            raise ValueError("viewport dimensions must be positive")


@dataclass(frozen=True)
class FsmConfig:
    fixation_threshold_ms: int = 5_000
    return_after_ms: int = 3_000
    dwell_threshold_ms: int = 1_000
    gap_tolerance_ms: int = 150
    n_arcs: int = 8

    def __post_init__(self) -> None:
        for name in ("fixation_threshold_ms", "return_after_ms", "dwell_threshold_ms", "gap_tolerance_ms"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.n_arcs < 1:
            raise ValueError("n_arcs must be >= 1")


@dataclass(frozen=True)
class PanelConfig:
    # Dwell arcs live on the annulus between radius_px * arc_band_ratio and radius_px.
    radius_px: float = 180.0
    arc_band_ratio: float = 0.8


@dataclass(frozen=True)
class ProviderConfig:
    kind: str = "mock"  # "mock" | "http"
    latency_ms: int = 0
    timeout_s: float = 10.0
    http_endpoint: str = ""
    auth_env: str = "CONVASSIST_PROVIDER_TOKEN"
    fact_table: str | None = None
    stopwords: str | None = None


@dataclass(frozen=True)
class EngineConfig:
    tick_ms: int = 20
    condition: str = CONDITION_FACE
    ingest: IngestConfig = field(default_factory=IngestConfig)
    gen: GenConfig = field(default_factory=GenConfig)
    geometry: GeometryConfig = field(default_factory=GeometryConfig)
    camera: CameraModel = field(default_factory=CameraModel)
    fsm: FsmConfig = field(default_factory=FsmConfig)
    panel: PanelConfig = field(default_factory=PanelConfig)
    provider: ProviderConfig = field(default_factory=ProviderConfig)

    def __post_init__(self) -> None:
        if self.tick_ms <= 0:
            raise ValueError("tick_ms must be positive")
        if self.condition not in (CONDITION_FACE, CONDITION_FIXED):
            raise ValueError(f"unknown condition {self.condition!r}")


_SECTIONS = {
    "ingest": IngestConfig,
    "gen": GenConfig,
    "geometry": GeometryConfig,
    "camera": CameraModel,
    "fsm": FsmConfig,
    "panel": PanelConfig,
    "provider": ProviderConfig,
}


def _coerce(cls: type, value: Any) -> Any:
    # TOML/JSON give lists where the dataclasses want tuples.
    if isinstance(value, dict):
        return cls(**{k: _coerce_field(cls, k, v) for k, v in value.items()})
    return value


def _coerce_field(cls: type, name: str, value: Any) -> Any:
    if isinstance(value, list):
        return tuple(value)
    return value


def engine_config_from_dict(raw: dict[str, Any], base: EngineConfig | None = None) -> EngineConfig:
    """Build an EngineConfig from a nested mapping, merged over ``base``."""
    base = base or EngineConfig()
    kwargs: dict[str, Any] = {}
    for key, value in raw.items():
        if key in _SECTIONS:
            section_base = dataclasses.asdict(getattr(base, key))
            if not isinstance(value, dict):
                raise ValueError(f"config section {key!r} must be a table")
            merged = {**section_base, **value}
            kwargs[key] = _coerce(_SECTIONS[key], merged)
        elif key in ("tick_ms", "condition"):
            kwargs[key] = value
        else:
            raise ValueError(f"unknown config key {key!r}")
    return dataclasses.replace(base, **kwargs)


def load_structured_file(path: str | Path) -> dict[str, Any]:
    """Read a .toml or .json file into a plain mapping."""
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if path.suffix.lower() == ".json":
        raw = json.loads(text)
    else:
        raw = tomllib.loads(text)
    if not isinstance(raw, dict):
        raise ValueError(f"{path}: top level must be a table/object")
    return raw


def load_config(path: str | Path, base: EngineConfig | None = None) -> EngineConfig:
    """Load engine configuration from a .toml or .json file."""
    return engine_config_from_dict(load_structured_file(path), base)
