"""Engine configuration and its JSON form."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Any

from .diffusion import DiffusionConfig, cosine_schedule, schedule_from_json, schedule_to_json
from .layouts import PoseLayout, get_layout
from .timeline import seconds_to_frames

__all__ = ["StmcConfig", "config_from_json", "config_to_json"]


@dataclass(frozen=True)
class StmcConfig:
    """Everything the generators need besides the timeline and the denoiser."""

    diffusion: DiffusionConfig
    overlap_half_s: float = 0.25
    fps: float = 20.0
    layout: PoseLayout = None  # type: ignore[assignment]

    def __post_init__(self) -> None:
        if self.layout is None:
            object.__setattr__(self, "layout", get_layout("synthetic-v1"))
        if self.overlap_half_s <= 0:
            raise ValueError("overlap_half_s must be positive")
        if self.overlap_half_frames < 1:
            raise ValueError(
                f"2*overlap_half*fps must cover at least one frame "
                f"(overlap_half={self.overlap_half_s}, fps={self.fps})"
            )

    @property
    def overlap_half_frames(self) -> int:
        """The window half-width in frames."""
        return seconds_to_frames(self.overlap_half_s, self.fps)

    @staticmethod
    def default(T: int = 100, seed: int = 0) -> "StmcConfig":
        return StmcConfig(diffusion=DiffusionConfig(schedule=cosine_schedule(T=T), seed=seed))

    def with_overlap(self, overlap_half_s: float) -> "StmcConfig":
        return replace(self, overlap_half_s=overlap_half_s)


def config_from_json(data: dict[str, Any], overrides: dict[str, Any] | None = None) -> StmcConfig:
    """Build a config from a JSON dict, with CLI overrides taking precedence."""
    merged = dict(data)
    for key, value in (overrides or {}).items():
        if value is not None:
            merged[key] = value
    sched = merged.get("schedule", {"kind": "cosine", "T": 100, "s": 0.008})
    if isinstance(sched, dict):
        sched = schedule_from_json(sched)
    diffusion = DiffusionConfig(
        schedule=sched,
        guidance_scale=float(merged.get("guidance_scale", 1.0)),
        seed=int(merged.get("seed", 0)),
    )
    layout = merged.get("layout", "synthetic-v1")
    if isinstance(layout, str):
        layout = get_layout(layout)
    return StmcConfig(
        diffusion=diffusion,
        overlap_half_s=float(merged.get("overlap_half", 0.25)),
        fps=float(merged.get("fps", 20.0)),
        layout=layout,
    )


def config_to_json(cfg: StmcConfig) -> dict[str, Any]:
    return {
        "schedule": schedule_to_json(cfg.diffusion.schedule),
        "guidance_scale": cfg.diffusion.guidance_scale,
        "seed": cfg.diffusion.seed,
        "overlap_half": cfg.overlap_half_s,
        "fps": cfg.fps,
        "layout": cfg.layout.name,
    }
