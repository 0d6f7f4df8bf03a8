"""Body-part scheduling: turn a multi-track timeline into five gap-free
per-part timelines, and enumerate the transitions used for temporal stitching.

The schedule is built in three passes: cut the frame axis at every span
boundary, fill each cut with a base prompt plus overrides (largest body-part
set first), then merge adjacent segments that share a source. Frames no span
claims are assigned the FILLER source and denoised unconditionally.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Union

from .layouts import PART_ORDER, BodyPart
from .timeline import FrameInterval, PromptSpan, Timeline, span_frames

__all__ = [
    "FILLER",
    "Source",
    "Assignment",
    "BodyPartSchedule",
    "Transition",
    "ScheduleError",
    "annotate_assignments",
    "cut_segments",
    "fill_segment",
    "build_schedule",
    "enumerate_transitions",
    "extend_interval",
    "schedule_to_json",
]

FILLER = "filler"
Source = Union[int, str]  # span id, or FILLER


class ScheduleError(ValueError):
    pass


@dataclass(frozen=True)
class Assignment:
    """One body part's gap-free partition of [0, N) into prompt sources."""

    part: BodyPart
    segments: tuple[tuple[FrameInterval, Source], ...]

    def __post_init__(self) -> None:
        prev_end = 0
        prev_src: Source | None = None
        for iv, src in self.segments:
            if iv.a != prev_end:
                raise ScheduleError(f"{self.part.value}: gap or overlap at frame {iv.a}")
            if prev_src is not None and src == prev_src:
                raise ScheduleError(f"{self.part.value}: unmerged segments at frame {iv.a}")
            prev_end = iv.b
            prev_src = src

    def source_at(self, frame: int) -> Source:
        for iv, src in self.segments:
            if iv.a <= frame < iv.b:
                return src
        raise IndexError(f"frame {frame} outside the assignment")


@dataclass(frozen=True)
class BodyPartSchedule:
    """Per-part assignments, all tiling the same [0, n_frames)."""

    parts: Mapping[BodyPart, Assignment]
    n_frames: int

    def __post_init__(self) -> None:
        for part in PART_ORDER:
            if part not in self.parts:
                raise ScheduleError(f"missing assignment for {part.value}")
            segs = self.parts[part].segments
            end = segs[-1][0].b if segs else 0
            if end != self.n_frames:
                raise ScheduleError(
                    f"{part.value}: tiles [0, {end}) but the timeline has {self.n_frames} frames"
                )


@dataclass(frozen=True)
class Transition:
    """A per-part source change at ``boundary``, with the stitching window."""

    part: BodyPart
    boundary: int
    from_source: Source
    to_source: Source
    window: FrameInterval

    def __post_init__(self) -> None:
        if self.from_source == self.to_source:
            raise ScheduleError(f"degenerate transition at frame {self.boundary}")


def annotate_assignments(tl: Timeline) -> dict[BodyPart, list[tuple[FrameInterval, int]]]:
    """Assign every span's frames to its labeled parts; everything else is left
    unassigned. Raises if two spans claim the same (part, frame) cell."""
    out: dict[BodyPart, list[tuple[FrameInterval, int]]] = {p: [] for p in PART_ORDER}
    for idx, span in enumerate(tl.spans):
        iv = span_frames(span, tl.fps)
        if iv is None:
            continue
        for part in span.parts:
            for other_iv, other_idx in out[part]:
                if iv.overlaps(other_iv):
                    raise ScheduleError(
                        f"spans {other_idx} and {idx} both claim {part.value} "
                        f"on frames [{max(iv.a, other_iv.a)}, {min(iv.b, other_iv.b)})"
                    )
            out[part].append((iv, idx))
    for part in out:
        out[part].sort()
    return out


def cut_segments(tl: Timeline) -> list[FrameInterval]:
    """Frame intervals delimited by span boundaries; no span starts or ends
    inside any returned interval."""
    n = tl.n_frames
    bounds = {0, n}
    for span in tl.spans:
        iv = span_frames(span, tl.fps)
        if iv is not None:
            bounds.update((iv.a, iv.b))
    ordered = sorted(b for b in bounds if 0 <= b <= n)
    return [FrameInterval(a, b) for a, b in zip(ordered, ordered[1:]) if b > a]


def _priority(item: tuple[int, PromptSpan]) -> tuple[int, float, int]:
    idx, span = item
    return (-len(span.parts), span.start_s, span.track)


def fill_segment(cut: FrameInterval, active: list[tuple[int, PromptSpan]]) -> dict[BodyPart, Source]:
    """Assign all five parts on one cut.

    The base prompt (largest body-part set, ties: earliest start then lowest
    track) claims every part; the remaining active prompts override their own
    labeled parts in decreasing |parts| order. No active prompt: FILLER.
    """
    if not active:
        return {p: FILLER for p in PART_ORDER}
    ordered = sorted(active, key=_priority)
    base_idx = ordered[0][0]
    out: dict[BodyPart, Source] = {p: base_idx for p in PART_ORDER}
    for idx, span in ordered[1:]:
        for part in span.parts:
            out[part] = idx
    return out


def build_schedule(tl: Timeline) -> BodyPartSchedule:
    """Full pipeline: cut, fill, and merge. Deterministic per timeline."""
    annotate_assignments(tl)  # defensive: re-raises on (part, frame) conflicts
    n = tl.n_frames
    frames_of: dict[int, FrameInterval] = {}
    for idx, span in enumerate(tl.spans):
        iv = span_frames(span, tl.fps)
        if iv is not None:
            frames_of[idx] = iv

    per_part: dict[BodyPart, list[tuple[FrameInterval, Source]]] = {p: [] for p in PART_ORDER}
    for cut in cut_segments(tl):
        active = [(idx, tl.spans[idx]) for idx, iv in frames_of.items() if iv.contains(cut)]
        filled = fill_segment(cut, active)
        for part, src in filled.items():
            segs = per_part[part]
            if segs and segs[-1][1] == src and segs[-1][0].b == cut.a:
                segs[-1] = (FrameInterval(segs[-1][0].a, cut.b), src)
            else:
                segs.append((cut, src))
    assignments = {
        part: Assignment(part=part, segments=tuple(segs)) for part, segs in per_part.items()
    }
    return BodyPartSchedule(parts=assignments, n_frames=n)


def extend_interval(iv: FrameInterval, L: int, n_frames: int) -> FrameInterval:
    """[a, b) widened by L frames on both sides, clamped to [0, n_frames)."""
    return FrameInterval(max(0, iv.a - L), min(n_frames, iv.b + L))


def enumerate_transitions(sched: BodyPartSchedule, L: int) -> list[Transition]:
    """All per-part transitions with their 2L-frame windows.

    Any part with two or more segments must have every segment at least 2L
    frames long, otherwise adjacent windows would overlap; violations raise
    rather than silently shrinking the window. Single-segment parts have no
    transition and no length requirement.
    """
    if L < 1:
        raise ScheduleError(f"window half-width must be >= 1 frame, got {L}")
    out: list[Transition] = []
    for part in PART_ORDER:
        segs = sched.parts[part].segments
        if len(segs) < 2:
            continue
        for iv, src in segs:
            if len(iv) < 2 * L:
                raise ScheduleError(
                    f"{part.value}: segment [{iv.a}, {iv.b}) of source {src!r} is shorter "
                    f"than 2L = {2 * L} frames; shrink the overlap or lengthen the span"
                )
        for (iv_a, src_a), (iv_b, src_b) in zip(segs, segs[1:]):
            boundary = iv_a.b
            window = FrameInterval(max(0, boundary - L), min(sched.n_frames, boundary + L))
            out.append(Transition(part=part, boundary=boundary,
                                  from_source=src_a, to_source=src_b, window=window))
    return out


def schedule_to_json(sched: BodyPartSchedule) -> dict:
    return {
        "n_frames": sched.n_frames,
        "parts": {
            part.value: [
                {"start_frame": iv.a, "end_frame": iv.b,
                 "source": src if src == FILLER else int(src)}
                for iv, src in sched.parts[part].segments
            ]
            for part in PART_ORDER
        },
    }
