"""Multi-track timeline model, text format, and validation.

A timeline is a set of prompt spans arranged on tracks. Each span carries a
text prompt, a time interval in seconds, and the body parts the prompt drives.
The text format is line oriented::

    stmc timeline v1
    fps 20
    duration 10.0
    track 1:
      0.0 6.0 "walk forwards" # legs
      6.0 10.0 "sit down" # legs # spine
    track 2:
      4.0 9.0 "raise the right arm" # right_arm

``#`` introduces body-part tokens on span lines and comments on lines that
contain nothing else. "torso" is accepted as an alias of spine.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Iterable, TYPE_CHECKING

from .layouts import PART_ORDER, BodyPart

if TYPE_CHECKING:  # pragma: no cover
    from .config import StmcConfig

__all__ = [
    "FrameInterval",
    "PromptSpan",
    "Timeline",
    "TimelineError",
    "Diagnostic",
    "parse_timeline",
    "serialize_timeline",
    "validate_timeline",
    "seconds_to_frames",
    "span_frames",
    "timeline_to_json",
    "timeline_from_json",
]

MAGIC_LINE = "stmc timeline v1"
DEFAULT_FPS = 20.0


class TimelineError(ValueError):
    """Raised for malformed timeline text or inconsistent timeline data."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "")
            where = f" ({where})"
        super().__init__(f"{message}{where}")


def seconds_to_frames(t_s: float, fps: float) -> int:
    """Convert seconds to a frame index, rounding halves away from zero."""
    if t_s < 0:
        raise ValueError(f"negative time {t_s}")
    return int(math.floor(t_s * fps + 0.5))


@dataclass(frozen=True, order=True)
class FrameInterval:
    """Half-open frame interval [a, b)."""

    a: int
    b: int

    def __post_init__(self) -> None:
        if self.a < 0 or self.b <= self.a:
            raise ValueError(f"invalid frame interval [{self.a}, {self.b})")

    def __len__(self) -> int:
        return self.b - self.a

    def contains(self, other: "FrameInterval") -> bool:
        return self.a <= other.a and other.b <= self.b

    def overlaps(self, other: "FrameInterval") -> bool:
        return self.a < other.b and other.a < self.b


@dataclass(frozen=True)
class PromptSpan:
    """One prompt on the timeline: text, interval in seconds, body parts, track."""

    text: str
    start_s: float
    end_s: float
    parts: frozenset[BodyPart]
    track: int

    def __post_init__(self) -> None:
        if not self.text:
            raise TimelineError("span text must be non-empty")
        if self.start_s < 0:
            raise TimelineError(f"span start {self.start_s} < 0")
        if self.end_s <= self.start_s:
            raise TimelineError(f"span end {self.end_s} <= start {self.start_s}")
        if not self.parts:
            raise TimelineError("span needs at least one body part")
        object.__setattr__(self, "parts", frozenset(self.parts))

    @property
    def duration_s(self) -> float:
        return self.end_s - self.start_s

    def overlaps(self, other: "PromptSpan") -> bool:
        return self.start_s < other.end_s and other.start_s < self.end_s

    def sorted_parts(self) -> tuple[BodyPart, ...]:
        return tuple(p for p in PART_ORDER if p in self.parts)


@dataclass(frozen=True)
class Timeline:
    """A multi-track set of prompt spans plus frame rate and total duration.

    Spans are stored sorted by (track, start); their position in ``spans`` is
    the span id used by the scheduler and the CLI.
    """

    fps: float
    spans: tuple[PromptSpan, ...]
    duration_s: float

    def __post_init__(self) -> None:
        if self.fps <= 0:
            raise TimelineError(f"fps must be positive, got {self.fps}")
        ordered = tuple(sorted(self.spans, key=lambda s: (s.track, s.start_s, s.end_s, s.text)))
        object.__setattr__(self, "spans", ordered)
        max_end = max((s.end_s for s in ordered), default=0.0)
        if self.duration_s < max_end:
            raise TimelineError(
                f"declared duration {self.duration_s} s is shorter than the last span end {max_end} s"
            )
        by_track: dict[int, list[PromptSpan]] = {}
        for s in ordered:
            by_track.setdefault(s.track, []).append(s)
        for track, track_spans in by_track.items():
            for prev, cur in zip(track_spans, track_spans[1:]):
                if cur.start_s < prev.end_s:
                    raise TimelineError(
                        f"track {track}: spans {prev.text!r} and {cur.text!r} overlap"
                    )

    @staticmethod
    def build(spans: Iterable[PromptSpan], fps: float = DEFAULT_FPS,
              duration_s: float | None = None) -> "Timeline":
        spans = tuple(spans)
        max_end = max((s.end_s for s in spans), default=0.0)
        if duration_s is None:
            duration_s = max_end
        return Timeline(fps=fps, spans=spans, duration_s=duration_s)

    @property
    def n_frames(self) -> int:
        return seconds_to_frames(self.duration_s, self.fps)


def span_frames(span: PromptSpan, fps: float) -> FrameInterval | None:
    """Frame-domain image of a span, or None if it rounds to zero frames."""
    a = seconds_to_frames(span.start_s, fps)
    b = seconds_to_frames(span.end_s, fps)
    if b <= a:
        return None
    return FrameInterval(a, b)


# ---------------------------------------------------------------------------
# Parsing

_TRACK_RE = re.compile(r"^track\s+(\d+)\s*:\s*$")
_SPAN_RE = re.compile(r'^(\S+)\s+(\S+)\s+"((?:[^"\\]|\\.)*)"\s*(.*)$')


def _unescape(text: str) -> str:
    return text.replace('\\"', '"').replace("\\\\", "\\")


def _escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"')


def _parse_number(token: str, lineno: int, col: int, what: str) -> float:
    try:
        value = float(token)
    except ValueError:
        raise TimelineError(f"expected a number for {what}, got {token!r}", lineno, col) from None
    if not math.isfinite(value):
        raise TimelineError(f"{what} must be finite, got {token!r}", lineno, col)
    return value


def parse_timeline(source: str) -> Timeline:
    """Parse timeline text into a normalized :class:`Timeline`.

    Raises :class:`TimelineError` with line/column information on syntax
    errors, unknown body parts, inverted intervals, or within-track overlaps.
    """
    fps: float | None = None
    duration: float | None = None
    spans: list[PromptSpan] = []
    current_track: int | None = None
    saw_magic = False

    for lineno, raw in enumerate(source.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if not saw_magic:
            if stripped != MAGIC_LINE:
                raise TimelineError(f"first line must be {MAGIC_LINE!r}", lineno, 1)
            saw_magic = True
            continue

        m = _TRACK_RE.match(stripped)
        if m:
            current_track = int(m.group(1))
            continue

        head, _, rest = stripped.partition(" ")
        if head in ("fps", "duration"):
            if current_track is not None:
                raise TimelineError(f"{head} must appear before the first track", lineno, 1)
            value = _parse_number(rest.strip(), lineno, len(head) + 2, head)
            if value <= 0:
                raise TimelineError(f"{head} must be positive", lineno, len(head) + 2)
            if head == "fps":
                fps = value
            else:
                duration = value
            continue

        # Anything else must be a span line inside a track block.
        if current_track is None:
            raise TimelineError(f"unexpected line {stripped!r} outside a track block", lineno, 1)
        if not raw[:1].isspace():
            raise TimelineError("span lines must be indented", lineno, 1)
        m = _SPAN_RE.match(stripped)
        if m is None:
            raise TimelineError('expected: <start_s> <end_s> "<text>" # <part> ...', lineno, 1)
        start = _parse_number(m.group(1), lineno, raw.index(m.group(1)) + 1, "span start")
        end = _parse_number(m.group(2), lineno, 1, "span end")
        text = _unescape(m.group(3))
        tail = m.group(4).strip()
        if not tail.startswith("#"):
            raise TimelineError("span needs at least one '# <part>' token", lineno, 1)
        parts: set[BodyPart] = set()
        for token in tail.split("#"):
            token = token.strip()
            if not token:
                continue
            try:
                parts.add(BodyPart.from_token(token))
            except ValueError:
                raise TimelineError(f"unknown body part {token!r}", lineno, 1) from None
        if end <= start:
            raise TimelineError(f"span end {end} must exceed start {start}", lineno, 1)
        if not parts:
            raise TimelineError("span needs at least one '# <part>' token", lineno, 1)
        try:
            spans.append(PromptSpan(text=text, start_s=start, end_s=end,
                                    parts=frozenset(parts), track=current_track))
        except TimelineError as exc:
            raise TimelineError(str(exc), lineno, 1) from None

    if not saw_magic:
        raise TimelineError(f"first line must be {MAGIC_LINE!r}", 1, 1)
    try:
        return Timeline.build(spans, fps=fps if fps is not None else DEFAULT_FPS,
                              duration_s=duration)
    except TimelineError as exc:
        raise TimelineError(str(exc)) from None


def serialize_timeline(tl: Timeline) -> str:
    """Canonical text for a timeline; parsing it back yields an equal Timeline."""
    lines = [MAGIC_LINE, f"fps {tl.fps!r}", f"duration {tl.duration_s!r}"]
    track = None
    for span in tl.spans:
        if span.track != track:
            track = span.track
            lines.append(f"track {track}:")
        parts = " ".join(f"# {p.value}" for p in span.sorted_parts())
        lines.append(f'  {span.start_s!r} {span.end_s!r} "{_escape(span.text)}" {parts}')
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# JSON mirror

def timeline_to_json(tl: Timeline) -> dict:
    return {
        "fps": tl.fps,
        "duration_s": tl.duration_s,
        "spans": [
            {
                "track": s.track,
                "start_s": s.start_s,
                "end_s": s.end_s,
                "text": s.text,
                "parts": [p.value for p in s.sorted_parts()],
            }
            for s in tl.spans
        ],
    }


def timeline_from_json(data: dict) -> Timeline:
    spans = [
        PromptSpan(
            text=s["text"],
            start_s=float(s["start_s"]),
            end_s=float(s["end_s"]),
            parts=frozenset(BodyPart.from_token(p) for p in s["parts"]),
            track=int(s["track"]),
        )
        for s in data.get("spans", [])
    ]
    return Timeline.build(spans, fps=float(data.get("fps", DEFAULT_FPS)),
                          duration_s=data.get("duration_s"))


# ---------------------------------------------------------------------------
# Validation

@dataclass(frozen=True)
class Diagnostic:
    """A validation finding; ``spans`` holds the offending span ids."""

    code: str
    message: str
    spans: tuple[int, ...] = ()


def validate_timeline(tl: Timeline, cfg: "StmcConfig | None" = None) -> list[Diagnostic]:
    """Check a timeline against the composition rules.

    Returns an empty list iff overlapping spans on different tracks use
    disjoint body parts, every span is long enough for temporal stitching
    (at least twice the overlap half-width), and every span covers at least
    one frame at the configured rate. Never raises.
    """
    from .config import StmcConfig  # deferred: config imports this module

    if cfg is None:
        cfg = StmcConfig.default()
    fps = cfg.fps if cfg.fps else tl.fps
    out: list[Diagnostic] = []
    min_len = 2.0 * cfg.overlap_half_s
    for i, span in enumerate(tl.spans):
        if span.duration_s < min_len:
            out.append(Diagnostic(
                "span-too-short",
                f"span {i} ({span.text!r}) lasts {span.duration_s:.3g} s, "
                f"below the 2*overlap_half minimum {min_len:.3g} s",
                (i,),
            ))
        if span_frames(span, fps) is None:
            out.append(Diagnostic(
                "span-empty",
                f"span {i} ({span.text!r}) covers no frame at {fps} fps",
                (i,),
            ))
    for i, a in enumerate(tl.spans):
        for j in range(i + 1, len(tl.spans)):
            b = tl.spans[j]
            if a.track == b.track or not a.overlaps(b):
                continue
            shared = a.parts & b.parts
            if shared:
                names = ", ".join(p.value for p in PART_ORDER if p in shared)
                out.append(Diagnostic(
                    "incompatible-overlap",
                    f"spans {i} ({a.text!r}) and {j} ({b.text!r}) overlap in time "
                    f"but both drive: {names}",
                    (i, j),
                ))
    return out
