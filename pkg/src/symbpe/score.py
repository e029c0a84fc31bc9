"""Normalized score model plus the JSON-lines note interchange format.

A Score is a flat, sorted list of note events timed in beats. Quantization
snaps onsets and durations to a 1/resolution-beat grid; tokenizers require
quantized input.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace

GRID_TOL = 1e-6


class NotesParseError(ValueError):
    """Raised on malformed note-list input; carries the offending line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True, slots=True, order=True)
class NoteEvent:
    """One note: MIDI pitch, onset and duration in beats, source track."""

    onset: float
    track: int
    pitch: int
    duration: float

    def __post_init__(self) -> None:
        if not 0 <= self.pitch <= 127:
            raise ValueError(f"pitch {self.pitch} outside MIDI range 0..127")
        if self.duration <= 0:
            raise ValueError(f"duration must be > 0, got {self.duration}")
        if self.onset < 0:
            raise ValueError(f"onset must be >= 0, got {self.onset}")
        if self.track < 0:
            raise ValueError(f"track must be >= 0, got {self.track}")


@dataclass(frozen=True, slots=True)
class TimeSignature:
    """Meter active from ``start_beat`` (which begins a bar)."""

    start_beat: float
    numerator: int
    denominator: int

    @property
    def beats_per_bar(self) -> float:
        # Beats are quarter notes: 4/4 -> 4 beats, 6/8 -> 3 beats.
        return self.numerator * 4.0 / self.denominator


DEFAULT_TIME_SIGNATURE = TimeSignature(0.0, 4, 4)


@dataclass(frozen=True, slots=True)
class Score:
    """Sorted, de-duplicated note list with meter context.

    ``resolution`` is positions per beat once quantized, None before.
    """

    notes: tuple[NoteEvent, ...]
    time_signatures: tuple[TimeSignature, ...] = (DEFAULT_TIME_SIGNATURE,)
    resolution: int | None = None

    def __len__(self) -> int:
        return len(self.notes)

    @property
    def is_quantized(self) -> bool:
        return self.resolution is not None


def make_score(
    notes: list[NoteEvent],
    time_signatures: list[TimeSignature] | None = None,
    resolution: int | None = None,
) -> Score:
    """Normalize a note list into a Score: sort by (onset, track, pitch) and
    collapse exact duplicates."""
    ordered = sorted(set(notes), key=lambda n: (n.onset, n.track, n.pitch, n.duration))
    sigs = tuple(time_signatures) if time_signatures else (DEFAULT_TIME_SIGNATURE,)
    if any(s.numerator < 1 or s.denominator < 1 for s in sigs):
        raise ValueError("time signature fields must be positive")
    sigs = tuple(sorted(sigs, key=lambda s: s.start_beat))
    if sigs[0].start_beat != 0.0:
        sigs = (replace(DEFAULT_TIME_SIGNATURE), *sigs)
    return Score(notes=tuple(ordered), time_signatures=sigs, resolution=resolution)


def _snap(value: float, resolution: int) -> int:
    # Round half up; the +0.5 floor form makes ties deterministic.
    return math.floor(value * resolution + 0.5)


def quantize(score: Score, resolution: int) -> Score:
    """Snap onsets and durations to the nearest 1/resolution beat.

    Ties round up; durations are clamped to at least one grid unit.
    Idempotent at fixed resolution.
    """
    if resolution < 1:
        raise ValueError(f"resolution must be >= 1, got {resolution}")
    snapped = [
        replace(
            n,
            onset=_snap(n.onset, resolution) / resolution,
            duration=max(1, _snap(n.duration, resolution)) / resolution,
        )
        for n in score.notes
    ]
    return make_score(snapped, list(score.time_signatures), resolution=resolution)


def on_grid(score: Score) -> bool:
    """True when every onset/duration sits on the score's grid."""
    if score.resolution is None:
        return False
    r = score.resolution
    for n in score.notes:
        for v in (n.onset, n.duration):
            if abs(v * r - round(v * r)) > GRID_TOL:
                return False
    return True


def grid_units(value: float, resolution: int) -> int:
    """Convert a quantized beat value to integer grid units."""
    units = round(value * resolution)
    if abs(value * resolution - units) > GRID_TOL:
        raise ValueError(f"{value} beats is not on a 1/{resolution} grid")
    return units


# --- JSON-lines note format -------------------------------------------------
#
# One object per line: {"pitch": int, "onset": beats, "duration": beats,
# "track": int}. Records may arrive in any order; parsing sorts them.

_REQUIRED_FIELDS = ("pitch", "onset", "duration", "track")


def parse_notes_text(text: str) -> Score:
    """Parse the JSON-lines note format into an (unquantized) Score."""
    notes: list[NoteEvent] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as e:
            raise NotesParseError(f"invalid JSON ({e.msg})", lineno) from e
        if not isinstance(obj, dict):
            raise NotesParseError("record must be a JSON object", lineno)
        for key in _REQUIRED_FIELDS:
            if key not in obj:
                raise NotesParseError(f"missing field {key!r}", lineno)
        try:
            pitch = _as_int(obj["pitch"], "pitch")
            track = _as_int(obj["track"], "track")
            onset = _as_number(obj["onset"], "onset")
            duration = _as_number(obj["duration"], "duration")
            notes.append(NoteEvent(onset=onset, track=track, pitch=pitch, duration=duration))
        except (TypeError, ValueError) as e:
            raise NotesParseError(str(e), lineno) from e
    return make_score(notes)


def _as_int(value, name: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValueError(f"{name} must be an integer, got {value!r}")
    return value


def _as_number(value, name: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ValueError(f"{name} must be a number, got {value!r}")
    return float(value)


def render_notes_text(score: Score) -> str:
    """Serialize a Score to the JSON-lines note format (sorted, one per line).

    Floats round-trip exactly: json emits repr, which is lossless.
    """
    lines = [
        json.dumps(
            {"pitch": n.pitch, "onset": n.onset, "duration": n.duration, "track": n.track},
            separators=(", ", ": "),
        )
        for n in score.notes
    ]
    return "\n".join(lines) + ("\n" if lines else "")
