"""Score <-> atomic token sequence conversion.

Two schemes are provided:

* REMI: Bar marker / Position within bar / Pitch / Duration, with all tracks
  flattened into one stream. Lossless on quantized scores up to track erasure.
* Structured + intervals: one [Duration, TShift, PitchInterval] triplet per
  note of a monophonic line. Key- and bar-position-independent.

Plus a pitch-only reduction that keeps nothing but Pitch tokens.
"""

from __future__ import annotations

from dataclasses import dataclass

from .bpe import Vocabulary
from .score import GRID_TOL, NoteEvent, Score, TimeSignature, grid_units, make_score, on_grid
from .tokens import AtomicToken, TokenKind, TokenSequence, make_sequence

PITCH_RANGE = 128


class TokenStructureError(ValueError):
    """Ill-formed token sequence; carries the offending token index."""

    def __init__(self, message: str, index: int):
        super().__init__(f"token {index}: {message}")
        self.index = index


class PolyphonyError(ValueError):
    """Monophonic tokenizer fed overlapping notes."""


@dataclass(frozen=True)
class RemiConfig:
    resolution: int = 4  # positions per beat (16th-note grid by default)
    max_duration: int = 32  # grid units; longer notes clamp with a warning
    max_bar_beats: int = 4  # sizes the Position alphabet

    @property
    def max_positions(self) -> int:
        return self.max_bar_beats * self.resolution


@dataclass(frozen=True)
class StructuredConfig:
    resolution: int = 4
    max_duration: int = 32
    max_shift: int = 32  # TShift 0 only ever occurs on a first note at beat 0
    max_interval: int = 24

    def __post_init__(self) -> None:
        if min(self.resolution, self.max_duration, self.max_shift, self.max_interval) < 1:
            raise ValueError("structured config fields must be positive")


def remi_vocabulary(config: RemiConfig = RemiConfig()) -> Vocabulary:
    atoms = [AtomicToken(TokenKind.BAR, 0)]
    atoms += [AtomicToken(TokenKind.POSITION, p) for p in range(config.max_positions)]
    atoms += [AtomicToken(TokenKind.PITCH, p) for p in range(PITCH_RANGE)]
    atoms += [AtomicToken(TokenKind.DURATION, d) for d in range(1, config.max_duration + 1)]
    name = f"remi(res={config.resolution},pos={config.max_positions},dur={config.max_duration})"
    return Vocabulary(atoms=tuple(atoms), name=name)


def structured_vocabulary(config: StructuredConfig = StructuredConfig()) -> Vocabulary:
    atoms = [AtomicToken(TokenKind.DURATION, d) for d in range(1, config.max_duration + 1)]
    atoms += [AtomicToken(TokenKind.TIME_SHIFT, t) for t in range(config.max_shift + 1)]
    atoms += [
        AtomicToken(TokenKind.PITCH_INTERVAL, i)
        for i in range(-config.max_interval, config.max_interval + 1)
    ]
    name = (
        f"structured-intervals(res={config.resolution},dur={config.max_duration},"
        f"shift={config.max_shift},int={config.max_interval})"
    )
    return Vocabulary(atoms=tuple(atoms), name=name)


def pitch_only_vocabulary() -> Vocabulary:
    atoms = tuple(AtomicToken(TokenKind.PITCH, p) for p in range(PITCH_RANGE))
    return Vocabulary(atoms=atoms, name="pitch-only")


def _require_quantized(score: Score, resolution: int) -> None:
    if score.resolution != resolution:
        raise ValueError(
            f"score quantized at {score.resolution}, tokenizer expects {resolution}"
        )
    if not on_grid(score):
        raise ValueError("score violates its quantization grid")


def _bar_spans_units(signatures: tuple[TimeSignature, ...], last_unit: int, res: int):
    """Bar (start, end) pairs in grid units from beat 0 through ``last_unit``.

    A time-signature change always starts a new bar, truncating the previous
    one if the change is misaligned.
    """
    spans: list[tuple[int, int]] = []
    for i, sig in enumerate(signatures):
        seg_start = round(sig.start_beat * res)
        if abs(sig.start_beat * res - seg_start) > GRID_TOL:
            raise ValueError(f"time signature at beat {sig.start_beat} is off-grid")
        bar_len = round(sig.beats_per_bar * res)
        if bar_len < 1 or abs(sig.beats_per_bar * res - bar_len) > GRID_TOL:
            raise ValueError(
                f"{sig.numerator}/{sig.denominator} bar is not a whole number of grid units"
            )
        seg_end = None
        if i + 1 < len(signatures):
            seg_end = round(signatures[i + 1].start_beat * res)
        start = seg_start
        while start <= last_unit and (seg_end is None or start < seg_end):
            end = start + bar_len if seg_end is None else min(start + bar_len, seg_end)
            spans.append((start, end))
            start = end
    return spans


def _bar_starts_at_least(
    signatures: tuple[TimeSignature, ...], count: int, res: int
) -> list[int]:
    """Bar start units for at least ``count`` bars (bar lengths vary by meter)."""
    horizon = max(16, count * 4 * res)
    while True:
        spans = _bar_spans_units(signatures, horizon, res)
        if len(spans) >= count:
            return [s for s, _ in spans]
        horizon *= 2


def _remi_emit(score: Score, config: RemiConfig) -> tuple[list[int], int, list[int]]:
    """Shared REMI emission: token ids, clamp count, and for each note (in
    score order) the index of the Position token it sits under."""
    vocab = remi_vocabulary(config)
    res = config.resolution
    index = vocab.atom_index()
    note_order = {n: i for i, n in enumerate(score.notes)}
    alignment = [0] * len(score.notes)
    if not score.notes:
        return [], 0, alignment

    last_onset_unit = max(grid_units(n.onset, res) for n in score.notes)
    bars = _bar_spans_units(score.time_signatures, last_onset_unit, res)

    by_onset: dict[int, list[NoteEvent]] = {}
    for n in score.notes:
        by_onset.setdefault(grid_units(n.onset, res), []).append(n)

    ids: list[int] = []
    clamped = 0
    bar_id = index[AtomicToken(TokenKind.BAR, 0)]
    for bar_start, bar_end in bars:
        ids.append(bar_id)
        for onset_unit in sorted(u for u in by_onset if bar_start <= u < bar_end):
            position = onset_unit - bar_start
            if position >= config.max_positions:
                raise ValueError(
                    f"position {position} exceeds the {config.max_positions}-slot alphabet"
                )
            position_index = len(ids)
            ids.append(index[AtomicToken(TokenKind.POSITION, position)])
            notes = sorted(by_onset[onset_unit], key=lambda n: (n.pitch, n.duration))
            for n in notes:
                alignment[note_order[n]] = position_index
                duration = grid_units(n.duration, res)
                if duration > config.max_duration:
                    duration = config.max_duration
                    clamped += 1
                ids.append(index[AtomicToken(TokenKind.PITCH, n.pitch)])
                ids.append(index[AtomicToken(TokenKind.DURATION, duration)])
    return ids, clamped, alignment


def tokenize_remi(score: Score, config: RemiConfig = RemiConfig()) -> TokenSequence:
    """Serialize a quantized score as Bar / Position / Pitch / Duration tokens.

    Bars run from beat 0 through the bar containing the last onset, empty
    bars included. All tracks are flattened; notes within one onset are
    ordered by pitch, then duration.
    """
    _require_quantized(score, config.resolution)
    vocab = remi_vocabulary(config)
    ids, clamped, _ = _remi_emit(score, config)
    meta = {"clamped_durations": clamped} if clamped else None
    return make_sequence(ids, vocab.vocab_id, meta=meta)


def remi_note_alignment(score: Score, config: RemiConfig = RemiConfig()) -> list[int]:
    """For each note (score order), the token index of its Position token."""
    _require_quantized(score, config.resolution)
    _, _, alignment = _remi_emit(score, config)
    return alignment


def structured_note_alignment(score: Score) -> list[int]:
    """For each note (score order), the index of its Duration token: 3 * i."""
    return [3 * i for i in range(len(score.notes))]


def detokenize_remi(
    seq: TokenSequence,
    config: RemiConfig = RemiConfig(),
    time_signatures: tuple[TimeSignature, ...] | None = None,
) -> Score:
    """Rebuild a Score from a REMI sequence. Tracks were flattened during
    tokenization, so every note lands on track 0."""
    vocab = remi_vocabulary(config)
    if seq.vocab_id != vocab.vocab_id:
        raise ValueError(f"sequence vocabulary {seq.vocab_id} is not {vocab.name}")
    sigs = time_signatures or (TimeSignature(0.0, 4, 4),)
    res = config.resolution

    tokens = [vocab.atoms[i] for i in seq.ids]
    notes: list[NoteEvent] = []
    bar_index = -1
    bar_starts: list[int] = []
    position: int | None = None
    i = 0
    while i < len(tokens):
        tok = tokens[i]
        if tok.kind is TokenKind.BAR:
            bar_index += 1
            if len(bar_starts) <= bar_index:
                bar_starts = _bar_starts_at_least(sigs, bar_index + 1, res)
            position = None
            i += 1
        elif tok.kind is TokenKind.POSITION:
            if bar_index < 0:
                raise TokenStructureError("Position before any Bar", i)
            position = tok.value
            i += 1
        elif tok.kind is TokenKind.PITCH:
            if position is None:
                raise TokenStructureError("Pitch with no active Position", i)
            if i + 1 >= len(tokens) or tokens[i + 1].kind is not TokenKind.DURATION:
                raise TokenStructureError("Pitch without a following Duration", i)
            onset_unit = bar_starts[bar_index] + position
            notes.append(
                NoteEvent(
                    onset=onset_unit / res,
                    track=0,
                    pitch=tok.value,
                    duration=tokens[i + 1].value / res,
                )
            )
            i += 2
        else:
            raise TokenStructureError(f"unexpected {tok.render()} in REMI stream", i)
    return make_score(notes, list(sigs), resolution=res)


def tokenize_structured_intervals(
    score: Score, config: StructuredConfig = StructuredConfig()
) -> TokenSequence:
    """Serialize a monophonic quantized score as per-note triplets
    [Duration(d), TShift(t), PitchInterval(i)].

    t is the grid offset from the previous note's onset (from beat 0 for the
    first note); i is the pitch step from the previous note (0 for the first).
    Out-of-range payloads clamp, counted in ``meta``.
    """
    _require_quantized(score, config.resolution)
    vocab = structured_vocabulary(config)
    if not score.notes:
        return make_sequence([], vocab.vocab_id)

    res = config.resolution
    for a, b in zip(score.notes, score.notes[1:]):
        if b.onset < a.onset + a.duration - GRID_TOL:
            raise PolyphonyError(
                f"notes overlap: pitch {a.pitch} at beat {a.onset} (duration {a.duration}) "
                f"and pitch {b.pitch} at beat {b.onset}"
            )

    index = vocab.atom_index()
    ids: list[int] = []
    clamped = 0
    prev_onset_unit = 0
    prev_pitch: int | None = None
    for n in score.notes:
        onset_unit = grid_units(n.onset, res)
        duration = grid_units(n.duration, res)
        shift = onset_unit - prev_onset_unit
        interval = 0 if prev_pitch is None else n.pitch - prev_pitch

        if duration > config.max_duration:
            duration, clamped = config.max_duration, clamped + 1
        if shift > config.max_shift:
            shift, clamped = config.max_shift, clamped + 1
        if abs(interval) > config.max_interval:
            interval = max(-config.max_interval, min(config.max_interval, interval))
            clamped += 1

        ids.append(index[AtomicToken(TokenKind.DURATION, duration)])
        ids.append(index[AtomicToken(TokenKind.TIME_SHIFT, shift)])
        ids.append(index[AtomicToken(TokenKind.PITCH_INTERVAL, interval)])
        prev_onset_unit, prev_pitch = onset_unit, n.pitch
    meta = {"clamped_payloads": clamped} if clamped else None
    return make_sequence(ids, vocab.vocab_id, meta=meta)


def detokenize_structured_intervals(
    seq: TokenSequence,
    first_pitch: int,
    config: StructuredConfig = StructuredConfig(),
) -> Score:
    """Rebuild the melody from triplets, anchoring pitches at ``first_pitch``
    (intervals are relative, so the anchor is not part of the sequence)."""
    vocab = structured_vocabulary(config)
    if seq.vocab_id != vocab.vocab_id:
        raise ValueError(f"sequence vocabulary {seq.vocab_id} is not {vocab.name}")
    if len(seq.ids) % 3 != 0:
        raise TokenStructureError("triplet stream length not a multiple of 3", len(seq.ids))
    res = config.resolution

    tokens = [vocab.atoms[i] for i in seq.ids]
    notes: list[NoteEvent] = []
    onset_unit = 0
    pitch = first_pitch
    for base in range(0, len(tokens), 3):
        d, t, iv = tokens[base : base + 3]
        for offset, tok, kind in (
            (0, d, TokenKind.DURATION),
            (1, t, TokenKind.TIME_SHIFT),
            (2, iv, TokenKind.PITCH_INTERVAL),
        ):
            if tok.kind is not kind:
                raise TokenStructureError(
                    f"expected {kind.value}, found {tok.render()}", base + offset
                )
        onset_unit += t.value
        pitch += iv.value
        notes.append(
            NoteEvent(onset=onset_unit / res, track=0, pitch=pitch, duration=d.value / res)
        )
    return make_score(notes, resolution=res)


def filter_pitch_only(seq: TokenSequence, vocab: Vocabulary) -> TokenSequence:
    """Keep only Pitch tokens, re-indexed into the pitch-only alphabet."""
    if vocab.supertokens:
        raise ValueError("pitch-only filter expects an atomic sequence, got supertokens")
    if seq.vocab_id != vocab.vocab_id:
        raise ValueError(f"sequence vocabulary {seq.vocab_id} does not match {vocab.name}")
    target = pitch_only_vocabulary()
    index = target.atom_index()
    ids = [
        index[atom]
        for atom in (vocab.atoms[i] for i in seq.ids)
        if atom.kind is TokenKind.PITCH
    ]
    return make_sequence(ids, target.vocab_id, seq.piece_id)


def render_sequence(seq: TokenSequence, vocab: Vocabulary) -> str:
    """One-line human-readable dump, supertokens shown as bracketed expansions."""
    return ", ".join(vocab.render_id(i) for i in seq.ids)
