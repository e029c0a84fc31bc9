"""Deterministic synthetic corpora for tests, fixtures, and benchmarks.

Pieces are monophonic melodies: one motif per phrase, drawn from a small
bank. Motif bodies repeat exactly across the corpus, while everything
touching a phrase boundary is varied per occurrence (the join interval, the
gap before the phrase, the opening note's duration, and the closing
interval), so BPE supertokens line up with phrase content instead of
straddling boundaries.

A configurable fraction of joins is the canonical rising perfect fourth off
a quarter note, [Duration(4), TShift(4), PitchInterval(+5)], planted so a
trained model should surface it as a start-of-phrase supertoken.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .score import NoteEvent, Score, make_score, quantize

RESOLUTION = 4
RISING_FOURTH_JOIN = 5
CLOSING_DURATION = 4  # every phrase ends on a quarter, so a gapless join shifts by 4

_OPEN_DURATIONS = (1, 2, 3, 6, 8)  # non-rising joins; 4 is reserved for the rising figure
_GAPS = (0, 1, 2, 3, 5, 7)
_JOIN_INTERVALS = (-9, -7, -6, -4, -3, 2, 3, 4, 6, 7, 9)


@dataclass(frozen=True)
class SynthPiece:
    piece_id: str
    score: Score
    phrase_note_indices: tuple[int, ...]


def _make_body(rng: random.Random, length: int) -> tuple[tuple[int, int], ...]:
    """Fixed (duration, interval) body for notes 1..length-2 of a motif.

    Durations avoid the quarter so TShift(4) stays a boundary signature;
    running pitch excursion is kept within one octave.
    """
    while True:
        body = [
            (rng.choice([1, 2, 3]), rng.choice([-5, -4, -3, -2, 2, 3, 4, 5]))
            for _ in range(length - 2)
        ]
        running = 0
        peak = 0
        for _, step in body:
            running += step
            peak = max(peak, abs(running))
        if peak <= 12:
            return tuple(body)


def phrase_corpus(
    num_pieces: int = 200,
    phrases_per_piece: int = 8,
    notes_per_phrase: int = 8,
    num_motifs: int = 6,
    seed: int = 2024,
    rising_fraction: float = 0.3,
) -> list[SynthPiece]:
    """Monophonic pieces with recurring intra-phrase motifs and boundaries
    varied per occurrence."""
    rng = random.Random(seed)
    bodies = [_make_body(rng, notes_per_phrase) for _ in range(num_motifs)]

    pieces: list[SynthPiece] = []
    for p in range(num_pieces):
        notes: list[NoteEvent] = []
        starts: list[int] = []
        pitch = rng.randrange(55, 70)
        onset_units = 0
        for ph in range(phrases_per_piece):
            starts.append(len(notes))
            body = bodies[rng.randrange(num_motifs)]

            if ph == 0:
                open_duration = CLOSING_DURATION
            elif rng.random() < rising_fraction:
                # canonical figure: quarter, gapless, up a perfect fourth
                open_duration = 4
                join = RISING_FOURTH_JOIN if pitch + RISING_FOURTH_JOIN <= 84 else -RISING_FOURTH_JOIN
                pitch += join
            else:
                open_duration = rng.choice(_OPEN_DURATIONS)
                onset_units += rng.choice(_GAPS)
                join = rng.choice(_JOIN_INTERVALS)
                if not 40 <= pitch + join <= 84:
                    join = -join
                pitch += join

            def put(duration: int) -> None:
                nonlocal onset_units
                notes.append(
                    NoteEvent(
                        onset=onset_units / RESOLUTION,
                        track=0,
                        pitch=pitch,
                        duration=duration / RESOLUTION,
                    )
                )
                onset_units += duration

            put(open_duration)
            for duration, interval in body:
                pitch += interval
                put(duration)
            # closing note: quarter, interval varied per occurrence but
            # steered back toward the middle register
            pull = rng.randint(1, 12)
            pitch += pull if pitch < 62 else -pull
            put(CLOSING_DURATION)
        pieces.append(
            SynthPiece(
                piece_id=f"synth-{p:04d}",
                score=quantize(make_score(notes), RESOLUTION),
                phrase_note_indices=tuple(starts),
            )
        )
    return pieces
