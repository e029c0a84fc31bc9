"""Shared strategies and fixtures."""

import random
import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings, strategies as st

from symbpe import NoteEvent, make_score, quantize

REPO_ROOT = Path(__file__).resolve().parent.parent
DATA_DIR = Path(__file__).resolve().parent / "data"
sys.path.insert(0, str(REPO_ROOT / "scripts"))  # for the fixture pipeline module

settings.register_profile(
    "default", suppress_health_check=[HealthCheck.too_slow], deadline=None
)
settings.load_profile("default")

RES = 4


@st.composite
def quantized_scores(draw, max_notes=40, max_onset_units=64, track_count=1):
    """Random on-grid scores at resolution 4."""
    n = draw(st.integers(0, max_notes))
    notes = []
    for _ in range(n):
        onset = draw(st.integers(0, max_onset_units))
        duration = draw(st.integers(1, 16))
        pitch = draw(st.integers(0, 127))
        track = draw(st.integers(0, track_count - 1))
        notes.append(
            NoteEvent(onset=onset / RES, track=track, pitch=pitch, duration=duration / RES)
        )
    return quantize(make_score(notes), RES)


@st.composite
def monophonic_scores(draw, max_notes=30):
    """Non-overlapping single-line scores with bounded intervals."""
    n = draw(st.integers(0, max_notes))
    notes = []
    onset_units = draw(st.integers(0, 8))
    pitch = draw(st.integers(30, 100))
    for _ in range(n):
        duration = draw(st.integers(1, 8))
        notes.append(
            NoteEvent(onset=onset_units / RES, track=0, pitch=pitch, duration=duration / RES)
        )
        onset_units += duration + draw(st.integers(0, 4))
        pitch = max(0, min(127, pitch + draw(st.integers(-12, 12))))
    return quantize(make_score(notes), RES)


def random_monophonic_score(rng: random.Random, max_notes=30):
    """Plain-random twin of monophonic_scores for bulk acceptance sampling."""
    n = rng.randint(1, max_notes)
    notes = []
    onset_units = rng.randint(0, 8)
    pitch = rng.randint(30, 100)
    for _ in range(n):
        duration = rng.randint(1, 8)
        notes.append(
            NoteEvent(onset=onset_units / RES, track=0, pitch=pitch, duration=duration / RES)
        )
        onset_units += duration + rng.randint(0, 4)
        pitch = max(0, min(127, pitch + rng.randint(-12, 12)))
    return quantize(make_score(notes), RES)


def random_quantized_score(rng: random.Random, max_notes=40, track_count=1):
    n = rng.randint(0, max_notes)
    notes = []
    for _ in range(n):
        notes.append(
            NoteEvent(
                onset=rng.randint(0, 64) / RES,
                track=rng.randint(0, track_count - 1),
                pitch=rng.randint(0, 127),
                duration=rng.randint(1, 16) / RES,
            )
        )
    return quantize(make_score(notes), RES)


@pytest.fixture
def rng():
    return random.Random(0xC0FFEE)
