"""symbpe: symbolic-music tokenization and byte-pair encoding toolkit."""

from .bpe import (
    BpeModel,
    MergeRule,
    ModelLoadError,
    Vocabulary,
    VocabularyMismatchError,
    decode,
    encode,
    encoded_spans,
    load_model,
    save_model,
    train,
)
from .midi import MidiParseError, UnsupportedMidiError, parse_midi
from .score import (
    NoteEvent,
    NotesParseError,
    Score,
    TimeSignature,
    make_score,
    parse_notes_text,
    quantize,
    render_notes_text,
)
from .tokenizers import (
    PolyphonyError,
    RemiConfig,
    StructuredConfig,
    TokenStructureError,
    detokenize_remi,
    detokenize_structured_intervals,
    filter_pitch_only,
    pitch_only_vocabulary,
    remi_vocabulary,
    render_sequence,
    structured_vocabulary,
    tokenize_remi,
    tokenize_structured_intervals,
)
from .tokens import AtomicToken, TokenKind, TokenSequence, make_sequence, parse_token

__version__ = "0.1.0"

__all__ = [
    "AtomicToken",
    "BpeModel",
    "MergeRule",
    "MidiParseError",
    "ModelLoadError",
    "NoteEvent",
    "NotesParseError",
    "PolyphonyError",
    "RemiConfig",
    "Score",
    "StructuredConfig",
    "TimeSignature",
    "TokenKind",
    "TokenSequence",
    "TokenStructureError",
    "UnsupportedMidiError",
    "Vocabulary",
    "VocabularyMismatchError",
    "decode",
    "detokenize_remi",
    "detokenize_structured_intervals",
    "encode",
    "encoded_spans",
    "filter_pitch_only",
    "load_model",
    "make_score",
    "make_sequence",
    "parse_midi",
    "parse_notes_text",
    "parse_token",
    "pitch_only_vocabulary",
    "quantize",
    "remi_vocabulary",
    "render_notes_text",
    "render_sequence",
    "save_model",
    "structured_vocabulary",
    "tokenize_remi",
    "tokenize_structured_intervals",
    "train",
]
