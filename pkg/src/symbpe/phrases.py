"""Phrase-boundary interaction with BPE segmentation.

Annotations arrive as note indices, get aligned to atomic-token indices, and
project through a merge table: an encoded token is a start-of-phrase when any
atomic position inside it is one. "Overlap" means straddling: the span
contains a start somewhere other than its first position, so a token that
begins exactly on a phrase start does not overlap it.
"""

from __future__ import annotations

import json
import random
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

from .bpe import BpeModel, encode, encoded_spans
from .score import Score
from .tokens import TokenSequence
from .tokenizers import RemiConfig, remi_note_alignment, structured_note_alignment

EXPORT_FORMAT = "symbpe-dataset"
EXPORT_VERSION = 1


@dataclass(frozen=True)
class PhraseAnnotations:
    """Atomic-token indices where phrases begin; index 0 is always a start."""

    piece_id: str
    starts: tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.starts or self.starts[0] != 0:
            raise ValueError("phrase starts must begin with index 0")
        for a, b in zip(self.starts, self.starts[1:]):
            if b <= a:
                raise ValueError("phrase starts must be strictly increasing")


@dataclass(frozen=True)
class EncodedLabels:
    """One start-of-phrase flag per encoded token."""

    labels: tuple[bool, ...]

    def __len__(self) -> int:
        return len(self.labels)


def align_note_phrases(
    score: Score,
    phrase_note_indices: list[int],
    scheme: str,
    config: RemiConfig | None = None,
    piece_id: str = "",
) -> PhraseAnnotations:
    """Map phrase-start note indices to atomic-token indices.

    A phrase-start note maps to its first emitted token: the Position token
    above it for REMI, its Duration token for structured intervals. The
    opening phrase (note 0 must be marked) is pinned to token index 0 so the
    leading structural tokens belong to it.
    """
    indices = sorted(set(phrase_note_indices))
    if not indices or indices[0] != 0:
        raise ValueError("the first note must be a phrase start")
    if indices[-1] >= len(score.notes):
        raise ValueError(f"phrase note index {indices[-1]} out of range ({len(score.notes)} notes)")

    if scheme == "remi":
        alignment = remi_note_alignment(score, config or RemiConfig())
    elif scheme == "structured-intervals":
        alignment = structured_note_alignment(score)
    else:
        raise ValueError(f"unknown scheme {scheme!r}")

    mapped = {alignment[i] for i in indices[1:]}
    mapped.discard(alignment[0])  # a start sharing note 0's slot is the opening phrase
    mapped.add(0)
    return PhraseAnnotations(piece_id=piece_id, starts=tuple(sorted(mapped)))


def project_labels(
    ann: PhraseAnnotations,
    model: BpeModel,
    atomic_seq: TokenSequence,
    encoded: TokenSequence | None = None,
) -> EncodedLabels:
    """Label each encoded token true when its atomic span holds >= 1 start.

    ``encoded`` may be passed to skip re-encoding when already available.
    """
    if ann.starts[-1] >= len(atomic_seq.ids):
        raise ValueError(
            f"start index {ann.starts[-1]} out of range for {len(atomic_seq.ids)} atomic tokens"
        )
    if encoded is None:
        encoded = encode(atomic_seq, model)
    starts = set(ann.starts)
    labels = [
        any(x in starts for x in range(lo, hi)) for lo, hi in encoded_spans(encoded, model)
    ]
    return EncodedLabels(labels=tuple(labels))


def boundary_overlap_ratio(
    model: BpeModel, corpus: list[tuple[TokenSequence, PhraseAnnotations]]
) -> float:
    """Fraction of encoded tokens whose span straddles a phrase start.

    Straddling means the span contains a start at a non-initial position.
    The denominator is all encoded tokens (supertokens and atoms alike).
    """
    if not corpus:
        raise ValueError("empty corpus")
    straddling = 0
    total = 0
    for atomic_seq, ann in corpus:
        encoded = encode(atomic_seq, model)
        starts = set(ann.starts)
        total += len(encoded.ids)
        for lo, hi in encoded_spans(encoded, model):
            if any(x in starts for x in range(lo + 1, hi)):
                straddling += 1
    return straddling / total


def random_split_baseline(
    atomic_len: int,
    num_chunks: int,
    starts: list[int] | tuple[int, ...],
    trials: int,
    seed: int,
) -> float:
    """Monte-Carlo straddle ratio when the piece is cut into ``num_chunks``
    uniformly random chunks (distinct cut points, resampled each trial)."""
    if not 1 <= num_chunks <= atomic_len:
        raise ValueError(f"num_chunks must be in 1..{atomic_len}, got {num_chunks}")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    unique_starts = set(starts)
    inner = sorted(x for x in unique_starts if 0 < x < atomic_len)
    if len(inner) != len(unique_starts - {0}):
        raise ValueError("start indices must lie in 0..atomic_len-1")

    rng = random.Random(seed)
    population = range(1, atomic_len)
    total_ratio = 0.0
    for _ in range(trials):
        cuts = sorted(rng.sample(population, num_chunks - 1))
        boundaries = set(cuts)
        straddled: set[int] = set()
        chunk = 0
        ci = 0
        for x in inner:
            while ci < len(cuts) and cuts[ci] <= x:
                ci += 1
                chunk += 1
            if x not in boundaries:
                straddled.add(chunk)
        total_ratio += len(straddled) / num_chunks
    return total_ratio / trials


def top_boundary_supertokens(
    model: BpeModel,
    corpus: list[tuple[TokenSequence, PhraseAnnotations]],
    k: int,
    which: str = "start",
) -> list[tuple[int, int]]:
    """Supertokens most often flush with phrase starts (or ends), as
    (token_id, count) ranked by count desc, ties by id."""
    if k <= 0:
        raise ValueError("k must be positive")
    if which not in ("start", "end"):
        raise ValueError(f"which must be 'start' or 'end', got {which!r}")
    counts: Counter = Counter()
    num_atoms = model.vocab.num_atoms
    for atomic_seq, ann in corpus:
        encoded = encode(atomic_seq, model)
        if which == "start":
            targets = set(ann.starts)
        else:
            targets = {s - 1 for s in ann.starts[1:]}
            targets.add(len(atomic_seq.ids) - 1)
        for token_id, (lo, hi) in zip(encoded.ids, encoded_spans(encoded, model)):
            if token_id < num_atoms:
                continue
            anchor = lo if which == "start" else hi - 1
            if anchor in targets:
                counts[token_id] += 1
    ranked = sorted(counts.items(), key=lambda item: (-item[1], item[0]))
    return ranked[:k]


def class_balance(labels: list[EncodedLabels]) -> float:
    """Proportion of start-of-phrase tokens over the whole label set."""
    total = sum(len(l) for l in labels)
    if total == 0:
        raise ValueError("no labels")
    return sum(sum(l.labels) for l in labels) / total


def export_training_set(
    corpus: list[tuple[TokenSequence, PhraseAnnotations]],
    model: BpeModel,
    path: str | Path,
    split_tags: dict[str, str] | None = None,
) -> None:
    """Write the labeled dataset as JSON lines.

    Line 1 is a versioned header; each following line is one piece:
    {"piece_id", "ids", "labels", "vocab_size", "split"}. Labels are 0/1.
    An empty corpus produces an empty file.
    """
    path = Path(path)
    if not corpus:
        path.write_text("", encoding="utf-8")
        return
    lines = [
        json.dumps(
            {
                "format": EXPORT_FORMAT,
                "version": EXPORT_VERSION,
                "vocab_size": len(model.vocab),
                "num_atoms": model.vocab.num_atoms,
                "num_merges": model.num_merges,
                "vocab_name": model.vocab.name,
            },
            sort_keys=True,
        )
    ]
    for atomic_seq, ann in corpus:
        encoded = encode(atomic_seq, model)
        labels = project_labels(ann, model, atomic_seq, encoded=encoded)
        lines.append(
            json.dumps(
                {
                    "piece_id": atomic_seq.piece_id,
                    "ids": list(encoded.ids),
                    "labels": [int(b) for b in labels.labels],
                    "vocab_size": len(model.vocab),
                    "split": (split_tags or {}).get(atomic_seq.piece_id, "all"),
                },
                sort_keys=True,
            )
        )
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_training_set(path: str | Path) -> tuple[dict | None, list[dict]]:
    """Read an exported dataset back: (header, piece records)."""
    text = Path(path).read_text(encoding="utf-8")
    records = [json.loads(line) for line in text.splitlines() if line.strip()]
    if not records:
        return None, []
    header = records[0]
    if header.get("format") != EXPORT_FORMAT:
        raise ValueError(f"not a {EXPORT_FORMAT} file")
    if header.get("version") != EXPORT_VERSION:
        raise ValueError(f"unsupported dataset version {header.get('version')!r}")
    return header, records[1:]
