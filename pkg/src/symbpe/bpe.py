"""Byte-pair encoding over token-id sequences: training, application,
inversion, and a checksummed model file format.

Merges operate on adjacent id pairs inside each sequence and never across
sequence (piece) boundaries. Occurrences of one pair are counted left to
right without overlap, so a merge removes exactly ``count_at_merge`` tokens
from the corpus. Ties between equally frequent pairs go to the smallest
(left, right) id pair unless a different tie-break key is supplied, which
makes training deterministic.
"""

from __future__ import annotations

import hashlib
import json
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .tokens import AtomicToken, TokenKind, TokenSequence, make_sequence, render_tokens

Pair = tuple[int, int]
TieBreak = Callable[[Pair], object]

MODEL_FORMAT = "symbpe-bpe-model"
MODEL_VERSION = 1


class VocabularyMismatchError(ValueError):
    """Sequence ids do not belong to the vocabulary an operation expects."""


class ModelLoadError(ValueError):
    """Model file is unreadable: bad syntax, version, or checksum."""


@dataclass(frozen=True)
class Vocabulary:
    """Atomic alphabet plus BPE supertokens in creation order.

    Ids 0..len(atoms)-1 are the atoms; id len(atoms)+k is supertoken k.
    Every id expands to a tuple of atom ids; atoms expand to themselves.
    """

    atoms: tuple[AtomicToken, ...]
    supertokens: tuple[Pair, ...] = ()
    name: str = ""
    expansions: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False)
    vocab_id: str = field(init=False, compare=False)

    def __post_init__(self) -> None:
        if not self.atoms:
            raise ValueError("vocabulary needs at least one atom")
        if len(set(self.atoms)) != len(self.atoms):
            raise ValueError("duplicate atoms in vocabulary")
        expansions: list[tuple[int, ...]] = [(i,) for i in range(len(self.atoms))]
        for k, (left, right) in enumerate(self.supertokens):
            limit = len(self.atoms) + k
            if not (0 <= left < limit and 0 <= right < limit):
                raise ValueError(f"supertoken {k} references id created later or unknown")
            expansions.append(expansions[left] + expansions[right])
        object.__setattr__(self, "expansions", tuple(expansions))
        object.__setattr__(self, "vocab_id", self._fingerprint())

    def _fingerprint(self) -> str:
        blob = json.dumps(
            {
                "name": self.name,
                "atoms": [[t.kind.value, t.value] for t in self.atoms],
                "supertokens": [list(p) for p in self.supertokens],
            },
            sort_keys=True,
            separators=(",", ":"),
        ).encode()
        return hashlib.sha256(blob).hexdigest()[:12]

    def __len__(self) -> int:
        return len(self.atoms) + len(self.supertokens)

    @property
    def num_atoms(self) -> int:
        return len(self.atoms)

    def is_atomic_id(self, token_id: int) -> bool:
        return 0 <= token_id < len(self.atoms)

    def expansion(self, token_id: int) -> tuple[int, ...]:
        if not 0 <= token_id < len(self):
            raise VocabularyMismatchError(f"unknown token id {token_id}")
        return self.expansions[token_id]

    def expansion_tokens(self, token_id: int) -> list[AtomicToken]:
        return [self.atoms[i] for i in self.expansion(token_id)]

    def render_id(self, token_id: int) -> str:
        """Atoms render as "Kind(value)"; supertokens as their expansion."""
        tokens = self.expansion_tokens(token_id)
        if len(tokens) == 1:
            return tokens[0].render()
        return "[" + render_tokens(tokens) + "]"

    def atom_index(self) -> dict[AtomicToken, int]:
        return {atom: i for i, atom in enumerate(self.atoms)}

    def without_supertokens(self) -> "Vocabulary":
        return Vocabulary(atoms=self.atoms, name=self.name)


@dataclass(frozen=True, slots=True)
class MergeRule:
    pair: Pair
    new_id: int
    count_at_merge: int

    def __post_init__(self) -> None:
        if self.count_at_merge < 2:
            raise ValueError(f"merge with count {self.count_at_merge} < 2")


@dataclass(frozen=True)
class TrainingMeta:
    corpus_name: str = ""
    num_merges_requested: int = 0
    atom_vocab_id: str = ""
    initial_corpus_length: int = 0


@dataclass(frozen=True)
class BpeModel:
    vocab: Vocabulary
    merges: tuple[MergeRule, ...]
    meta: TrainingMeta = TrainingMeta()

    def __post_init__(self) -> None:
        if len(self.merges) != len(self.vocab.supertokens):
            raise ValueError("merge list and supertoken list disagree")
        for k, rule in enumerate(self.merges):
            if rule.pair != self.vocab.supertokens[k]:
                raise ValueError(f"merge {k} pair does not match vocabulary")
            if rule.new_id != self.vocab.num_atoms + k:
                raise ValueError(f"merge {k} has wrong new id")

    @property
    def num_merges(self) -> int:
        return len(self.merges)

    @property
    def atom_vocab_id(self) -> str:
        return self.meta.atom_vocab_id or self.vocab.without_supertokens().vocab_id


def pair_counts(seq: Sequence[int]) -> Counter:
    """Count adjacent pairs, left to right without overlap per pair.

    A run of k equal ids contributes k // 2 to (x, x), matching the number
    of replacements a merge of that pair would perform.
    """
    counts: Counter = Counter()
    i = 0
    n = len(seq)
    while i < n - 1:
        a = seq[i]
        if seq[i + 1] == a:
            j = i
            while j < n and seq[j] == a:
                j += 1
            counts[(a, a)] += (j - i) // 2
            if j < n:
                counts[(a, seq[j])] += 1
            i = j
        else:
            counts[(a, seq[i + 1])] += 1
            i += 1
    return counts


def merge_pair(seq: list[int], pair: Pair, new_id: int) -> list[int]:
    """Replace non-overlapping occurrences of ``pair``, scanning left to right."""
    left, right = pair
    out: list[int] = []
    i = 0
    n = len(seq)
    while i < n:
        if i < n - 1 and seq[i] == left and seq[i + 1] == right:
            out.append(new_id)
            i += 2
        else:
            out.append(seq[i])
            i += 1
    return out


def _check_atomic_corpus(corpus: Sequence[TokenSequence], vocab: Vocabulary) -> None:
    atomic_id = vocab.without_supertokens().vocab_id
    for seq in corpus:
        if seq.vocab_id != atomic_id:
            raise VocabularyMismatchError(
                f"sequence {seq.piece_id!r} uses vocabulary {seq.vocab_id}, expected {atomic_id}"
            )
        for token_id in seq.ids:
            if not vocab.is_atomic_id(token_id):
                raise VocabularyMismatchError(
                    f"sequence {seq.piece_id!r} contains non-atomic id {token_id}"
                )


def train(
    corpus: Sequence[TokenSequence],
    atom_vocab: Vocabulary,
    num_merges: int,
    tie_break: TieBreak = lambda pair: pair,
    corpus_name: str = "",
) -> BpeModel:
    """Learn ``num_merges`` merge rules from the corpus.

    Each step merges the globally most frequent adjacent pair (counted within
    sequences only) everywhere, recording its count. Training stops early
    once the best pair occurs fewer than twice. Pair counts are maintained
    incrementally per affected sequence; the result is identical to a full
    recount at every step.
    """
    if not corpus:
        raise ValueError("cannot train on an empty corpus")
    if num_merges < 0:
        raise ValueError(f"num_merges must be >= 0, got {num_merges}")
    if atom_vocab.supertokens:
        raise ValueError("training must start from an atoms-only vocabulary")
    _check_atomic_corpus(corpus, atom_vocab)

    sequences = [list(seq.ids) for seq in corpus]
    seq_counts = [pair_counts(s) for s in sequences]
    total: Counter = Counter()
    locations: dict[Pair, set[int]] = {}
    for idx, counts in enumerate(seq_counts):
        total.update(counts)
        for pair in counts:
            locations.setdefault(pair, set()).add(idx)

    merges: list[MergeRule] = []
    pairs: list[Pair] = []
    for step in range(num_merges):
        best_pair: Pair | None = None
        best_count = 1  # require >= 2
        for pair, count in total.items():
            if count > best_count or (
                count == best_count
                and best_pair is not None
                and tie_break(pair) < tie_break(best_pair)
            ):
                best_pair, best_count = pair, count
        if best_pair is None:
            break

        new_id = atom_vocab.num_atoms + step
        merges.append(MergeRule(pair=best_pair, new_id=new_id, count_at_merge=best_count))
        pairs.append(best_pair)

        for idx in sorted(locations[best_pair]):
            old_counts = seq_counts[idx]
            sequences[idx] = merge_pair(sequences[idx], best_pair, new_id)
            new_counts = pair_counts(sequences[idx])
            seq_counts[idx] = new_counts
            for pair in old_counts.keys() | new_counts.keys():
                delta = new_counts.get(pair, 0) - old_counts.get(pair, 0)
                if delta:
                    total[pair] += delta
                    if total[pair] == 0:
                        del total[pair]
                if new_counts.get(pair, 0) > 0:
                    locations.setdefault(pair, set()).add(idx)
                elif old_counts.get(pair, 0) > 0:
                    members = locations.get(pair)
                    if members is not None:
                        members.discard(idx)
                        if not members:
                            del locations[pair]

    vocab = Vocabulary(atoms=atom_vocab.atoms, supertokens=tuple(pairs), name=atom_vocab.name)
    total_len = sum(len(seq.ids) for seq in corpus)
    meta = TrainingMeta(
        corpus_name=corpus_name,
        num_merges_requested=num_merges,
        atom_vocab_id=atom_vocab.vocab_id,
        initial_corpus_length=total_len,
    )
    return BpeModel(vocab=vocab, merges=tuple(merges), meta=meta)


def encode(seq: TokenSequence, model: BpeModel) -> TokenSequence:
    """Apply the model's merges in training order, left to right."""
    if seq.vocab_id != model.atom_vocab_id:
        raise VocabularyMismatchError(
            f"sequence vocabulary {seq.vocab_id} does not match model atoms {model.atom_vocab_id}"
        )
    num_atoms = model.vocab.num_atoms
    ids = list(seq.ids)
    for token_id in ids:
        if not 0 <= token_id < num_atoms:
            raise VocabularyMismatchError(f"unknown atomic id {token_id}")
    present = set(ids)
    for rule in model.merges:
        left, right = rule.pair
        if left in present and right in present:
            merged = merge_pair(ids, rule.pair, rule.new_id)
            if len(merged) != len(ids):
                present.add(rule.new_id)
            ids = merged
    return make_sequence(ids, model.vocab.vocab_id, seq.piece_id, seq.meta)


def decode(seq: TokenSequence, model: BpeModel) -> TokenSequence:
    """Expand every id to its atoms; inverse of :func:`encode`.

    Accepts sequences tagged with either the trained vocabulary or its
    atomic subset (whose ids are valid in both).
    """
    if seq.vocab_id not in (model.vocab.vocab_id, model.atom_vocab_id):
        raise VocabularyMismatchError(
            f"sequence vocabulary {seq.vocab_id} does not match model {model.vocab.vocab_id}"
        )
    out: list[int] = []
    for token_id in seq.ids:
        out.extend(model.vocab.expansion(token_id))
    return make_sequence(out, model.atom_vocab_id, seq.piece_id, seq.meta)


def encoded_spans(seq: TokenSequence, model: BpeModel) -> list[tuple[int, int]]:
    """Half-open atomic index span covered by each encoded token."""
    spans: list[tuple[int, int]] = []
    offset = 0
    for token_id in seq.ids:
        width = len(model.vocab.expansion(token_id))
        spans.append((offset, offset + width))
        offset += width
    return spans


# --- model file format -------------------------------------------------------
#
# JSON with a version tag and a sha256 over the canonical payload encoding,
# so a flipped byte surfaces as a load error, never as a silently corrupted
# model.


def _canonical_payload(payload: dict) -> bytes:
    return json.dumps(payload, sort_keys=True, separators=(",", ":")).encode()


def save_model(model: BpeModel) -> bytes:
    payload = {
        "name": model.vocab.name,
        "atoms": [[t.kind.value, t.value] for t in model.vocab.atoms],
        "merges": [[r.pair[0], r.pair[1], r.count_at_merge] for r in model.merges],
        "meta": {
            "corpus_name": model.meta.corpus_name,
            "num_merges_requested": model.meta.num_merges_requested,
            "atom_vocab_id": model.meta.atom_vocab_id,
            "initial_corpus_length": model.meta.initial_corpus_length,
        },
    }
    document = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "sha256": hashlib.sha256(_canonical_payload(payload)).hexdigest(),
        "payload": payload,
    }
    return (json.dumps(document, sort_keys=True, indent=1) + "\n").encode()


def load_model(data: bytes) -> BpeModel:
    try:
        document = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise ModelLoadError(f"model file is not valid JSON: {e}") from e
    if not isinstance(document, dict):
        raise ModelLoadError("model file must hold a JSON object")
    if document.get("format") != MODEL_FORMAT:
        raise ModelLoadError(f"unrecognized model format {document.get('format')!r}")
    if document.get("version") != MODEL_VERSION:
        raise ModelLoadError(
            f"unsupported model version {document.get('version')!r} (expected {MODEL_VERSION})"
        )
    payload = document.get("payload")
    if not isinstance(payload, dict):
        raise ModelLoadError("model payload missing")
    digest = hashlib.sha256(_canonical_payload(payload)).hexdigest()
    if digest != document.get("sha256"):
        raise ModelLoadError("model checksum mismatch: file is corrupted")
    try:
        atoms = tuple(AtomicToken(TokenKind(kind), value) for kind, value in payload["atoms"])
        merge_rows = [(int(l), int(r), int(c)) for l, r, c in payload["merges"]]
        meta_raw = payload["meta"]
        meta = TrainingMeta(
            corpus_name=str(meta_raw["corpus_name"]),
            num_merges_requested=int(meta_raw["num_merges_requested"]),
            atom_vocab_id=str(meta_raw["atom_vocab_id"]),
            initial_corpus_length=int(meta_raw["initial_corpus_length"]),
        )
        vocab = Vocabulary(
            atoms=atoms,
            supertokens=tuple((l, r) for l, r, _ in merge_rows),
            name=str(payload.get("name", "")),
        )
        merges = tuple(
            MergeRule(pair=(l, r), new_id=vocab.num_atoms + k, count_at_merge=c)
            for k, (l, r, c) in enumerate(merge_rows)
        )
        return BpeModel(vocab=vocab, merges=merges, meta=meta)
    except (KeyError, TypeError, ValueError) as e:
        raise ModelLoadError(f"model payload is malformed: {e}") from e
