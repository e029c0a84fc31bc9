"""Command-line front end.

Subcommands: tokenize, train-bpe, encode, decode, stats, phrase-analysis,
export-dataset. All analysis numbers land in CSV files under --out so runs
are byte-for-byte comparable; stdout only reports progress. Identical
inputs, flags, and seed give identical outputs regardless of --threads.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from pathlib import Path

from . import analysis, bpe, phrases
from .midi import MidiParseError, parse_midi
from .score import NotesParseError, Score, parse_notes_text, quantize
from .tokenizers import (
    PolyphonyError,
    RemiConfig,
    StructuredConfig,
    TokenStructureError,
    filter_pitch_only,
    pitch_only_vocabulary,
    remi_vocabulary,
    render_sequence,
    structured_vocabulary,
    tokenize_remi,
    tokenize_structured_intervals,
)
from .tokens import TokenKind, TokenSequence, make_sequence

TOKENS_FORMAT = "symbpe-tokens"
TOKENS_VERSION = 1

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_VOCAB = 4
EXIT_DATA = 5

SCHEMES = ("remi", "structured-intervals", "pitch-only")


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


# --- corpus + token file I/O --------------------------------------------------


def _load_score_file(path: Path) -> Score:
    try:
        if path.suffix.lower() in (".mid", ".midi"):
            return parse_midi(path.read_bytes())
        return parse_notes_text(path.read_text(encoding="utf-8"))
    except OSError as e:
        raise CliError(f"cannot read {path}: {e.strerror}", EXIT_IO) from e
    except (MidiParseError, NotesParseError) as e:
        raise CliError(f"{path}: {e}", EXIT_DATA) from e


def _load_corpus(input_path: str, resolution: int, threads: int) -> list[tuple[str, Score]]:
    root = Path(input_path)
    if not root.exists():
        raise CliError(f"input path {root} does not exist", EXIT_IO)
    if root.is_dir():
        files = sorted(
            p for p in root.iterdir() if p.suffix.lower() in (".mid", ".midi", ".jsonl")
        )
        if not files:
            raise CliError(f"no .mid/.midi/.jsonl files under {root}", EXIT_IO)
    else:
        files = [root]

    def one(path: Path) -> tuple[str, Score]:
        return path.stem, quantize(_load_score_file(path), resolution)

    return _pmap(one, files, threads)


def _pmap(fn, items, threads: int) -> list:
    """Order-preserving map, optionally across a thread pool. Results never
    depend on the worker count."""
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _scheme_vocab(scheme: str, resolution: int) -> bpe.Vocabulary:
    if scheme == "remi":
        return remi_vocabulary(RemiConfig(resolution=resolution))
    if scheme == "structured-intervals":
        return structured_vocabulary(StructuredConfig(resolution=resolution))
    if scheme == "pitch-only":
        return pitch_only_vocabulary()
    raise CliError(f"unknown scheme {scheme!r}", EXIT_USAGE)


def _tokenize_one(scheme: str, resolution: int, piece_id: str, score: Score) -> TokenSequence:
    try:
        if scheme == "remi":
            seq = tokenize_remi(score, RemiConfig(resolution=resolution))
        elif scheme == "structured-intervals":
            seq = tokenize_structured_intervals(score, StructuredConfig(resolution=resolution))
        else:
            remi_cfg = RemiConfig(resolution=resolution)
            seq = filter_pitch_only(tokenize_remi(score, remi_cfg), remi_vocabulary(remi_cfg))
    except PolyphonyError as e:
        raise CliError(f"{piece_id}: {e}", EXIT_DATA) from e
    return replace(seq, piece_id=piece_id)


def _write_tokens_file(
    path: Path, sequences: list[TokenSequence], scheme: str, resolution: int, vocab_id: str
) -> None:
    header = {
        "format": TOKENS_FORMAT,
        "version": TOKENS_VERSION,
        "scheme": scheme,
        "resolution": resolution,
        "vocab_id": vocab_id,
    }
    lines = [json.dumps(header, sort_keys=True)]
    lines += [
        json.dumps({"piece_id": s.piece_id, "ids": list(s.ids)}, sort_keys=True)
        for s in sequences
    ]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _read_tokens_file(path: Path) -> tuple[dict, list[TokenSequence]]:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise CliError(f"cannot read {path}: {e.strerror}", EXIT_IO) from e
    lines = [line for line in text.splitlines() if line.strip()]
    if not lines:
        raise CliError(f"{path}: empty tokens file", EXIT_DATA)
    try:
        header = json.loads(lines[0])
        if header.get("format") != TOKENS_FORMAT or header.get("version") != TOKENS_VERSION:
            raise CliError(f"{path}: not a {TOKENS_FORMAT} v{TOKENS_VERSION} file", EXIT_DATA)
        for key in ("scheme", "resolution", "vocab_id"):
            if key not in header:
                raise CliError(f"{path}: tokens header missing {key!r}", EXIT_DATA)
        sequences = []
        for line in lines[1:]:
            rec = json.loads(line)
            sequences.append(
                make_sequence(rec["ids"], header["vocab_id"], rec.get("piece_id", ""))
            )
    except (json.JSONDecodeError, KeyError, TypeError) as e:
        raise CliError(f"{path}: malformed tokens file ({e})", EXIT_DATA) from e
    return header, sequences


def _read_model(path_str: str) -> bpe.BpeModel:
    path = Path(path_str)
    try:
        data = path.read_bytes()
    except OSError as e:
        raise CliError(f"cannot read {path}: {e.strerror}", EXIT_IO) from e
    try:
        return bpe.load_model(data)
    except bpe.ModelLoadError as e:
        raise CliError(f"{path}: {e}", EXIT_DATA) from e


def _load_annotations(path_str: str) -> dict[str, list[int]]:
    path = Path(path_str)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise CliError(f"cannot read {path}: {e.strerror}", EXIT_IO) from e
    table: dict[str, list[int]] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
            table[str(rec["piece_id"])] = [int(x) for x in rec["phrase_note_indices"]]
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
            raise CliError(f"{path}:{lineno}: bad annotation record ({e})", EXIT_DATA) from e
    return table


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


# --- subcommands ---------------------------------------------------------------


def _cmd_tokenize(args) -> int:
    out = _out_dir(args)
    corpus = _load_corpus(args.input, args.resolution, args.threads)
    vocab = _scheme_vocab(args.scheme, args.resolution)
    sequences = _pmap(
        lambda item: _tokenize_one(args.scheme, args.resolution, item[0], item[1]),
        corpus,
        args.threads,
    )
    _write_tokens_file(out / "tokens.jsonl", sequences, args.scheme, args.resolution, vocab.vocab_id)
    if args.emit_text:
        lines = [f"{s.piece_id}: {render_sequence(s, vocab)}" for s in sequences]
        (out / "tokens.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"tokenized {len(sequences)} pieces -> {out / 'tokens.jsonl'}")
    return EXIT_OK


def _cmd_train_bpe(args) -> int:
    header, sequences = _read_tokens_file(Path(args.input))
    vocab = _scheme_vocab(header["scheme"], header["resolution"])
    if vocab.vocab_id != header["vocab_id"]:
        raise CliError(
            f"tokens file vocabulary {header['vocab_id']} does not match "
            f"{header['scheme']} at resolution {header['resolution']}",
            EXIT_VOCAB,
        )
    try:
        model = bpe.train(sequences, vocab, args.merges, corpus_name=Path(args.input).stem)
    except bpe.VocabularyMismatchError as e:
        raise CliError(str(e), EXIT_VOCAB) from e
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_bytes(bpe.save_model(model))
    print(f"trained {model.num_merges} merges -> {out}")
    return EXIT_OK


def _cmd_encode(args) -> int:
    out = _out_dir(args)
    header, sequences = _read_tokens_file(Path(args.input))
    model = _read_model(args.model)
    try:
        encoded = _pmap(lambda s: bpe.encode(s, model), sequences, args.threads)
    except bpe.VocabularyMismatchError as e:
        raise CliError(str(e), EXIT_VOCAB) from e
    _write_tokens_file(
        out / "encoded.jsonl", encoded, header["scheme"], header["resolution"], model.vocab.vocab_id
    )
    print(f"encoded {len(encoded)} pieces -> {out / 'encoded.jsonl'}")
    return EXIT_OK


def _cmd_decode(args) -> int:
    out = _out_dir(args)
    header, sequences = _read_tokens_file(Path(args.input))
    model = _read_model(args.model)
    try:
        decoded = _pmap(lambda s: bpe.decode(s, model), sequences, args.threads)
    except bpe.VocabularyMismatchError as e:
        raise CliError(str(e), EXIT_VOCAB) from e
    _write_tokens_file(
        out / "decoded.jsonl", decoded, header["scheme"], header["resolution"], model.atom_vocab_id
    )
    print(f"decoded {len(decoded)} pieces -> {out / 'decoded.jsonl'}")
    return EXIT_OK


def _cmd_stats(args) -> int:
    out = _out_dir(args)
    model = _read_model(args.model)
    if not model.merges:
        raise CliError("model has no merges; nothing to analyze", EXIT_DATA)
    freq = analysis.frequency_curve(model)
    analysis.emit_table(freq, out / "frequency_curve.csv")
    lengths = analysis.length_curve(model)
    analysis.emit_table(lengths, out / "length_curve.csv")
    analysis.write_csv(
        out / "summary.csv",
        ["metric", "value"],
        [
            ("num_atoms", model.vocab.num_atoms),
            ("num_merges", model.num_merges),
            ("vocab_size", len(model.vocab)),
            ("initial_corpus_length", model.meta.initial_corpus_length),
            ("mean_supertoken_length", analysis.mean_supertoken_length(model)),
        ],
    )
    if any(t.kind is TokenKind.PITCH for t in model.vocab.atoms):
        hist = analysis.pitch_content_histogram(model, bucket_max=args.buckets)
        analysis.emit_table(hist, out / "pitch_histogram.csv")
    print(f"stats for {model.num_merges}-merge model -> {out}")
    return EXIT_OK


def _phrase_corpus_from_args(args, model: bpe.BpeModel):
    if args.scheme not in ("remi", "structured-intervals"):
        raise CliError(
            "phrase alignment is defined for --scheme remi or structured-intervals", EXIT_USAGE
        )
    corpus = _load_corpus(args.input, args.resolution, args.threads)
    annotations = _load_annotations(args.annotations)
    vocab = _scheme_vocab(args.scheme, args.resolution)
    if vocab.without_supertokens().vocab_id != model.atom_vocab_id:
        raise CliError(
            f"model atoms {model.atom_vocab_id} do not match {args.scheme} "
            f"at resolution {args.resolution}",
            EXIT_VOCAB,
        )

    def one(item: tuple[str, Score]):
        piece_id, score = item
        if piece_id not in annotations:
            raise CliError(f"no annotation record for piece {piece_id!r}", EXIT_DATA)
        seq = _tokenize_one(args.scheme, args.resolution, piece_id, score)
        cfg = RemiConfig(resolution=args.resolution) if args.scheme == "remi" else None
        try:
            ann = phrases.align_note_phrases(
                score, annotations[piece_id], args.scheme, cfg, piece_id=piece_id
            )
        except ValueError as e:
            raise CliError(f"{piece_id}: {e}", EXIT_DATA) from e
        return seq, ann

    return _pmap(one, corpus, args.threads)


def _cmd_phrase_analysis(args) -> int:
    out = _out_dir(args)
    model = _read_model(args.model)
    labeled = _phrase_corpus_from_args(args, model)

    ratio = phrases.boundary_overlap_ratio(model, labeled)

    def baseline_one(item):
        seq, ann = item
        encoded_len = len(bpe.encode(seq, model).ids)
        mean = phrases.random_split_baseline(
            len(seq.ids), encoded_len, ann.starts, args.trials, args.seed
        )
        return mean * encoded_len, encoded_len

    parts = _pmap(baseline_one, labeled, args.threads)
    baseline = sum(w for w, _ in parts) / sum(n for _, n in parts)

    atomic_labels = []
    for seq, ann in labeled:
        starts = set(ann.starts)
        atomic_labels.append(
            phrases.EncodedLabels(labels=tuple(i in starts for i in range(len(seq.ids))))
        )
    encoded_labels = [phrases.project_labels(ann, model, seq) for seq, ann in labeled]

    analysis.write_csv(
        out / "overlap.csv",
        ["metric", "value"],
        [
            ("pieces", len(labeled)),
            ("bpe_overlap_ratio", ratio),
            ("random_split_baseline", baseline),
            ("trials", args.trials),
            ("seed", args.seed),
        ],
        metadata={"denominator": "all-encoded-tokens (supertokens-only is the alternative)"},
    )
    analysis.write_csv(
        out / "class_balance.csv",
        ["labels", "value"],
        [
            ("atomic", phrases.class_balance(atomic_labels)),
            ("encoded", phrases.class_balance(encoded_labels)),
        ],
    )
    for which in ("start", "end"):
        ranked = phrases.top_boundary_supertokens(model, labeled, args.top, which=which)
        analysis.write_csv(
            out / f"top_{which}_supertokens.csv",
            ["rank", "token_id", "count", "expansion"],
            [
                (rank, token_id, count, model.vocab.render_id(token_id))
                for rank, (token_id, count) in enumerate(ranked, start=1)
            ],
        )
    print(f"phrase analysis ({len(labeled)} pieces) -> {out}")
    return EXIT_OK


def _cmd_export_dataset(args) -> int:
    model = _read_model(args.model)
    labeled = _phrase_corpus_from_args(args, model)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    phrases.export_training_set(labeled, model, out)
    print(f"exported {len(labeled)} pieces -> {out}")
    return EXIT_OK


# --- argument parsing ----------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="symbpe",
        description="Symbolic-music BPE toolkit: tokenize, train, analyze, export.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, *, scheme=False, model=False, annotations=False):
        p.add_argument("--out", required=True, help="output directory or file")
        p.add_argument("--seed", type=int, default=0, help="seed for all randomness")
        p.add_argument("--threads", type=int, default=1, help="worker threads (result-invariant)")
        if scheme:
            p.add_argument("--scheme", choices=SCHEMES, default="remi")
            p.add_argument("--resolution", type=int, default=4, help="grid positions per beat")
        if model:
            p.add_argument("--model", required=True, help="trained BPE model file")
        if annotations:
            p.add_argument("--annotations", required=True, help="phrase annotation sidecar (JSONL)")

    p = sub.add_parser("tokenize", help="scores -> atomic token sequences")
    p.add_argument("--input", required=True, help="score file or directory (.mid/.midi/.jsonl)")
    add_common(p, scheme=True)
    p.add_argument("--emit-text", action="store_true", help="also write human-readable tokens.txt")
    p.set_defaults(func=_cmd_tokenize)

    p = sub.add_parser("train-bpe", help="learn a merge table from a tokens file")
    p.add_argument("--input", required=True, help="tokens.jsonl from the tokenize step")
    p.add_argument("--merges", type=int, required=True, help="number of merges to learn")
    add_common(p)
    p.set_defaults(func=_cmd_train_bpe)

    p = sub.add_parser("encode", help="apply a merge table to atomic tokens")
    p.add_argument("--input", required=True, help="tokens.jsonl")
    add_common(p, model=True)
    p.set_defaults(func=_cmd_encode)

    p = sub.add_parser("decode", help="expand encoded tokens back to atoms")
    p.add_argument("--input", required=True, help="encoded.jsonl")
    add_common(p, model=True)
    p.set_defaults(func=_cmd_decode)

    p = sub.add_parser("stats", help="vocabulary curves and summary tables")
    add_common(p, model=True)
    p.add_argument("--buckets", type=int, default=4, help="pitch-content histogram buckets")
    p.set_defaults(func=_cmd_stats)

    p = sub.add_parser("phrase-analysis", help="phrase/boundary interaction statistics")
    p.add_argument("--input", required=True, help="score file or directory")
    add_common(p, scheme=True, model=True, annotations=True)
    p.add_argument("--trials", type=int, default=1000, help="random-split baseline trials")
    p.add_argument("--top", type=int, default=10, help="boundary supertokens to rank")
    p.set_defaults(func=_cmd_phrase_analysis)

    p = sub.add_parser("export-dataset", help="write the labeled training set (JSONL)")
    p.add_argument("--input", required=True, help="score file or directory")
    add_common(p, scheme=True, model=True, annotations=True)
    p.set_defaults(func=_cmd_export_dataset)

    return parser


def run(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # argparse exits 2 on usage errors and 0 for --help
        return e.code if isinstance(e.code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except CliError as e:
        print(f"symbpe: {e}", file=sys.stderr)
        return e.code
    except bpe.VocabularyMismatchError as e:
        print(f"symbpe: {e}", file=sys.stderr)
        return EXIT_VOCAB
    except (
        NotesParseError,
        MidiParseError,
        TokenStructureError,
        PolyphonyError,
        bpe.ModelLoadError,
        ValueError,
    ) as e:
        print(f"symbpe: {e}", file=sys.stderr)
        return EXIT_DATA
    except OSError as e:
        print(f"symbpe: {e}", file=sys.stderr)
        return EXIT_IO


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
