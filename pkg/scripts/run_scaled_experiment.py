#!/usr/bin/env python3
"""Scaled-down phrase-segmentation experiment, end to end.

Generates the 200-piece synthetic corpus, then for each merge count in
--merges: trains a BPE table, emits vocabulary statistics and phrase
analyses, and exports the labeled dataset the segmentation trainer consumes.

    python scripts/run_scaled_experiment.py --out experiment_out
    (cd trainer && npm run sweep -- --data ../experiment_out)
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "src"))

from symbpe.cli import run  # noqa: E402
from symbpe.score import render_notes_text  # noqa: E402
from symbpe.synthetic import phrase_corpus  # noqa: E402


def cli(*argv) -> None:
    code = run([str(a) for a in argv])
    if code != 0:
        raise SystemExit(f"step failed ({code}): {argv}")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="experiment_out")
    parser.add_argument("--pieces", type=int, default=200)
    parser.add_argument("--seed", type=int, default=2024)
    parser.add_argument("--merges", type=int, nargs="+", default=[0, 64, 256])
    parser.add_argument("--trials", type=int, default=200)
    args = parser.parse_args()

    out = Path(args.out)
    corpus_dir = out / "corpus"
    corpus_dir.mkdir(parents=True, exist_ok=True)
    annotations_path = out / "annotations.jsonl"

    records = []
    for piece in phrase_corpus(num_pieces=args.pieces, seed=args.seed):
        (corpus_dir / f"{piece.piece_id}.jsonl").write_text(
            render_notes_text(piece.score), encoding="utf-8"
        )
        records.append(
            json.dumps(
                {
                    "piece_id": piece.piece_id,
                    "phrase_note_indices": list(piece.phrase_note_indices),
                },
                sort_keys=True,
            )
        )
    annotations_path.write_text("\n".join(records) + "\n", encoding="utf-8")
    print(f"corpus: {args.pieces} pieces -> {corpus_dir}")

    tok = out / "tokens"
    cli("tokenize", "--input", corpus_dir, "--scheme", "structured-intervals", "--out", tok)

    for merges in args.merges:
        stem = out / f"m{merges:04d}"
        model = stem / "model.json"
        cli("train-bpe", "--input", tok / "tokens.jsonl", "--merges", merges, "--out", model)
        if merges > 0:
            cli("stats", "--model", model, "--out", stem / "stats")
            cli(
                "phrase-analysis",
                "--input", corpus_dir,
                "--annotations", annotations_path,
                "--scheme", "structured-intervals",
                "--model", model,
                "--trials", args.trials,
                "--seed", 7,
                "--out", stem / "phrase",
            )
        cli(
            "export-dataset",
            "--input", corpus_dir,
            "--annotations", annotations_path,
            "--scheme", "structured-intervals",
            "--model", model,
            "--out", out / f"dataset_m{merges:04d}.jsonl",
        )
        print(f"merge count {merges}: model, analyses, dataset done")


if __name__ == "__main__":
    main()
