#!/usr/bin/env python3
"""Regenerate the bundled test fixtures and golden files.

Outputs (all deterministic):
  tests/data/fixture_corpus/*.jsonl          20-piece monophonic corpus
  tests/data/fixture_annotations.jsonl       phrase sidecar for the corpus
  tests/data/melodies/rising_fourth.jsonl    2-bar quarter + perfect-fourth figure
  tests/data/melodies/descending_16ths.jsonl 2-bar run with a -5,-3,-4 descent
  tests/data/golden/...                      CSVs/exports from the CLI pipeline

Run from the repository root:  python scripts/make_fixture_corpus.py
"""

from __future__ import annotations

import json
import shutil
import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "src"))

from symbpe.cli import run  # noqa: E402
from symbpe.score import NoteEvent, make_score, render_notes_text  # noqa: E402
from symbpe.synthetic import phrase_corpus  # noqa: E402

DATA = REPO / "tests" / "data"

FIXTURE_SEED = 20240917
FIXTURE_PIECES = 20
GOLDEN_MERGES = 64
GOLDEN_TRIALS = 200
GOLDEN_SEED = 7


def note(onset, pitch, duration):
    return NoteEvent(onset=onset, track=0, pitch=pitch, duration=duration)


RISING_FOURTH = [
    note(0.0, 60, 1.0),
    note(1.0, 65, 1.0),  # quarter upbeat, then up a perfect fourth
    note(2.0, 67, 1.0),
    note(3.0, 65, 1.0),
    note(4.0, 63, 2.0),
    note(6.0, 60, 2.0),
]

DESCENDING_16THS = [
    note(0.0, 72, 1.0),
    note(1.0, 76, 1.0),
    note(2.0, 72, 0.25),
    note(2.25, 67, 0.25),  # -5
    note(2.5, 64, 0.25),   # -3
    note(2.75, 60, 0.25),  # -4
    note(3.0, 60, 1.0),
    note(4.0, 60, 4.0),
]


def write_corpus() -> None:
    corpus_dir = DATA / "fixture_corpus"
    if corpus_dir.exists():
        shutil.rmtree(corpus_dir)
    corpus_dir.mkdir(parents=True)
    annotations = []
    for piece in phrase_corpus(num_pieces=FIXTURE_PIECES, seed=FIXTURE_SEED):
        (corpus_dir / f"{piece.piece_id}.jsonl").write_text(
            render_notes_text(piece.score), encoding="utf-8"
        )
        annotations.append(
            json.dumps(
                {
                    "piece_id": piece.piece_id,
                    "phrase_note_indices": list(piece.phrase_note_indices),
                },
                sort_keys=True,
            )
        )
    (DATA / "fixture_annotations.jsonl").write_text(
        "\n".join(annotations) + "\n", encoding="utf-8"
    )

    melodies = DATA / "melodies"
    melodies.mkdir(exist_ok=True)
    (melodies / "rising_fourth.jsonl").write_text(
        render_notes_text(make_score(RISING_FOURTH)), encoding="utf-8"
    )
    (melodies / "descending_16ths.jsonl").write_text(
        render_notes_text(make_score(DESCENDING_16THS)), encoding="utf-8"
    )


def run_pipeline(work: Path) -> None:
    corpus = str(DATA / "fixture_corpus")
    annotations = str(DATA / "fixture_annotations.jsonl")

    def cli(*argv):
        code = run([str(a) for a in argv])
        if code != 0:
            raise SystemExit(f"pipeline step failed ({code}): {argv}")

    for scheme in ("structured-intervals", "remi"):
        tok = work / scheme / "tok"
        cli("tokenize", "--input", corpus, "--scheme", scheme, "--out", tok)
        model = work / scheme / "model.json"
        cli("train-bpe", "--input", tok / "tokens.jsonl", "--merges", GOLDEN_MERGES, "--out", model)
        cli("stats", "--model", model, "--out", work / scheme / "stats")
        cli("encode", "--input", tok / "tokens.jsonl", "--model", model, "--out", work / scheme)
        cli("decode", "--input", work / scheme / "encoded.jsonl", "--model", model, "--out", work / scheme)

    model = work / "structured-intervals" / "model.json"
    cli(
        "phrase-analysis",
        "--input", corpus,
        "--annotations", annotations,
        "--scheme", "structured-intervals",
        "--model", model,
        "--trials", GOLDEN_TRIALS,
        "--seed", GOLDEN_SEED,
        "--out", work / "phrase",
    )
    cli(
        "export-dataset",
        "--input", corpus,
        "--annotations", annotations,
        "--scheme", "structured-intervals",
        "--model", model,
        "--out", work / "dataset.jsonl",
    )


def write_golden() -> None:
    golden = DATA / "golden"
    if golden.exists():
        shutil.rmtree(golden)
    with tempfile.TemporaryDirectory() as tmp:
        work = Path(tmp)
        run_pipeline(work)
        for scheme in ("structured-intervals", "remi"):
            (golden / scheme).mkdir(parents=True)
            for csv in sorted((work / scheme / "stats").glob("*.csv")):
                shutil.copy(csv, golden / scheme / csv.name)
            shutil.copy(work / scheme / "model.json", golden / scheme / "model.json")
        (golden / "phrase").mkdir()
        for csv in sorted((work / "phrase").glob("*.csv")):
            shutil.copy(csv, golden / "phrase" / csv.name)
        shutil.copy(work / "dataset.jsonl", golden / "dataset.jsonl")


def main() -> None:
    write_corpus()
    write_golden()
    print(f"fixtures written under {DATA}")


if __name__ == "__main__":
    main()
