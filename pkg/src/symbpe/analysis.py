"""Descriptive statistics over trained BPE models, as plot-ready tables.

All quantities are read straight off the model: merge-time pair counts for
the frequency curve (the quantity each merge step maximizes) and expansion
lengths for the length statistics. Nothing here depends on iteration order
or thread count.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .bpe import BpeModel
from .tokens import TokenKind


@dataclass(frozen=True, slots=True)
class CurvePoint:
    vocab_size: int  # atoms + supertokens created so far
    value: float


@dataclass(frozen=True)
class Histogram:
    """Cumulative pitch-content proportions per merge index.

    Row (m, k, p): after m merges, fraction p of the supertokens created so
    far contain exactly k Pitch atoms; k = bucket_max + 1 is the overflow
    bucket (more than bucket_max).
    """

    bucket_max: int
    rows: tuple[tuple[int, int, float], ...]


def frequency_curve(model: BpeModel, initial_corpus_length: int | None = None) -> list[CurvePoint]:
    """Merge-time pair count of each supertoken, normalized by the initial
    corpus length."""
    length = model.meta.initial_corpus_length if initial_corpus_length is None else initial_corpus_length
    if length <= 0:
        raise ValueError(f"initial corpus length must be positive, got {length}")
    if not model.merges:
        raise ValueError("model has no merges: nothing to plot")
    base = model.vocab.num_atoms
    return [
        CurvePoint(vocab_size=base + k, value=rule.count_at_merge / length)
        for k, rule in enumerate(model.merges, start=1)
    ]


def length_curve(model: BpeModel) -> list[CurvePoint]:
    """Running mean of supertoken expansion lengths across merge steps."""
    if not model.merges:
        raise ValueError("model has no merges: nothing to plot")
    base = model.vocab.num_atoms
    points: list[CurvePoint] = []
    total = 0
    for k, rule in enumerate(model.merges, start=1):
        total += len(model.vocab.expansion(rule.new_id))
        points.append(CurvePoint(vocab_size=base + k, value=total / k))
    return points


def mean_supertoken_length(model: BpeModel) -> float:
    """Mean expansion length over all supertokens (= last length-curve point)."""
    if not model.merges:
        raise ValueError("model has no merges")
    lengths = [len(model.vocab.expansion(r.new_id)) for r in model.merges]
    return sum(lengths) / len(lengths)


def pitch_content_histogram(model: BpeModel, bucket_max: int = 4) -> Histogram:
    """How many Pitch atoms the supertokens created so far contain.

    Cumulative over merges 1..m at every m (windowed variants are possible
    but this is what gets emitted, flagged in table metadata).
    """
    if bucket_max < 0:
        raise ValueError("bucket_max must be >= 0")
    if not any(t.kind is TokenKind.PITCH for t in model.vocab.atoms):
        raise ValueError("model vocabulary has no Pitch kind; histogram undefined")
    if not model.merges:
        raise ValueError("model has no merges: nothing to bucket")

    pitch_atom_ids = {
        i for i, t in enumerate(model.vocab.atoms) if t.kind is TokenKind.PITCH
    }
    overflow = bucket_max + 1
    buckets = [0] * (overflow + 1)
    rows: list[tuple[int, int, float]] = []
    for m, rule in enumerate(model.merges, start=1):
        pitch_count = sum(1 for i in model.vocab.expansion(rule.new_id) if i in pitch_atom_ids)
        buckets[min(pitch_count, overflow)] += 1
        rows.extend((m, k, buckets[k] / m) for k in range(overflow + 1))
    return Histogram(bucket_max=bucket_max, rows=tuple(rows))


# --- CSV emission -------------------------------------------------------------

_FLOAT_DIGITS = 10


def _format_cell(value) -> str:
    if isinstance(value, bool):
        raise TypeError("no boolean cells in analysis tables")
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return f"{value:.{_FLOAT_DIGITS}f}"
    text = str(value)
    if any(c in text for c in ',"\n'):
        text = '"' + text.replace('"', '""') + '"'
    return text


def write_csv(
    path: str | Path,
    header: list[str],
    rows,
    metadata: dict[str, str] | None = None,
) -> None:
    """Deterministic CSV: optional '# key=value' comment lines, a header,
    fixed-precision floats, \\n newlines. Re-emission is byte-identical."""
    lines: list[str] = []
    for key in sorted(metadata or {}):
        lines.append(f"# {key}={metadata[key]}")
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(_format_cell(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def emit_table(table: list[CurvePoint] | Histogram, path: str | Path) -> None:
    """Write a curve as (vocab_size,value) or a histogram as
    (merge_count,k,proportion)."""
    if isinstance(table, Histogram):
        write_csv(
            path,
            ["merge_count", "k", "proportion"],
            table.rows,
            metadata={
                "buckets": f"0..{table.bucket_max}+overflow({table.bucket_max + 1})",
                "semantics": "cumulative-over-merges",
            },
        )
    else:
        write_csv(path, ["vocab_size", "value"], [(p.vocab_size, p.value) for p in table])
