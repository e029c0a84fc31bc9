#!/usr/bin/env python3
"""Plot the CSV tables emitted by `symbpe stats` (requires matplotlib).

    python scripts/plot_curves.py stats_dir [more_stats_dirs ...] --out curves.png

Each directory is one labeled series; frequency curves go on a log-log
panel, mean supertoken lengths on a log-x panel, mirroring the usual way
these statistics are read.
"""

from __future__ import annotations

import argparse
import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def read_curve(path: Path) -> tuple[list[int], list[float]]:
    xs: list[int] = []
    ys: list[float] = []
    with path.open(encoding="utf-8") as handle:
        for row in csv.DictReader(r for r in handle if not r.startswith("#")):
            xs.append(int(row["vocab_size"]))
            ys.append(float(row["value"]))
    return xs, ys


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("stats_dirs", nargs="+", help="output directories of `symbpe stats`")
    parser.add_argument("--out", default="curves.png")
    args = parser.parse_args()

    fig, (freq_ax, len_ax) = plt.subplots(2, 1, figsize=(7, 8), sharex=True)
    for stats_dir in args.stats_dirs:
        directory = Path(stats_dir)
        label = directory.parent.name if directory.name == "stats" else directory.name
        xs, ys = read_curve(directory / "frequency_curve.csv")
        freq_ax.plot(xs, ys, label=label)
        xs, ys = read_curve(directory / "length_curve.csv")
        len_ax.plot(xs, ys, label=label)

    freq_ax.set_xscale("log")
    freq_ax.set_yscale("log")
    freq_ax.set_ylabel("supertoken frequency / initial corpus length")
    freq_ax.legend()
    len_ax.set_xscale("log")
    len_ax.set_xlabel("vocabulary size")
    len_ax.set_ylabel("mean supertoken length")
    fig.tight_layout()
    fig.savefig(args.out, dpi=150)
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
