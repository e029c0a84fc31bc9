/**
 * Merge-count sweep: run the train/eval protocol once per exported dataset
 * variant and tabulate (merges, mean F1, std) sorted by merge count.
 */

import * as fs from "fs";
import * as path from "path";

import { fixed, writeCsv } from "./csv";
import { ExperimentSpec, MetricsRecord, trainAndEval } from "./train";

export interface SweepEntry {
  merges: number;
  datasetPath: string;
}

export interface SweepRow {
  merges: number;
  meanF1: number;
  stdF1: number;
  record: MetricsRecord;
}

/** Find dataset_m####.jsonl files produced by the experiment script. */
export function discoverDatasets(dir: string): SweepEntry[] {
  const entries: SweepEntry[] = [];
  for (const name of fs.readdirSync(dir)) {
    const match = /^dataset_m(\d+)\.jsonl$/.exec(name);
    if (match) {
      entries.push({ merges: parseInt(match[1], 10), datasetPath: path.join(dir, name) });
    }
  }
  return entries.sort((a, b) => a.merges - b.merges);
}

export async function sweep(
  entries: SweepEntry[],
  base: Omit<ExperimentSpec, "datasetPath">
): Promise<SweepRow[]> {
  if (entries.length === 0) {
    throw new Error("sweep needs at least one dataset");
  }
  const rows: SweepRow[] = [];
  for (const entry of [...entries].sort((a, b) => a.merges - b.merges)) {
    const record = await trainAndEval({ ...base, datasetPath: entry.datasetPath });
    rows.push({
      merges: entry.merges,
      meanF1: record.meanF1,
      stdF1: record.stdF1,
      record,
    });
  }
  return rows;
}

export function writeSweepCsv(rows: SweepRow[], outPath: string): void {
  writeCsv(
    outPath,
    ["merges", "mean_f1", "std_f1"],
    rows.map((r) => [r.merges, fixed(r.meanF1), fixed(r.stdF1)]),
    { splits: "3", metric: "f1-positive-class" }
  );
}
