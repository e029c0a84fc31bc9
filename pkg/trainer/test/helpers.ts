/** Synthetic datasets in the export schema, built in-process for tests. */

import * as fs from "fs";

import { DATASET_FORMAT, DATASET_VERSION } from "../src/dataset";
import { mulberry32 } from "../src/rng";

export interface SeparableOptions {
  pieces?: number;
  vocabSize?: number;
  designatedId?: number;
  minLength?: number;
  maxLength?: number;
  seed?: number;
  positiveRate?: number;
}

/**
 * Dataset where label = (token id === designated id): separable by
 * construction, with the designated id planted at roughly `positiveRate`.
 */
export function writeSeparableDataset(path: string, options: SeparableOptions = {}): void {
  const {
    pieces = 200,
    vocabSize = 40,
    designatedId = 7,
    minLength = 48,
    maxLength = 64,
    seed = 31337,
    positiveRate = 0.05,
  } = options;
  const rng = mulberry32(seed);
  const lines: string[] = [
    JSON.stringify({
      format: DATASET_FORMAT,
      version: DATASET_VERSION,
      vocab_size: vocabSize,
      num_merges: 0,
      vocab_name: "separable-fixture",
    }),
  ];
  for (let p = 0; p < pieces; p++) {
    const length = minLength + Math.floor(rng() * (maxLength - minLength + 1));
    const ids: number[] = [];
    for (let i = 0; i < length; i++) {
      if (rng() < positiveRate) {
        ids.push(designatedId);
      } else {
        let id = Math.floor(rng() * vocabSize);
        if (id === designatedId) id = (id + 1) % vocabSize;
        ids.push(id);
      }
    }
    const labels = ids.map((id) => (id === designatedId ? 1 : 0));
    lines.push(
      JSON.stringify({
        piece_id: `sep-${p}`,
        ids,
        labels,
        vocab_size: vocabSize,
        split: "all",
      })
    );
  }
  fs.writeFileSync(path, lines.join("\n") + "\n", "utf-8");
}
