/**
 * Train-and-evaluate protocol: three deterministic piece-level splits, one
 * fresh model per split, mean and per-split F1 on the start-of-phrase class.
 *
 * Class imbalance is handled by weighting positive tokens inversely to
 * their training-fold frequency, so an all-negative predictor never pays
 * off. Long pieces are cut into overlapping windows (labels preserved);
 * each token is owned by exactly one window for evaluation.
 */

import * as tf from "@tensorflow/tfjs";

import { initBackend } from "./backend";
import { Dataset, Window, loadDataset, threeFolds, windowPieces } from "./dataset";
import { F1Result, countErrors, f1FromCounts, mean, std } from "./metrics";
import { TransformerTagger } from "./model";
import { mulberry32, shuffle } from "./rng";

export interface ExperimentSpec {
  datasetPath: string;
  embeddingSize?: number;
  layers?: number;
  heads?: number;
  splitSeed?: number;
  epochs?: number;
  batchSize?: number;
  windowCap?: number;
  learningRate?: number;
  threshold?: number;
  quiet?: boolean;
}

export interface ResolvedSpec extends Required<ExperimentSpec> {}

export const DEFAULTS = {
  embeddingSize: 32,
  layers: 2,
  heads: 8,
  splitSeed: 1,
  epochs: 6,
  batchSize: 16,
  windowCap: 512,
  learningRate: 1e-3,
  threshold: 0.5,
  quiet: false,
} as const;

export function resolveSpec(spec: ExperimentSpec): ResolvedSpec {
  return { ...DEFAULTS, ...spec } as ResolvedSpec;
}

export interface SplitMetrics extends F1Result {
  split: number;
  finalLoss: number;
}

export interface MetricsRecord {
  dataset: {
    path: string;
    pieces: number;
    vocabSize: number;
    numMerges: number | null;
  };
  spec: Omit<ResolvedSpec, "quiet">;
  backend: string;
  splits: SplitMetrics[];
  meanF1: number;
  stdF1: number;
  wallTimeMs: number;
}

interface Batch {
  ids: tf.Tensor2D;
  labels: tf.Tensor2D;
  mask: tf.Tensor2D;
  windows: Window[];
}

function makeBatches(windows: Window[], batchSize: number): Batch[] {
  // group by descending length to keep padding small; grouping is fixed,
  // only the batch order is shuffled between epochs
  const ordered = [...windows].sort((a, b) => b.ids.length - a.ids.length);
  const batches: Batch[] = [];
  for (let at = 0; at < ordered.length; at += batchSize) {
    const group = ordered.slice(at, at + batchSize);
    const width = group[0].ids.length;
    const ids = new Int32Array(group.length * width);
    const labels = new Float32Array(group.length * width);
    const mask = new Float32Array(group.length * width);
    group.forEach((w, row) => {
      for (let i = 0; i < w.ids.length; i++) {
        ids[row * width + i] = w.ids[i];
        labels[row * width + i] = w.labels[i];
        mask[row * width + i] = 1;
      }
    });
    batches.push({
      ids: tf.tensor2d(ids, [group.length, width], "int32"),
      labels: tf.tensor2d(labels, [group.length, width], "float32"),
      mask: tf.tensor2d(mask, [group.length, width], "float32"),
      windows: group,
    });
  }
  return batches;
}

function disposeBatches(batches: Batch[]): void {
  for (const b of batches) {
    b.ids.dispose();
    b.labels.dispose();
    b.mask.dispose();
  }
}

function positiveWeight(windows: Window[], quiet: boolean): number {
  let positives = 0;
  let total = 0;
  for (const w of windows) {
    for (const label of w.labels) {
      positives += label;
      total += 1;
    }
  }
  if (positives === 0) {
    if (!quiet) {
      console.warn("train: no positive labels in the training fold; weighting disabled");
    }
    return 1;
  }
  return (total - positives) / positives;
}

function evaluateFold(
  model: TransformerTagger,
  batches: Batch[],
  threshold: number,
  quiet: boolean
): F1Result {
  const predicted: number[] = [];
  const gold: number[] = [];
  for (const batch of batches) {
    const width = batch.ids.shape[1];
    const probabilities = model.probabilities(batch.ids, batch.mask);
    batch.windows.forEach((w, row) => {
      for (let i = Math.max(0, w.ownedFrom); i < w.ids.length; i++) {
        predicted.push(probabilities[row * width + i] > threshold ? 1 : 0);
        gold.push(w.labels[i]);
      }
    });
  }
  return f1FromCounts(countErrors(predicted, gold), !quiet);
}

export async function trainAndEval(rawSpec: ExperimentSpec): Promise<MetricsRecord> {
  const spec = resolveSpec(rawSpec);
  const backend = await initBackend();
  const dataset: Dataset = loadDataset(spec.datasetPath);
  if (dataset.pieces.length < 3) {
    throw new Error(`need at least 3 pieces for 3 splits, got ${dataset.pieces.length}`);
  }
  const started = Date.now();
  const folds = threeFolds(dataset.pieces.length, spec.splitSeed);
  const splits: SplitMetrics[] = [];

  for (let split = 0; split < 3; split++) {
    const testIndices = new Set(folds[split]);
    const trainPieces = dataset.pieces.filter((_, i) => !testIndices.has(i));
    const testPieces = dataset.pieces.filter((_, i) => testIndices.has(i));
    const trainWindows = windowPieces(trainPieces, spec.windowCap);
    const testWindows = windowPieces(testPieces, spec.windowCap);

    const model = new TransformerTagger({
      vocabSize: dataset.header.vocab_size,
      embeddingSize: spec.embeddingSize,
      layers: spec.layers,
      heads: spec.heads,
      maxLength: spec.windowCap,
      seed: 1000 * (spec.splitSeed + 1) + split,
    });
    const optimizer = tf.train.adam(spec.learningRate);
    const weight = positiveWeight(trainWindows, spec.quiet);
    const trainBatches = makeBatches(trainWindows, spec.batchSize);
    const testBatches = makeBatches(testWindows, spec.batchSize);
    const order = mulberry32(7000 + split);

    let finalLoss = NaN;
    for (let epoch = 0; epoch < spec.epochs; epoch++) {
      const epochBatches = shuffle([...trainBatches], order);
      let lossSum = 0;
      for (const batch of epochBatches) {
        lossSum += model.trainStep(optimizer, batch.ids, batch.labels, batch.mask, weight);
      }
      finalLoss = lossSum / Math.max(1, epochBatches.length);
      if (!spec.quiet) {
        console.log(
          `split ${split} epoch ${epoch + 1}/${spec.epochs} loss ${finalLoss.toFixed(4)}`
        );
      }
    }
    const result = evaluateFold(model, testBatches, spec.threshold, spec.quiet);
    splits.push({ split, finalLoss, ...result });
    if (!spec.quiet) {
      console.log(`split ${split} F1 ${result.f1.toFixed(4)}`);
    }

    disposeBatches(trainBatches);
    disposeBatches(testBatches);
    optimizer.dispose();
    model.dispose();
  }

  const f1s = splits.map((s) => s.f1);
  const { quiet: _quiet, ...specOut } = spec;
  return {
    dataset: {
      path: dataset.path,
      pieces: dataset.pieces.length,
      vocabSize: dataset.header.vocab_size,
      numMerges: dataset.header.num_merges ?? null,
    },
    spec: specOut,
    backend,
    splits,
    meanF1: mean(f1s),
    stdF1: std(f1s),
    wallTimeMs: Date.now() - started,
  };
}

/** Everything undeclared by the protocol is pinned here, not guessed. */
export function runManifest(record: MetricsRecord): Record<string, unknown> {
  return {
    model: "transformer-encoder",
    layers: record.spec.layers,
    headsPerLayer: record.spec.heads,
    embeddingSize: record.spec.embeddingSize,
    mlpWidth: 2 * record.spec.embeddingSize,
    optimizer: "adam",
    learningRate: record.spec.learningRate,
    epochs: record.spec.epochs,
    batchSize: record.spec.batchSize,
    loss: "sigmoid cross-entropy, positive class weighted by neg/pos of the training fold",
    threshold: record.spec.threshold,
    windowCap: record.spec.windowCap,
    windowStride: Math.floor(record.spec.windowCap / 2),
    windowOwnership: "each token evaluated by exactly one window",
    splits: 3,
    splitSeed: record.spec.splitSeed,
    backend: record.backend,
    determinism: "seeded initializers and shuffles; single-threaded kernels",
  };
}
