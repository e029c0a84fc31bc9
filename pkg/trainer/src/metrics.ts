/**
 * Binary F1 on the positive (start-of-phrase) class.
 *
 * Degenerate inputs (no positives anywhere in gold or predictions) have no
 * defined F1; by convention it is reported as 0 with a warning.
 */

export interface F1Counts {
  tp: number;
  fp: number;
  fn: number;
  tokens: number;
  positives: number;
}

export interface F1Result extends F1Counts {
  f1: number;
  precision: number;
  recall: number;
  degenerate: boolean;
}

export function countErrors(predicted: number[], gold: number[]): F1Counts {
  if (predicted.length !== gold.length) {
    throw new Error(`prediction/gold length mismatch: ${predicted.length} vs ${gold.length}`);
  }
  let tp = 0;
  let fp = 0;
  let fn = 0;
  let positives = 0;
  for (let i = 0; i < gold.length; i++) {
    if (gold[i] === 1) {
      positives++;
      if (predicted[i] === 1) tp++;
      else fn++;
    } else if (predicted[i] === 1) {
      fp++;
    }
  }
  return { tp, fp, fn, tokens: gold.length, positives };
}

export function f1FromCounts(counts: F1Counts, warn = true): F1Result {
  const { tp, fp, fn } = counts;
  const denominator = 2 * tp + fp + fn;
  const degenerate = denominator === 0;
  if (degenerate && warn) {
    console.warn(
      "metrics: no positive labels or predictions; F1 is undefined and reported as 0"
    );
  }
  return {
    ...counts,
    f1: degenerate ? 0 : (2 * tp) / denominator,
    precision: tp + fp === 0 ? 0 : tp / (tp + fp),
    recall: tp + fn === 0 ? 0 : tp / (tp + fn),
    degenerate,
  };
}

export function mean(values: number[]): number {
  return values.reduce((a, b) => a + b, 0) / values.length;
}

export function std(values: number[]): number {
  const m = mean(values);
  return Math.sqrt(mean(values.map((v) => (v - m) * (v - m))));
}
