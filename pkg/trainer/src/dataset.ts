/**
 * Reader for the labeled dataset export (JSON lines).
 *
 * Line 1 is a versioned header; every other line is one piece:
 * {"piece_id", "ids", "labels", "vocab_size", "split"} with 0/1 labels, one
 * per encoded token. Schema problems throw before any training starts.
 */

import * as fs from "fs";

import { mulberry32, shuffle } from "./rng";

export const DATASET_FORMAT = "symbpe-dataset";
export const DATASET_VERSION = 1;

export interface DatasetHeader {
  format: string;
  version: number;
  vocab_size: number;
  num_atoms?: number;
  num_merges?: number;
  vocab_name?: string;
}

export interface Piece {
  pieceId: string;
  ids: number[];
  labels: number[];
}

export interface Dataset {
  header: DatasetHeader;
  pieces: Piece[];
  path: string;
}

export class SchemaError extends Error {}

export function loadDataset(filePath: string): Dataset {
  const text = fs.readFileSync(filePath, "utf-8");
  const lines = text.split("\n").filter((line) => line.trim().length > 0);
  if (lines.length === 0) {
    throw new SchemaError(`${filePath}: dataset file is empty`);
  }
  let header: DatasetHeader;
  try {
    header = JSON.parse(lines[0]);
  } catch (e) {
    throw new SchemaError(`${filePath}: header line is not JSON (${e})`);
  }
  if (header.format !== DATASET_FORMAT) {
    throw new SchemaError(`${filePath}: format ${JSON.stringify(header.format)} is not ${DATASET_FORMAT}`);
  }
  if (header.version !== DATASET_VERSION) {
    throw new SchemaError(`${filePath}: unsupported dataset version ${header.version}`);
  }
  if (!Number.isInteger(header.vocab_size) || header.vocab_size < 1) {
    throw new SchemaError(`${filePath}: header vocab_size must be a positive integer`);
  }

  const pieces: Piece[] = [];
  for (let i = 1; i < lines.length; i++) {
    let record: { piece_id?: string; ids?: unknown; labels?: unknown };
    try {
      record = JSON.parse(lines[i]);
    } catch (e) {
      throw new SchemaError(`${filePath}:${i + 1}: record is not JSON (${e})`);
    }
    const ids = record.ids;
    const labels = record.labels;
    if (!Array.isArray(ids) || !Array.isArray(labels)) {
      throw new SchemaError(`${filePath}:${i + 1}: ids and labels must be arrays`);
    }
    if (ids.length !== labels.length) {
      throw new SchemaError(
        `${filePath}:${i + 1}: ${ids.length} ids but ${labels.length} labels`
      );
    }
    for (const id of ids) {
      if (!Number.isInteger(id) || id < 0 || id >= header.vocab_size) {
        throw new SchemaError(`${filePath}:${i + 1}: token id ${id} outside vocabulary`);
      }
    }
    for (const label of labels) {
      if (label !== 0 && label !== 1) {
        throw new SchemaError(`${filePath}:${i + 1}: labels must be 0 or 1`);
      }
    }
    pieces.push({
      pieceId: String(record.piece_id ?? `piece-${i}`),
      ids: ids as number[],
      labels: labels as number[],
    });
  }
  return { header, pieces, path: filePath };
}

export interface Window {
  pieceIndex: number;
  ids: number[];
  labels: number[];
  /** First index within the window whose prediction this window owns. */
  ownedFrom: number;
}

/**
 * Split long pieces into overlapping windows (stride = cap / 2), labels
 * preserved. Ownership partitions every token into exactly one window so
 * evaluation counts each token once.
 */
export function windowPieces(pieces: Piece[], cap: number): Window[] {
  if (cap < 2) {
    throw new Error(`window cap must be >= 2, got ${cap}`);
  }
  const stride = Math.floor(cap / 2);
  const windows: Window[] = [];
  pieces.forEach((piece, pieceIndex) => {
    const length = piece.ids.length;
    if (length === 0) {
      return;
    }
    let start = 0;
    let prevEnd = 0;
    for (;;) {
      const end = Math.min(start + cap, length);
      windows.push({
        pieceIndex,
        ids: piece.ids.slice(start, end),
        labels: piece.labels.slice(start, end),
        ownedFrom: prevEnd - start,
      });
      if (end === length) {
        break;
      }
      prevEnd = end;
      start += stride;
    }
  });
  return windows;
}

/** Deterministic 3-fold piece partition; fold i is the test set of split i. */
export function threeFolds(pieceCount: number, seed: number): number[][] {
  const order = shuffle(
    Array.from({ length: pieceCount }, (_, i) => i),
    mulberry32(seed)
  );
  const folds: number[][] = [[], [], []];
  order.forEach((pieceIndex, position) => {
    folds[position % 3].push(pieceIndex);
  });
  return folds;
}
