/**
 * Command line front end.
 *
 *   train  --data dataset.jsonl --out results/
 *   sweep  --data experiment_out/ --out results/
 *
 * `train` writes metrics.json + manifest.json; `sweep` additionally writes
 * sweep.csv and one metrics file per merge count.
 */

import * as fs from "fs";
import * as path from "path";
import yargs from "yargs/yargs";

import { discoverDatasets, sweep, writeSweepCsv } from "./sweep";
import { ExperimentSpec, runManifest, trainAndEval } from "./train";

function specOptions(y: ReturnType<typeof yargs>) {
  return y
    .option("embedding", { type: "number", default: 32, describe: "embedding size" })
    .option("layers", { type: "number", default: 2 })
    .option("heads", { type: "number", default: 8 })
    .option("epochs", { type: "number", default: 6 })
    .option("batch", { type: "number", default: 16 })
    .option("window", { type: "number", default: 512, describe: "context cap (tokens)" })
    .option("lr", { type: "number", default: 1e-3 })
    .option("split-seed", { type: "number", default: 1 })
    .option("quiet", { type: "boolean", default: false });
}

function toSpec(argv: Record<string, unknown>): Omit<ExperimentSpec, "datasetPath"> {
  return {
    embeddingSize: argv.embedding as number,
    layers: argv.layers as number,
    heads: argv.heads as number,
    epochs: argv.epochs as number,
    batchSize: argv.batch as number,
    windowCap: argv.window as number,
    learningRate: argv.lr as number,
    splitSeed: argv["split-seed"] as number,
    quiet: argv.quiet as boolean,
  };
}

function writeJson(filePath: string, payload: unknown): void {
  fs.writeFileSync(filePath, JSON.stringify(payload, null, 2) + "\n", "utf-8");
}

async function main(): Promise<void> {
  await yargs(process.argv.slice(2))
    .command(
      "train",
      "train and evaluate on one dataset (3 splits)",
      (y) =>
        specOptions(y)
          .option("data", { type: "string", demandOption: true, describe: "dataset.jsonl" })
          .option("out", { type: "string", demandOption: true, describe: "output directory" }),
      async (argv) => {
        fs.mkdirSync(argv.out as string, { recursive: true });
        const record = await trainAndEval({
          ...toSpec(argv),
          datasetPath: argv.data as string,
        });
        writeJson(path.join(argv.out as string, "metrics.json"), record);
        writeJson(path.join(argv.out as string, "manifest.json"), runManifest(record));
        console.log(
          `mean F1 ${record.meanF1.toFixed(4)} (std ${record.stdF1.toFixed(4)}) -> ${argv.out}`
        );
      }
    )
    .command(
      "sweep",
      "train across every dataset_m*.jsonl in a directory",
      (y) =>
        specOptions(y)
          .option("data", { type: "string", demandOption: true, describe: "experiment directory" })
          .option("out", { type: "string", demandOption: true, describe: "output directory" }),
      async (argv) => {
        fs.mkdirSync(argv.out as string, { recursive: true });
        const entries = discoverDatasets(argv.data as string);
        const rows = await sweep(entries, toSpec(argv));
        writeSweepCsv(rows, path.join(argv.out as string, "sweep.csv"));
        for (const row of rows) {
          const stem = `metrics_m${String(row.merges).padStart(4, "0")}`;
          writeJson(path.join(argv.out as string, `${stem}.json`), row.record);
        }
        if (rows.length > 0) {
          writeJson(
            path.join(argv.out as string, "manifest.json"),
            runManifest(rows[0].record)
          );
        }
        console.log(`sweep over ${rows.length} merge counts -> ${argv.out}/sweep.csv`);
      }
    )
    .demandCommand(1)
    .strict()
    .fail((message, error) => {
      console.error(`trainer: ${message ?? error?.message}`);
      process.exit(2);
    })
    .parseAsync();
}

main().catch((error) => {
  console.error(`trainer: ${error?.message ?? error}`);
  process.exit(1);
});
