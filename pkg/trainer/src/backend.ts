/**
 * TensorFlow.js backend selection.
 *
 * The WASM backend is an order of magnitude faster than the pure-JS CPU
 * backend for this workload; threads are pinned to 1 so repeated runs
 * accumulate floats in the same order. Falls back to the JS backend when the
 * WASM binary cannot be loaded.
 */

import * as path from "path";
import * as tf from "@tensorflow/tfjs";

let ready: Promise<string> | null = null;

export function initBackend(): Promise<string> {
  if (ready === null) {
    ready = (async () => {
      try {
        const wasm = await import("@tensorflow/tfjs-backend-wasm");
        wasm.setWasmPaths(
          path.join(path.dirname(require.resolve("@tensorflow/tfjs-backend-wasm")), path.sep)
        );
        wasm.setThreadsCount(1);
        if (await tf.setBackend("wasm")) {
          await tf.ready();
          return tf.getBackend();
        }
      } catch {
        // fall through to the JS kernel set
      }
      await tf.setBackend("cpu");
      await tf.ready();
      return tf.getBackend();
    })();
  }
  return ready;
}
