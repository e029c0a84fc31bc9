/**
 * Per-token binary tagger: a small Transformer encoder built directly on
 * tf ops so every weight comes from a seeded initializer.
 *
 * Layout: one-hot embedding matmul (the gather gradient is unavailable on
 * the WASM backend) + learned positions, then `layers` pre-norm blocks of
 * multi-head self-attention and a 2x-wide ReLU MLP, then layer norm and a
 * scalar logit head per token.
 */

import * as tf from "@tensorflow/tfjs";

export interface ModelConfig {
  vocabSize: number;
  embeddingSize: number;
  layers: number;
  heads: number;
  maxLength: number;
  seed: number;
}

interface Block {
  ln1Gain: tf.Variable;
  ln1Bias: tf.Variable;
  wq: tf.Variable;
  wk: tf.Variable;
  wv: tf.Variable;
  wo: tf.Variable;
  ln2Gain: tf.Variable;
  ln2Bias: tf.Variable;
  w1: tf.Variable;
  b1: tf.Variable;
  w2: tf.Variable;
  b2: tf.Variable;
}

function layerNorm(x: tf.Tensor, gain: tf.Variable, bias: tf.Variable): tf.Tensor {
  const { mean, variance } = tf.moments(x, -1, true);
  return x.sub(mean).div(variance.add(1e-5).sqrt()).mul(gain).add(bias);
}

export class TransformerTagger {
  readonly config: ModelConfig;
  readonly variables: tf.Variable[] = [];
  private readonly embedding: tf.Variable;
  private readonly positions: tf.Variable;
  private readonly blocks: Block[] = [];
  private readonly lnFinalGain: tf.Variable;
  private readonly lnFinalBias: tf.Variable;
  private readonly wOut: tf.Variable;
  private readonly bOut: tf.Variable;
  private nextSeed: number;

  constructor(config: ModelConfig) {
    if (config.embeddingSize % config.heads !== 0) {
      throw new Error(
        `embedding size ${config.embeddingSize} not divisible by ${config.heads} heads`
      );
    }
    this.config = config;
    this.nextSeed = config.seed;
    const e = config.embeddingSize;

    this.embedding = this.normal([config.vocabSize, e]);
    this.positions = this.normal([config.maxLength, e]);
    for (let i = 0; i < config.layers; i++) {
      this.blocks.push({
        ln1Gain: this.constant([e], 1),
        ln1Bias: this.constant([e], 0),
        wq: this.glorot([e, e]),
        wk: this.glorot([e, e]),
        wv: this.glorot([e, e]),
        wo: this.glorot([e, e]),
        ln2Gain: this.constant([e], 1),
        ln2Bias: this.constant([e], 0),
        w1: this.glorot([e, 2 * e]),
        b1: this.constant([2 * e], 0),
        w2: this.glorot([2 * e, e]),
        b2: this.constant([e], 0),
      });
    }
    this.lnFinalGain = this.constant([e], 1);
    this.lnFinalBias = this.constant([e], 0);
    this.wOut = this.glorot([e, 1]);
    this.bOut = this.constant([1], 0);
  }

  private track(variable: tf.Variable): tf.Variable {
    this.variables.push(variable);
    return variable;
  }

  private normal(shape: number[]): tf.Variable {
    return this.track(tf.variable(tf.randomNormal(shape, 0, 0.02, "float32", this.nextSeed++)));
  }

  private glorot(shape: number[]): tf.Variable {
    const init = tf.initializers.glorotUniform({ seed: this.nextSeed++ });
    return this.track(tf.variable(init.apply(shape, "float32") as tf.Tensor));
  }

  private constant(shape: number[], value: number): tf.Variable {
    return this.track(tf.variable(tf.fill(shape, value, "float32")));
  }

  /** Token logits, shape [batch, length]. mask: 1 = real token, 0 = pad. */
  logits(ids: tf.Tensor2D, mask: tf.Tensor2D): tf.Tensor2D {
    const [batch, length] = ids.shape;
    const e = this.config.embeddingSize;
    const heads = this.config.heads;
    const headDim = e / heads;

    const hot = tf.oneHot(ids.reshape([batch * length]), this.config.vocabSize).cast("float32");
    let x = tf
      .matMul(hot, this.embedding)
      .reshape([batch, length, e])
      .add(this.positions.slice([0, 0], [length, e]));
    // padded keys get a large negative bias before softmax
    const attentionBias = mask.reshape([batch, 1, 1, length]).sub(1).mul(1e9);

    for (const block of this.blocks) {
      const normed = layerNorm(x, block.ln1Gain, block.ln1Bias).reshape([batch * length, e]);
      const toHeads = (w: tf.Variable) =>
        tf.matMul(normed, w).reshape([batch, length, heads, headDim]).transpose([0, 2, 1, 3]);
      const scores = tf
        .matMul(toHeads(block.wq), toHeads(block.wk), false, true)
        .div(Math.sqrt(headDim))
        .add(attentionBias);
      const context = tf
        .matMul(tf.softmax(scores, -1), toHeads(block.wv))
        .transpose([0, 2, 1, 3])
        .reshape([batch * length, e]);
      x = tf.matMul(context, block.wo).reshape([batch, length, e]).add(x);

      const normed2 = layerNorm(x, block.ln2Gain, block.ln2Bias).reshape([batch * length, e]);
      const hidden = tf.matMul(normed2, block.w1).add(block.b1).relu();
      x = tf.matMul(hidden, block.w2).add(block.b2).reshape([batch, length, e]).add(x);
    }
    const final = layerNorm(x, this.lnFinalGain, this.lnFinalBias).reshape([batch * length, e]);
    return tf.matMul(final, this.wOut).add(this.bOut).reshape([batch, length]);
  }

  /** One weighted-BCE optimizer step; returns the scalar loss. */
  trainStep(
    optimizer: tf.Optimizer,
    ids: tf.Tensor2D,
    labels: tf.Tensor2D,
    mask: tf.Tensor2D,
    positiveWeight: number
  ): number {
    const { value, grads } = tf.variableGrads(
      () =>
        tf.tidy(() => {
          const logits = this.logits(ids, mask);
          const weights = labels.mul(positiveWeight - 1).add(1).mul(mask);
          return tf.losses.sigmoidCrossEntropy(labels, logits, weights).asScalar();
        }),
      this.variables
    );
    optimizer.applyGradients(grads);
    const loss = value.dataSync()[0];
    value.dispose();
    Object.values(grads).forEach((g) => g.dispose());
    return loss;
  }

  /** Per-token positive probabilities, flattened row-major [batch, length]. */
  probabilities(ids: tf.Tensor2D, mask: tf.Tensor2D): Float32Array {
    return tf.tidy(() => tf.sigmoid(this.logits(ids, mask)).dataSync() as Float32Array);
  }

  dispose(): void {
    this.variables.forEach((v) => v.dispose());
  }
}
