// Deterministic reference embedding models. Weights are drawn from named
// splitmix64 streams, so rebuilding the export always reproduces the same
// graph bytes. The forward pass here is the reference implementation the
// parity fixtures are computed with.

import { GraphSpec, attrInt, attrInts } from "./onnx.js";
import { stream } from "./rng.js";

export interface Preprocessing {
  scale: number;
  mean: [number, number, number];
  std: [number, number, number];
  channel_order: "rgb" | "bgr";
  layout: "nchw";
}

export interface ModelDef {
  id: string;
  inputSize: [number, number]; // width, height
  pool: number; // AveragePool kernel == stride
  hidden: number;
  embeddingDim: number;
  preprocessing: Preprocessing;
}

export const MODELS: readonly ModelDef[] = [
  {
    id: "refnet32",
    inputSize: [32, 32],
    pool: 4,
    hidden: 96,
    embeddingDim: 128,
    preprocessing: {
      scale: 1 / 255,
      mean: [0.5, 0.5, 0.5],
      std: [0.5, 0.5, 0.5],
      channel_order: "rgb",
      layout: "nchw",
    },
  },
  {
    id: "refnet64",
    inputSize: [64, 64],
    pool: 8,
    hidden: 128,
    embeddingDim: 256,
    preprocessing: {
      scale: 1 / 127.5,
      mean: [1, 1, 1],
      std: [1, 1, 1],
      channel_order: "bgr",
      layout: "nchw",
    },
  },
];

export interface ModelWeights {
  w1: Float32Array; // [hidden, flat]
  b1: Float32Array; // [hidden]
  w2: Float32Array; // [dim, hidden]
  b2: Float32Array; // [dim]
}

function drawTensor(modelId: string, tensorName: string, size: number, bound: number): Float32Array {
  const rng = stream(0n, `weights/${modelId}/${tensorName}`);
  const out = new Float32Array(size);
  for (let i = 0; i < size; i++) {
    out[i] = Math.fround((2 * rng.nextUnit() - 1) * bound);
  }
  return out;
}

export function flatSize(def: ModelDef): number {
  const [w, h] = def.inputSize;
  return 3 * (w / def.pool) * (h / def.pool);
}

export function buildWeights(def: ModelDef): ModelWeights {
  const flat = flatSize(def);
  const bound1 = Math.sqrt(6 / (flat + def.hidden));
  const bound2 = Math.sqrt(6 / (def.hidden + def.embeddingDim));
  return {
    w1: drawTensor(def.id, "w1", def.hidden * flat, bound1),
    b1: drawTensor(def.id, "b1", def.hidden, 0.05),
    w2: drawTensor(def.id, "w2", def.embeddingDim * def.hidden, bound2),
    b2: drawTensor(def.id, "b2", def.embeddingDim, 0.05),
  };
}

export function buildGraph(def: ModelDef, weights: ModelWeights): GraphSpec {
  const [w, h] = def.inputSize;
  const flat = flatSize(def);
  return {
    name: def.id,
    nodes: [
      {
        opType: "AveragePool",
        name: "pool",
        inputs: ["input"],
        outputs: ["pooled"],
        attributes: [
          attrInts("kernel_shape", [def.pool, def.pool]),
          attrInts("strides", [def.pool, def.pool]),
        ],
      },
      {
        opType: "Flatten",
        name: "flatten",
        inputs: ["pooled"],
        outputs: ["flat"],
        attributes: [attrInt("axis", 1)],
      },
      {
        opType: "Gemm",
        name: "fc1",
        inputs: ["flat", "w1", "b1"],
        outputs: ["h1"],
        attributes: [attrInt("transB", 1)],
      },
      { opType: "Relu", name: "act1", inputs: ["h1"], outputs: ["h1a"] },
      {
        opType: "Gemm",
        name: "fc2",
        inputs: ["h1a", "w2", "b2"],
        outputs: ["embedding"],
        attributes: [attrInt("transB", 1)],
      },
    ],
    initializers: [
      { name: "w1", dims: [def.hidden, flat], data: weights.w1 },
      { name: "b1", dims: [def.hidden], data: weights.b1 },
      { name: "w2", dims: [def.embeddingDim, def.hidden], data: weights.w2 },
      { name: "b2", dims: [def.embeddingDim], data: weights.b2 },
    ],
    inputs: [{ name: "input", dims: [1, 3, h, w] }],
    outputs: [{ name: "embedding", dims: [1, def.embeddingDim] }],
  };
}

// Reference forward pass over one uint8 RGB image (row major, h*w*3).
// Mirrors the consumer exactly: channel swap, x*scale, (x-mean)/std,
// NCHW layout, AveragePool, Flatten, Gemm/Relu/Gemm.
export function forward(def: ModelDef, weights: ModelWeights, pixels: Uint8Array): Float64Array {
  const [w, h] = def.inputSize;
  if (pixels.length !== w * h * 3) {
    throw new RangeError(`expected ${w * h * 3} pixel values, got ${pixels.length}`);
  }
  const pre = def.preprocessing;
  const scale = Math.fround(pre.scale);

  // preprocessed CHW tensor
  const chw = new Float64Array(3 * h * w);
  for (let y = 0; y < h; y++) {
    for (let x = 0; x < w; x++) {
      for (let c = 0; c < 3; c++) {
        const source = pre.channel_order === "bgr" ? 2 - c : c;
        const value = pixels[(y * w + x) * 3 + source]!;
        const scaled = Math.fround(value * scale);
        chw[c * h * w + y * w + x] =
          (scaled - Math.fround(pre.mean[c]!)) / Math.fround(pre.std[c]!);
      }
    }
  }

  const k = def.pool;
  const ph = h / k;
  const pw = w / k;
  const flat = new Float64Array(3 * ph * pw);
  for (let c = 0; c < 3; c++) {
    for (let py = 0; py < ph; py++) {
      for (let px = 0; px < pw; px++) {
        let total = 0;
        for (let dy = 0; dy < k; dy++) {
          for (let dx = 0; dx < k; dx++) {
            total += chw[c * h * w + (py * k + dy) * w + (px * k + dx)]!;
          }
        }
        flat[c * ph * pw + py * pw + px] = total / (k * k);
      }
    }
  }

  const h1 = new Float64Array(def.hidden);
  const flatDim = flat.length;
  for (let row = 0; row < def.hidden; row++) {
    let total = weights.b1[row]!;
    for (let col = 0; col < flatDim; col++) {
      total += weights.w1[row * flatDim + col]! * flat[col]!;
    }
    h1[row] = Math.max(total, 0);
  }

  const out = new Float64Array(def.embeddingDim);
  for (let row = 0; row < def.embeddingDim; row++) {
    let total = weights.b2[row]!;
    for (let col = 0; col < def.hidden; col++) {
      total += weights.w2[row * def.hidden + col]! * h1[col]!;
    }
    out[row] = total;
  }
  return out;
}
