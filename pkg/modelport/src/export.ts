// Writes everything the scoring package consumes: one .onnx file per
// model, a registry file describing them, and parity fixtures holding
// reference embeddings for regenerated inputs.

import fs from "node:fs";
import path from "node:path";

import { MODELS, ModelDef, buildGraph, buildWeights, forward } from "./models.js";
import { encodeModel } from "./onnx.js";
import { generateInput } from "./pixels.js";

export const REGISTRY_FORMAT = "fcb-registry/1";
export const CASES_PER_MODEL = 3;

export interface ExportResult {
  registryPath: string;
  modelPaths: string[];
  fixturePaths: string[];
}

function registryEntry(def: ModelDef, weightsFile: string) {
  return {
    id: def.id,
    backend: "onnx",
    input_size: def.inputSize,
    embedding_dim: def.embeddingDim,
    preprocessing: {
      scale: def.preprocessing.scale,
      mean: def.preprocessing.mean,
      std: def.preprocessing.std,
      channel_order: def.preprocessing.channel_order,
      layout: def.preprocessing.layout,
    },
    weights: weightsFile,
  };
}

function fixturePayload(def: ModelDef, weights: ReturnType<typeof buildWeights>) {
  const cases = [];
  for (let k = 0; k < CASES_PER_MODEL; k++) {
    const streamId = `parity/${def.id}/${k}`;
    const pixels = generateInput(streamId, def.inputSize[0], def.inputSize[1]);
    const embedding = Array.from(forward(def, weights, pixels));
    cases.push({ stream_id: streamId, embedding });
  }
  return {
    model: def.id,
    input: {
      generator: "splitmix64-pixels",
      seed: 0,
      note: "input(stream_id) = one draw below 256 per channel, row major, RGB",
    },
    cases,
  };
}

export function exportArtifacts(outDir: string): ExportResult {
  const fixturesDir = path.join(outDir, "fixtures");
  fs.mkdirSync(fixturesDir, { recursive: true });

  const modelPaths: string[] = [];
  const fixturePaths: string[] = [];
  const entries = [];

  for (const def of MODELS) {
    const weights = buildWeights(def);
    const graphBytes = encodeModel(buildGraph(def, weights));
    const weightsFile = `${def.id}.onnx`;
    const modelPath = path.join(outDir, weightsFile);
    fs.writeFileSync(modelPath, graphBytes);
    modelPaths.push(modelPath);
    entries.push(registryEntry(def, weightsFile));

    const fixturePath = path.join(fixturesDir, `${def.id}.json`);
    fs.writeFileSync(fixturePath, JSON.stringify(fixturePayload(def, weights), null, 2) + "\n");
    fixturePaths.push(fixturePath);
  }

  const registryPath = path.join(outDir, "registry.json");
  const registry = { format: REGISTRY_FORMAT, models: entries };
  fs.writeFileSync(registryPath, JSON.stringify(registry, null, 2) + "\n");

  return { registryPath, modelPaths, fixturePaths };
}
