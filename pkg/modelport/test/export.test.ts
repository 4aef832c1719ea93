import fs from "node:fs";
import os from "node:os";
import path from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { CASES_PER_MODEL, REGISTRY_FORMAT, exportArtifacts } from "../src/export.js";
import { MODELS, buildWeights, forward } from "../src/models.js";
import { generateInput } from "../src/pixels.js";

let outDir: string;

beforeAll(() => {
  outDir = fs.mkdtempSync(path.join(os.tmpdir(), "modelport-"));
  exportArtifacts(outDir);
});

afterAll(() => {
  fs.rmSync(outDir, { recursive: true, force: true });
});

describe("exported registry", () => {
  it("lists every model with a well-formed entry", () => {
    const registry = JSON.parse(fs.readFileSync(path.join(outDir, "registry.json"), "utf8"));
    expect(registry.format).toBe(REGISTRY_FORMAT);
    expect(registry.models).toHaveLength(MODELS.length);
    for (const entry of registry.models) {
      const def = MODELS.find((m) => m.id === entry.id);
      expect(def).toBeDefined();
      expect(entry.backend).toBe("onnx");
      expect(entry.input_size).toEqual(def!.inputSize);
      expect(entry.embedding_dim).toBe(def!.embeddingDim);
      expect(["rgb", "bgr"]).toContain(entry.preprocessing.channel_order);
      expect(entry.preprocessing.mean).toHaveLength(3);
      expect(entry.preprocessing.std).toHaveLength(3);
      expect(entry.preprocessing.std.every((s: number) => s !== 0)).toBe(true);
      // weights are referenced relative to the registry file and must exist
      expect(path.isAbsolute(entry.weights)).toBe(false);
      expect(fs.existsSync(path.join(outDir, entry.weights))).toBe(true);
    }
  });

  it("names distinct weight files per model", () => {
    const registry = JSON.parse(fs.readFileSync(path.join(outDir, "registry.json"), "utf8"));
    const files = registry.models.map((m: { weights: string }) => m.weights);
    expect(new Set(files).size).toBe(files.length);
  });
});

describe("exported graphs", () => {
  it("start with the expected protobuf preamble", () => {
    for (const m of MODELS) {
      const bytes = fs.readFileSync(path.join(outDir, `${m.id}.onnx`));
      // field 1 varint (ir_version 7), then field 2 string "modelport"
      expect(bytes[0]).toBe(0x08);
      expect(bytes[1]).toBe(0x07);
      expect(bytes.includes(Buffer.from("modelport", "utf8"))).toBe(true);
      expect(bytes.includes(Buffer.from("embedding", "utf8"))).toBe(true);
    }
  });

  it("are rewritten byte-identically on a second export", () => {
    const first = MODELS.map((m) => fs.readFileSync(path.join(outDir, `${m.id}.onnx`)));
    exportArtifacts(outDir);
    MODELS.forEach((m, i) => {
      const again = fs.readFileSync(path.join(outDir, `${m.id}.onnx`));
      expect(again.equals(first[i]!)).toBe(true);
    });
  });
});

describe("parity fixtures", () => {
  it("hold reference embeddings that recompute exactly", () => {
    for (const m of MODELS) {
      const fixture = JSON.parse(
        fs.readFileSync(path.join(outDir, "fixtures", `${m.id}.json`), "utf8"),
      );
      expect(fixture.model).toBe(m.id);
      expect(fixture.cases).toHaveLength(CASES_PER_MODEL);
      const weights = buildWeights(m);
      for (const c of fixture.cases) {
        expect(c.embedding).toHaveLength(m.embeddingDim);
        const pixels = generateInput(c.stream_id, m.inputSize[0], m.inputSize[1]);
        const recomputed = Array.from(forward(m, weights, pixels));
        expect(c.embedding).toEqual(recomputed);
      }
    }
  });

  it("use distinct stream ids across all cases", () => {
    const ids: string[] = [];
    for (const m of MODELS) {
      const fixture = JSON.parse(
        fs.readFileSync(path.join(outDir, "fixtures", `${m.id}.json`), "utf8"),
      );
      ids.push(...fixture.cases.map((c: { stream_id: string }) => c.stream_id));
    }
    expect(new Set(ids).size).toBe(ids.length);
  });
});
