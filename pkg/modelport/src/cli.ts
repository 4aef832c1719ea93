import path from "node:path";
import { fileURLToPath } from "node:url";
import { parseArgs } from "node:util";

import { exportArtifacts } from "./export.js";

const here = path.dirname(fileURLToPath(import.meta.url));
const defaultOut = path.resolve(here, "..", "..", "models");

const { values } = parseArgs({
  options: {
    out: { type: "string", default: defaultOut },
  },
});

const result = exportArtifacts(values.out!);
console.log(`wrote ${result.registryPath}`);
for (const p of [...result.modelPaths, ...result.fixturePaths]) {
  console.log(`wrote ${p}`);
}
