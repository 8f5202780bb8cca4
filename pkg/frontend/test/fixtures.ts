import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

const here = dirname(fileURLToPath(import.meta.url));

/** The recorded EditTrace produced by the live pipeline (schema version 1). */
export function loadFixture(): Record<string, unknown> {
  const path = join(here, "..", "..", "fixtures", "trace.json");
  return JSON.parse(readFileSync(path, "utf-8")) as Record<string, unknown>;
}
