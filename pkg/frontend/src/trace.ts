/** EditTrace wire types, mirroring schemas/edit_trace.schema.json (version 1).
 *
 * The UI never re-derives model quantities: every number rendered comes out
 * of a trace the backend produced.
 */

export const SCHEMA_VERSION = 1;

export const VARIANTS = [
  "edit-default",
  "edit-1-rerank",
  "edit-n-rerank",
  "edit-merge",
] as const;

export type Variant = (typeof VARIANTS)[number];

export interface WeightedWord {
  word: string;
  weight: number;
}

export interface PrototypeInfo {
  pair_id: number;
  context: string;
  response: string;
  retrieval_score: number;
}

export interface TraceCandidate {
  response: string;
  origin: "edited" | "retrieved";
  score: number | null;
}

export interface EditTrace {
  schema_version: number;
  variant: Variant;
  context: string;
  context_tokens: string[];
  response: string;
  fallback: boolean;
  prototype: PrototypeInfo | null;
  insertions: WeightedWord[];
  deletions: WeightedWord[];
  candidates: TraceCandidate[];
  timings_ms: Record<string, number>;
}

function isWeightedWordList(value: unknown): value is WeightedWord[] {
  return (
    Array.isArray(value) &&
    value.every(
      (entry) =>
        typeof entry === "object" &&
        entry !== null &&
        typeof (entry as WeightedWord).word === "string" &&
        typeof (entry as WeightedWord).weight === "number",
    )
  );
}

/** Structural validation; returns a list of problems, empty when valid. */
export function validateTrace(data: unknown): string[] {
  const problems: string[] = [];
  if (typeof data !== "object" || data === null) {
    return ["trace is not an object"];
  }
  const t = data as Record<string, unknown>;
  if (t.schema_version !== SCHEMA_VERSION) {
    problems.push(`unsupported schema_version ${String(t.schema_version)}`);
  }
  if (!VARIANTS.includes(t.variant as Variant)) {
    problems.push(`unknown variant ${String(t.variant)}`);
  }
  if (typeof t.context !== "string") problems.push("context must be a string");
  if (!Array.isArray(t.context_tokens)) problems.push("context_tokens must be an array");
  if (typeof t.response !== "string") problems.push("response must be a string");
  if (typeof t.fallback !== "boolean") problems.push("fallback must be a boolean");
  if (t.prototype !== null) {
    const p = t.prototype as Record<string, unknown> | null;
    if (
      typeof p !== "object" ||
      p === null ||
      typeof p.pair_id !== "number" ||
      typeof p.context !== "string" ||
      typeof p.response !== "string" ||
      typeof p.retrieval_score !== "number"
    ) {
      problems.push("prototype must be null or {pair_id, context, response, retrieval_score}");
    }
  }
  if (!isWeightedWordList(t.insertions)) problems.push("insertions must be weighted words");
  if (!isWeightedWordList(t.deletions)) problems.push("deletions must be weighted words");
  if (
    !Array.isArray(t.candidates) ||
    !t.candidates.every((c) => {
      const cand = c as TraceCandidate;
      return (
        typeof cand === "object" &&
        cand !== null &&
        typeof cand.response === "string" &&
        (cand.origin === "edited" || cand.origin === "retrieved") &&
        (cand.score === null || typeof cand.score === "number")
      );
    })
  ) {
    problems.push("candidates must be {response, origin, score} entries");
  }
  if (
    typeof t.timings_ms !== "object" ||
    t.timings_ms === null ||
    !Object.values(t.timings_ms as Record<string, unknown>).every((v) => typeof v === "number")
  ) {
    problems.push("timings_ms must map stage names to numbers");
  }
  return problems;
}
