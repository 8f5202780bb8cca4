/** Pure DOM builders for chat turns, the prototype diff view, and panels.
 *
 * Rendering convention for the prototype view: insertion words (current
 * context words the prototype context lacks) are underlined; deletion words
 * (prototype-context words the current context lacks) are struck through.
 * Both are shaded by their attention weight — more weight, stronger shade.
 */

import { EditTrace, TraceCandidate, WeightedWord } from "./trace.js";
import { ChatTurn, CompareResult } from "./state.js";

/** Background opacity grows linearly with weight; monotone by construction. */
export function weightAlpha(weight: number): number {
  const clamped = Math.max(0, Math.min(1, weight));
  return 0.15 + 0.8 * clamped;
}

export function insertionShade(weight: number): string {
  return `rgba(46, 160, 67, ${weightAlpha(weight).toFixed(3)})`;
}

export function deletionShade(weight: number): string {
  return `rgba(248, 81, 73, ${weightAlpha(weight).toFixed(3)})`;
}

function el(tag: string, className?: string, text?: string): HTMLElement {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function weightMap(entries: WeightedWord[]): Map<string, number> {
  const map = new Map<string, number>();
  for (const entry of entries) map.set(entry.word, entry.weight);
  return map;
}

/** A token strip where flagged words carry diff styling and weight shading. */
function renderTokens(
  tokens: string[],
  flagged: Map<string, number>,
  kind: "insertion" | "deletion",
): HTMLElement {
  const line = el("div", "token-line");
  for (const token of tokens) {
    const span = el("span", "token", token);
    if (flagged.has(token)) {
      const weight = flagged.get(token) ?? 0;
      span.className = `token ${kind}`;
      span.style.backgroundColor =
        kind === "insertion" ? insertionShade(weight) : deletionShade(weight);
      span.title = `${kind} weight ${weight.toFixed(3)}`;
    }
    line.appendChild(span);
  }
  return line;
}

export function renderPrototypeView(trace: EditTrace): HTMLElement {
  const box = el("div", "prototype-view");
  if (trace.prototype === null) {
    box.appendChild(el("div", "fallback-note", "no prototype retrieved — fallback response"));
    return box;
  }
  const insertions = weightMap(trace.insertions);
  const deletions = weightMap(trace.deletions);

  const ctxRow = el("div", "diff-row");
  ctxRow.appendChild(el("div", "diff-label", "context"));
  ctxRow.appendChild(renderTokens(trace.context_tokens, insertions, "insertion"));
  box.appendChild(ctxRow);

  const protoRow = el("div", "diff-row");
  protoRow.appendChild(el("div", "diff-label", "prototype context"));
  protoRow.appendChild(renderTokens(trace.prototype.context.split(" "), deletions, "deletion"));
  box.appendChild(protoRow);

  const respRow = el("div", "diff-row");
  respRow.appendChild(el("div", "diff-label", "prototype response"));
  respRow.appendChild(el("div", "proto-response", trace.prototype.response));
  box.appendChild(respRow);

  const meta = el(
    "div",
    "proto-meta",
    `pair #${trace.prototype.pair_id} · retrieval score ${trace.prototype.retrieval_score.toFixed(3)}`,
  );
  box.appendChild(meta);
  return box;
}

export function renderCandidateTable(candidates: TraceCandidate[]): HTMLElement {
  const table = el("table", "candidates");
  const head = el("tr");
  for (const title of ["#", "origin", "score", "response"]) {
    head.appendChild(el("th", undefined, title));
  }
  table.appendChild(head);
  candidates.forEach((cand, i) => {
    const row = el("tr", `origin-${cand.origin}`);
    row.appendChild(el("td", undefined, String(i + 1)));
    row.appendChild(el("td", undefined, cand.origin));
    row.appendChild(el("td", undefined, cand.score === null ? "—" : cand.score.toFixed(3)));
    row.appendChild(el("td", undefined, cand.response));
    table.appendChild(row);
  });
  return table;
}

export function renderTurn(turn: ChatTurn): HTMLElement {
  const box = el("div", "turn");
  const user = el("div", "user-message");
  user.appendChild(el("span", "speaker", "you"));
  user.appendChild(el("span", undefined, turn.message));
  box.appendChild(user);

  const bot = el("div", "bot-message");
  bot.appendChild(el("span", "speaker", turn.trace.variant));
  bot.appendChild(el("span", "response-text", turn.trace.response));
  box.appendChild(bot);

  box.appendChild(renderPrototypeView(turn.trace));
  if (turn.trace.candidates.length > 0) {
    box.appendChild(renderCandidateTable(turn.trace.candidates));
  }
  const total = turn.trace.timings_ms["total"];
  if (total !== undefined) {
    box.appendChild(el("div", "timing", `${total.toFixed(0)} ms`));
  }
  return box;
}

export function renderErrorBanner(message: string): HTMLElement {
  return el("div", "error-banner", message);
}

/** One panel per variant, in fixed order; failures render independently. */
export function renderComparePanels(message: string, results: CompareResult[]): HTMLElement {
  const wrap = el("div", "compare");
  wrap.appendChild(el("div", "compare-title", `side by side: "${message}"`));
  const row = el("div", "compare-row");
  for (const result of results) {
    const panel = el("div", "compare-panel");
    panel.appendChild(el("div", "compare-variant", result.variant));
    if (result.trace) {
      panel.appendChild(el("div", "response-text", result.trace.response));
      panel.appendChild(renderPrototypeView(result.trace));
    } else {
      panel.appendChild(renderErrorBanner(result.error ?? "request failed"));
    }
    row.appendChild(panel);
  }
  wrap.appendChild(row);
  return wrap;
}
