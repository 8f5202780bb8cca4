/** Wiring: DOM controls -> state transitions -> re-render. */

import { buildChatRequest, sendChat } from "./api.js";
import { renderComparePanels, renderErrorBanner, renderTurn } from "./render.js";
import {
  AppState,
  ChatTurn,
  CompareResult,
  compareFinished,
  compareOrder,
  initialState,
  sendFailed,
  sendStarted,
  sendSucceeded,
  setK,
  setPendingInput,
  setVariant,
} from "./state.js";
import { Variant, VARIANTS } from "./trace.js";

const SERVICE_BASE =
  new URLSearchParams(window.location.search).get("service") ?? "http://127.0.0.1:8472";

let state: AppState = initialState();

function byId<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
}

function render(): void {
  const log = byId<HTMLDivElement>("chat-log");
  log.replaceChildren(...state.turns.map(renderTurn));

  const compareBox = byId<HTMLDivElement>("compare-box");
  compareBox.replaceChildren();
  if (state.compare) {
    compareBox.appendChild(renderComparePanels(state.compare.message, state.compare.results));
  }

  const errorBox = byId<HTMLDivElement>("error-box");
  errorBox.replaceChildren();
  if (state.error) {
    errorBox.appendChild(renderErrorBanner(state.error));
  }

  const input = byId<HTMLInputElement>("message-input");
  if (input.value !== state.pendingInput) input.value = state.pendingInput;
  byId<HTMLButtonElement>("send-button").disabled = state.busy;
  byId<HTMLButtonElement>("compare-button").disabled = state.busy;
  log.scrollTop = log.scrollHeight;
}

function update(next: AppState): void {
  state = next;
  render();
}

async function onSend(): Promise<void> {
  const text = state.pendingInput.trim();
  if (!text || state.busy) return;
  update(sendStarted(state));
  const request = buildChatRequest(SERVICE_BASE, text, state.variant, state.k);
  try {
    const trace = await sendChat(request);
    const turn: ChatTurn = { message: text, variant: state.variant, trace };
    update(sendSucceeded(state, turn));
  } catch (err) {
    update(sendFailed(state, err instanceof Error ? err.message : String(err)));
  }
}

async function onCompare(): Promise<void> {
  const text = state.pendingInput.trim();
  if (!text || state.busy) return;
  update(sendStarted(state));
  const results: CompareResult[] = await Promise.all(
    compareOrder().map(async (variant): Promise<CompareResult> => {
      try {
        const trace = await sendChat(buildChatRequest(SERVICE_BASE, text, variant, state.k));
        return { variant, trace };
      } catch (err) {
        return { variant, error: err instanceof Error ? err.message : String(err) };
      }
    }),
  );
  update(compareFinished(state, text, results));
}

function bindControls(): void {
  const variantSelect = byId<HTMLSelectElement>("variant-select");
  for (const variant of VARIANTS) {
    const option = document.createElement("option");
    option.value = variant;
    option.textContent = variant;
    variantSelect.appendChild(option);
  }
  variantSelect.value = state.variant;
  variantSelect.addEventListener("change", () =>
    update(setVariant(state, variantSelect.value as Variant)),
  );

  const kInput = byId<HTMLInputElement>("k-input");
  kInput.value = String(state.k);
  kInput.addEventListener("change", () => update(setK(state, Number(kInput.value))));

  const input = byId<HTMLInputElement>("message-input");
  input.addEventListener("input", () => {
    state = setPendingInput(state, input.value); // no re-render while typing
  });
  input.addEventListener("keydown", (event) => {
    if (event.key === "Enter") void onSend();
  });
  byId<HTMLButtonElement>("send-button").addEventListener("click", () => void onSend());
  byId<HTMLButtonElement>("compare-button").addEventListener("click", () => void onCompare());
}

bindControls();
render();
