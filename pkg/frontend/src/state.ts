/** Application state and its pure transitions.
 *
 * The rendered UI is a function of this state plus the pending input; event
 * handlers only produce new states and re-render.
 */

import { EditTrace, Variant, VARIANTS } from "./trace.js";

export interface ChatTurn {
  message: string;
  variant: Variant;
  trace: EditTrace;
}

export interface CompareResult {
  variant: Variant;
  trace?: EditTrace;
  error?: string;
}

export interface ComparePanel {
  message: string;
  results: CompareResult[];
}

export interface AppState {
  turns: ChatTurn[];
  compare: ComparePanel | null;
  error: string | null;
  pendingInput: string;
  variant: Variant;
  k: number;
  busy: boolean;
}

export function initialState(): AppState {
  return {
    turns: [],
    compare: null,
    error: null,
    pendingInput: "",
    variant: "edit-n-rerank",
    k: 5,
    busy: false,
  };
}

export function sendStarted(state: AppState): AppState {
  return { ...state, busy: true, error: null };
}

/** A successful turn clears the input box. */
export function sendSucceeded(state: AppState, turn: ChatTurn): AppState {
  return {
    ...state,
    turns: [...state.turns, turn],
    pendingInput: "",
    busy: false,
    error: null,
  };
}

/** A failure keeps the input so the user can retry or edit. */
export function sendFailed(state: AppState, message: string): AppState {
  return { ...state, busy: false, error: message };
}

export function compareFinished(
  state: AppState,
  message: string,
  results: CompareResult[],
): AppState {
  return { ...state, busy: false, compare: { message, results } };
}

export function setVariant(state: AppState, variant: Variant): AppState {
  return { ...state, variant };
}

export function setK(state: AppState, k: number): AppState {
  return { ...state, k: Math.max(1, Math.floor(k)) };
}

export function setPendingInput(state: AppState, text: string): AppState {
  return { ...state, pendingInput: text };
}

export function compareOrder(): readonly Variant[] {
  return VARIANTS; // panel order is fixed regardless of response arrival order
}
