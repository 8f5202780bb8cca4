import assert from "node:assert/strict";
import { test } from "node:test";

import {
  compareFinished,
  compareOrder,
  initialState,
  sendFailed,
  sendStarted,
  sendSucceeded,
  setK,
  setPendingInput,
  setVariant,
} from "../src/state.js";
import type { ChatTurn } from "../src/state.js";
import type { EditTrace } from "../src/trace.js";
import { loadFixture } from "./fixtures.js";

function fixtureTurn(message: string): ChatTurn {
  return { message, variant: "edit-n-rerank", trace: loadFixture() as unknown as EditTrace };
}

test("successful send appends the turn and clears the input", () => {
  let state = setPendingInput(initialState(), "hello there");
  state = sendStarted(state);
  assert.equal(state.busy, true);
  state = sendSucceeded(state, fixtureTurn("hello there"));
  assert.equal(state.turns.length, 1);
  assert.equal(state.pendingInput, "");
  assert.equal(state.busy, false);
  assert.equal(state.error, null);
});

test("failed send keeps the input for retry and shows the error", () => {
  let state = setPendingInput(initialState(), "hello there");
  state = sendStarted(state);
  state = sendFailed(state, "cannot reach the service");
  assert.equal(state.pendingInput, "hello there");
  assert.equal(state.turns.length, 0);
  assert.match(state.error ?? "", /cannot reach/);
  assert.equal(state.busy, false);
});

test("variant and k settings are pure updates", () => {
  const base = initialState();
  const withVariant = setVariant(base, "edit-merge");
  assert.equal(base.variant, "edit-n-rerank");
  assert.equal(withVariant.variant, "edit-merge");
  assert.equal(setK(base, 7.9).k, 7);
  assert.equal(setK(base, -3).k, 1);
});

test("state is reproducible from the same transition sequence", () => {
  const run = () => {
    let s = initialState();
    s = setPendingInput(s, "ping");
    s = sendStarted(s);
    s = sendSucceeded(s, fixtureTurn("ping"));
    s = setVariant(s, "edit-default");
    return s;
  };
  assert.deepEqual(run(), run());
});

test("compare keeps a stable variant order", () => {
  assert.deepEqual(compareOrder(), [
    "edit-default",
    "edit-1-rerank",
    "edit-n-rerank",
    "edit-merge",
  ]);
  const results = compareOrder().map((variant) => ({ variant, error: "down" }));
  const state = compareFinished(sendStarted(initialState()), "msg", results);
  assert.equal(state.compare?.results.length, 4);
  assert.equal(state.busy, false);
});
