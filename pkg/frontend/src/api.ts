/** Request building and transport for the /chat endpoint. */

import { EditTrace, Variant, validateTrace } from "./trace.js";

export interface ChatRequest {
  url: string;
  body: { context: string; variant: Variant; k: number };
}

export class ApiError extends Error {
  constructor(
    message: string,
    public readonly status: number | null = null,
  ) {
    super(message);
  }
}

/** The outgoing request is a pure function of (base, text, variant, k). */
export function buildChatRequest(
  base: string,
  text: string,
  variant: Variant,
  k: number,
): ChatRequest {
  return {
    url: `${base.replace(/\/$/, "")}/chat`,
    body: { context: text, variant, k },
  };
}

type FetchLike = (url: string, init: RequestInit) => Promise<Response>;

export async function sendChat(
  request: ChatRequest,
  fetchFn: FetchLike = fetch,
): Promise<EditTrace> {
  let response: Response;
  try {
    response = await fetchFn(request.url, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(request.body),
    });
  } catch (err) {
    throw new ApiError(`cannot reach the service: ${String(err)}`);
  }
  let payload: unknown;
  try {
    payload = await response.json();
  } catch {
    throw new ApiError(`invalid JSON from the service (HTTP ${response.status})`, response.status);
  }
  if (!response.ok) {
    const detail = (payload as { error?: string }).error ?? `HTTP ${response.status}`;
    throw new ApiError(detail, response.status);
  }
  const problems = validateTrace(payload);
  if (problems.length > 0) {
    throw new ApiError(`service returned an invalid trace: ${problems.join("; ")}`);
  }
  return payload as EditTrace;
}
