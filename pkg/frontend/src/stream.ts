// SSE consumption with exponential-backoff reconnects. The browser's
// EventSource replays history on reconnect; the store's seq-dedup makes
// that harmless. An injectable factory keeps this testable off-browser.

import type { StreamEvent } from "./types.js";

export interface StreamHandlers {
  onEvent: (ev: StreamEvent) => void;
  onFinished: (status: string) => void;
  onConnection: (state: "live" | "stale" | "closed") => void;
}

export type EventSourceLike = {
  addEventListener(type: string, cb: (ev: MessageEvent) => void): void;
  close(): void;
  onerror: ((ev: unknown) => void) | null;
  onopen: ((ev: unknown) => void) | null;
};

export type EventSourceFactory = (url: string) => EventSourceLike;

export const ENGINE_EVENT_KINDS = [
  "trial",
  "incumbent_update",
  "prior_submitted",
  "prior_verdict",
  "prior_overridden",
  "prior_activated",
  "warning",
] as const;

export function parseEventData(raw: string): StreamEvent | null {
  try {
    const doc = JSON.parse(raw);
    if (typeof doc.seq !== "number" || typeof doc.kind !== "string") return null;
    return doc as StreamEvent;
  } catch {
    return null;
  }
}

export function backoffDelayMs(attempt: number, baseMs = 500, capMs = 10_000): number {
  return Math.min(capMs, baseMs * 2 ** attempt);
}

export function connectStream(
  runId: string,
  handlers: StreamHandlers,
  makeSource: EventSourceFactory = (url) => new EventSource(url) as unknown as EventSourceLike,
  scheduleReconnect: (fn: () => void, delayMs: number) => void = (fn, d) => void setTimeout(fn, d),
): () => void {
  let closed = false;
  let attempt = 0;
  let source: EventSourceLike | null = null;

  const open = () => {
    if (closed) return;
    source = makeSource(`/runs/${runId}/events`);
    source.onopen = () => {
      attempt = 0;
      handlers.onConnection("live");
    };
    for (const kind of ENGINE_EVENT_KINDS) {
      source.addEventListener(kind, (ev) => {
        const parsed = parseEventData(ev.data);
        if (parsed) handlers.onEvent(parsed);
      });
    }
    source.addEventListener("finished", (ev) => {
      let status = "finished";
      try {
        status = JSON.parse(ev.data).status ?? "finished";
      } catch {
        /* keep default */
      }
      closed = true;
      source?.close();
      handlers.onConnection("closed");
      handlers.onFinished(status);
    });
    source.onerror = () => {
      if (closed) return;
      source?.close();
      handlers.onConnection("stale");
      scheduleReconnect(open, backoffDelayMs(attempt));
      attempt += 1;
    };
  };

  open();
  return () => {
    closed = true;
    source?.close();
    handlers.onConnection("closed");
  };
}
