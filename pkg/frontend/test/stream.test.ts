import { describe, expect, it } from "vitest";

import { backoffDelayMs, connectStream, parseEventData } from "../src/stream.js";
import type { EventSourceLike } from "../src/stream.js";
import type { StreamEvent } from "../src/types.js";

class FakeSource implements EventSourceLike {
  listeners = new Map<string, ((ev: MessageEvent) => void)[]>();
  closed = false;
  onerror: ((ev: unknown) => void) | null = null;
  onopen: ((ev: unknown) => void) | null = null;

  addEventListener(type: string, cb: (ev: MessageEvent) => void): void {
    const arr = this.listeners.get(type) ?? [];
    arr.push(cb);
    this.listeners.set(type, arr);
  }

  close(): void {
    this.closed = true;
  }

  emit(type: string, data: unknown): void {
    for (const cb of this.listeners.get(type) ?? []) {
      cb({ data: JSON.stringify(data) } as MessageEvent);
    }
  }
}

describe("stream plumbing", () => {
  it("parses well-formed frames and rejects junk", () => {
    expect(parseEventData('{"seq":3,"kind":"trial","iteration":3,"payload":{}}')).toMatchObject({
      seq: 3,
      kind: "trial",
    });
    expect(parseEventData("not json")).toBeNull();
    expect(parseEventData('{"kind":"trial"}')).toBeNull();
  });

  it("backoff grows exponentially and caps", () => {
    expect(backoffDelayMs(0)).toBe(500);
    expect(backoffDelayMs(1)).toBe(1000);
    expect(backoffDelayMs(10)).toBe(10_000);
  });

  it("delivers engine events and the terminal frame", () => {
    const sources: FakeSource[] = [];
    const seen: StreamEvent[] = [];
    let finished = "";
    const states: string[] = [];
    connectStream(
      "r1",
      {
        onEvent: (ev) => seen.push(ev),
        onFinished: (s) => (finished = s),
        onConnection: (s) => states.push(s),
      },
      () => {
        const s = new FakeSource();
        sources.push(s);
        return s;
      },
      () => {
        /* no reconnects in this test */
      },
    );
    const src = sources[0];
    src.onopen?.({});
    src.emit("trial", { seq: 0, kind: "trial", iteration: 1, payload: { loss: 1 } });
    src.emit("prior_verdict", { seq: 1, kind: "prior_verdict", iteration: 1, payload: {} });
    src.emit("finished", { status: "finished" });
    expect(seen.map((e) => e.kind)).toEqual(["trial", "prior_verdict"]);
    expect(finished).toBe("finished");
    expect(states).toEqual(["live", "closed"]);
    expect(src.closed).toBe(true);
  });

  it("reconnects with backoff after an error and resumes", () => {
    const sources: FakeSource[] = [];
    const delays: number[] = [];
    const pending: (() => void)[] = [];
    const seen: StreamEvent[] = [];
    const states: string[] = [];
    connectStream(
      "r1",
      {
        onEvent: (ev) => seen.push(ev),
        onFinished: () => undefined,
        onConnection: (s) => states.push(s),
      },
      () => {
        const s = new FakeSource();
        sources.push(s);
        return s;
      },
      (fn, delay) => {
        delays.push(delay);
        pending.push(fn);
      },
    );
    sources[0].onopen?.({});
    sources[0].onerror?.({});
    expect(states).toEqual(["live", "stale"]);
    expect(delays).toEqual([500]);
    pending.shift()!(); // fire the reconnect
    expect(sources).toHaveLength(2);
    sources[1].onopen?.({});
    sources[1].emit("trial", { seq: 0, kind: "trial", iteration: 1, payload: { loss: 2 } });
    expect(seen).toHaveLength(1);
    expect(states).toEqual(["live", "stale", "live"]);
  });

  it("disconnect closes the source and stops reconnecting", () => {
    const sources: FakeSource[] = [];
    const pending: (() => void)[] = [];
    const stop = connectStream(
      "r1",
      { onEvent: () => undefined, onFinished: () => undefined, onConnection: () => undefined },
      () => {
        const s = new FakeSource();
        sources.push(s);
        return s;
      },
      (fn) => pending.push(fn),
    );
    stop();
    expect(sources[0].closed).toBe(true);
    sources[0].onerror?.({});
    pending.forEach((fn) => fn());
    expect(sources).toHaveLength(1); // no new source after close
  });
});
