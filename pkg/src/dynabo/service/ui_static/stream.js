// SSE consumption with exponential-backoff reconnects. The browser's
// EventSource replays history on reconnect; the store's seq-dedup makes
// that harmless. An injectable factory keeps this testable off-browser.
export const ENGINE_EVENT_KINDS = [
    "trial",
    "incumbent_update",
    "prior_submitted",
    "prior_verdict",
    "prior_overridden",
    "prior_activated",
    "warning",
];
export function parseEventData(raw) {
    try {
        const doc = JSON.parse(raw);
        if (typeof doc.seq !== "number" || typeof doc.kind !== "string")
            return null;
        return doc;
    }
    catch {
        return null;
    }
}
export function backoffDelayMs(attempt, baseMs = 500, capMs = 10000) {
    return Math.min(capMs, baseMs * 2 ** attempt);
}
export function connectStream(runId, handlers, makeSource = (url) => new EventSource(url), scheduleReconnect = (fn, d) => void setTimeout(fn, d)) {
    let closed = false;
    let attempt = 0;
    let source = null;
    const open = () => {
        if (closed)
            return;
        source = makeSource(`/runs/${runId}/events`);
        source.onopen = () => {
            attempt = 0;
            handlers.onConnection("live");
        };
        for (const kind of ENGINE_EVENT_KINDS) {
            source.addEventListener(kind, (ev) => {
                const parsed = parseEventData(ev.data);
                if (parsed)
                    handlers.onEvent(parsed);
            });
        }
        source.addEventListener("finished", (ev) => {
            let status = "finished";
            try {
                status = JSON.parse(ev.data).status ?? "finished";
            }
            catch {
                /* keep default */
            }
            closed = true;
            source?.close();
            handlers.onConnection("closed");
            handlers.onFinished(status);
        });
        source.onerror = () => {
            if (closed)
                return;
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
