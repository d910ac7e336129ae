// Run-view state, fed exclusively by stream events (after an initial /state
// sync). Events are deduplicated by their sequence id, so a reconnect that
// replays history cannot double-count trials.
export function emptyView(runId) {
    return {
        runId,
        status: "created",
        connection: "connecting",
        trials: [],
        incumbentLoss: null,
        priors: new Map(),
        priorMarkers: [],
        warnings: [],
        lastSeq: -1,
    };
}
function priorView(view, priorId) {
    let p = view.priors.get(priorId);
    if (!p) {
        p = { priorId, label: "", verdict: null, status: "pending", arrivalIteration: null };
        view.priors.set(priorId, p);
    }
    return p;
}
/** Apply one stream event; returns true when the event was new. */
export function applyEvent(view, ev) {
    if (ev.seq <= view.lastSeq)
        return false; // replayed duplicate
    view.lastSeq = ev.seq;
    const payload = ev.payload;
    switch (ev.kind) {
        case "trial": {
            const loss = payload.loss;
            const incumbent = view.incumbentLoss === null ? loss : Math.min(view.incumbentLoss, loss);
            view.incumbentLoss = incumbent;
            view.trials.push({
                iteration: ev.iteration,
                loss,
                incumbentLoss: incumbent,
                source: payload.source,
            });
            break;
        }
        case "incumbent_update":
            view.incumbentLoss = payload.loss;
            break;
        case "prior_submitted": {
            const p = priorView(view, payload.prior_id);
            p.label = payload.prior?.label ?? "";
            break;
        }
        case "prior_verdict": {
            const p = priorView(view, payload.prior_id);
            p.verdict = payload.verdict;
            p.status = p.verdict.accepted ? "accepted" : "rejected";
            break;
        }
        case "prior_overridden": {
            const p = priorView(view, payload.prior_id);
            p.status = "overridden";
            if (p.verdict)
                p.verdict = { ...p.verdict, accepted: true, overridden: true };
            break;
        }
        case "prior_activated": {
            const p = priorView(view, payload.prior_id);
            p.arrivalIteration = payload.arrival_iteration;
            if (payload.overridden)
                p.status = "overridden";
            else if (p.status === "pending")
                p.status = "accepted";
            view.priorMarkers.push(payload.arrival_iteration);
            break;
        }
        case "warning":
            view.warnings.push(payload.message);
            break;
    }
    return true;
}
export function setStatus(view, status) {
    view.status = status;
}
export function setConnection(view, c) {
    view.connection = c;
}
export function activePriors(view) {
    return [...view.priors.values()].filter((p) => p.arrivalIteration !== null);
}
export function rejectedPriors(view) {
    return [...view.priors.values()].filter((p) => p.status === "rejected");
}
