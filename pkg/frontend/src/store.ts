// Run-view state, fed exclusively by stream events (after an initial /state
// sync). Events are deduplicated by their sequence id, so a reconnect that
// replays history cannot double-count trials.

import type { RunStatus, StreamEvent, Verdict } from "./types.js";

export interface TrialPoint {
  iteration: number;
  loss: number;
  incumbentLoss: number;
  source: string;
}

export interface PriorView {
  priorId: string;
  label: string;
  verdict: Verdict | null;
  status: "pending" | "accepted" | "rejected" | "overridden";
  arrivalIteration: number | null;
}

export type ConnectionStatus = "connecting" | "live" | "stale" | "closed";

export interface RunView {
  runId: string;
  status: RunStatus;
  connection: ConnectionStatus;
  trials: TrialPoint[];
  incumbentLoss: number | null;
  priors: Map<string, PriorView>;
  priorMarkers: number[];
  warnings: string[];
  lastSeq: number;
}

export function emptyView(runId: string): RunView {
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

function priorView(view: RunView, priorId: string): PriorView {
  let p = view.priors.get(priorId);
  if (!p) {
    p = { priorId, label: "", verdict: null, status: "pending", arrivalIteration: null };
    view.priors.set(priorId, p);
  }
  return p;
}

/** Apply one stream event; returns true when the event was new. */
export function applyEvent(view: RunView, ev: StreamEvent): boolean {
  if (ev.seq <= view.lastSeq) return false; // replayed duplicate
  view.lastSeq = ev.seq;
  const payload = ev.payload as Record<string, any>;
  switch (ev.kind) {
    case "trial": {
      const loss = payload.loss as number;
      const incumbent =
        view.incumbentLoss === null ? loss : Math.min(view.incumbentLoss, loss);
      view.incumbentLoss = incumbent;
      view.trials.push({
        iteration: ev.iteration,
        loss,
        incumbentLoss: incumbent,
        source: payload.source as string,
      });
      break;
    }
    case "incumbent_update":
      view.incumbentLoss = payload.loss as number;
      break;
    case "prior_submitted": {
      const p = priorView(view, payload.prior_id as string);
      p.label = (payload.prior?.label as string) ?? "";
      break;
    }
    case "prior_verdict": {
      const p = priorView(view, payload.prior_id as string);
      p.verdict = payload.verdict as Verdict;
      p.status = p.verdict.accepted ? "accepted" : "rejected";
      break;
    }
    case "prior_overridden": {
      const p = priorView(view, payload.prior_id as string);
      p.status = "overridden";
      if (p.verdict) p.verdict = { ...p.verdict, accepted: true, overridden: true };
      break;
    }
    case "prior_activated": {
      const p = priorView(view, payload.prior_id as string);
      p.arrivalIteration = payload.arrival_iteration as number;
      if (payload.overridden) p.status = "overridden";
      else if (p.status === "pending") p.status = "accepted";
      view.priorMarkers.push(payload.arrival_iteration as number);
      break;
    }
    case "warning":
      view.warnings.push(payload.message as string);
      break;
  }
  return true;
}

export function setStatus(view: RunView, status: RunStatus): void {
  view.status = status;
}

export function setConnection(view: RunView, c: ConnectionStatus): void {
  view.connection = c;
}

export function activePriors(view: RunView): PriorView[] {
  return [...view.priors.values()].filter((p) => p.arrivalIteration !== null);
}

export function rejectedPriors(view: RunView): PriorView[] {
  return [...view.priors.values()].filter((p) => p.status === "rejected");
}
