// Thin typed client over the control-plane API. Every number shown in the
// UI comes straight from these responses; nothing is recomputed client-side.

import type { PriorPayload, PriorRecord, RunHandle, RunState, SliceData, Verdict } from "./types.js";

export class ApiError extends Error {
  constructor(public status: number, public detail: string) {
    super(`${status}: ${detail}`);
  }
}

async function request<T>(path: string, init?: RequestInit): Promise<T> {
  const resp = await fetch(path, init);
  const body = await resp.json().catch(() => ({}));
  if (!resp.ok) {
    const detail = typeof body.detail === "string" ? body.detail : JSON.stringify(body.detail ?? body);
    throw new ApiError(resp.status, detail);
  }
  return body as T;
}

export function listRuns(): Promise<RunHandle[]> {
  return request<RunHandle[]>("/runs");
}

export function getRun(runId: string): Promise<RunHandle> {
  return request<RunHandle>(`/runs/${runId}`);
}

export function getState(runId: string): Promise<RunState> {
  return request<RunState>(`/runs/${runId}/state`);
}

export function createRun(config: Record<string, unknown>): Promise<{ run_id: string }> {
  return request<{ run_id: string }>("/runs", {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify(config),
  });
}

export function submitPrior(runId: string, prior: PriorPayload): Promise<{ prior_id: string; verdict: Verdict }> {
  return request(`/runs/${runId}/priors`, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify(prior),
  });
}

export function overridePrior(runId: string, priorId: string): Promise<{ prior_id: string; verdict: Verdict }> {
  return request(`/runs/${runId}/priors/${priorId}/override`, { method: "POST" });
}

export function getSlice(runId: string, dim: string, points = 41): Promise<SliceData> {
  return request<SliceData>(`/runs/${runId}/slice?dim=${encodeURIComponent(dim)}&points=${points}`);
}

export type { PriorRecord };
