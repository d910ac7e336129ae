// Thin typed client over the control-plane API. Every number shown in the
// UI comes straight from these responses; nothing is recomputed client-side.
export class ApiError extends Error {
    constructor(status, detail) {
        super(`${status}: ${detail}`);
        this.status = status;
        this.detail = detail;
    }
}
async function request(path, init) {
    const resp = await fetch(path, init);
    const body = await resp.json().catch(() => ({}));
    if (!resp.ok) {
        const detail = typeof body.detail === "string" ? body.detail : JSON.stringify(body.detail ?? body);
        throw new ApiError(resp.status, detail);
    }
    return body;
}
export function listRuns() {
    return request("/runs");
}
export function getRun(runId) {
    return request(`/runs/${runId}`);
}
export function getState(runId) {
    return request(`/runs/${runId}/state`);
}
export function createRun(config) {
    return request("/runs", {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(config),
    });
}
export function submitPrior(runId, prior) {
    return request(`/runs/${runId}/priors`, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(prior),
    });
}
export function overridePrior(runId, priorId) {
    return request(`/runs/${runId}/priors/${priorId}/override`, { method: "POST" });
}
export function getSlice(runId, dim, points = 41) {
    return request(`/runs/${runId}/slice?dim=${encodeURIComponent(dim)}&points=${points}`);
}
