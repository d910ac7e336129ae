// Page wiring: run selection, live chart, prior composer, verdict panel.
import { ApiError, createRun, getRun, getSlice, getState, listRuns, overridePrior, submitPrior } from "./api.js";
import { renderLossChart, renderSliceChart } from "./chart.js";
import { applyConfidencePreset, draftErrors, activeFields, isSubmittable, newDraft, toPayload, } from "./priorForm.js";
import { applyEvent, emptyView, setConnection, setStatus } from "./store.js";
import { connectStream } from "./stream.js";
const $ = (sel) => {
    const el = document.querySelector(sel);
    if (!el)
        throw new Error(`missing element ${sel}`);
    return el;
};
let view = null;
let handle = null;
let draft = null;
let disconnect = null;
function fmt(v) {
    return Math.abs(v) >= 1e4 || (v !== 0 && Math.abs(v) < 1e-3) ? v.toExponential(2) : v.toPrecision(4);
}
// -- run list -------------------------------------------------------------------
async function refreshRunList() {
    const runs = await listRuns();
    const select = $("#run-select");
    const current = select.value;
    select.innerHTML = runs
        .map((r) => `<option value="${r.run_id}">${r.config.objective} · ${r.run_id.slice(0, 8)} · ${r.status}</option>`)
        .join("");
    if (current && runs.some((r) => r.run_id === current))
        select.value = current;
}
async function startDemoRun() {
    const objective = $("#new-objective").value;
    const budget = Number($("#new-budget").value) || 80;
    const pace = Number($("#new-pace").value) || 0.4;
    const created = await createRun({
        objective,
        budget,
        seed: Math.floor(Math.random() * 10000),
        prior_mode: "interactive",
        min_trial_seconds: pace,
        pool_size: 800,
        local_starts: 5,
    });
    await refreshRunList();
    $("#run-select").value = created.run_id;
    await connectTo(created.run_id);
}
// -- live view --------------------------------------------------------------------
async function connectTo(runId) {
    disconnect?.();
    handle = await getRun(runId);
    view = emptyView(runId);
    const state = await getState(runId);
    setStatus(view, state.status);
    // seed the chart from the snapshot, then let the stream replay confirm it
    renderAll();
    buildPriorForm(handle.config.space);
    disconnect = connectStream(runId, {
        onEvent: (ev) => {
            if (view && applyEvent(view, ev))
                renderAll();
        },
        onFinished: (status) => {
            if (view) {
                setStatus(view, status);
                renderAll();
            }
        },
        onConnection: (c) => {
            if (view) {
                setConnection(view, c);
                renderConnection();
            }
        },
    });
}
function renderConnection() {
    if (!view)
        return;
    const badge = $("#connection");
    badge.textContent = view.connection;
    badge.className = `badge ${view.connection}`;
}
function renderAll() {
    if (!view)
        return;
    renderConnection();
    $("#status").textContent = view.status;
    $("#trial-count").textContent = String(view.trials.length);
    $("#incumbent").textContent = view.incumbentLoss === null ? "-" : fmt(view.incumbentLoss);
    renderLossChart($("#chart"), {
        iterations: view.trials.map((t) => t.iteration),
        losses: view.trials.map((t) => t.loss),
        incumbent: view.trials.map((t) => t.incumbentLoss),
        priorMarkers: view.priorMarkers,
        width: 640,
        height: 260,
    });
    renderPriorList();
}
function marginBar(v) {
    const tau = typeof v.tau === "number" ? v.tau : v.tau === "inf" ? Infinity : -Infinity;
    const span = Math.max(Math.abs(v.margin), Math.abs(Number.isFinite(tau) ? tau : 0), 0.2) * 1.4;
    const pos = (x) => 50 + (x / span) * 50;
    const tauMark = Number.isFinite(tau)
        ? `<div class="tau-mark" style="left:${pos(tau)}%" title="threshold ${fmt(tau)}"></div>`
        : "";
    return `
<div class="margin-bar">
  <div class="zero-mark"></div>${tauMark}
  <div class="margin-mark ${v.margin >= (Number.isFinite(tau) ? tau : 0) ? "ok" : "bad"}"
       style="left:${pos(Math.max(-span, Math.min(span, v.margin)))}%"
       title="margin ${fmt(v.margin)}"></div>
</div>`;
}
function renderPriorList() {
    if (!view)
        return;
    const rows = [...view.priors.values()].map((p) => {
        const v = p.verdict;
        const evidence = v
            ? `<div class="evidence">prior ${fmt(v.prior_mean_lcb)} vs incumbent ${fmt(v.incumbent_mean_lcb)}
         (margin ${fmt(v.margin)}, threshold ${typeof v.tau === "number" ? fmt(v.tau) : v.tau})</div>${marginBar(v)}`
            : "";
        const overrideBtn = p.status === "rejected"
            ? `<button class="override" data-prior="${p.priorId}">Override rejection</button>`
            : "";
        const arrival = p.arrivalIteration !== null ? ` · active since trial ${p.arrivalIteration}` : "";
        return `<li class="prior ${p.status}">
      <span class="badge ${p.status}">${p.status}</span>
      <strong>${p.priorId}</strong> (${p.label})${arrival}
      ${evidence}${overrideBtn}
    </li>`;
    });
    $("#prior-list").innerHTML = rows.join("") || "<li class='muted'>no priors submitted yet</li>";
    document.querySelectorAll("button.override").forEach((btn) => {
        btn.onclick = async () => {
            const priorId = btn.dataset.prior;
            if (!window.confirm(`Overrule the rejection of ${priorId}? The optimizer will be biased by this prior.`))
                return;
            try {
                await overridePrior(view.runId, priorId);
            }
            catch (err) {
                showFormError(err);
            }
        };
    });
}
// -- prior composer ----------------------------------------------------------------
function buildPriorForm(space) {
    const current = newDraft(space);
    draft = current;
    const rows = space.hyperparameters.map((def, i) => {
        if (def.type === "categorical") {
            const options = def.categories.map((c) => `<option value="${c}">${c}</option>`).join("");
            return `<div class="field" data-index="${i}">
        <label>${def.name}</label>
        <select data-role="center">${options}</select>
      </div>`;
        }
        const step = def.type === "int" ? "1" : "any";
        return `<div class="field" data-index="${i}">
      <label>${def.name} <span class="muted">[${def.lower}, ${def.upper}]${def.log ? " log" : ""}</span></label>
      <input type="number" data-role="center" step="${step}" placeholder="center">
      <input type="number" data-role="std" step="any" value="${current.fields[i].std?.toPrecision(4)}" title="width">
      <span class="error" data-role="error"></span>
    </div>`;
    });
    $("#prior-fields").innerHTML = rows.join("");
    $("#prior-fields").querySelectorAll(".field").forEach((row) => {
        const idx = Number(row.dataset.index);
        row.querySelectorAll("[data-role]").forEach((input) => {
            input.addEventListener("input", () => {
                const f = current.fields[idx];
                if (input.dataset.role === "center") {
                    f.center = f.def.type === "categorical" ? input.value : input.value === "" ? null : Number(input.value);
                }
                else {
                    f.std = input.value === "" ? null : Number(input.value);
                }
                syncFormValidity();
            });
        });
    });
    document.querySelectorAll("#confidence button").forEach((btn) => {
        btn.onclick = () => {
            applyConfidencePreset(draft, Number(btn.dataset.k));
            $("#prior-fields").querySelectorAll(".field").forEach((row) => {
                const f = draft.fields[Number(row.dataset.index)];
                const stdInput = row.querySelector("[data-role=std]");
                if (stdInput && f.std !== null)
                    stdInput.value = f.std.toPrecision(4);
            });
            syncFormValidity();
        };
    });
    syncFormValidity();
}
function syncFormValidity() {
    if (!draft)
        return;
    const errors = draftErrors(draft);
    const active = new Set(activeFields(draft).map((f) => f.def.name));
    $("#prior-fields").querySelectorAll(".field").forEach((row) => {
        const f = draft.fields[Number(row.dataset.index)];
        row.classList.toggle("inactive", !active.has(f.def.name));
        const slot = row.querySelector("[data-role=error]");
        if (slot)
            slot.textContent = errors.get(f.def.name) ?? "";
    });
    $("#submit-prior").disabled = !isSubmittable(draft);
}
function showFormError(err) {
    $("#form-error").textContent = err instanceof ApiError ? err.detail : String(err);
}
async function submitDraft() {
    if (!draft || !view)
        return;
    $("#form-error").textContent = "";
    try {
        const resp = await submitPrior(view.runId, toPayload(draft));
        const v = resp.verdict;
        $("#verdict-panel").innerHTML = `
      <span class="badge ${v.accepted ? "accepted" : "rejected"}">${v.accepted ? "accepted" : "rejected"}</span>
      margin ${fmt(v.margin)} vs threshold ${typeof v.tau === "number" ? fmt(v.tau) : v.tau}
      ${marginBar(v)}`;
    }
    catch (err) {
        showFormError(err);
    }
}
// -- slice panel ------------------------------------------------------------------
async function loadSlice() {
    if (!view || !handle)
        return;
    const dim = $("#slice-dim").value;
    try {
        const data = await getSlice(view.runId, dim);
        if (data.kind === "categorical") {
            $("#slice-chart").innerHTML = data.xs
                .map((c, i) => `<div>${c}: ${fmt(data.mean[i])} ± ${fmt(data.std[i])}</div>`)
                .join("");
            return;
        }
        const def = handle.config.space.hyperparameters.find((h) => h.name === dim);
        renderSliceChart($("#slice-chart"), {
            xs: data.xs,
            mean: data.mean,
            std: data.std,
            width: 640,
            height: 180,
            logX: Boolean(def?.log),
        });
    }
    catch (err) {
        $("#slice-chart").textContent = err instanceof ApiError ? err.detail : String(err);
    }
}
function populateSliceDims(space) {
    $("#slice-dim").innerHTML = space.hyperparameters
        .map((h) => `<option value="${h.name}">${h.name}</option>`)
        .join("");
}
// -- boot ------------------------------------------------------------------------
async function boot() {
    await refreshRunList();
    $("#refresh-runs").addEventListener("click", () => void refreshRunList());
    $("#start-run").addEventListener("click", () => void startDemoRun().catch(showFormError));
    $("#connect").addEventListener("click", () => {
        const runId = $("#run-select").value;
        if (runId)
            void connectTo(runId).then(() => populateSliceDims(handle.config.space)).catch(showFormError);
    });
    $("#submit-prior").addEventListener("click", () => void submitDraft());
    $("#load-slice").addEventListener("click", () => void loadSlice());
}
void boot();
