// API payload shapes, mirroring the service's JSON exactly.

export type HyperparameterKind = "float" | "int" | "categorical";

export interface HyperparameterDef {
  name: string;
  type: HyperparameterKind;
  lower?: number;
  upper?: number;
  log?: boolean;
  categories?: string[];
  condition?: { parent: string; value: string };
}

export interface SpaceDef {
  hyperparameters: HyperparameterDef[];
}

export interface Verdict {
  accepted: boolean;
  prior_mean_lcb: number;
  incumbent_mean_lcb: number;
  margin: number;
  tau: number | "inf" | "-inf";
  sample_count: number;
  overridden: boolean;
}

export interface PriorPayload {
  label: string;
  center: Record<string, number | string>;
  stds: Record<string, number>;
  categorical_off_mass?: number;
}

export interface PriorRecord {
  prior_id: string;
  label: string;
  status: "accepted" | "rejected" | "overridden";
  verdict: Verdict;
  prior: PriorPayload;
}

export interface TrialRecord {
  config: { values: Record<string, number | string>; active: Record<string, boolean> };
  loss: number;
  iteration: number;
  source: "init" | "bo";
}

export interface RunState {
  run_id: string;
  status: RunStatus;
  iteration: number;
  trials: TrialRecord[];
  incumbent: { config: TrialRecord["config"]; loss: number } | null;
  active_priors: { id: string; arrival_iteration: number; label: string; prior: PriorPayload }[];
  priors: PriorRecord[];
  error: string | null;
}

export type RunStatus = "created" | "running" | "awaiting_prior_decision" | "finished" | "failed";

export interface RunHandle {
  run_id: string;
  status: RunStatus;
  config: { space: SpaceDef; budget: number; objective: string; tau: number | string };
}

export interface StreamEvent {
  seq: number;
  kind: string;
  iteration: number;
  payload: Record<string, unknown>;
  wall_time?: number;
}

export interface SliceData {
  dim: string;
  kind: HyperparameterKind;
  xs: number[] | string[];
  mean: number[];
  std: number[];
  anchor: { config: Record<string, number | string>; loss: number };
}
