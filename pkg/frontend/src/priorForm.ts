// Prior draft building and validation. Width presets mirror the scripted
// prior construction: confidence level k gives sigma = range / (5 k), with
// the range taken in the log domain for log-scaled dimensions.

import type { HyperparameterDef, PriorPayload, SpaceDef } from "./types.js";

export interface DraftField {
  def: HyperparameterDef;
  center: number | string | null;
  std: number | null; // numeric dims only
}

export interface Draft {
  fields: DraftField[];
  label: string;
}

export function presetStd(def: HyperparameterDef, k: number): number {
  if (def.type === "categorical") return 0;
  const lo = def.log ? Math.log(def.lower!) : def.lower!;
  const hi = def.log ? Math.log(def.upper!) : def.upper!;
  return Math.abs(hi - lo) / (5 * k);
}

export function newDraft(space: SpaceDef, label = "user"): Draft {
  return {
    label,
    fields: space.hyperparameters.map((def) => ({
      def,
      center: def.type === "categorical" ? def.categories![0] : null,
      std: def.type === "categorical" ? null : presetStd(def, 1),
    })),
  };
}

export function applyConfidencePreset(draft: Draft, k: number): void {
  for (const f of draft.fields) {
    if (f.def.type !== "categorical") f.std = presetStd(f.def, k);
  }
}

/** Fields whose condition is met by the draft's current categorical picks. */
export function activeFields(draft: Draft): DraftField[] {
  const values = new Map<string, number | string | null>();
  for (const f of draft.fields) values.set(f.def.name, f.center);
  return draft.fields.filter((f) => {
    if (!f.def.condition) return true;
    return values.get(f.def.condition.parent) === f.def.condition.value;
  });
}

export function fieldError(f: DraftField): string | null {
  const d = f.def;
  if (d.type === "categorical") {
    if (f.center === null || !d.categories!.includes(String(f.center))) return "pick a category";
    return null;
  }
  if (f.center === null || Number.isNaN(Number(f.center))) return "value required";
  const v = Number(f.center);
  if (v < d.lower! || v > d.upper!) return `must be in [${d.lower}, ${d.upper}]`;
  if (d.type === "int" && !Number.isInteger(v)) return "must be an integer";
  if (f.std === null || !(f.std > 0)) return "width must be > 0";
  return null;
}

export function draftErrors(draft: Draft): Map<string, string> {
  const errors = new Map<string, string>();
  for (const f of activeFields(draft)) {
    const err = fieldError(f);
    if (err) errors.set(f.def.name, err);
  }
  return errors;
}

export function isSubmittable(draft: Draft): boolean {
  return draftErrors(draft).size === 0;
}

export function toPayload(draft: Draft): PriorPayload {
  const center: Record<string, number | string> = {};
  const stds: Record<string, number> = {};
  for (const f of activeFields(draft)) {
    if (f.def.type === "categorical") {
      center[f.def.name] = String(f.center);
    } else {
      center[f.def.name] = Number(f.center);
      stds[f.def.name] = f.std!;
    }
  }
  return { label: draft.label, center, stds };
}
