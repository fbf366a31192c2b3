/** Form model: field definitions, syntactic validation, payload assembly.
 *
 * Validation here is syntactic only (parseable, right sign, bounds ordered);
 * all numerical validation is the server's job so there is a single source
 * of truth. Payloads built from a valid form are exactly the documents the
 * CLI consumes.
 */

import type { DesignPayload, DistributionPayload, EffectPayload } from "./types.js";

export const FAMILY_PARAMS: Record<string, string[]> = {
  exponential: ["mean"],
  weibull: ["shape", "scale"],
  lognormal: ["log_mean", "log_sd"],
  uniform: ["lower", "upper"],
  beta: ["shape1", "shape2"],
  beta4: ["shape1", "shape2", "lower", "upper"],
  point_mass: ["value"],
};

/** Which families make sense for each design slot. */
export const SLOT_FAMILIES: Record<string, string[]> = {
  survival: ["exponential", "weibull", "lognormal", "point_mass"],
  arrival: ["exponential", "weibull", "lognormal", "uniform", "point_mass"],
  incident_entry: ["uniform", "beta", "point_mass"],
  weight: ["uniform", "beta4"],
  dropout: ["exponential", "weibull", "lognormal", "point_mass"],
};

export interface DistributionForm {
  family: string;
  params: Record<string, string>; // raw input text per parameter
}

export interface FormState {
  theta: string;
  tau: string;
  n: string;
  survival: DistributionForm;
  arrival: DistributionForm;
  incident_entry: DistributionForm;
  weight: DistributionForm;
  dropoutEnabled: boolean;
  dropout: DistributionForm;
  // inference-page extras
  logHr: string;
  predictorVariance: string;
  rSquared: string;
  alpha: string;
}

export function defaultForm(): FormState {
  return {
    theta: "5",
    tau: "10",
    n: "1000",
    survival: { family: "exponential", params: { mean: "10" } },
    arrival: { family: "exponential", params: { mean: "10" } },
    incident_entry: { family: "uniform", params: { lower: "0", upper: "1" } },
    weight: { family: "uniform", params: { lower: "0", upper: "10" } },
    dropoutEnabled: false,
    dropout: { family: "exponential", params: { mean: "5" } },
    logHr: "0.3",
    predictorVariance: "0.25",
    rSquared: "0",
    alpha: "0.05",
  };
}

export type FieldErrors = Record<string, string>;

function num(raw: string): number | null {
  if (raw.trim() === "") return null;
  const v = Number(raw);
  return Number.isFinite(v) ? v : null;
}

function checkDistribution(name: string, form: DistributionForm, errors: FieldErrors): void {
  const wanted = FAMILY_PARAMS[form.family];
  if (!wanted) {
    errors[name] = `unknown family ${form.family}`;
    return;
  }
  const values: Record<string, number> = {};
  for (const p of wanted) {
    const v = num(form.params[p] ?? "");
    if (v === null) {
      errors[`${name}.${p}`] = "enter a number";
      continue;
    }
    values[p] = v;
  }
  if (Object.keys(values).length < wanted.length) return;
  for (const p of ["mean", "shape", "scale", "shape1", "shape2", "log_sd"]) {
    if (p in values && values[p] <= 0) errors[`${name}.${p}`] = "must be positive";
  }
  if ("value" in values && values.value < 0) errors[`${name}.value`] = "must be nonnegative";
  if ("lower" in values && "upper" in values && !(values.upper > values.lower)) {
    errors[`${name}.upper`] = "upper must exceed lower";
  }
}

/** Syntactic validation; returns an empty object when the form can be submitted. */
export function validateForm(form: FormState, page: "estimation" | "inference"): FieldErrors {
  const errors: FieldErrors = {};
  const theta = num(form.theta);
  const tau = num(form.tau);
  const n = num(form.n);
  if (theta === null || theta <= 0) errors.theta = "positive number required";
  if (tau === null || tau <= 0) errors.tau = "positive number required";
  if (n === null || !Number.isInteger(n) || n < 1) errors.n = "positive integer required";
  checkDistribution("survival", form.survival, errors);
  checkDistribution("arrival", form.arrival, errors);
  checkDistribution("incident_entry", form.incident_entry, errors);
  checkDistribution("weight", form.weight, errors);
  if (form.dropoutEnabled) checkDistribution("dropout", form.dropout, errors);
  if (page === "inference") {
    if (num(form.logHr) === null) errors.logHr = "number required";
    const pv = num(form.predictorVariance);
    if (pv === null || pv <= 0) errors.predictorVariance = "positive number required";
    const r2 = num(form.rSquared);
    if (r2 === null || r2 < 0 || r2 >= 1) errors.rSquared = "must lie in [0, 1)";
    const alpha = num(form.alpha);
    if (alpha === null || alpha <= 0 || alpha >= 1) errors.alpha = "must lie in (0, 1)";
  }
  return errors;
}

function distributionPayload(form: DistributionForm): DistributionPayload {
  const out: DistributionPayload = { family: form.family as DistributionPayload["family"] };
  for (const p of FAMILY_PARAMS[form.family]) {
    out[p] = Number(form.params[p]);
  }
  return out;
}

export function designPayload(form: FormState): DesignPayload {
  const design: DesignPayload = {
    theta: Number(form.theta),
    tau: Number(form.tau),
    n: Number(form.n),
    pi_incident: 0.5, // placeholder mix; the optimizers scan the full range
    survival: distributionPayload(form.survival),
    arrival: distributionPayload(form.arrival),
    incident_entry: distributionPayload(form.incident_entry),
    weight: distributionPayload(form.weight),
  };
  if (form.dropoutEnabled) design.dropout = distributionPayload(form.dropout);
  return design;
}

export function effectPayload(form: FormState): EffectPayload {
  return {
    log_hr: Number(form.logHr),
    predictor_variance: Number(form.predictorVariance),
    r_squared_adjustment: Number(form.rSquared),
    group_fraction: null,
  };
}

/** Export the current parameter set; importing it reproduces identical payloads. */
export function exportForm(form: FormState): string {
  return JSON.stringify(form, null, 2);
}

export function importForm(text: string): FormState {
  const raw = JSON.parse(text) as Partial<FormState>;
  const base = defaultForm();
  const merged: FormState = { ...base, ...raw } as FormState;
  for (const slot of ["survival", "arrival", "incident_entry", "weight", "dropout"] as const) {
    const dist = raw[slot];
    if (dist && typeof dist === "object" && "family" in dist) {
      merged[slot] = { family: dist.family, params: { ...dist.params } };
    }
  }
  const errors = validateForm(merged, "inference");
  if (Object.keys(errors).length > 0) {
    throw new Error(`imported parameters invalid: ${Object.keys(errors).join(", ")}`);
  }
  return merged;
}
