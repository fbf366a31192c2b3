/** Result display strings.
 *
 * Every number shown comes verbatim from the API response; the only client
 * operation is decimal formatting, so the UI can never disagree with the
 * CLI about a value.
 */

import type { EstimationResponse, InferenceResponse, WireNumber } from "./types.js";

export function wireNumber(v: WireNumber): number {
  if (v === "inf") return Infinity;
  if (v === "-inf") return -Infinity;
  if (v === null) return NaN;
  return v;
}

export function formatAre(v: WireNumber, digits = 2): string {
  const x = wireNumber(v);
  if (Number.isNaN(x)) return "undefined";
  if (!Number.isFinite(x)) return "infinite";
  return x.toFixed(digits);
}

export function percent(frac: number): string {
  return `${Math.round(frac * 100)}%`;
}

export interface EstimationDisplay {
  headline: string;
  mixLine: string;
  areLines: string[];
  boundaryNote: string;
}

export function estimationDisplay(resp: EstimationResponse): EstimationDisplay {
  const r = resp.result;
  return {
    headline: `${percent(r.pi_opt)} incident / ${percent(r.pi_prevalent)} prevalent`,
    mixLine:
      `Optimal incident fraction ${r.pi_opt.toFixed(2)} ` +
      `(prevalent ${r.pi_prevalent.toFixed(2)})`,
    areLines: r.are_table.map(
      (row) => `Efficiency vs ${percent(row.pi)} incident: ${formatAre(row.are)}`),
    boundaryNote:
      r.boundary === "interior"
        ? ""
        : r.boundary === "all_incident"
          ? "Boundary optimum: recruit incident patients only."
          : "Boundary optimum: recruit prevalent patients only.",
  };
}

export interface InferenceDisplay {
  headline: string;
  criterionLine: string;
  failuresLine: string;
  powerLine: string;
}

export function inferenceDisplay(resp: InferenceResponse): InferenceDisplay {
  const r = resp.result;
  const power = r.theoretical_power;
  return {
    headline: r.pi_opt === 1 ? "100% incident" : "100% prevalent",
    criterionLine:
      `Comparison criterion b = ${r.b_incident_minus_prevalent.toFixed(2)} ` +
      `(incident side ${r.incident_side.toFixed(4)}, ` +
      `prevalent side ${r.prevalent_side.toFixed(4)})`,
    failuresLine:
      `Expected failures at the optimal cohort: ` +
      `${r.expected_failures_at_opt.toFixed(1)}`,
    powerLine:
      power === null || Number.isNaN(power)
        ? "Theoretical power: specify an effect to compute"
        : `Theoretical power at alpha=${r.alpha}: ${power.toFixed(3)}`,
  };
}

/** Banner text for an infeasible design (HTTP 422). */
export function infeasibleBanner(serverMessage: string): string {
  return `This design cannot be optimized: ${serverMessage}`;
}
