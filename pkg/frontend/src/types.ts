/** Wire types for the /v1 endpoints. Mirrors the CLI config schema. */

export type DistributionFamily =
  | "exponential"
  | "weibull"
  | "lognormal"
  | "uniform"
  | "beta"
  | "beta4"
  | "point_mass";

export interface DistributionPayload {
  family: DistributionFamily;
  [param: string]: number | DistributionFamily;
}

export interface DesignPayload {
  theta: number;
  tau: number;
  n: number;
  pi_incident: number;
  survival: DistributionPayload;
  arrival: DistributionPayload;
  incident_entry: DistributionPayload;
  weight: DistributionPayload;
  dropout?: DistributionPayload;
}

export interface EffectPayload {
  log_hr: number;
  predictor_variance?: number;
  r_squared_adjustment?: number;
  group_fraction?: number | null;
}

export interface PreviewResponse {
  schema_version: string;
  grid: number[];
  survival: number[];
  arrival_cdf: number[];
  weight: (number | null)[];
  timing_ms: number;
}

export type WireNumber = number | "inf" | "-inf" | null;

export interface EstimationResponse {
  schema_version: string;
  result: {
    pi_opt: number;
    pi_prevalent: number;
    objective_value: number;
    boundary: string;
    residual_at_opt: number;
    are_table: { pi: number; are: WireNumber }[];
  };
  curves: {
    grid: number[];
    optimal: WireNumber[];
    even_mix: WireNumber[];
  };
  timing_ms: number;
}

export interface InferenceResponse {
  schema_version: string;
  result: {
    a_prevalent: number;
    b_incident_minus_prevalent: number;
    pi_opt: number;
    expected_failures_at_opt: number;
    theoretical_power: number | null;
    alpha: number;
    incident_side: number;
    prevalent_side: number;
  };
  timing_ms: number;
}

export interface ApiError {
  schema_version: string;
  error: string;
  fields?: Record<string, string>;
}
