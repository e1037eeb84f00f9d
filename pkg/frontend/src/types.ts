// Payload types mirroring the drqft service JSON exactly.

export interface TransferFunctionJson {
  num: number[];
  den: number[];
  ts: number | null;
}

export interface BoundaryJson {
  omega_design: number;
  omega_source: number;
  kind: string;
  conjugated: boolean;
  label: string;
  orientation: string;
  phases: number[];
  allowed: number[][][]; // per phase: list of [lo_db, hi_db]
}

export interface CurveJson {
  omega: number[];
  phase_deg: number[];
  gain_db: number[];
}

export interface MarkerJson {
  label: string;
  omega: number;
  phase_deg: number;
  gain_db: number | null;
}

export interface BoundaryResultJson {
  index: number;
  label: string;
  kind: string;
  omega_design: number;
  omega_source: number;
  passed: boolean;
  violation_db: number | null;
  loop_phase_deg: number;
  loop_gain_db: number;
}

export interface SweepResultJson {
  name: string;
  passed: boolean;
  worst_ratio_db: number;
  worst_omega: number;
}

export interface ValidationJson {
  passed: boolean;
  boundaries: BoundaryResultJson[];
  sweeps: SweepResultJson[];
}

export interface SensitivityCurveJson {
  omega: number[];
  value_db: number[];
  bound_db: number[];
}

export interface SensitivityJson {
  sampled?: SensitivityCurveJson;
  tracking?: SensitivityCurveJson;
}

export interface MarginsJson {
  gain_margin_db: number | null;
  phase_margin_deg: number | null;
}

export interface VerdictJson {
  stable: boolean;
  net_crossings: number;
  required_crossings: number;
  oracle_verdict: string;
  oracle_agrees: boolean;
  notes: string[];
}

export interface ControllerResponse {
  g_slow: TransferFunctionJson;
  l0_curve: CurveJson;
  markers: MarkerJson[];
  margins: MarginsJson;
  verdict: VerdictJson;
  validation: ValidationJson;
  sensitivity: SensitivityJson;
  boundary_computes: number;
  recomputed_boundaries: boolean;
}

export interface TraceJson {
  t: number[];
  y: number[];
  u: number[];
  t_slow: number[];
  y_slow: number[];
  r: number[];
  Ts: number;
  Tf: number;
  N: number;
}

export interface SimulateResponse {
  trace: TraceJson;
  ripple: {
    dominant_ripple_frequency: number;
    dominant_ripple_amplitude: number;
    harmonics: number[][];
  } | null;
}

export type Section =
  | { type: "gain"; db: number }
  | { type: "real_zero"; position: number }
  | { type: "real_pole"; position: number }
  | { type: "notch"; K: number; alpha1: number; alpha2: number };
