// Wire types for the flowtriage HTTP API.

export type Disposition =
  | "accept_model"
  | "flag_fp"
  | "flag_fn"
  | "indeterminate_accept_model";

export interface QueueCard {
  row_id: number;
  predicted_label: 0 | 1;
  probability: number;
  confidence: number;
  plot_sim_match: number | null;
  plot_sim_mismatch: number | null;
  disposition: Disposition;
  threshold_used: number;
  decided_label: number | null;
}

export interface QueueResponse {
  session: string;
  queue: QueueCard[];
}

export interface OverlayBar {
  feature: string;
  group_mean_phi: number;
  instance_phi: number;
  overlap: boolean;
}

export interface OverlayPlot {
  group: string;
  plot_sim: number;
  bars: OverlayBar[];
}

export interface OverlaysResponse {
  row_id: number;
  predicted_label: 0 | 1;
  overlays: OverlayPlot[];
}

export interface DecisionAck {
  seq: number;
  row_id: number;
  decided_label: number;
}

export interface GroupReport {
  tested: number;
  correct: number;
}

export interface SessionReport {
  session: string;
  decided: number;
  groups: Record<string, GroupReport> | null;
}

export interface ApiError {
  code: number;
  message: string;
}
