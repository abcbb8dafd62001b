/** Payload shapes of the advisory HTTP API. The explorer never computes a
 * utility itself; every number it shows came out of one of these. */

export interface NetworkInfo {
  id: string;
  name: string;
  stations: number;
  lines: number;
  default_origin: string;
  default_destination: string;
  grid: { delta_seconds: number; budget_ticks: number };
}

export interface SessionState {
  station: string;
  phase: "waiting" | "riding" | "done" | "failed";
  t: number;
  r: number;
  pending: string[];
  riding: string | null;
  budget: number;
  history_len: number;
}

export interface SessionCreated {
  session_id: string;
  root_utility: number;
  state: SessionState;
}

export type TripEvent =
  | { type: "line-arrived"; line: string; tick: number }
  | { type: "boarded"; line: string }
  | { type: "tick-advance"; n: number }
  | { type: "alighted"; station: string };

export interface Advice {
  decision: "board" | "wait" | null;
  line?: string;
  u_board: number | null;
  u_wait: number | null;
  state: SessionState;
}

export interface ApiError {
  status: number;
  detail: string;
}
