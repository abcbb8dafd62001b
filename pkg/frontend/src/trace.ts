import type { LogEntry } from "./session.js";

export interface TraceNode {
  /** e.g. "line 3 arrived at tick 2" or "alighted at D" */
  label: string;
  decision: "board" | "wait" | null;
  uBoard: number | null;
  uWait: number | null;
  phase: string;
}

/** Flatten the event/advice log into the on-screen decision trace: one row
 * per event, advice rows carrying both branch utilities verbatim. */
export function buildTrace(log: readonly LogEntry[]): TraceNode[] {
  return log.map(({ event, advice }) => {
    let label: string;
    switch (event.type) {
      case "line-arrived":
        label = `line ${event.line} arrived at tick ${event.tick}`;
        break;
      case "boarded":
        label = `boarded line ${event.line}`;
        break;
      case "tick-advance":
        label = `waited ${event.n} ticks`;
        break;
      case "alighted":
        label = `alighted at ${event.station}`;
        break;
    }
    return {
      label,
      decision: advice.decision,
      uBoard: advice.u_board,
      uWait: advice.u_wait,
      phase: advice.state.phase,
    };
  });
}
