import type { TraceNode } from "./trace.js";
import type { Advice, NetworkInfo, SessionState } from "./types.js";

/** Pure HTML-string renderers. Utilities are interpolated with String(x),
 * never rounded or recomputed, so what the screen shows is exactly what the
 * server sent. */

const esc = (s: string): string =>
  s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");

export function showUtility(u: number | null): string {
  return u === null ? "-" : String(u);
}

export function adviceBanner(advice: Advice | null): string {
  if (advice === null) {
    return `<div class="banner idle">declare an arrival to get advice</div>`;
  }
  if (advice.decision === null) {
    return `<div class="banner idle">state: ${esc(advice.state.phase)}</div>`;
  }
  const verdict = advice.decision === "board" ? `BOARD line ${esc(advice.line ?? "?")}` : "WAIT";
  return (
    `<div class="banner ${advice.decision}">` +
    `<strong>${verdict}</strong>` +
    ` <span class="u">board ${showUtility(advice.u_board)}</span>` +
    ` <span class="u">wait ${showUtility(advice.u_wait)}</span>` +
    `</div>`
  );
}

export function statePanel(state: SessionState, rootUtility: number | null): string {
  const root = rootUtility === null ? "" : `<div>root utility ${String(rootUtility)}</div>`;
  return (
    `<div class="state">` +
    root +
    `<div>at <strong>${esc(state.station)}</strong> (${esc(state.phase)})</div>` +
    `<div>budget left ${state.t} ticks, waited ${state.r}</div>` +
    `</div>`
  );
}

export function linesPanel(state: SessionState, all: string[]): string {
  const rows = all
    .map((line) => {
      const status =
        state.riding === line
          ? "riding"
          : state.pending.includes(line)
            ? "pending"
            : "declined/boarded";
      return `<li class="line ${status === "pending" ? "pending" : "off"}">line ${esc(line)}: ${status}</li>`;
    })
    .join("");
  return `<ul class="lines">${rows}</ul>`;
}

export function traceList(trace: TraceNode[]): string {
  const rows = trace
    .map((node) => {
      const decision =
        node.decision === null
          ? ""
          : ` &rarr; <strong>${node.decision}</strong>` +
            ` (board ${showUtility(node.uBoard)} / wait ${showUtility(node.uWait)})`;
      return `<li>${esc(node.label)}${decision}</li>`;
    })
    .join("");
  return `<ol class="trace">${rows}</ol>`;
}

export function networksSelect(networks: NetworkInfo[], selected: string | null): string {
  const options = networks
    .map(
      (n) =>
        `<option value="${esc(n.id)}"${n.id === selected ? " selected" : ""}>` +
        `${esc(n.id)} (${n.stations} stations, ${n.lines} lines)</option>`,
    )
    .join("");
  return `<select id="network">${options}</select>`;
}
