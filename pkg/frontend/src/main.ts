import { ApiClient, ApiRequestError } from "./api.js";
import { TripSession } from "./session.js";
import { buildTrace } from "./trace.js";
import {
  adviceBanner,
  linesPanel,
  networksSelect,
  statePanel,
  traceList,
} from "./render.js";
import type { Advice, NetworkInfo, TripEvent } from "./types.js";

const api = new ApiClient(
  (window as { API_BASE?: string }).API_BASE ?? "http://127.0.0.1:8000",
);

let networks: NetworkInfo[] = [];
let session: TripSession | null = null;
let forks: TripSession[] = [];
let active: TripSession | null = null; // session or one of its forks
let lastAdvice: Advice | null = null;
let allLines: string[] = []; // candidate lines at trip start, for status display

const $ = (id: string): HTMLElement => {
  const el = document.getElementById(id);
  if (!el) throw new Error(`missing element #${id}`);
  return el;
};



function redraw(): void {
  $("networks").innerHTML = networksSelect(networks, session?.networkId ?? null);
  if (!active) {
    $("advice").innerHTML = adviceBanner(null);
    $("state").innerHTML = "";
    $("lines").innerHTML = "";
    $("trace").innerHTML = "";
    return;
  }
  $("advice").innerHTML = adviceBanner(lastAdvice);
  $("state").innerHTML = statePanel(active.state, active.rootUtility);
  $("lines").innerHTML = linesPanel(active.state, allLines);
  $("trace").innerHTML = traceList(buildTrace(active.log));
  $("fork-info").textContent =
    active === session ? "main session" : `fork (${forks.indexOf(active) + 1})`;
}

function fail(error: unknown): void {
  const text =
    error instanceof ApiRequestError
      ? `${error.status}: ${error.detail}`
      : String(error);
  $("errors").textContent = text;
}

async function startTrip(): Promise<void> {
  $("errors").textContent = "";
  const networkId = ($("network") as HTMLSelectElement).value;
  const budget = ($("budget") as HTMLInputElement).value || "20";
  try {
    session = await TripSession.start(api, networkId, budget);
    forks = [];
    active = session;
    lastAdvice = null;
    allLines = [...session.state.pending];
    redraw();
  } catch (error) {
    fail(error);
  }
}

async function declare(event: TripEvent): Promise<void> {
  if (!active) return;
  $("errors").textContent = "";
  try {
    lastAdvice = await active.declare(event);
    redraw();
  } catch (error) {
    fail(error);
  }
}

async function forkAtStep(): Promise<void> {
  if (!session) return;
  const step = Number(($("fork-step") as HTMLInputElement).value || "0");
  try {
    const fork = await session.forkAt(step);
    forks.push(fork);
    active = fork;
    lastAdvice = fork.log.length ? fork.log[fork.log.length - 1]!.advice : null;
    redraw();
  } catch (error) {
    fail(error);
  }
}

async function boot(): Promise<void> {
  try {
    networks = await api.listNetworks();
  } catch (error) {
    fail(error);
  }
  redraw();

  $("start").addEventListener("click", () => void startTrip());
  $("declare-arrival").addEventListener("click", () => {
    const line = ($("arrival-line") as HTMLInputElement).value;
    const tick = Number(($("arrival-tick") as HTMLInputElement).value);
    void declare({ type: "line-arrived", line, tick });
  });
  $("board").addEventListener("click", () => {
    const line = ($("arrival-line") as HTMLInputElement).value;
    void declare({ type: "boarded", line });
  });
  $("advance").addEventListener("click", () => {
    const n = Number(($("advance-n") as HTMLInputElement).value || "1");
    void declare({ type: "tick-advance", n });
  });
  $("alight").addEventListener("click", () => {
    const station = ($("alight-station") as HTMLInputElement).value;
    void declare({ type: "alighted", station });
  });
  $("fork").addEventListener("click", () => void forkAtStep());
  $("to-main").addEventListener("click", () => {
    if (!session) return;
    active = session;
    lastAdvice = session.log.length ? session.log[session.log.length - 1]!.advice : null;
    redraw();
  });
}

void boot();
