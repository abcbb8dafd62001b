import { describe, expect, test } from "vitest";
import { ApiClient } from "../src/api.js";
import { linesPanel, statePanel, traceList } from "../src/render.js";
import { TripSession } from "../src/session.js";
import { buildTrace } from "../src/trace.js";
import type { TripEvent } from "../src/types.js";
import { fakeApiFromFixture, loadFixture } from "./fake_api.js";

const fixture = loadFixture();

describe("decision trace", () => {
  test("mirrors arrival order and decisions", async () => {
    const api = new ApiClient("", fakeApiFromFixture(fixture));
    const session = await TripSession.start(api, "demo", 20);
    await session.replay(fixture.exchanges.map((x) => x.event as unknown as TripEvent));

    const trace = buildTrace(session.log);
    expect(trace.map((n) => n.label)).toEqual([
      "line 3 arrived at tick 2",
      "line 1 arrived at tick 3",
      "boarded line 1",
      "waited 11 ticks",
      "alighted at D",
    ]);
    expect(trace[0]!.decision).toBe("wait");
    expect(trace[1]!.decision).toBe("board");
    expect(trace[4]!.phase).toBe("done");

    const html = traceList(trace);
    expect(html).toContain("line 3 arrived at tick 2");
    expect(html).toContain(`board ${String(trace[1]!.uBoard)}`);
  });

  test("panels render pending/declined lines and the state echo", async () => {
    const api = new ApiClient("", fakeApiFromFixture(fixture));
    const session = await TripSession.start(api, "demo", 20);
    const panel0 = linesPanel(session.state, ["1", "2", "3"]);
    expect(panel0).toContain("line 1: pending");
    expect(panel0).toContain("line 3: pending");

    await session.declare(fixture.exchanges[0]!.event as unknown as TripEvent);
    await session.declare(fixture.exchanges[1]!.event as unknown as TripEvent);
    // after line 1 arrived (line 3 implicitly declined): pending = {1, 2}
    const panel = linesPanel(session.state, ["1", "2", "3"]);
    expect(panel).toContain("line 3: declined/boarded");
    expect(panel).toContain("line 1: pending");

    const state = statePanel(session.state, session.rootUtility);
    expect(state).toContain(`root utility ${String(session.rootUtility)}`);
    expect(state).toContain("budget left 17 ticks, waited 3");
  });
});
