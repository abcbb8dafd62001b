import { describe, expect, test } from "vitest";
import { ApiClient } from "../src/api.js";
import { adviceBanner, showUtility } from "../src/render.js";
import { TripSession } from "../src/session.js";
import type { Advice, TripEvent } from "../src/types.js";
import { fakeApiFromFixture, loadFixture } from "./fake_api.js";

const fixture = loadFixture();

function recordedEvents(): TripEvent[] {
  return fixture.exchanges.map((x) => x.event as unknown as TripEvent);
}

async function startSession(): Promise<TripSession> {
  const api = new ApiClient("", fakeApiFromFixture(fixture));
  return TripSession.start(api, "demo", 20);
}

describe("recorded session replay", () => {
  test("reproduces the golden advice sequence", async () => {
    const session = await startSession();
    const recordedRoot = (fixture.session.response as { root_utility: number }).root_utility;
    expect(session.rootUtility).toBe(recordedRoot);
    expect(session.rootUtility).toBeCloseTo(0.801125, 12);
    const advice = await session.replay(recordedEvents());

    // the showcase tree: decline line 3 at tick 2, board line 1 at tick 3
    expect(advice.map((a) => a.decision)).toEqual(["wait", "board", null, null, null]);
    expect(advice[advice.length - 1]!.state.phase).toBe("done");

    // the advice sequence equals the recording verbatim
    const recorded = fixture.exchanges.map((x) => x.response as unknown as Advice);
    expect(advice).toEqual(recorded);
  });

  test("displayed utilities are the server's numbers verbatim", async () => {
    const session = await startSession();
    const advice = await session.replay(recordedEvents());

    const first = advice[0]!;
    const recordedFirst = fixture.exchanges[0]!.response as unknown as Advice;
    expect(first.u_board).toBe(recordedFirst.u_board);
    expect(first.u_wait).toBe(recordedFirst.u_wait);

    // the banner interpolates String(x) of exactly those floats
    expect(adviceBanner(first)).toContain(`board ${String(recordedFirst.u_board)}`);
    expect(adviceBanner(first)).toContain(`wait ${String(recordedFirst.u_wait)}`);
    expect(adviceBanner(first)).toContain("WAIT");

    const second = advice[1]!;
    expect(adviceBanner(second)).toContain("BOARD line 1");
    expect(adviceBanner(second)).toContain(`board ${String(second.u_board)}`);
    expect(showUtility(second.u_wait)).toBe(String((fixture.exchanges[1]!.response as { u_wait: number }).u_wait));
  });

  test("replay is deterministic", async () => {
    const one = await (await startSession()).replay(recordedEvents());
    const two = await (await startSession()).replay(recordedEvents());
    expect(JSON.stringify(one)).toBe(JSON.stringify(two));
  });
});

describe("what-if forking", () => {
  test("forking before the first arrival flips the advice at line 1", async () => {
    const session = await startSession();
    await session.declare(recordedEvents()[0]!); // line 3 at tick 2 -> wait

    const fork = await session.forkAt(0);
    expect(fork.sessionId).not.toBe(session.sessionId);
    expect(fork.log.length).toBe(0);

    // in the fork line 3 never arrived: line 1 at tick 3 now means WAIT
    const forkAdvice = await fork.declare(
      fixture.fork.exchanges[0]!.event as unknown as TripEvent,
    );
    expect(forkAdvice.decision).toBe("wait");
    const recorded = fixture.fork.exchanges[0]!.response as unknown as Advice;
    expect(forkAdvice.u_board).toBe(recorded.u_board);
    expect(forkAdvice.u_wait).toBe(recorded.u_wait);

    // the original session is untouched
    expect(session.log.length).toBe(1);
    expect(session.log[0]!.advice.decision).toBe("wait");
  });

  test("fork step bounds are validated", async () => {
    const session = await startSession();
    await expect(session.forkAt(5)).rejects.toThrow(RangeError);
  });
});
