import type { ApiClient } from "./api.js";
import type { Advice, SessionCreated, SessionState, TripEvent } from "./types.js";

export interface LogEntry {
  event: TripEvent;
  advice: Advice;
}

/** One explorer trip: the server-side session plus the verbatim event and
 * advice log. All state derives from the log, so any prefix can be forked
 * into an independent session by replaying it. */
export class TripSession {
  private constructor(
    private readonly api: ApiClient,
    readonly networkId: string,
    readonly budget: number | string,
    readonly sessionId: string,
    readonly rootUtility: number,
    private _state: SessionState,
    private readonly _log: LogEntry[] = [],
  ) {}

  static async start(
    api: ApiClient,
    networkId: string,
    budget: number | string,
  ): Promise<TripSession> {
    const created: SessionCreated = await api.createSession(networkId, budget);
    return new TripSession(
      api,
      networkId,
      budget,
      created.session_id,
      created.root_utility,
      created.state,
    );
  }

  get state(): SessionState {
    return this._state;
  }

  get log(): readonly LogEntry[] {
    return this._log;
  }

  async declare(event: TripEvent): Promise<Advice> {
    const advice = await this.api.postEvent(this.sessionId, event);
    this._state = advice.state;
    this._log.push({ event, advice });
    return advice;
  }

  /** Counterfactual exploration: a fresh server session primed with the
   * first `step` events of this one. The original stays untouched. */
  async forkAt(step: number): Promise<TripSession> {
    if (step < 0 || step > this._log.length) {
      throw new RangeError(`fork step ${step} outside 0..${this._log.length}`);
    }
    const fork = await TripSession.start(this.api, this.networkId, this.budget);
    for (const entry of this._log.slice(0, step)) {
      await fork.declare(entry.event);
    }
    return fork;
  }

  /** Replay a recorded event list into this session, returning the advice
   * sequence (used by tests and by "load recording"). */
  async replay(events: TripEvent[]): Promise<Advice[]> {
    const out: Advice[] = [];
    for (const event of events) {
      out.push(await this.declare(event));
    }
    return out;
  }
}
