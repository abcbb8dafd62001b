"""Policy extraction and seeded Monte Carlo validation.

A policy maps each arrival state (line just arrived, remaining budget t,
ticks already waited r) to board or wait. Extracted policies stay bound to
the solver, so states that pruning skipped (their decision is board by
construction) and states first reached during simulation resolve on demand;
a detached policy raises :class:`PolicyGapError` naming the state instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .network import ArrivalNode, DestinationNode, ExpandedGraph, StationNode
from .solver import MissingStateError, SolveMode, SolveResult, UtilityTable


class PolicyGapError(KeyError):
    """A decision was requested for a state the policy cannot resolve.

    When raised mid-simulation, ``trajectory`` carries the event log of the
    aborted run up to the gap.
    """

    def __init__(self, message: str, trajectory: list | None = None) -> None:
        super().__init__(message)
        self.trajectory = trajectory or []


class CollisionError(RuntimeError):
    """Same-tick arrivals could not be resolved under the chosen policy."""


@dataclass
class Policy:
    """Board/wait rule per arrival state.

    ``approximate`` flags policies extracted from heuristic-mode solves:
    their decisions are internally consistent but not guaranteed optimal.
    """

    table: UtilityTable | None
    decisions: dict[tuple[str, int, int, int, int], str] = field(default_factory=dict)
    approximate: bool = False

    def decide(self, node: ArrivalNode, t: int, r: int) -> str:
        if node.mask == 0:
            return "board"
        key = (node.station, node.line, node.mask, t, r)
        hit = self.decisions.get(key)
        if hit is not None:
            return hit
        if self.table is None:
            raise PolicyGapError(
                f"no decision for arrival node {node} at (t={t}, r={r})"
            )
        decision = self.table.decision(node, t, r, compute=True)
        self.decisions[key] = decision
        return decision

    def detach(self) -> "Policy":
        """Frozen copy without solver backing (for serialization round-trips)."""
        return Policy(table=None, decisions=dict(self.decisions), approximate=self.approximate)


def extract_policy(result: SolveResult) -> Policy:
    """Materialize the decisions recorded during a solve.

    Board whenever the boarding utility is at least the waiting utility,
    bit-for-bit the solver's own tie-breaking.
    """
    table = result.table
    decisions: dict[tuple[str, int, int, int, int], str] = {}
    for node, t, r, _value, decision in table.iter_arrival_entries():
        decisions[(node.station, node.line, node.mask, t, r)] = decision
    approximate = table._solver.mode is SolveMode.HEURISTIC
    return Policy(table=table, decisions=decisions, approximate=approximate)


@dataclass
class TrajectorySample:
    events: list[tuple[int, str, str]]  # (elapsed tick, kind, detail)
    outcome: bool
    arrival_slack: int | None


@dataclass
class SimulationReport:
    n: int
    successes: int
    rate: float
    ci_lo: float
    ci_hi: float
    seed: int
    budget_ticks: int
    collision_policy: str
    samples: list[TrajectorySample] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "successes": self.successes,
            "rate": self.rate,
            "ci_lo": self.ci_lo,
            "ci_hi": self.ci_hi,
            "seed": self.seed,
            "budget_ticks": self.budget_ticks,
            "collision_policy": self.collision_policy,
        }


class _Sampler:
    """Inverse-cdf samplers for every waiting and travel pmf in the graph."""

    def __init__(self, graph: ExpandedGraph) -> None:
        self.wait: dict[tuple[str, int], tuple[np.ndarray, np.ndarray]] = {}
        self.ride: dict[tuple[str, int], tuple[np.ndarray, np.ndarray]] = {}
        for y in graph.stations_with_nodes():
            for idx in range(len(graph.lines_at(y))):
                self.wait[(y, idx)] = self._prep(graph.waiting_pmf(y, idx))
                self.ride[(y, idx)] = self._prep(graph.ride(y, idx).travel)

    @staticmethod
    def _prep(pmf) -> tuple[np.ndarray, np.ndarray]:
        ticks = np.nonzero(pmf.mass)[0]
        cum = np.cumsum(pmf.mass[ticks])
        return ticks, cum

    @staticmethod
    def draw(prep: tuple[np.ndarray, np.ndarray], u: float) -> int | None:
        ticks, cum = prep
        if cum.size == 0 or u >= cum[-1]:
            return None  # tail: outside the horizon
        return int(ticks[int(np.searchsorted(cum, u, side="right"))])


def simulate(
    policy: Policy,
    graph: ExpandedGraph,
    n: int,
    seed: int,
    budget_ticks: int,
    collision_policy: str = "redraw",
    keep_samples: int = 0,
) -> SimulationReport:
    """n independent trajectories under ``policy``; deterministic per seed.

    ``collision_policy`` resolves same-tick arrival draws: "redraw" redraws
    the later-indexed line until ticks are distinct, "fail" scores the
    trajectory as a failure at the tie (matching the solver's event model
    exactly). Built-in networks cannot collide either way.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if collision_policy not in ("redraw", "fail"):
        raise ValueError("collision_policy must be 'redraw' or 'fail'")
    rng = np.random.default_rng(seed)
    sampler = _Sampler(graph)
    successes = 0
    samples: list[TrajectorySample] = []

    for _ in range(n):
        outcome, slack, events = _run_trajectory(
            policy, graph, sampler, rng, budget_ticks, collision_policy,
            log=len(samples) < keep_samples,
        )
        successes += int(outcome)
        if len(samples) < keep_samples:
            samples.append(TrajectorySample(events=events, outcome=outcome, arrival_slack=slack))

    rate = successes / n
    half = 1.96 * math.sqrt(max(rate * (1.0 - rate), 1e-12) / n)
    return SimulationReport(
        n=n,
        successes=successes,
        rate=rate,
        ci_lo=max(0.0, rate - half),
        ci_hi=min(1.0, rate + half),
        seed=seed,
        budget_ticks=budget_ticks,
        collision_policy=collision_policy,
        samples=samples,
    )


def _run_trajectory(
    policy: Policy,
    graph: ExpandedGraph,
    sampler: _Sampler,
    rng: np.random.Generator,
    budget_ticks: int,
    collision_policy: str,
    log: bool,
) -> tuple[bool, int | None, list[tuple[int, str, str]]]:
    events: list[tuple[int, str, str]] = []
    elapsed = 0

    def note(kind: str, detail: str) -> None:
        if log:
            events.append((elapsed, kind, detail))

    station = graph.origin_station
    t = budget_ticks
    pending = list(range(len(graph.lines_at(station))))
    if not pending:
        return False, None, events

    while True:
        # draw this visit's waiting times; lines drawing beyond the horizon
        # never arrive but remain unobserved (they stay in pending sets)
        draws: list[tuple[int, int]] = []  # (tick, local line idx)
        never_mask = 0
        ticks_seen: set[int] = set()
        for idx in pending:
            u = float(rng.random())
            tick = _Sampler.draw(sampler.wait[(station, idx)], u)
            if tick is None:
                never_mask |= 1 << idx
                continue
            if collision_policy == "redraw":
                attempts = 0
                while tick in ticks_seen:
                    tick = _Sampler.draw(sampler.wait[(station, idx)], float(rng.random()))
                    attempts += 1
                    if tick is None:
                        break
                    if attempts > 1000:
                        raise CollisionError(
                            f"could not separate arrivals at {station} line {idx}"
                        )
                if tick is None:
                    never_mask |= 1 << idx
                    continue
            ticks_seen.add(tick)
            draws.append((tick, idx))
        draws.sort()

        boarded: int | None = None
        board_tick = 0
        failed = False
        for pos, (tick, idx) in enumerate(draws):
            if tick > t:
                failed = True
                break
            if pos + 1 < len(draws) and draws[pos + 1][0] == tick:
                # same-tick joint arrival while still waiting
                failed = True
                note("collision", f"tick {tick}")
                break
            mask = never_mask
            for tick2, idx2 in draws[pos + 1 :]:
                mask |= 1 << idx2
            node = ArrivalNode(station, idx, mask)
            note("arrival", f"line {graph.line_id(station, idx)} after {tick}")
            try:
                decision = policy.decide(node, t - tick, tick)
            except (MissingStateError, PolicyGapError) as exc:
                dump = list(events) + [(tick, "gap", f"{node} t={t - tick} r={tick}")]
                raise PolicyGapError(str(exc), trajectory=dump) from exc
            note("decision", decision)
            if decision == "board":
                boarded = idx
                board_tick = tick
                break
        if boarded is None or failed:
            return False, None, events

        t -= board_tick
        elapsed += board_tick
        # ride, possibly through several stops
        idx = boarded
        while True:
            link = graph.ride(station, idx)
            tau = _Sampler.draw(sampler.ride[(station, idx)], float(rng.random()))
            if tau is None or tau > t:
                note("ride", f"line {graph.line_id(station, idx)} overruns the budget")
                return False, None, events
            t -= tau
            elapsed += tau
            target = link.target
            note("ride", f"to {link.next_station} in {tau}")
            if isinstance(target, DestinationNode):
                return True, t, events
            if isinstance(target, StationNode):
                station = target.station
                pending = [b for b in range(len(graph.lines_at(station))) if target.mask & (1 << b)]
                note("alight", f"forced at {station}")
                break
            # on-vehicle arrival: continue riding or alight and wait
            node = target
            decision = policy.decide(node, t, 0)
            note("decision", f"{decision} at {node.station}")
            if decision == "board":
                station = node.station
                idx = node.line
                continue
            station = node.station
            pending = [b for b in range(len(graph.lines_at(station))) if node.mask & (1 << b)]
            break
        if not pending:
            return False, None, events
