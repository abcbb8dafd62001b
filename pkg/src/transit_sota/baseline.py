"""Least-expected-time fixed path: the non-adaptive baseline.

The LET traveler commits in advance to a sequence of boardings, waiting out
each chosen line regardless of what arrives first. Link weights for the
path search are expected waiting and travel ticks; the success curve comes
from convolving the committed path's waiting and travel pmfs, so
P(success at budget b) is just the cdf of the total.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

from .dist import DiscretePmf, convolve
from .network import ExpandedGraph
from .solver import Solver, SolveMode

TAIL_WARN = 1e-6


@dataclass(frozen=True)
class Leg:
    line_id: str
    board: str
    alight: str


@dataclass
class LetResult:
    legs: list[Leg]
    expected_ticks: float
    total: DiscretePmf
    warnings: list[str]

    def success(self, budget_ticks: int) -> float:
        if budget_ticks < 0:
            return 0.0
        return float(self.total.cumulative[min(budget_ticks, self.total.grid.budget_ticks)])

    def success_curve(self, budgets: list[int]) -> list[float]:
        return [self.success(b) for b in budgets]


def _mean_ticks(pmf: DiscretePmf, warnings: list[str], what: str) -> float:
    if pmf.tail_mass > TAIL_WARN:
        msg = f"{what}: tail mass {pmf.tail_mass:.2e} excluded from the expected value"
        if msg not in warnings:
            warnings.append(msg)
    return pmf.mean_ticks()


def let_path(graph: ExpandedGraph) -> LetResult:
    """Deterministic shortest path on expected ticks, plus its success cdf."""
    warnings: list[str] = []
    origin, destination = graph.origin_station, graph.destination

    # expected-cost edges: board line at y, ride to any downstream stop
    dist: dict[str, float] = {origin: 0.0}
    back: dict[str, tuple[str, str]] = {}  # station -> (prev station, line id)
    heap: list[tuple[float, str]] = [(0.0, origin)]

    while heap:
        d, y = heapq.heappop(heap)
        if d > dist.get(y, math.inf):
            continue
        if y == destination:
            break
        for line_id in graph.lines_at(y):
            line = graph.spec.line(line_id)
            idx = graph.local_index(y, line_id)
            wait_mean = _mean_ticks(
                graph.waiting_pmf(y, idx), warnings, f"wait {line_id}@{y}"
            )
            k = line.stops.index(y)
            acc = d + wait_mean
            cur = y
            for stop in line.stops[k + 1 :]:
                seg_idx = line.stops.index(cur)
                pmf = graph.pmfs[line.travel_pmf_ids[seg_idx]]
                acc += _mean_ticks(pmf, warnings, f"travel {line_id} {cur}->{stop}")
                cur = stop
                if acc < dist.get(stop, math.inf) - 1e-12:
                    dist[stop] = acc
                    back[stop] = (y, line_id)
                    heapq.heappush(heap, (acc, stop))

    if destination not in dist:
        raise ValueError(f"destination {destination} unreachable from {origin}")

    legs: list[Leg] = []
    cur = destination
    while cur != origin:
        prev, line_id = back[cur]
        legs.append(Leg(line_id=line_id, board=prev, alight=cur))
        cur = prev
    legs.reverse()

    total = DiscretePmf.point(graph.grid, 0)
    for leg in legs:
        line = graph.spec.line(leg.line_id)
        idx = graph.local_index(leg.board, leg.line_id)
        total = convolve(total, graph.waiting_pmf(leg.board, idx))
        k = line.stops.index(leg.board)
        stop = leg.board
        while stop != leg.alight:
            seg_idx = line.stops.index(stop)
            total = convolve(total, graph.pmfs[line.travel_pmf_ids[seg_idx]])
            stop = line.stops[seg_idx + 1]
    expected = float(dist[destination])
    return LetResult(legs=legs, expected_ticks=expected, total=total, warnings=warnings)


@dataclass
class ComparisonRow:
    budget_ticks: int
    sota: float
    let: float

    @property
    def diff(self) -> float:
        return self.sota - self.let


def compare_sota_let(
    graph: ExpandedGraph, budgets: list[int], mode: SolveMode | str = SolveMode.PLAIN
) -> tuple[list[ComparisonRow], LetResult]:
    """Adaptive-policy utility minus committed-path utility per budget."""
    let = let_path(graph)
    solver = Solver(graph, mode=mode)
    rows = []
    for b in sorted(budgets):
        rows.append(ComparisonRow(budget_ticks=b, sota=solver.root_value(b), let=let.success(b)))
    order = {b: i for i, b in enumerate(sorted(budgets))}
    rows.sort(key=lambda row: order[row.budget_ticks])
    return rows, let
