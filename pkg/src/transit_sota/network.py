"""Physical transit network and its expansion into the decision graph.

A physical station served by m candidate lines expands into
  - m line nodes (riding line i onward from the station),
  - 2^m - 1 station nodes (waiting for each nonempty subset of lines),
  - m * 2^(m-1) arrival nodes (line i arrived first, subset X still pending),
wired by arrival links (station -> arrival), boarding links (arrival ->
line), alighting links (arrival -> station) and riding links (line ->
next-stop arrival). Choice subsets are bitmasks over the station's candidate
lines in sorted line-id order, so rebuilding a spec reproduces identical
node identities.

Riding links normally enter the next stop's arrival node whose pending set
is that stop's full candidate set minus the ridden line; the waiting clock
is zero there (it restarts when the passenger alights). Two special cases:
riding into the destination ends the trip (terminal node, utility 1), and
riding a line that is itself useless beyond the next stop forces an
immediate alight into the stop's full-set station node.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from itertools import combinations
from typing import Iterator, Optional

from .dist import DiscretePmf, station_tie_mass
from .grid import TimeGrid

MAX_LINES_PER_STATION = 8

# waiting pmfs have a one-tick floor, so boarding after any wait costs >= 1 tick
WAIT_FLOOR_TICKS = 1


class CapacityError(ValueError):
    """A station's candidate set exceeds MAX_LINES_PER_STATION."""


class SpecError(ValueError):
    """The network description violates a structural requirement."""


@dataclass(frozen=True)
class Station:
    id: str
    name: str = ""
    lat: Optional[float] = None
    lon: Optional[float] = None


@dataclass(frozen=True)
class Line:
    """A directed transit line: ordered stops, per-segment travel pmf ids and
    per-departure-stop waiting pmf ids (one fewer than stops)."""

    id: str
    stops: tuple[str, ...]
    travel_pmf_ids: tuple[str, ...]
    waiting_pmf_ids: tuple[str, ...]

    def __post_init__(self) -> None:
        if len(self.stops) < 2:
            raise SpecError(f"line {self.id}: needs at least 2 stops")
        if len(set(self.stops)) != len(self.stops):
            raise SpecError(f"line {self.id}: repeated stations in stop sequence")
        if len(self.travel_pmf_ids) != len(self.stops) - 1:
            raise SpecError(f"line {self.id}: needs one travel pmf per segment")
        if len(self.waiting_pmf_ids) != len(self.stops) - 1:
            raise SpecError(f"line {self.id}: needs one waiting pmf per departure stop")


@dataclass(frozen=True)
class NetworkSpec:
    grid: TimeGrid
    stations: tuple[Station, ...]
    lines: tuple[Line, ...]
    name: str = "network"

    def __post_init__(self) -> None:
        ids = [s.id for s in self.stations]
        if len(set(ids)) != len(ids):
            raise SpecError("duplicate station ids")
        station_set = set(ids)
        line_ids = [l.id for l in self.lines]
        if len(set(line_ids)) != len(line_ids):
            raise SpecError("duplicate line ids")
        serving: dict[str, int] = {}
        for line in self.lines:
            for stop in line.stops:
                if stop not in station_set:
                    raise SpecError(f"line {line.id}: unknown station {stop}")
            for stop in line.stops[:-1]:
                serving[stop] = serving.get(stop, 0) + 1
        for stop, count in serving.items():
            if count > MAX_LINES_PER_STATION:
                raise CapacityError(
                    f"station {stop}: {count} lines exceed the {MAX_LINES_PER_STATION}-line cap"
                )

    def station(self, station_id: str) -> Station:
        for s in self.stations:
            if s.id == station_id:
                return s
        raise KeyError(station_id)

    def line(self, line_id: str) -> Line:
        for l in self.lines:
            if l.id == line_id:
                return l
        raise KeyError(line_id)

    def resolve_pmfs(self, pmfs: dict[str, DiscretePmf]) -> None:
        """Check every referenced pmf id resolves and carries the 1-tick floor."""
        for line in self.lines:
            for pid in line.travel_pmf_ids + line.waiting_pmf_ids:
                if pid not in pmfs:
                    raise SpecError(f"line {line.id}: unresolved pmf id {pid!r}")
                if not pmfs[pid].grid.compatible(self.grid):
                    raise SpecError(f"pmf {pid!r}: grid mismatch")
                if not pmfs[pid].has_floor:
                    raise SpecError(f"pmf {pid!r}: travel/waiting pmfs need mass[0] == 0")


# --- expanded-graph node identities ----------------------------------------


@dataclass(frozen=True, slots=True)
class StationNode:
    """Waiting at ``station`` for the candidate subset encoded by ``mask``."""

    station: str
    mask: int


@dataclass(frozen=True, slots=True)
class ArrivalNode:
    """Line ``line`` (local index) arrived first; ``mask`` still pending."""

    station: str
    line: int
    mask: int


@dataclass(frozen=True, slots=True)
class LineNode:
    """Aboard line ``line`` (local index) departing ``station``."""

    station: str
    line: int


@dataclass(frozen=True, slots=True)
class DestinationNode:
    """Trip completed."""


Node = StationNode | ArrivalNode | LineNode | DestinationNode


@dataclass(frozen=True)
class FeasibilityBounds:
    """Minimum realizable ticks to the destination.

    ``alpha`` is per station in the waiting state (includes the one-tick
    waiting floor before any boarding); ``line_min`` is per (station, line)
    for a passenger already aboard, which pays no waiting floor. Utility
    queries below these bounds short-circuit to zero.
    """

    alpha: dict[str, float]
    line_min: dict[tuple[str, str], float]

    def station_bound(self, station: str) -> float:
        return self.alpha.get(station, math.inf)

    def line_bound(self, station: str, line_id: str) -> float:
        return self.line_min.get((station, line_id), math.inf)


@dataclass(frozen=True)
class RideLink:
    """Riding link leaving LineNode(station, line): one segment of the line."""

    travel: DiscretePmf
    target: Node
    next_station: str


class ExpandedGraph:
    """Immutable result of expanding a NetworkSpec for one origin/destination."""

    def __init__(
        self,
        spec: NetworkSpec,
        pmfs: dict[str, DiscretePmf],
        origin: str,
        destination: str,
        candidates: dict[str, tuple[str, ...]],
        bounds: FeasibilityBounds,
        waiting: dict[tuple[str, str], DiscretePmf],
        rides: dict[tuple[str, str], RideLink],
        warnings: list[str],
    ) -> None:
        self.spec = spec
        self.grid = spec.grid
        self.pmfs = pmfs
        self.origin_station = origin
        self.destination = destination
        self.candidates = candidates
        self.bounds = bounds
        self.waiting = waiting
        self.rides = rides
        self.warnings = warnings
        self.origin: Optional[StationNode] = None
        cand = candidates.get(origin, ())
        if cand:
            self.origin = StationNode(origin, (1 << len(cand)) - 1)

    # --- candidate-set helpers ---

    def lines_at(self, station: str) -> tuple[str, ...]:
        return self.candidates.get(station, ())

    def line_id(self, station: str, local_idx: int) -> str:
        return self.candidates[station][local_idx]

    def local_index(self, station: str, line_id: str) -> int:
        return self.candidates[station].index(line_id)

    def full_mask(self, station: str) -> int:
        return (1 << len(self.candidates.get(station, ()))) - 1

    def waiting_pmf(self, station: str, local_idx: int) -> DiscretePmf:
        return self.waiting[(station, self.candidates[station][local_idx])]

    def ride(self, station: str, local_idx: int) -> RideLink:
        return self.rides[(station, self.candidates[station][local_idx])]

    # --- node/link enumeration (structural tests, UI) ---

    def node_counts(self, station: str) -> tuple[int, int, int]:
        """(line, station, arrival) node counts at one physical station."""
        m = len(self.candidates.get(station, ()))
        if m == 0:
            return (0, 0, 0)
        return (m, 2**m - 1, m * 2 ** (m - 1))

    def iter_line_nodes(self, station: str) -> Iterator[LineNode]:
        for i in range(len(self.candidates.get(station, ()))):
            yield LineNode(station, i)

    def iter_station_nodes(self, station: str) -> Iterator[StationNode]:
        m = len(self.candidates.get(station, ()))
        for mask in range(1, 1 << m):
            yield StationNode(station, mask)

    def iter_arrival_nodes(self, station: str) -> Iterator[ArrivalNode]:
        m = len(self.candidates.get(station, ()))
        for i in range(m):
            others = [j for j in range(m) if j != i]
            for k in range(len(others) + 1):
                for combo in combinations(others, k):
                    mask = 0
                    for j in combo:
                        mask |= 1 << j
                    yield ArrivalNode(station, i, mask)

    def iter_links(self, station: str) -> Iterator[tuple[str, Node, Node]]:
        """Typed links whose source lives at ``station``."""
        m = len(self.candidates.get(station, ()))
        for node in self.iter_station_nodes(station):
            for i in range(m):
                if node.mask & (1 << i):
                    yield ("arrival", node, ArrivalNode(station, i, node.mask & ~(1 << i)))
        for node in self.iter_arrival_nodes(station):
            yield ("boarding", node, LineNode(station, node.line))
            if node.mask:
                yield ("alighting", node, StationNode(station, node.mask))
        for i in range(m):
            yield ("riding", LineNode(station, i), self.ride(station, i).target)

    def stations_with_nodes(self) -> list[str]:
        return [s for s, cand in self.candidates.items() if cand]


def _min_ride_ticks(pmf: DiscretePmf) -> float:
    mt = pmf.min_tick
    return math.inf if mt > pmf.grid.budget_ticks else float(mt)


def feasibility_bounds(
    spec: NetworkSpec, pmfs: dict[str, DiscretePmf], destination: str
) -> FeasibilityBounds:
    """Reverse Dijkstra from the destination over minimum realizable ticks.

    Link weights: riding = smallest pmf tick with mass, boarding/alighting =
    0, waiting (arrival links) = the one-tick floor.
    """
    # states: ("S", station) waiting, ("L", line_id, stop_idx) aboard-departing
    dist: dict[tuple, float] = {("S", destination): 0.0}
    heap: list[tuple[float, tuple]] = [(0.0, ("S", destination))]
    # reverse adjacency: for each state, predecessors with edge weights
    seg_min: dict[tuple[str, int], float] = {}
    into_station: dict[str, list[tuple[str, int]]] = {}
    for line in spec.lines:
        for k in range(len(line.stops) - 1):
            seg_min[(line.id, k)] = _min_ride_ticks(pmfs[line.travel_pmf_ids[k]])
            into_station.setdefault(line.stops[k + 1], []).append((line.id, k))

    def push(state: tuple, cand: float) -> None:
        if cand < dist.get(state, math.inf) - 1e-12:
            dist[state] = cand
            heapq.heappush(heap, (cand, state))

    lines_by_id = {l.id: l for l in spec.lines}
    while heap:
        d, state = heapq.heappop(heap)
        if d > dist.get(state, math.inf):
            continue
        if state[0] == "S":
            station = state[1]
            # predecessor: aboard (line, k) alighting here costs the ride
            for line_id, k in into_station.get(station, ()):
                push(("L", line_id, k), d + seg_min[(line_id, k)])
        else:
            _, line_id, k = state
            line = lines_by_id[line_id]
            # predecessor: waiting at the departure stop, wait floor + board
            push(("S", line.stops[k]), d + WAIT_FLOOR_TICKS)
            # predecessor: aboard the previous segment, staying on
            if k > 0:
                push(("L", line_id, k - 1), d + seg_min[(line_id, k - 1)])

    alpha = {s.id: dist.get(("S", s.id), math.inf) for s in spec.stations}
    line_min: dict[tuple[str, str], float] = {}
    for line in spec.lines:
        for k in range(len(line.stops) - 1):
            d = dist.get(("L", line.id, k), math.inf)
            if d < math.inf:
                line_min[(line.stops[k], line.id)] = d
    return FeasibilityBounds(alpha=alpha, line_min=line_min)


def candidate_lines(
    spec: NetworkSpec, station: str, destination: str, bounds: FeasibilityBounds
) -> tuple[str, ...]:
    """Lines at ``station`` whose boarding can still reach the destination,
    in sorted line-id order (fixes the bitmask layout)."""
    if station == destination:
        return ()
    usable = [
        line_id
        for (stop, line_id) in bounds.line_min
        if stop == station and bounds.line_min[(stop, line_id)] < math.inf
    ]
    return tuple(sorted(usable))


def build_expanded_graph(
    spec: NetworkSpec,
    pmfs: dict[str, DiscretePmf],
    origin: str,
    destination: str,
    tie_mass_warn: float = 1e-9,
) -> ExpandedGraph:
    """Expand a network spec for one origin/destination pair."""
    if origin == destination:
        raise SpecError("origin and destination must differ")
    station_ids = {s.id for s in spec.stations}
    if origin not in station_ids or destination not in station_ids:
        raise SpecError("origin/destination must be stations of the network")
    spec.resolve_pmfs(pmfs)

    bounds = feasibility_bounds(spec, pmfs, destination)
    by_station: dict[str, list[str]] = {}
    for (stop, line_id) in bounds.line_min:
        by_station.setdefault(stop, []).append(line_id)
    candidates: dict[str, tuple[str, ...]] = {}
    for s in spec.stations:
        cand = () if s.id == destination else tuple(sorted(by_station.get(s.id, ())))
        if len(cand) > MAX_LINES_PER_STATION:
            raise CapacityError(
                f"station {s.id}: {len(cand)} candidate lines exceed the cap of "
                f"{MAX_LINES_PER_STATION} (graph size is exponential in this number)"
            )
        candidates[s.id] = cand

    warnings: list[str] = []
    waiting: dict[tuple[str, str], DiscretePmf] = {}
    for s_id, cand in candidates.items():
        station_pmfs = []
        for line_id in cand:
            line = spec.line(line_id)
            k = line.stops.index(s_id)
            pmf = pmfs[line.waiting_pmf_ids[k]]
            waiting[(s_id, line_id)] = pmf
            station_pmfs.append(pmf)
        overlap = station_tie_mass(station_pmfs)
        if overlap > tie_mass_warn:
            warnings.append(
                f"station {s_id}: waiting supports overlap (simultaneous-arrival "
                f"mass ~{overlap:.4f} is excluded by the no-tie model)"
            )

    rides: dict[tuple[str, str], RideLink] = {}
    for s_id, cand in candidates.items():
        for line_id in cand:
            line = spec.line(line_id)
            k = line.stops.index(s_id)
            nxt = line.stops[k + 1]
            travel = pmfs[line.travel_pmf_ids[k]]
            target: Node
            if nxt == destination:
                target = DestinationNode()
            elif line_id in candidates.get(nxt, ()):
                nxt_idx = candidates[nxt].index(line_id)
                full = (1 << len(candidates[nxt])) - 1
                target = ArrivalNode(nxt, nxt_idx, full & ~(1 << nxt_idx))
            else:
                if not candidates.get(nxt):
                    raise SpecError(
                        f"line {line_id} strands riders at {nxt}: no onward candidates"
                    )
                # the ridden line is useless beyond nxt: forced alight into
                # the full-set station node with a fresh waiting clock
                target = StationNode(nxt, (1 << len(candidates[nxt])) - 1)
            rides[(s_id, line_id)] = RideLink(travel=travel, target=target, next_station=nxt)

    return ExpandedGraph(
        spec=spec,
        pmfs=pmfs,
        origin=origin,
        destination=destination,
        candidates=candidates,
        bounds=bounds,
        waiting=waiting,
        rides=rides,
        warnings=warnings,
    )
