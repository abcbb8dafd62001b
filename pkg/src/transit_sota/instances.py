"""Built-in instances: a single-station decision showcase, the three-line
corridor used throughout the experiments, and randomized desk-scale
instances for property batteries and benchmarks.

Every builder emits waiting pmfs whose supports never collide across lines
at a station (phase interleaving), so the no-simultaneous-arrivals modeling
assumption holds by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dist import (
    DiscreteCdf,
    DiscretePmf,
    HeadwayModel,
    LognormalSpec,
    discretize_lognormal,
    interleave_station_pmfs,
    propagate_headway,
    waiting_from_headway,
)
from .grid import TimeGrid
from .network import Line, NetworkSpec, Station



@dataclass(frozen=True)
class Instance:
    spec: NetworkSpec
    pmfs: dict[str, DiscretePmf]
    origin: str
    destination: str


def single_station_demo() -> Instance:
    """One station, three lines, direct rides to the destination.

    Waiting times and the utility of boarding each line at each arrival time
    follow the canonical three-line showcase where the first arrival is not
    always worth boarding. Budget 20 ticks of one minute each; the travel
    pmfs are step constructions realizing the boarding utilities
    0.90/0.80/0.00, 0.85/0.00 and 0.70/0.60 at the respective arrival times.
    """
    grid = TimeGrid(delta_seconds=60.0, budget_ticks=20)
    pmfs = {
        "wait-1": DiscretePmf.from_dict(grid, {1: 0.05, 3: 0.05, 10: 0.90}),
        "wait-2": DiscretePmf.from_dict(grid, {5: 0.90, 15: 0.10}),
        "wait-3": DiscretePmf.from_dict(grid, {2: 0.50, 6: 0.50}),
        "ride-1": DiscretePmf.from_dict(grid, {11: 0.80, 18: 0.10}, tail=0.10),
        "ride-2": DiscretePmf.from_dict(grid, {6: 0.85}, tail=0.15),
        "ride-3": DiscretePmf.from_dict(grid, {12: 0.60, 17: 0.10}, tail=0.30),
    }
    stations = (Station("O", "Origin"), Station("D", "Destination"))
    lines = tuple(
        Line(
            id=str(i),
            stops=("O", "D"),
            travel_pmf_ids=(f"ride-{i}",),
            waiting_pmf_ids=(f"wait-{i}",),
        )
        for i in (1, 2, 3)
    )
    spec = NetworkSpec(grid=grid, stations=stations, lines=lines, name="single-station-demo")
    return Instance(spec=spec, pmfs=pmfs, origin="O", destination="D")


# --- three-line corridor ----------------------------------------------------

CORRIDOR_HEADWAYS_MIN = {"1": 10.0, "2": 15.0, "3": 12.0}
CORRIDOR_TRAVEL_MIN = {"1": (4.0, 5.0), "2": (4.0, 3.0), "3": (7.0, 4.0)}


def _segment_pmf(
    grid: TimeGrid, scheduled_min: float, sigma: float
) -> DiscretePmf:
    """Lognormal segment pmf for one corridor link.

    The corridor table lists one number per segment; it serves as both the
    minimum realizable time (the shift) and the mode of the lognormal part,
    which keeps small budgets infeasible and puts the pmf's argmax near
    twice the listed time.
    """
    scheduled_ticks = max(1, grid.ticks(f"{scheduled_min}m"))
    mode = float(scheduled_ticks)
    spec = LognormalSpec(
        mu=math.log(mode) + sigma**2, sigma=sigma, shift=scheduled_ticks
    )
    return discretize_lognormal(spec, grid)


def _deterministic_headway_cdf(grid: TimeGrid, h: int) -> DiscreteCdf:
    values = np.zeros(grid.budget_ticks + 1)
    values[min(h, grid.budget_ticks) :] = 1.0
    return DiscreteCdf(grid, values)


def three_line_corridor(
    sigma: float | tuple[float, float] = 0.25,
    seed: int = 0,
    delta: str = "15s",
    horizon: str = "45m",
    travel_overrides: dict[tuple[str, int], float] | None = None,
    tie_free: bool = True,
) -> Instance:
    """Three lines passing through stations A, B, C (destination C).

    Headways are deterministic at A (10/15/12 min), propagated through the
    A-to-B travel distribution to get B's headway cdf, and turned into
    waiting pmfs via the stationary residual-life rule. ``sigma`` may be a
    constant or a (lo, hi) range sampled per segment per line.
    ``travel_overrides`` replaces scheduled segment minutes, keyed by
    (line_id, segment_index) - used by the benchmark mode generators.
    """
    grid = TimeGrid.from_durations(delta, horizon)
    rng = np.random.default_rng(seed)

    def draw_sigma() -> float:
        if isinstance(sigma, tuple):
            lo, hi = sigma
            return float(rng.uniform(lo, hi))
        return float(sigma)

    pmfs: dict[str, DiscretePmf] = {}
    travel: dict[tuple[str, int], DiscretePmf] = {}
    for line_id, times in CORRIDOR_TRAVEL_MIN.items():
        for k, minutes in enumerate(times):
            if travel_overrides and (line_id, k) in travel_overrides:
                minutes = travel_overrides[(line_id, k)]
            pmf = _segment_pmf(grid, minutes, draw_sigma())
            travel[(line_id, k)] = pmf
            pmfs[f"ride-{line_id}-{k}"] = pmf

    # waiting at A: deterministic headway; at B: headway propagated through
    # the A->B travel distribution
    line_ids = sorted(CORRIDOR_HEADWAYS_MIN)
    waiting_at: dict[str, list[DiscretePmf]] = {"A": [], "B": []}
    for line_id in line_ids:
        h = grid.ticks(f"{CORRIDOR_HEADWAYS_MIN[line_id]}m")
        model_a = HeadwayModel(
            origin_headway=h, cdf=_deterministic_headway_cdf(grid, h), mean_headway=float(h)
        )
        waiting_at["A"].append(waiting_from_headway(model_a))
        cdf_b = propagate_headway(h, travel[(line_id, 0)])
        model_b = HeadwayModel(origin_headway=h, cdf=cdf_b, mean_headway=float(h))
        waiting_at["B"].append(waiting_from_headway(model_b))

    for station, plist in waiting_at.items():
        if tie_free:
            plist = interleave_station_pmfs(plist)
        for line_id, pmf in zip(line_ids, plist):
            pmfs[f"wait-{line_id}-{station}"] = pmf

    stations = (Station("A", "A"), Station("B", "B"), Station("C", "C"))
    lines = tuple(
        Line(
            id=line_id,
            stops=("A", "B", "C"),
            travel_pmf_ids=(f"ride-{line_id}-0", f"ride-{line_id}-1"),
            waiting_pmf_ids=(f"wait-{line_id}-A", f"wait-{line_id}-B"),
        )
        for line_id in line_ids
    )
    spec = NetworkSpec(grid=grid, stations=stations, lines=lines, name="three-line-corridor")
    return Instance(spec=spec, pmfs=pmfs, origin="A", destination="C")


def corridor_mode_overrides(kind: str, rng: np.random.Generator) -> dict[tuple[str, int], float]:
    """Random scheduled-minute overrides for the benchmark generators.

    ``low``: one integer i from 1..9 per link, minutes uniform in [i, i+1)
    (modes close together). ``high``: minutes uniform in [1, 10) (modes far
    apart).
    """
    out: dict[tuple[str, int], float] = {}
    for line_id in sorted(CORRIDOR_TRAVEL_MIN):
        for k in range(2):
            if kind == "low":
                i = int(rng.integers(1, 10))
                out[(line_id, k)] = float(i + rng.uniform(0.0, 1.0))
            elif kind == "high":
                out[(line_id, k)] = float(rng.uniform(1.0, 10.0))
            else:
                raise ValueError(f"unknown mode kind {kind!r}")
    return out


# --- randomized desk-scale instances ----------------------------------------


def random_instance(
    seed: int,
    max_stations: int = 4,
    max_lines: int = 3,
    budget_ticks: int = 60,
    allow_tail: bool = True,
) -> Instance:
    """Small random chain network with tie-free waiting supports.

    Line "0" spans the whole chain so the destination is always reachable;
    the others ride random contiguous pieces. Waiting supports at a station
    are phased by the line's local index, travel supports are small point
    sets, and lines may carry tail mass (a line that might never come).
    """
    rng = np.random.default_rng(seed)
    n_stations = int(rng.integers(2, max_stations + 1))
    names = [f"S{k}" for k in range(n_stations)]
    grid = TimeGrid(delta_seconds=30.0, budget_ticks=budget_ticks)

    n_lines = int(rng.integers(1, max_lines + 1))
    stops_per_line: list[tuple[str, ...]] = [tuple(names)]
    for _ in range(n_lines - 1):
        if n_stations == 2:
            stops_per_line.append(tuple(names))
            continue
        a = int(rng.integers(0, n_stations - 1))
        b = int(rng.integers(a + 1, n_stations))
        stops_per_line.append(tuple(names[a : b + 1]))

    max_ride = max(2, budget_ticks // (2 * n_stations))
    pmfs: dict[str, DiscretePmf] = {}

    def random_travel(tag: str) -> str:
        k = int(rng.integers(1, 4))
        ticks = rng.choice(np.arange(1, max_ride + 1), size=k, replace=False)
        probs = rng.dirichlet(np.ones(k))
        tail = 0.0
        if allow_tail and rng.random() < 0.1:
            tail = float(rng.uniform(0.05, 0.2))
            probs = probs * (1.0 - tail)
        pmfs[tag] = DiscretePmf.from_dict(
            grid, {int(t): float(p) for t, p in zip(ticks, probs)}, tail=tail
        )
        return tag

    serving: dict[str, list[int]] = {name: [] for name in names}
    for li, stops in enumerate(stops_per_line):
        for s in stops[:-1]:
            serving[s].append(li)

    def random_wait(tag: str, phase: int, n_phases: int) -> str:
        k = int(rng.integers(1, 4))
        max_slot = max(1, (budget_ticks - 2) // max(1, n_phases))
        slots = rng.choice(np.arange(0, max_slot), size=min(k, max_slot), replace=False)
        ticks = [int(s) * n_phases + phase + 1 for s in slots]
        probs = rng.dirichlet(np.ones(len(ticks)))
        tail = 0.0
        if allow_tail and rng.random() < 0.25:
            tail = float(rng.uniform(0.1, 0.4))
            probs = probs * (1.0 - tail)
        pmfs[tag] = DiscretePmf.from_dict(
            grid, {t: float(p) for t, p in zip(ticks, probs)}, tail=tail
        )
        return tag

    lines = []
    for li, stops in enumerate(stops_per_line):
        travel_ids = tuple(random_travel(f"ride-{li}-{k}") for k in range(len(stops) - 1))
        wait_ids = []
        for k, s in enumerate(stops[:-1]):
            phase = serving[s].index(li)
            wait_ids.append(random_wait(f"wait-{li}-{s}", phase, len(serving[s])))
        lines.append(
            Line(
                id=str(li),
                stops=stops,
                travel_pmf_ids=travel_ids,
                waiting_pmf_ids=tuple(wait_ids),
            )
        )

    spec = NetworkSpec(
        grid=grid,
        stations=tuple(Station(n) for n in names),
        lines=tuple(lines),
        name=f"random-{seed}",
    )
    return Instance(spec=spec, pmfs=pmfs, origin=names[0], destination=names[-1])
