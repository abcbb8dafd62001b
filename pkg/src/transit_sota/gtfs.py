"""GTFS feed ingestion and distribution calibration.

Pipeline: slice the feed to a service date and time window, assemble
directed lines per (route, direction), then calibrate per-segment lognormal
travel distributions (minimum realizable time from stop spacing and a speed
limit, mode from scheduled gaps, sigma drawn uniformly from a configured
range), propagate origin headways through the travel distributions, and
derive waiting pmfs via the stationary residual-life rule. Waiting supports
at each station are phase-interleaved across its lines so no two lines can
arrive within one tick.

Identical (feed, config, seed) inputs produce byte-identical bundles.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dist import (
    DiscreteCdf,
    DiscretePmf,
    HeadwayModel,
    LognormalSpec,
    convolve,
    discretize_lognormal,
    interleave_station_pmfs,
    propagate_headway,
    waiting_from_headway,
)
from .grid import TimeGrid
from .instances import Instance
from .network import Line, NetworkSpec, Station

REQUIRED_TABLES = ("stops.txt", "routes.txt", "trips.txt", "stop_times.txt")
EARTH_RADIUS_M = 6_371_000.0

RAIL_ROUTE_TYPES = {0, 1, 2}  # tram, metro, rail


class GtfsError(ValueError):
    pass


@dataclass(frozen=True)
class CalibrationConfig:
    sigma_range: tuple[float, float] = (0.25, 0.5)
    seed: int = 0
    window: tuple[str, str] = ("06:00", "10:00")
    delta: str = "15s"
    horizon: str = "45m"
    speed_road_kmh: float = 50.0
    speed_rail_kmh: float = 80.0
    speed_overrides: dict[str, float] = field(default_factory=dict)  # route_id -> km/h
    service_date: str | None = None  # YYYYMMDD
    tie_free: bool = True

    def __post_init__(self) -> None:
        lo, hi = self.sigma_range
        if not 0 < lo <= hi:
            raise ValueError("sigma_range must satisfy 0 < lo <= hi")

    def grid(self) -> TimeGrid:
        return TimeGrid.from_durations(self.delta, self.horizon)


@dataclass
class GtfsSlice:
    stops: dict[str, dict]
    routes: dict[str, dict]
    trips: dict[str, dict]
    stop_times: dict[str, list[dict]]  # trip_id -> ordered rows
    window_seconds: tuple[int, int]
    warnings: list[str] = field(default_factory=list)


@dataclass
class CalibrationReport:
    warnings: list[str] = field(default_factory=list)
    dropped_lines: list[str] = field(default_factory=list)
    n_lines: int = 0
    n_stations: int = 0

    def to_dict(self) -> dict:
        return {
            "warnings": self.warnings,
            "dropped_lines": self.dropped_lines,
            "n_lines": self.n_lines,
            "n_stations": self.n_stations,
        }


def parse_gtfs_time(text: str) -> int:
    """GTFS HH:MM:SS (hours may exceed 24) to seconds since midnight."""
    parts = text.strip().split(":")
    if len(parts) != 3:
        raise ValueError(f"unparsable GTFS time {text!r}")
    h, m, s = (int(p) for p in parts)
    if m >= 60 or s >= 60 or h < 0 or m < 0 or s < 0:
        raise ValueError(f"unparsable GTFS time {text!r}")
    return h * 3600 + m * 60 + s


def _read_table(feed_dir: Path, name: str, warnings: list[str]) -> list[dict]:
    path = feed_dir / name
    if not path.exists():
        raise GtfsError(f"missing required GTFS table {name}")
    with path.open(newline="", encoding="utf-8-sig") as fh:
        return list(csv.DictReader(fh))


def _active_service_ids(feed_dir: Path, date: str, warnings: list[str]) -> set[str] | None:
    cal_path = feed_dir / "calendar.txt"
    dates_path = feed_dir / "calendar_dates.txt"
    if not cal_path.exists() and not dates_path.exists():
        warnings.append("no calendar tables; service date filter skipped")
        return None
    import datetime as _dt

    day = _dt.datetime.strptime(date, "%Y%m%d").date()
    weekday_cols = ["monday", "tuesday", "wednesday", "thursday", "friday", "saturday", "sunday"]
    active: set[str] = set()
    if cal_path.exists():
        with cal_path.open(newline="", encoding="utf-8-sig") as fh:
            for row in csv.DictReader(fh):
                try:
                    start = _dt.datetime.strptime(row["start_date"], "%Y%m%d").date()
                    end = _dt.datetime.strptime(row["end_date"], "%Y%m%d").date()
                except (KeyError, ValueError):
                    continue
                if start <= day <= end and row.get(weekday_cols[day.weekday()], "0") == "1":
                    active.add(row["service_id"])
    if dates_path.exists():
        with dates_path.open(newline="", encoding="utf-8-sig") as fh:
            for row in csv.DictReader(fh):
                if row.get("date") != date:
                    continue
                if row.get("exception_type") == "1":
                    active.add(row["service_id"])
                elif row.get("exception_type") == "2":
                    active.discard(row["service_id"])
    return active


def load_slice(feed_dir: str | Path, config: CalibrationConfig) -> GtfsSlice:
    """Feed restricted to the window; a trip is kept iff its first departure
    falls inside. Malformed rows are reported with row numbers and skipped."""
    feed_dir = Path(feed_dir)
    warnings: list[str] = []
    stops_rows = _read_table(feed_dir, "stops.txt", warnings)
    routes_rows = _read_table(feed_dir, "routes.txt", warnings)
    trips_rows = _read_table(feed_dir, "trips.txt", warnings)
    st_rows = _read_table(feed_dir, "stop_times.txt", warnings)

    stops: dict[str, dict] = {}
    for i, row in enumerate(stops_rows, start=2):
        sid = row.get("stop_id", "").strip()
        if not sid:
            warnings.append(f"stops.txt row {i}: missing stop_id, skipped")
            continue
        try:
            row["_lat"] = float(row.get("stop_lat", ""))
            row["_lon"] = float(row.get("stop_lon", ""))
        except ValueError:
            warnings.append(f"stops.txt row {i}: bad coordinates, skipped")
            continue
        stops[sid] = row

    routes = {r["route_id"]: r for r in routes_rows if r.get("route_id")}

    active = None
    if config.service_date:
        active = _active_service_ids(feed_dir, config.service_date, warnings)

    trips: dict[str, dict] = {}
    for i, row in enumerate(trips_rows, start=2):
        tid = row.get("trip_id", "").strip()
        if not tid or row.get("route_id") not in routes:
            warnings.append(f"trips.txt row {i}: unresolved trip/route id, skipped")
            continue
        if active is not None and row.get("service_id") not in active:
            continue
        trips[tid] = row

    by_trip: dict[str, list[dict]] = {}
    for i, row in enumerate(st_rows, start=2):
        tid = row.get("trip_id", "").strip()
        if tid not in trips:
            continue
        try:
            row["_seq"] = int(row["stop_sequence"])
            t = row.get("departure_time") or row.get("arrival_time") or ""
            row["_dep"] = parse_gtfs_time(t)
        except (KeyError, ValueError):
            warnings.append(f"stop_times.txt row {i}: unparsable sequence/time, skipped")
            continue
        if row.get("stop_id") not in stops:
            warnings.append(f"stop_times.txt row {i}: unknown stop, skipped")
            continue
        by_trip.setdefault(tid, []).append(row)

    lo = _window_seconds(config.window[0])
    hi = _window_seconds(config.window[1])
    stop_times: dict[str, list[dict]] = {}
    kept_trips: dict[str, dict] = {}
    for tid, rows in by_trip.items():
        rows.sort(key=lambda r: r["_seq"])
        seqs = [r["_seq"] for r in rows]
        if len(rows) < 2 or len(set(seqs)) != len(seqs):
            warnings.append(f"trip {tid}: fewer than 2 usable stop_times or duplicate sequence")
            continue
        deps = [r["_dep"] for r in rows]
        if any(b < a for a, b in zip(deps, deps[1:])):
            warnings.append(f"trip {tid}: non-increasing departure times, skipped")
            continue
        first_dep = rows[0]["_dep"]
        if not (lo <= first_dep < hi):
            continue
        stop_times[tid] = rows
        kept_trips[tid] = trips[tid]

    return GtfsSlice(
        stops=stops,
        routes=routes,
        trips=kept_trips,
        stop_times=stop_times,
        window_seconds=(lo, hi),
        warnings=warnings,
    )


def _window_seconds(text: str) -> int:
    parts = text.strip().split(":")
    if len(parts) == 2:
        return int(parts[0]) * 3600 + int(parts[1]) * 60
    return parse_gtfs_time(text)


def haversine_m(lat1: float, lon1: float, lat2: float, lon2: float) -> float:
    phi1, phi2 = math.radians(lat1), math.radians(lat2)
    dphi = phi2 - phi1
    dlam = math.radians(lon2 - lon1)
    a = math.sin(dphi / 2) ** 2 + math.cos(phi1) * math.cos(phi2) * math.sin(dlam / 2) ** 2
    return 2 * EARTH_RADIUS_M * math.asin(min(1.0, math.sqrt(a)))


def calibrate_segment(
    distance_m: float,
    gap_seconds: float,
    speed_kmh: float,
    sigma: float,
    grid: TimeGrid,
    warnings: list[str],
    tag: str = "",
) -> LognormalSpec:
    """Lognormal spec for one segment: shift from the speed limit, mode from
    the scheduled gap, mu from mode and sigma (mode = exp(mu - sigma^2))."""
    if gap_seconds <= 0:
        warnings.append(f"{tag}: nonpositive scheduled gap, clamped to one tick")
    if distance_m <= 0:
        warnings.append(f"{tag}: nonpositive stop spacing, minimum time floored to one tick")
        tm_ticks = 1
    else:
        tm_seconds = distance_m / (speed_kmh / 3.6)
        tm_ticks = max(1, grid.ticks_ceil(tm_seconds))
    gap_ticks = grid.ticks(max(0.0, gap_seconds))
    mode = float(gap_ticks - tm_ticks)
    if mode < 1.0:
        warnings.append(f"{tag}: scheduled gap within the minimum realizable time, mode clamped")
        mode = 1.0
    return LognormalSpec(mu=math.log(mode) + sigma**2, sigma=sigma, shift=tm_ticks)


def estimate_origin_headway(departures_seconds: list[int], grid: TimeGrid) -> int:
    """Mean gap between consecutive scheduled departures, in ticks."""
    if len(departures_seconds) < 2:
        raise GtfsError("need at least two trips to estimate a headway")
    deps = sorted(departures_seconds)
    gaps = [b - a for a, b in zip(deps, deps[1:])]
    mean_gap = sum(gaps) / len(gaps)
    return max(1, grid.ticks(mean_gap))


def _assemble_lines(slice_: GtfsSlice, report: CalibrationReport) -> dict[str, dict]:
    """Group trips into directed lines keyed '{route}.{direction}'.

    The line's stop sequence is the most frequent in-window sequence (ties:
    longest, then lexicographic); repeated stations keep the first visit.
    """
    grouped: dict[str, list[str]] = {}
    for tid, trip in slice_.trips.items():
        key = f"{trip['route_id']}.{trip.get('direction_id') or '0'}"
        grouped.setdefault(key, []).append(tid)

    lines: dict[str, dict] = {}
    for line_id in sorted(grouped):
        tids = grouped[line_id]
        seq_count: dict[tuple[str, ...], int] = {}
        for tid in tids:
            seq = tuple(r["stop_id"] for r in slice_.stop_times[tid])
            seq_count[seq] = seq_count.get(seq, 0) + 1
        best = sorted(seq_count.items(), key=lambda kv: (-kv[1], -len(kv[0]), kv[0]))[0][0]
        chosen = [tid for tid in tids if tuple(r["stop_id"] for r in slice_.stop_times[tid]) == best]
        if len(chosen) < len(tids):
            report.warnings.append(
                f"line {line_id}: {len(tids) - len(chosen)} trips with deviating stop"
                " sequences ignored"
            )
        stops: list[str] = []
        for sid in best:
            if sid in stops:
                report.warnings.append(f"line {line_id}: repeated stop {sid} dropped")
                continue
            stops.append(sid)
        if len(stops) < 2:
            report.dropped_lines.append(line_id)
            report.warnings.append(f"line {line_id}: fewer than two distinct stops, dropped")
            continue
        if len(chosen) < 2:
            report.dropped_lines.append(line_id)
            report.warnings.append(f"line {line_id}: fewer than two in-window trips, dropped")
            continue
        chosen.sort(key=lambda tid: slice_.stop_times[tid][0]["_dep"])
        lines[line_id] = {
            "route_id": slice_.trips[chosen[0]]["route_id"],
            "stops": stops,
            "trips": chosen,
        }
    return lines


def build_bundle(
    slice_: GtfsSlice, config: CalibrationConfig
) -> tuple[Instance | None, CalibrationReport]:
    """NetworkSpec plus calibrated distribution bundle from a feed slice."""
    grid = config.grid()
    rng = np.random.default_rng(config.seed)
    report = CalibrationReport(warnings=list(slice_.warnings))
    lines_raw = _assemble_lines(slice_, report)
    if not lines_raw:
        report.warnings.append("no usable lines in the window")
        return None, report

    lo, hi = config.sigma_range
    pmfs: dict[str, DiscretePmf] = {}
    line_objs: list[Line] = []
    waiting_raw: dict[str, list[tuple[str, DiscretePmf]]] = {}  # station -> [(line, pmf)]
    used_stops: set[str] = set()

    for line_id in sorted(lines_raw):
        entry = lines_raw[line_id]
        stops = entry["stops"]
        route = slice_.routes[entry["route_id"]]
        try:
            route_type = int(route.get("route_type", 3))
        except ValueError:
            route_type = 3
        speed = config.speed_overrides.get(
            entry["route_id"],
            config.speed_rail_kmh if route_type in RAIL_ROUTE_TYPES else config.speed_road_kmh,
        )

        # scheduled gaps from the earliest in-window trip of this sequence
        rep_trip = slice_.stop_times[entry["trips"][0]]
        dep_by_stop = {r["stop_id"]: r["_dep"] for r in rep_trip}
        travel_ids = []
        cumulative: DiscretePmf | None = None
        cum_by_index: list[DiscretePmf] = []
        for k, (a, b) in enumerate(zip(stops, stops[1:])):
            sa, sb = slice_.stops[a], slice_.stops[b]
            dist = haversine_m(sa["_lat"], sa["_lon"], sb["_lat"], sb["_lon"])
            gap = dep_by_stop.get(b, 0) - dep_by_stop.get(a, 0)
            sigma = float(rng.uniform(lo, hi)) if hi > lo else lo
            spec = calibrate_segment(
                dist, gap, speed, sigma, grid, report.warnings, tag=f"{line_id} {a}->{b}"
            )
            pmf = discretize_lognormal(spec, grid)
            pid = f"ride-{line_id}-{k}"
            pmfs[pid] = pmf
            travel_ids.append(pid)
            cumulative = pmf if cumulative is None else convolve(cumulative, pmf)
            cum_by_index.append(cumulative)

        departures = [slice_.stop_times[tid][0]["_dep"] for tid in entry["trips"]]
        h_ticks = estimate_origin_headway(departures, grid)

        waiting_ids = []
        for k, stop in enumerate(stops[:-1]):
            if k == 0:
                values = np.zeros(grid.budget_ticks + 1)
                values[min(h_ticks, grid.budget_ticks) :] = 1.0
                cdf = DiscreteCdf(grid, values)
            else:
                cdf = propagate_headway(h_ticks, cum_by_index[k - 1])
            model = HeadwayModel(origin_headway=h_ticks, cdf=cdf, mean_headway=float(h_ticks))
            wait_pmf = waiting_from_headway(model)
            pid = f"wait-{line_id}-{stop}"
            waiting_ids.append(pid)
            waiting_raw.setdefault(stop, []).append((pid, wait_pmf))

        line_objs.append(
            Line(
                id=line_id,
                stops=tuple(stops),
                travel_pmf_ids=tuple(travel_ids),
                waiting_pmf_ids=tuple(waiting_ids),
            )
        )
        used_stops.update(stops)

    # interleave waiting supports per station so lines can never tie
    for stop in sorted(waiting_raw):
        entries = sorted(waiting_raw[stop])
        plist = [pmf for _pid, pmf in entries]
        if config.tie_free:
            plist = interleave_station_pmfs(plist)
        for (pid, _), pmf in zip(entries, plist):
            pmfs[pid] = pmf

    stations = tuple(
        Station(
            id=sid,
            name=slice_.stops[sid].get("stop_name", ""),
            lat=slice_.stops[sid]["_lat"],
            lon=slice_.stops[sid]["_lon"],
        )
        for sid in sorted(used_stops)
    )
    spec = NetworkSpec(grid=grid, stations=stations, lines=tuple(line_objs), name="gtfs")
    report.n_lines = len(line_objs)
    report.n_stations = len(stations)
    instance = Instance(
        spec=spec, pmfs=pmfs, origin=stations[0].id, destination=stations[-1].id
    )
    return instance, report
