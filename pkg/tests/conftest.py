import numpy as np
import pytest

from transit_sota import TimeGrid, build_expanded_graph
from transit_sota.dist import DiscretePmf
from transit_sota.instances import single_station_demo, three_line_corridor


@pytest.fixture(scope="session")
def demo_instance():
    return single_station_demo()


@pytest.fixture(scope="session")
def demo_graph(demo_instance):
    return build_expanded_graph(
        demo_instance.spec, demo_instance.pmfs, demo_instance.origin, demo_instance.destination
    )


@pytest.fixture(scope="session")
def corridor_instance():
    return three_line_corridor(sigma=0.25, seed=0)


@pytest.fixture(scope="session")
def corridor_graph(corridor_instance):
    return build_expanded_graph(
        corridor_instance.spec,
        corridor_instance.pmfs,
        corridor_instance.origin,
        corridor_instance.destination,
    )


def random_pmf(
    rng: np.random.Generator,
    grid: TimeGrid,
    floor: bool = True,
    tail_ok: bool = True,
    max_points: int = 4,
) -> DiscretePmf:
    lo = 1 if floor else 0
    k = int(rng.integers(1, max_points + 1))
    ticks = rng.choice(np.arange(lo, grid.budget_ticks + 1), size=k, replace=False)
    probs = rng.dirichlet(np.ones(k))
    tail = float(rng.uniform(0.0, 0.3)) if tail_ok and rng.random() < 0.3 else 0.0
    probs = probs * (1.0 - tail)
    return DiscretePmf.from_dict(
        grid, {int(t): float(p) for t, p in zip(ticks, probs)}, tail=tail
    )


def write_gtfs_fixture(root) -> None:
    """Small deterministic feed: two bus routes over three stops ~2 km apart,
    one route matching the 8:45/8:55/9:10 headway example, plus trips that
    straddle or miss the 06:00-10:00 window."""
    (root / "stops.txt").write_text(
        "stop_id,stop_name,stop_lat,stop_lon\n"
        "A,Alpha,41.8800,-87.6300\n"
        "B,Beta,41.8980,-87.6300\n"
        "C,Gamma,41.9160,-87.6300\n"
    )
    (root / "routes.txt").write_text(
        "route_id,route_short_name,route_type\n"
        "R1,1,3\n"
        "H,9,3\n"
    )
    trips = ["trip_id,route_id,service_id,direction_id"]
    stop_times = ["trip_id,stop_id,stop_sequence,departure_time"]

    def add_trip(tid, route, deps):
        trips.append(f"{tid},{route},WK,0")
        for seq, (stop, dep) in enumerate(deps, start=1):
            stop_times.append(f"{tid},{stop},{seq},{dep}")

    # R1: A->B->C every 15 minutes inside the window
    add_trip("r1-a", "R1", [("A", "06:30:00"), ("B", "06:42:00"), ("C", "06:54:00")])
    add_trip("r1-b", "R1", [("A", "06:45:00"), ("B", "06:57:00"), ("C", "07:09:00")])
    add_trip("r1-c", "R1", [("A", "07:00:00"), ("B", "07:12:00"), ("C", "07:24:00")])
    # before the window: first departure 05:50 (excluded even though it ends inside)
    add_trip("r1-early", "R1", [("A", "05:50:00"), ("B", "06:02:00"), ("C", "06:14:00")])
    # straddling the upper bound: first departure inside, rest outside (kept)
    add_trip("r1-late", "R1", [("A", "09:59:00"), ("B", "10:11:00"), ("C", "10:23:00")])
    # H: the 8:45 / 8:55 / 9:10 headway example, A->B only
    add_trip("h-1", "H", [("A", "08:45:00"), ("B", "08:57:00")])
    add_trip("h-2", "H", [("A", "08:55:00"), ("B", "09:07:00")])
    add_trip("h-3", "H", [("A", "09:10:00"), ("B", "09:22:00")])

    (root / "trips.txt").write_text("\n".join(trips) + "\n")
    (root / "stop_times.txt").write_text("\n".join(stop_times) + "\n")
