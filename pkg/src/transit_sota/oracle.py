"""Exhaustive enumeration oracle for small instances.

Computes the exact expected success probability of the optimal adaptive
policy by direct backward induction over information states: at every
arrival event the traveler knows only which lines have not yet arrived and
the elapsed/remaining ticks, and the wait branch is the conditional
expectation over the remaining joint realizations (never the realized
future, which would overstate the value).

All conditional probabilities are renormalized by explicit summation over
the raw sparse supports; there is no survival-prefix caching, no shared
product vectors and no vectorized recurrence, so agreement with the solver
to 1e-12 validates the solver's probability algebra end to end. Topology
(candidate line sets, feasibility) is shared with the network module.

Event semantics mirror the model: waiting times per station visit are drawn
fresh and independently per line when the passenger enters the station;
declining an arrival removes the line for the rest of the visit; the event
"line j arrives first after theta ticks" requires every other pending line
to arrive strictly later, so same-tick joint-arrival mass is excluded
(built-in instances make such mass zero by construction).
"""

from __future__ import annotations

from dataclasses import dataclass

from .dist import DiscretePmf
from .instances import Instance
from .network import NetworkSpec, candidate_lines, feasibility_bounds


class OracleCapError(ValueError):
    """The joint support is too large to enumerate."""


@dataclass
class _Budget:
    remaining: int

    def spend(self, n: int = 1) -> None:
        self.remaining -= n
        if self.remaining < 0:
            raise OracleCapError("enumeration cap exceeded")


def _support(pmf: DiscretePmf) -> tuple[list[tuple[int, float]], float]:
    points = [(int(t), float(p)) for t, p in enumerate(pmf.mass) if p > 0.0]
    return points, float(pmf.tail_mass)


def estimate_support(spec: NetworkSpec, pmfs: dict[str, DiscretePmf]) -> int:
    """Crude upper estimate of joint combinations across one pass of the
    network (used to refuse hopeless enumerations early)."""
    total = 1
    for line in spec.lines:
        for pid in line.travel_pmf_ids + line.waiting_pmf_ids:
            points, tail = _support(pmfs[pid])
            total *= max(1, len(points) + (1 if tail > 0 else 0))
            if total > 10**12:
                return total
    return total


def enumerate_oracle(
    instance: Instance,
    budget_ticks: int,
    cap: int = 10**6,
) -> float:
    """Exact optimal-policy success probability for one instance/budget."""
    spec, pmfs = instance.spec, instance.pmfs
    origin, destination = instance.origin, instance.destination
    estimate = estimate_support(spec, pmfs)
    if estimate > cap * 100:
        raise OracleCapError(f"joint support estimate {estimate} far exceeds the cap {cap}")
    counter = _Budget(remaining=cap)

    bounds = feasibility_bounds(spec, pmfs, destination)
    candidates = {
        s.id: candidate_lines(spec, s.id, destination, bounds) for s in spec.stations
    }
    lines = {l.id: l for l in spec.lines}

    wait_points: dict[tuple[str, str], list[tuple[int, float]]] = {}
    wait_tail: dict[tuple[str, str], float] = {}
    for s_id, cand in candidates.items():
        for line_id in cand:
            line = lines[line_id]
            k = line.stops.index(s_id)
            pts, tail = _support(pmfs[line.waiting_pmf_ids[k]])
            wait_points[(s_id, line_id)] = pts
            wait_tail[(s_id, line_id)] = tail

    def survive_after(station: str, line_id: str, r: int) -> float:
        """P(arrival strictly after r ticks), by direct summation."""
        total = wait_tail[(station, line_id)]
        for tick, p in wait_points[(station, line_id)]:
            if tick > r:
                total += p
        return total

    ride_memo: dict[tuple[str, str, int], float] = {}
    wait_memo: dict[tuple[str, tuple[str, ...], int, int], float] = {}

    def ride_value(line_id: str, station: str, t: int) -> float:
        """Expected success aboard ``line_id`` departing ``station`` with t left."""
        if t < 0:
            return 0.0
        key = (line_id, station, t)
        if key in ride_memo:
            return ride_memo[key]
        line = lines[line_id]
        k = line.stops.index(station)
        nxt = line.stops[k + 1]
        total = 0.0
        points, _tail = _support(pmfs[line.travel_pmf_ids[k]])
        for tau, p in points:
            counter.spend()
            if tau > t:
                continue
            if nxt == destination:
                total += p
            elif line_id in candidates.get(nxt, ()):
                pending = tuple(l for l in candidates[nxt] if l != line_id)
                stay = ride_value(line_id, nxt, t - tau)
                alight = wait_value(nxt, pending, 0, t - tau)
                total += p * max(stay, alight)
            else:
                total += p * wait_value(nxt, candidates[nxt], 0, t - tau)
        ride_memo[key] = total
        return total

    def wait_value(station: str, pending: tuple[str, ...], r: int, t: int) -> float:
        """Expected success waiting at ``station``: ``pending`` lines have
        not arrived during the first ``r`` ticks of this visit, ``t`` ticks
        of budget remain."""
        if t <= 0 or not pending:
            return 0.0
        key = (station, pending, r, t)
        if key in wait_memo:
            return wait_memo[key]
        denominators = {line_id: survive_after(station, line_id, r) for line_id in pending}
        value = 0.0
        for line_id in pending:
            if denominators[line_id] <= 0.0:
                continue  # exhausted line: it can no longer arrive
            for tick, p in wait_points[(station, line_id)]:
                if tick <= r or tick > r + t:
                    continue
                counter.spend()
                prob = p / denominators[line_id]
                for other in pending:
                    if other == line_id:
                        continue
                    if denominators[other] <= 0.0:
                        continue
                    prob *= survive_after(station, other, tick) / denominators[other]
                theta = tick - r
                board = ride_value(line_id, station, t - theta)
                rest = tuple(l for l in pending if l != line_id)
                wait = wait_value(station, rest, tick, t - theta)
                value += prob * max(board, wait)
        wait_memo[key] = value
        return value

    if not candidates.get(origin):
        return 0.0
    return wait_value(origin, candidates[origin], 0, budget_ticks)
