"""HTTP advisory service.

Serves loaded networks, asynchronous solves, seeded simulations and
interactive board/wait advisory sessions. A session pins one network, one
origin/destination and one budget; the solve happens at session start and
every piece of advice is a table lookup, so replaying an event log against
a fresh process reproduces identical advice.

Session events:
  line-arrived {line, tick}  tick = total ticks waited at the current
                             station; earlier un-boarded arrivals are
                             implicitly declined (a line arrives once per
                             visit)
  boarded {line}             must follow that line's arrival event
  tick-advance {n}           time passes without an arrival
  alighted {station}         leave the vehicle at a downstream stop (the
                             client advances time separately)
"""

from __future__ import annotations

import itertools
import json
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel

from .instances import Instance
from .network import ArrivalNode, ExpandedGraph, build_expanded_graph
from .policy import Policy, simulate
from .solver import SolveMode, Solver, UtilityTable


class SolveRequest(BaseModel):
    network_id: str
    budget: str | int
    origin: Optional[str] = None
    destination: Optional[str] = None
    mode: str = "dominance"


class SessionRequest(BaseModel):
    network_id: str
    budget: str | int
    origin: Optional[str] = None
    destination: Optional[str] = None


class EventRequest(BaseModel):
    type: str
    line: Optional[str] = None
    tick: Optional[int] = None
    station: Optional[str] = None
    n: Optional[int] = None


class SimulateRequest(BaseModel):
    network_id: str
    budget: str | int
    n: int = 1000
    seed: int = 0
    mode: str = "plain"
    collision: str = "redraw"
    origin: Optional[str] = None
    destination: Optional[str] = None


@dataclass
class LoadedNetwork:
    network_id: str
    instance: Instance


@dataclass
class Session:
    session_id: str
    network_id: str
    origin: str
    destination: str
    budget: int
    graph: ExpandedGraph
    table: UtilityTable
    station: str
    t: int
    r: int = 0
    phase: str = "waiting"  # waiting | riding | done | failed
    riding: Optional[str] = None
    pending: list[str] = field(default_factory=list)
    last_arrival: Optional[tuple[str, int]] = None
    events: list[dict] = field(default_factory=list)
    lock: threading.Lock = field(default_factory=threading.Lock)
    solver_lock: threading.Lock = field(default_factory=threading.Lock)

    def state_echo(self) -> dict:
        return {
            "station": self.station,
            "phase": self.phase,
            "t": self.t,
            "r": self.r,
            "pending": list(self.pending),
            "riding": self.riding,
            "budget": self.budget,
            "history_len": len(self.events),
        }


def _budget_ticks(instance: Instance, budget: str | int) -> int:
    if isinstance(budget, int):
        ticks = budget
    else:
        try:
            ticks = int(budget)
        except ValueError:
            try:
                ticks = instance.spec.grid.ticks(budget)
            except ValueError as exc:
                raise HTTPException(422, f"unparsable budget {budget!r}") from exc
    if not 0 <= ticks <= instance.spec.grid.budget_ticks:
        raise HTTPException(422, f"budget must lie within 0..{instance.spec.grid.budget_ticks} ticks")
    return ticks


def create_app(
    networks: dict[str, Instance],
    session_log: str | Path | None = None,
    max_workers: int = 2,
) -> FastAPI:
    app = FastAPI(title="transit-sota advisory service")
    # the explorer page is served from a different origin than the API
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    graphs: dict[tuple[str, str, str], ExpandedGraph] = {}
    solvers: dict[tuple[str, str, str], tuple[Solver, threading.Lock]] = {}
    jobs: dict[str, dict] = {}
    sessions: dict[str, Session] = {}
    counter = itertools.count(1)
    executor = ThreadPoolExecutor(max_workers=max_workers)
    log_path = Path(session_log) if session_log else None
    state_lock = threading.Lock()

    def _append_log(record: dict) -> None:
        if log_path is None:
            return
        with state_lock:
            with log_path.open("a") as fh:
                fh.write(json.dumps(record, sort_keys=True) + "\n")

    def _network(network_id: str) -> Instance:
        if network_id not in networks:
            raise HTTPException(404, f"unknown network {network_id!r}")
        return networks[network_id]

    def _graph(network_id: str, origin: str | None, destination: str | None) -> ExpandedGraph:
        inst = _network(network_id)
        o = origin or inst.origin
        d = destination or inst.destination
        key = (network_id, o, d)
        with state_lock:
            if key not in graphs:
                try:
                    graphs[key] = build_expanded_graph(inst.spec, inst.pmfs, o, d)
                except (ValueError, KeyError) as exc:
                    raise HTTPException(422, str(exc)) from exc
            return graphs[key]

    def _solver(
        network_id: str, origin: str | None, destination: str | None
    ) -> tuple[Solver, threading.Lock]:
        """Shared solver per (network, od) plus the lock serializing queries
        that may extend its lazily-growing memo."""
        graph = _graph(network_id, origin, destination)
        key = (network_id, graph.origin_station, graph.destination)
        with state_lock:
            if key not in solvers:
                solvers[key] = (Solver(graph, mode=SolveMode.DOMINANCE), threading.Lock())
            return solvers[key]

    @app.get("/networks")
    def list_networks() -> list[dict]:
        return [
            {
                "id": nid,
                "name": inst.spec.name,
                "stations": len(inst.spec.stations),
                "lines": len(inst.spec.lines),
                "default_origin": inst.origin,
                "default_destination": inst.destination,
                "grid": inst.spec.grid.to_dict(),
            }
            for nid, inst in sorted(networks.items())
        ]

    @app.post("/solve")
    def submit_solve(req: SolveRequest) -> dict:
        inst = _network(req.network_id)
        budget = _budget_ticks(inst, req.budget)
        try:
            mode = SolveMode(req.mode)
        except ValueError as exc:
            raise HTTPException(422, f"unknown mode {req.mode!r}") from exc
        job_id = f"job-{next(counter)}"
        jobs[job_id] = {"status": "pending"}

        def run() -> None:
            try:
                graph = _graph(req.network_id, req.origin, req.destination)
                solver = Solver(graph, mode=mode)
                root = solver.root_value(budget)
                jobs[job_id] = {
                    "status": "done",
                    "result": {
                        "root_utility": root,
                        "budget_ticks": budget,
                        "mode": mode.value,
                        "stats": solver.stats.to_dict(),
                    },
                }
            except Exception as exc:  # surfaced through the polling endpoint
                jobs[job_id] = {"status": "error", "error": str(exc)}

        executor.submit(run)
        return {"job_id": job_id}

    @app.get("/jobs/{job_id}")
    def poll_job(job_id: str) -> dict:
        if job_id not in jobs:
            raise HTTPException(404, f"unknown job {job_id!r}")
        return jobs[job_id]

    @app.post("/sessions")
    def create_session(req: SessionRequest) -> dict:
        inst = _network(req.network_id)
        budget = _budget_ticks(inst, req.budget)
        solver, solver_lock = _solver(req.network_id, req.origin, req.destination)
        graph = solver.graph
        with solver_lock:
            root = solver.root_value(budget)
        session_id = f"session-{next(counter)}"
        session = Session(
            session_id=session_id,
            network_id=req.network_id,
            origin=graph.origin_station,
            destination=graph.destination,
            budget=budget,
            graph=graph,
            table=UtilityTable(solver),
            station=graph.origin_station,
            t=budget,
            pending=list(graph.lines_at(graph.origin_station)),
            solver_lock=solver_lock,
        )
        sessions[session_id] = session
        _append_log({"kind": "session", "session": session_id, "request": req.model_dump()})
        return {
            "session_id": session_id,
            "root_utility": root,
            "state": session.state_echo(),
        }

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str) -> dict:
        if session_id not in sessions:
            raise HTTPException(404, f"unknown session {session_id!r}")
        return {"session_id": session_id, "state": sessions[session_id].state_echo()}

    @app.post("/sessions/{session_id}/events")
    def post_event(session_id: str, event: EventRequest) -> dict:
        if session_id not in sessions:
            raise HTTPException(404, f"unknown session {session_id!r}")
        session = sessions[session_id]
        with session.lock:
            advice = _apply_event(session, event)
        _append_log({"kind": "event", "session": session_id,
                     "event": event.model_dump(), "advice": advice})
        return advice

    @app.post("/simulate")
    def run_simulation(req: SimulateRequest) -> dict:
        inst = _network(req.network_id)
        budget = _budget_ticks(inst, req.budget)
        if req.n < 1:
            raise HTTPException(422, "n must be >= 1")
        solver, solver_lock = _solver(req.network_id, req.origin, req.destination)
        with solver_lock:
            solver.root_value(budget)
        policy = Policy(table=UtilityTable(solver))
        report = simulate(
            policy,
            solver.graph,
            n=req.n,
            seed=req.seed,
            budget_ticks=budget,
            collision_policy=req.collision,
        )
        return report.to_dict()

    return app


def _apply_event(session: Session, event: EventRequest) -> dict:
    graph = session.graph
    state_only = {"decision": None, "u_board": None, "u_wait": None}

    if session.phase in ("done", "failed"):
        raise HTTPException(409, f"trip already {session.phase}")

    if event.type == "tick-advance":
        n = event.n or 0
        if n < 0:
            raise HTTPException(422, "n must be nonnegative")
        if session.t - n < 0:
            session.phase = "failed"
            session.events.append(event.model_dump())
            raise HTTPException(422, "time budget exhausted")
        session.t -= n
        if session.phase == "waiting":
            session.r += n
        session.events.append(event.model_dump())
        return {**state_only, "state": session.state_echo()}

    if event.type == "line-arrived":
        if session.phase != "waiting":
            raise HTTPException(409, "not waiting at a station")
        if event.line is None or event.tick is None:
            raise HTTPException(422, "line-arrived needs line and tick")
        if event.line not in session.pending:
            raise HTTPException(
                409,
                f"line {event.line!r} is not awaitable here (already declined, "
                "boarded, or never a candidate)",
            )
        if event.tick < session.r:
            raise HTTPException(409, f"tick {event.tick} precedes elapsed wait {session.r}")
        delta = event.tick - session.r
        if session.t - delta < 0:
            session.phase = "failed"
            session.events.append(event.model_dump())
            raise HTTPException(422, "time budget exhausted")
        # an un-boarded earlier arrival is implicitly declined
        if session.last_arrival is not None:
            declined = session.last_arrival[0]
            if declined in session.pending:
                session.pending.remove(declined)
            if event.line not in session.pending:
                raise HTTPException(409, f"line {event.line!r} already declined")
        session.t -= delta
        session.r = event.tick
        session.last_arrival = (event.line, event.tick)
        session.events.append(event.model_dump())
        idx = graph.local_index(session.station, event.line)
        mask = 0
        for line_id in session.pending:
            if line_id != event.line:
                mask |= 1 << graph.local_index(session.station, line_id)
        node = ArrivalNode(session.station, idx, mask)
        with session.solver_lock:
            u_board, u_wait = session.table.board_and_wait(node, session.t, session.r)
        decision = "board" if u_board >= u_wait else "wait"
        return {
            "decision": decision,
            "line": event.line,
            "u_board": u_board,
            "u_wait": u_wait,
            "state": session.state_echo(),
        }

    if event.type == "boarded":
        if session.phase != "waiting" or session.last_arrival is None:
            raise HTTPException(409, "no arrival to board")
        if event.line != session.last_arrival[0]:
            raise HTTPException(409, f"line {event.line!r} has not just arrived")
        session.phase = "riding"
        session.riding = event.line
        session.pending = []
        session.last_arrival = None
        session.r = 0
        session.events.append(event.model_dump())
        return {**state_only, "state": session.state_echo()}

    if event.type == "alighted":
        if session.phase != "riding" or session.riding is None:
            raise HTTPException(409, "not riding")
        line = graph.spec.line(session.riding)
        if event.station not in line.stops:
            raise HTTPException(409, f"station {event.station!r} is not on line {session.riding}")
        session.station = event.station
        session.r = 0
        session.events.append(event.model_dump())
        if event.station == session.destination:
            session.phase = "done" if session.t >= 0 else "failed"
            session.riding = None
            return {**state_only, "state": session.state_echo()}
        cand = list(graph.lines_at(event.station))
        ridden = session.riding
        session.riding = None
        session.phase = "waiting"
        session.pending = [l for l in cand if l != ridden]
        if not session.pending:
            session.phase = "failed"
        return {**state_only, "state": session.state_echo()}

    raise HTTPException(422, f"unknown event type {event.type!r}")
