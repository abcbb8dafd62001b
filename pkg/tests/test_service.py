import time

import pytest
from fastapi.testclient import TestClient

from transit_sota.instances import single_station_demo, three_line_corridor
from transit_sota.network import ArrivalNode
from transit_sota.policy import extract_policy
from transit_sota.service import create_app
from transit_sota.solver import SolveMode, solve

GOLDEN_ROOT = 0.801125


@pytest.fixture(scope="module")
def client():
    app = create_app({"demo": single_station_demo(), "corridor": three_line_corridor()})
    return TestClient(app)


def wait_for_job(client, job_id, timeout=10.0):
    deadline = time.time() + timeout
    while time.time() < deadline:
        payload = client.get(f"/jobs/{job_id}").json()
        if payload["status"] != "pending":
            return payload
        time.sleep(0.02)
    raise TimeoutError(job_id)


def test_networks_listing(client):
    payload = client.get("/networks").json()
    ids = {entry["id"] for entry in payload}
    assert ids == {"demo", "corridor"}
    demo = next(e for e in payload if e["id"] == "demo")
    assert demo["stations"] == 2 and demo["lines"] == 3


def test_solve_job_lifecycle(client):
    r = client.post("/solve", json={"network_id": "demo", "budget": 20, "mode": "plain"})
    assert r.status_code == 200
    job = wait_for_job(client, r.json()["job_id"])
    assert job["status"] == "done"
    assert abs(job["result"]["root_utility"] - GOLDEN_ROOT) < 1e-12


def test_solve_unknown_network_404(client):
    assert client.post("/solve", json={"network_id": "nope", "budget": 10}).status_code == 404


def test_job_not_found(client):
    assert client.get("/jobs/job-99999").status_code == 404


def test_session_advice_matches_policy(client, demo_graph):
    result = solve(demo_graph, 20, mode=SolveMode.PLAIN)
    policy = extract_policy(result)
    r = client.post("/sessions", json={"network_id": "demo", "budget": 20})
    sid = r.json()["session_id"]
    assert abs(r.json()["root_utility"] - GOLDEN_ROOT) < 1e-12

    # line 3 arrives at tick 2: advice and policy agree (wait)
    adv = client.post(
        f"/sessions/{sid}/events", json={"type": "line-arrived", "line": "3", "tick": 2}
    ).json()
    assert adv["decision"] == "wait"
    assert adv["u_board"] == pytest.approx(0.70, abs=1e-12)
    node = ArrivalNode("O", 2, 0b011)
    assert policy.decide(node, 18, 2) == "wait"

    # line 1 arrives at tick 3 after declining line 3: board
    adv = client.post(
        f"/sessions/{sid}/events", json={"type": "line-arrived", "line": "1", "tick": 3}
    ).json()
    assert adv["decision"] == "board"
    assert adv["u_board"] == pytest.approx(0.80, abs=1e-12)
    assert policy.decide(ArrivalNode("O", 0, 0b010), 17, 3) == "board"

    r = client.post(f"/sessions/{sid}/events", json={"type": "boarded", "line": "1"})
    assert r.json()["state"]["phase"] == "riding"
    r = client.post(f"/sessions/{sid}/events", json={"type": "tick-advance", "n": 11})
    assert r.json()["state"]["t"] == 6
    r = client.post(f"/sessions/{sid}/events", json={"type": "alighted", "station": "D"})
    assert r.json()["state"]["phase"] == "done"


def test_session_event_validation(client):
    sid = client.post("/sessions", json={"network_id": "demo", "budget": 20}).json()["session_id"]
    # declined line cannot arrive again (first-arrival-only rule)
    client.post(f"/sessions/{sid}/events", json={"type": "line-arrived", "line": "3", "tick": 2})
    client.post(f"/sessions/{sid}/events", json={"type": "line-arrived", "line": "1", "tick": 3})
    r = client.post(f"/sessions/{sid}/events", json={"type": "line-arrived", "line": "3", "tick": 5})
    assert r.status_code == 409
    # boarding a line that has not just arrived
    r = client.post(f"/sessions/{sid}/events", json={"type": "boarded", "line": "2"})
    assert r.status_code == 409
    # time exhaustion yields 422
    r = client.post(f"/sessions/{sid}/events", json={"type": "tick-advance", "n": 1000})
    assert r.status_code == 422
    # unknown session
    assert client.post("/sessions/nope/events", json={"type": "tick-advance", "n": 1}).status_code == 404


def test_session_zero_budget(client):
    r = client.post("/sessions", json={"network_id": "demo", "budget": 0})
    assert r.json()["root_utility"] == 0.0


def test_session_custom_od_and_duration_budget(client):
    r = client.post(
        "/sessions",
        json={"network_id": "corridor", "budget": "20m", "origin": "B", "destination": "C"},
    )
    assert r.status_code == 200
    body = r.json()
    assert body["state"]["station"] == "B"
    assert body["state"]["t"] == 80  # 20 minutes of 15-second ticks
    assert 0.0 < body["root_utility"] <= 1.0


def test_simulate_endpoint_deterministic(client):
    body = {"network_id": "demo", "budget": 20, "n": 1000, "seed": 7}
    a = client.post("/simulate", json=body).json()
    b = client.post("/simulate", json=body).json()
    assert a == b
    assert abs(a["rate"] - GOLDEN_ROOT) < 0.05


def test_replay_reproduces_advice_after_restart(tmp_path):
    events = [
        {"type": "line-arrived", "line": "3", "tick": 2},
        {"type": "line-arrived", "line": "1", "tick": 3},
        {"type": "boarded", "line": "1"},
        {"type": "tick-advance", "n": 11},
        {"type": "alighted", "station": "D"},
    ]

    def run_session(log):
        app = create_app({"demo": single_station_demo()}, session_log=log)
        with TestClient(app) as c:
            sid = c.post("/sessions", json={"network_id": "demo", "budget": 20}).json()[
                "session_id"
            ]
            out = []
            for event in events:
                r = c.post(f"/sessions/{sid}/events", json=event)
                body = r.json()
                out.append((r.status_code, body.get("decision"), body.get("u_board"),
                            body.get("u_wait"), body["state"]["phase"]))
            return out

    first = run_session(tmp_path / "a.jsonl")
    second = run_session(tmp_path / "b.jsonl")
    assert first == second
    assert (tmp_path / "a.jsonl").read_text() == (tmp_path / "b.jsonl").read_text()
