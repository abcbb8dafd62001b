#!/usr/bin/env python3
"""Record the policy explorer's offline test fixtures.

Drives the advisory service through the single-station showcase session
(decline line 3 at tick 2, board line 1 at tick 3, ride to the destination)
plus the counterfactual fork where line 3 never shows up, and dumps every
request/response pair verbatim to frontend/fixtures/example_session.json.
"""

import json
from pathlib import Path

from fastapi.testclient import TestClient

from transit_sota.instances import single_station_demo
from transit_sota.service import create_app


def main() -> None:
    app = create_app({"demo": single_station_demo()})
    client = TestClient(app)
    out: dict = {}

    out["networks"] = client.get("/networks").json()

    session_request = {"network_id": "demo", "budget": 20}
    created = client.post("/sessions", json=session_request).json()
    out["session"] = {"request": session_request, "response": created}

    events = [
        {"type": "line-arrived", "line": "3", "tick": 2},
        {"type": "line-arrived", "line": "1", "tick": 3},
        {"type": "boarded", "line": "1"},
        {"type": "tick-advance", "n": 11},
        {"type": "alighted", "station": "D"},
    ]
    exchanges = []
    sid = created["session_id"]
    for event in events:
        response = client.post(f"/sessions/{sid}/events", json=event)
        exchanges.append(
            {"event": event, "status": response.status_code, "response": response.json()}
        )
    out["exchanges"] = exchanges

    # counterfactual fork: a fresh session where line 3 never arrives and
    # line 1 shows up at tick 3 with everything still pending
    fork_created = client.post("/sessions", json=session_request).json()
    fork_events = [{"type": "line-arrived", "line": "1", "tick": 3}]
    fork_exchanges = []
    for event in fork_events:
        response = client.post(
            f"/sessions/{fork_created['session_id']}/events", json=event
        )
        fork_exchanges.append(
            {"event": event, "status": response.status_code, "response": response.json()}
        )
    out["fork"] = {
        "at_step": 0,
        "session": {"request": session_request, "response": fork_created},
        "exchanges": fork_exchanges,
    }

    target = Path(__file__).resolve().parent.parent / "frontend" / "fixtures"
    target.mkdir(parents=True, exist_ok=True)
    path = target / "example_session.json"
    path.write_text(json.dumps(out, indent=2, sort_keys=True) + "\n")
    print(f"wrote {path}")


if __name__ == "__main__":
    main()
