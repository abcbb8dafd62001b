"""Versioned JSON formats: distribution bundles, network specs, manifests.

Bundle ("sota-bundle/1"): {"format", "grid": {delta_seconds, budget_ticks},
"pmfs": {id: {"mass": [...], "tail": x}}, "meta": {...}}.

Network ("sota-net/1"): {"format", "name", "grid", "stations": [...],
"lines": [{"id", "stops", "travel_pmf_ids", "waiting_pmf_ids"}]}.

Everything is serialized with sorted keys and a trailing newline so
identical inputs produce byte-identical files.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Any

from .dist import DiscretePmf
from .grid import TimeGrid
from .instances import Instance
from .network import Line, NetworkSpec, SpecError, Station

BUNDLE_FORMAT = "sota-bundle/1"
NETWORK_FORMAT = "sota-net/1"


def dumps_canonical(payload: Any) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":")) + "\n"


def write_json(path: str | Path, payload: Any) -> None:
    Path(path).write_text(dumps_canonical(payload))


def bundle_to_dict(
    grid: TimeGrid, pmfs: dict[str, DiscretePmf], meta: dict | None = None
) -> dict:
    payload = {
        "format": BUNDLE_FORMAT,
        "grid": grid.to_dict(),
        "pmfs": {pid: pmf.to_dict() for pid, pmf in pmfs.items()},
    }
    if meta:
        payload["meta"] = meta
    return payload


def bundle_from_dict(payload: dict) -> tuple[TimeGrid, dict[str, DiscretePmf]]:
    if payload.get("format", BUNDLE_FORMAT) != BUNDLE_FORMAT:
        raise SpecError(f"unsupported bundle format {payload.get('format')!r}")
    grid = TimeGrid.from_dict(payload["grid"])
    pmfs = {
        pid: DiscretePmf(grid, entry["mass"], entry.get("tail", 0.0))
        for pid, entry in payload["pmfs"].items()
    }
    return grid, pmfs


def network_to_dict(spec: NetworkSpec) -> dict:
    return {
        "format": NETWORK_FORMAT,
        "name": spec.name,
        "grid": spec.grid.to_dict(),
        "stations": [
            {k: v for k, v in
             {"id": s.id, "name": s.name, "lat": s.lat, "lon": s.lon}.items()
             if v is not None}
            for s in spec.stations
        ],
        "lines": [
            {
                "id": l.id,
                "stops": list(l.stops),
                "travel_pmf_ids": list(l.travel_pmf_ids),
                "waiting_pmf_ids": list(l.waiting_pmf_ids),
            }
            for l in spec.lines
        ],
    }


def network_from_dict(payload: dict) -> NetworkSpec:
    if payload.get("format", NETWORK_FORMAT) != NETWORK_FORMAT:
        raise SpecError(f"unsupported network format {payload.get('format')!r}")
    grid = TimeGrid.from_dict(payload["grid"])
    stations = tuple(
        Station(
            id=s["id"],
            name=s.get("name", ""),
            lat=s.get("lat"),
            lon=s.get("lon"),
        )
        for s in payload["stations"]
    )
    lines = tuple(
        Line(
            id=l["id"],
            stops=tuple(l["stops"]),
            travel_pmf_ids=tuple(l["travel_pmf_ids"]),
            waiting_pmf_ids=tuple(l["waiting_pmf_ids"]),
        )
        for l in payload["lines"]
    )
    return NetworkSpec(grid=grid, stations=stations, lines=lines, name=payload.get("name", "network"))


def save_instance(instance: Instance, bundle_path: str | Path, meta: dict | None = None) -> Path:
    """Write `<path>` (bundle) and `<path>.network.json`; returns the network path."""
    bundle_path = Path(bundle_path)
    write_json(bundle_path, bundle_to_dict(instance.spec.grid, instance.pmfs, meta=meta))
    net_path = bundle_path.with_suffix(".network.json")
    payload = network_to_dict(instance.spec)
    payload["origin"] = instance.origin
    payload["destination"] = instance.destination
    write_json(net_path, payload)
    return net_path


def load_instance(network_path: str | Path, bundle_path: str | Path) -> Instance:
    net_payload = json.loads(Path(network_path).read_text())
    spec = network_from_dict(net_payload)
    grid, pmfs = bundle_from_dict(json.loads(Path(bundle_path).read_text()))
    if not grid.compatible(spec.grid):
        raise SpecError("network and bundle grids differ")
    return Instance(
        spec=spec,
        pmfs=pmfs,
        origin=net_payload.get("origin", spec.stations[0].id),
        destination=net_payload.get("destination", spec.stations[-1].id),
    )


def sha256_file(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def run_manifest(inputs: dict[str, str | Path], config: dict) -> dict:
    """Everything needed to reproduce an output byte-identically."""
    from . import __version__

    return {
        "tool": "transit-sota",
        "version": __version__,
        "inputs": {name: sha256_file(p) for name, p in inputs.items() if Path(p).exists()},
        "config": config,
    }
