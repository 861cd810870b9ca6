"""Record the play-service wire contract for the frontend's scripted tests.

Drives the real service through the classroom session flow and dumps
every request/response pair. The frontend test replays these bytes via a
fetch mock, so the UI is exercised against the service's actual shapes.

Run from the repository root:
    python3 frontend/scripts/record_contract.py
"""

from __future__ import annotations

import json
from pathlib import Path

from fastapi.testclient import TestClient

from escape_forge import fixtures
from escape_forge.layout import synthesize_layout
from escape_forge.pipeline import PuzzleBundle, RunReport
from escape_forge.play.service import PlayService, create_app
from escape_forge.scene import PuzzleSpec

OUT = Path(__file__).resolve().parent.parent / "test" / "fixtures" / "contract.json"


def bundle_for(name: str) -> PuzzleBundle:
    fx = fixtures.load(name)
    return PuzzleBundle(
        spec=PuzzleSpec(name, (name,), max_steps=fx.max_steps),
        description=fx.description,
        graph=fx.graph,
        layout=synthesize_layout(fx.graph, seed=0),
        image=None,
        official=fx.official,
        report=RunReport(status="ok"),
        bundle_id=name,
    )


def main() -> None:
    service = PlayService()
    service.register(bundle_for("classroom"))
    client = TestClient(create_app(service))
    entries = []

    def record(method: str, path: str, body=None):
        if method == "GET":
            response = client.get(path)
        else:
            response = client.post(path, json=body) if body is not None else client.post(path)
        entries.append({
            "method": method,
            "path": path,
            "body": body,
            "status": response.status_code,
            "response": response.json(),
        })
        return response.json()

    record("GET", "/bundles")
    created = record("POST", "/bundles/classroom/sessions")
    sid = created["session_id"]
    for step in fixtures.load("classroom").official.steps:
        record("POST", f"/sessions/{sid}/actions", {"text": step.gloss})
        record("GET", f"/sessions/{sid}")
    record("GET", f"/sessions/{sid}")  # the page-reload view

    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps({"session_id": sid, "entries": entries}, indent=2) + "\n",
                   "utf-8")
    print(f"wrote {OUT} ({len(entries)} exchanges)")


if __name__ == "__main__":
    main()
