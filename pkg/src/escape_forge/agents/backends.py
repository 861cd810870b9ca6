"""Backend contract plus scripted, dry-run and live adapters.

Every call is recorded to a transcript (one JSON object per line), so a
run can be audited or replayed byte-for-byte. The scripted backend keys
its canned responses on (role, stage, turn index) and is the workhorse
for offline tests; the dry-run wrapper records image requests instead of
executing them.
"""

from __future__ import annotations

import base64
import json
import os
import time
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import BackendError
from ..images import BackendRequest, BackendResponse

ENV_API_BASE = "ESCAPE_FORGE_API_BASE"
ENV_API_KEY = "ESCAPE_FORGE_API_KEY"
ENV_BACKEND = "ESCAPE_FORGE_BACKEND"

PLACEHOLDER_PNG = base64.b64decode(
    # 1x1 white PNG; stands in for generated pixels in scripted runs.
    "iVBORw0KGgoAAAANSUhEUgAAAAEAAAABCAYAAAAfFcSJAAAADUlEQVR4nGP4"
    "//8/AwAI/AL+XJ/QHgAAAABJRU5ErkJggg=="
)


class Backend:
    """Minimal contract: complete one request, count your calls."""

    name = "backend"

    def __init__(self):
        self.calls = 0
        self.image_calls = 0
        self.network_calls = 0

    def complete(self, request: BackendRequest) -> BackendResponse:
        self.calls += 1
        if request.kind in ("image", "image_edit"):
            self.image_calls += 1
        return self._complete(request)

    def _complete(self, request: BackendRequest) -> BackendResponse:
        raise NotImplementedError


class ScriptedBackend(Backend):
    """Replays canned responses keyed on (role, stage, turn index)."""

    name = "scripted"

    def __init__(self, turns: dict[tuple[str, str], list] | None = None):
        super().__init__()
        self._turns: dict[tuple[str, str], list] = {
            key: list(entries) for key, entries in (turns or {}).items()
        }
        self._cursor: dict[tuple[str, str], int] = {}
        self.history: list[BackendRequest] = []

    @classmethod
    def from_file(cls, path: str | Path) -> "ScriptedBackend":
        entries = json.loads(Path(path).read_text("utf-8"))
        turns: dict[tuple[str, str], list] = {}
        for entry in sorted(entries, key=lambda x: x.get("turn", 0)):
            key = (entry["role"], entry["stage"])
            turns.setdefault(key, []).append(entry)
        return cls(turns)

    def add(self, role: str, stage: str, text: str = "", image: bytes | None = None):
        self._turns.setdefault((role, stage), []).append(
            {"text": text, "image": image}
        )
        return self

    def _complete(self, request: BackendRequest) -> BackendResponse:
        self.history.append(request)
        key = (request.role, request.stage)
        queue = self._turns.get(key, [])
        index = self._cursor.get(key, 0)
        is_image = request.kind in ("image", "image_edit")
        entry = queue[index] if index < len(queue) else None
        entry_is_image = bool(entry) and entry.get("kind") in ("image", "image_edit")
        if is_image and (entry is None or not entry_is_image):
            # Pixel generation defaults to a placeholder; scenarios only
            # script it when the bytes matter.
            return BackendResponse(image=PLACEHOLDER_PNG, usage={"scripted": True})
        if entry is None:
            raise BackendError(f"scripted backend exhausted for {key} at turn {index}")
        if not is_image and entry_is_image:
            raise BackendError(f"scripted backend expected an image call for {key} at turn {index}")
        self._cursor[key] = index + 1
        image = entry.get("image")
        if isinstance(image, str):
            image = base64.b64decode(image)
        if image is None and "image_b64" in entry:
            image = base64.b64decode(entry["image_b64"])
        if is_image and image is None:
            image = PLACEHOLDER_PNG
        return BackendResponse(text=entry.get("text", ""), image=image,
                               usage={"scripted": True, "turn": index})


class DryRunBackend(Backend):
    """Records image requests instead of executing them.

    Text generation is delegated to an inner backend (usually scripted);
    image and image_edit requests never leave the process.
    """

    name = "dryrun"

    def __init__(self, text_backend: Backend | None = None):
        super().__init__()
        self.text_backend = text_backend
        self.recorded: list[BackendRequest] = []

    def _complete(self, request: BackendRequest) -> BackendResponse:
        if request.kind in ("image", "image_edit"):
            self.recorded.append(request)
            return BackendResponse(text="", image=None, usage={"dry_run": True})
        if self.text_backend is None:
            raise BackendError("dry-run backend has no text backend for text requests")
        return self.text_backend.complete(request)


class LiveBackend(Backend):
    """Chat-completions-style HTTP adapter; configured via env vars."""

    name = "live"

    def __init__(self, base_url: str | None = None, api_key: str | None = None,
                 model: str = "gpt-4o", timeout: float = 120.0):
        super().__init__()
        self.base_url = (base_url or os.environ.get(ENV_API_BASE, "")).rstrip("/")
        self.api_key = api_key or os.environ.get(ENV_API_KEY, "")
        self.model = model
        self.timeout = timeout
        if not self.base_url:
            raise BackendError(f"{ENV_API_BASE} is not set")

    def _complete(self, request: BackendRequest) -> BackendResponse:
        import httpx

        self.network_calls += 1
        messages = []
        for m in request.messages:
            content: list[dict] = [{"type": "text", "text": m.text}]
            for a in m.attachments:
                content.append({
                    "type": "image_url",
                    "image_url": {
                        "url": "data:%s;base64,%s" % (
                            a.media_type, base64.b64encode(a.data).decode("ascii")
                        )
                    },
                })
            messages.append({"role": m.role, "content": content})
        payload = {
            "model": self.model,
            "messages": messages,
            "seed": request.seed,
            "metadata": {"kind": request.kind, "stage": request.stage, "role": request.role},
        }
        try:
            response = httpx.post(
                f"{self.base_url}/chat/completions",
                json=payload,
                headers={"Authorization": f"Bearer {self.api_key}"},
                timeout=self.timeout,
            )
            response.raise_for_status()
            data = response.json()
        except Exception as exc:  # noqa: BLE001 - surfaced as a typed error
            raise BackendError(f"live backend call failed: {exc}") from exc
        choice = data.get("choices", [{}])[0].get("message", {})
        text = choice.get("content") or ""
        image = None
        if isinstance(choice.get("images"), list) and choice["images"]:
            image = base64.b64decode(choice["images"][0].get("b64_json", ""))
        return BackendResponse(text=text, image=image, usage=data.get("usage", {}))


def make_backend(mode: str | None = None, fixtures_path: str | None = None) -> Backend:
    mode = mode or os.environ.get(ENV_BACKEND, "scripted")
    if mode == "scripted":
        if fixtures_path:
            return ScriptedBackend.from_file(fixtures_path)
        return ScriptedBackend()
    if mode == "dryrun":
        inner = ScriptedBackend.from_file(fixtures_path) if fixtures_path else None
        return DryRunBackend(text_backend=inner)
    if mode == "live":
        return LiveBackend()
    raise BackendError(f"unknown backend mode {mode!r}")


# ----------------------------------------------------------------------
# Transcript
# ----------------------------------------------------------------------

@dataclass
class Transcript:
    """Append-only call log; one JSON record per line when persisted."""

    path: Path | None = None
    clock: object = time.time
    records: list[dict] = field(default_factory=list)

    def record(self, request: BackendRequest, response: BackendResponse) -> dict:
        entry = {
            "stage": request.stage,
            "role": request.role,
            "kind": request.kind,
            "request": request.to_record(),
            "response_digest": response.digest,
            "ts": self.clock() if callable(self.clock) else self.clock,
        }
        self.records.append(entry)
        if self.path is not None:
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps(entry, sort_keys=True) + "\n")
        return entry

    def image_generation_count(self) -> int:
        return sum(1 for r in self.records if r["kind"] in ("image", "image_edit"))

    def dumps(self) -> str:
        return "".join(json.dumps(r, sort_keys=True) + "\n" for r in self.records)


@dataclass
class AgentContext:
    """Backend + transcript pair the agent roles speak through."""

    backend: Backend
    transcript: Transcript = field(default_factory=Transcript)
    seed: int = 0

    def call(self, request: BackendRequest) -> BackendResponse:
        response = self.backend.complete(request)
        self.transcript.record(request, response)
        return response
