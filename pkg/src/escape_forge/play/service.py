"""Session-based play service: free-text attempts against a bundle.

Attempt matching is symbolic-first: the verb lexicon parses the text,
the action engine judges legality, and progress is measured against the
official solution (steps may come in any order that respects their
dependencies). Hints escalate from naming the object, to naming the
move, to revealing the exact next step.
"""

from __future__ import annotations

import json
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from ..agents.lexicon import parse_action
from ..errors import SessionClosed, UnknownBundle, UnparseableAttempt
from ..pipeline import PuzzleBundle, load_bundle
from ..solver import _dependent
from ..world import Action, WorldState, apply, check_action, initial_state

_VERB_PHRASES = {
    "take": "pick up",
    "open": "open",
    "unlock": "unlock",
    "attach": "attach something to",
    "detach": "detach",
    "place_on": "put something on",
    "place_under": "put something under",
    "climb": "climb",
    "reach_with": "reach out with",
    "cut": "cut",
    "ignite": "ignite",
    "soak": "soak",
    "pour": "pour from",
    "wrap": "wrap something around",
    "wait_for_effect": "wait and watch",
    "throw_at": "throw something at",
    "move_to": "move",
    "combine": "combine",
    "pull": "pull",
    "exit_room": "leave through",
}


@dataclass
class Feedback:
    verdict: str  # accepted | rejected_illegal | rejected_offpath
    message: str
    hint: str | None = None
    escaped: bool = False

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "message": self.message,
            "hint": self.hint,
            "escaped": self.escaped,
        }


@dataclass
class Session:
    session_id: str
    bundle: PuzzleBundle
    world: WorldState
    done: set[int] = field(default_factory=set)
    hint_level: int = 0
    history: list[dict] = field(default_factory=list)
    revision: int = 0

    @property
    def progress(self) -> int:
        return len(self.done)

    @property
    def escaped(self) -> bool:
        return self.world.escaped

    def view(self) -> dict:
        total = self.bundle.official.length
        return {
            "session_id": self.session_id,
            "bundle_id": self.bundle.bundle_id,
            "scene": self.bundle.spec.scene_keyword,
            "description": self.bundle.description,
            "progress": self.progress,
            "total_steps": total,
            "progress_fraction": self.progress / total if total else 0.0,
            "hint_level": self.hint_level,
            "escaped": self.escaped,
            "revision": self.revision,
            "history": list(self.history),
            "image_url": f"/bundles/{self.bundle.bundle_id}/image",
            "layout_url": f"/bundles/{self.bundle.bundle_id}/layout.svg",
        }


class PlayService:
    """In-memory session store over a bundle registry.

    Judging is symbolic and fully offline. An optional llm context only
    rewords feedback messages (examiner persona); verdicts, progress and
    hints never depend on it.
    """

    def __init__(self, snapshot_dir: str | Path | None = None, llm_ctx=None):
        self.bundles: dict[str, PuzzleBundle] = {}
        self.sessions: dict[str, Session] = {}
        self.snapshot_dir = Path(snapshot_dir) if snapshot_dir else None
        self.llm_ctx = llm_ctx
        self.revision = 0  # store-wide monotone counter for UI polling

    def _bump(self) -> int:
        self.revision += 1
        return self.revision

    # -- bundles --------------------------------------------------------

    def register(self, bundle: PuzzleBundle) -> None:
        self.bundles[bundle.bundle_id] = bundle
        self._bump()

    def load_runs(self, runs_dir: str | Path) -> int:
        count = 0
        root = Path(runs_dir)
        if not root.is_dir():
            return 0
        for child in sorted(root.iterdir()):
            if (child / "report.json").exists():
                try:
                    self.register(load_bundle(child))
                    count += 1
                except Exception:  # noqa: BLE001 - skip unreadable runs
                    continue
        return count

    def bundle_list(self) -> list[dict]:
        return [
            {
                "bundle_id": b.bundle_id,
                "scene": b.spec.scene_keyword,
                "steps": b.official.length,
                "playable": b.playable,
                "has_image": b.image is not None and b.image.image is not None,
            }
            for b in sorted(self.bundles.values(), key=lambda b: b.bundle_id)
        ]

    # -- sessions -------------------------------------------------------

    def create_session(self, bundle_id: str) -> Session:
        bundle = self.bundles.get(bundle_id)
        if bundle is None:
            raise UnknownBundle(f"no bundle {bundle_id!r}")
        if not bundle.playable:
            raise UnknownBundle(f"bundle {bundle_id!r} did not converge")
        session = Session(
            session_id=uuid.uuid4().hex[:12],
            bundle=bundle,
            world=initial_state(bundle.graph),
        )
        self.sessions[session.session_id] = session
        self._snapshot(session)
        return session

    def _session(self, session_id: str) -> Session:
        session = self.sessions.get(session_id)
        if session is None:
            raise UnknownBundle(f"no session {session_id!r}")
        return session

    def get_view(self, session_id: str) -> dict:
        return self._session(session_id).view()

    def _next_index(self, session: Session) -> int | None:
        official = session.bundle.official.steps
        for i in range(len(official)):
            if i in session.done:
                continue
            if all(
                j in session.done
                for j in range(i)
                if _dependent(official[j], official[i])
            ):
                return i
        return None

    def _matching_index(self, session: Session, action: Action) -> int | None:
        official = session.bundle.official.steps
        for i, step in enumerate(official):
            if i in session.done or step.signature() != action.signature():
                continue
            if all(
                j in session.done
                for j in range(i)
                if _dependent(official[j], step)
            ):
                return i
        return None

    def submit_action(self, session_id: str, text: str) -> Feedback:
        session = self._session(session_id)
        if session.escaped:
            raise SessionClosed("the room is already solved")
        text = (text or "").strip()
        if not text:
            raise UnparseableAttempt("say what you want to do")
        try:
            action = parse_action(text, session.bundle.graph)
        except UnparseableAttempt:
            session.revision += 1
            raise
        reason = check_action(session.world, action)
        if reason is not None:
            feedback = Feedback(
                verdict="rejected_illegal",
                message=f"That does not work: {reason}.",
            )
        else:
            index = self._matching_index(session, action)
            if index is None:
                nxt = self._next_index(session)
                nudge = ""
                if nxt is not None:
                    subject = session.bundle.official.steps[nxt].subject
                    name = session.bundle.graph.nodes().get(subject)
                    nudge = (
                        f" Maybe the {name.name if name else subject} deserves another look."
                    )
                feedback = Feedback(
                    verdict="rejected_offpath",
                    message="Nothing useful comes of that; it strays from the intended path."
                    + nudge,
                )
            else:
                session.world = apply(session.world, action)
                session.done.add(index)
                if session.world.escaped:
                    feedback = Feedback(
                        verdict="accepted",
                        message="You squeeze through and escape. Congratulations!",
                        escaped=True,
                    )
                else:
                    feedback = Feedback(
                        verdict="accepted",
                        message=f"Done ({session.progress}/{session.bundle.official.length}).",
                    )
        feedback = self._reword(session, text, feedback)
        session.revision += 1
        session.history.append({"attempt": text, "feedback": feedback.to_dict()})
        self._snapshot(session)
        return feedback

    def _reword(self, session: Session, attempt: str, feedback: Feedback) -> Feedback:
        if self.llm_ctx is None:
            return feedback
        from ..images import BackendRequest, Message

        body = (
            "You are the examiner guiding a player through an escape room. "
            f"The player tried: {attempt!r}. The judge ruled: {feedback.verdict} "
            f"({feedback.message}) Rephrase this ruling as one short, friendly "
            "sentence without changing its meaning."
        )
        try:
            reply = self.llm_ctx.call(BackendRequest(
                role="Examiner", stage="Play", kind="text",
                messages=(Message(role="user", text=body),),
            ))
        except Exception:  # noqa: BLE001 - phrasing is best-effort only
            return feedback
        text = reply.text.strip()
        if not text:
            return feedback
        return Feedback(verdict=feedback.verdict, message=text,
                        hint=feedback.hint, escaped=feedback.escaped)

    def hint(self, session_id: str) -> Feedback:
        session = self._session(session_id)
        if session.escaped:
            raise SessionClosed("the room is already solved")
        session.hint_level = min(session.hint_level + 1, 3)
        index = self._next_index(session)
        step = session.bundle.official.steps[index if index is not None else 0]
        names = session.bundle.graph.nodes()
        subject_name = names[step.subject].name if step.subject in names else step.subject
        if session.hint_level == 1:
            text = f"Have a closer look at the {subject_name}."
        elif session.hint_level == 2:
            text = f"Try to {_VERB_PHRASES.get(step.verb, step.verb)} the {subject_name}."
        else:
            text = f"Next step: {step.gloss}"
        session.revision += 1
        feedback = Feedback(verdict="accepted", message=text, hint=text)
        session.history.append({"attempt": "(hint)", "feedback": feedback.to_dict()})
        self._snapshot(session)
        return feedback

    def _snapshot(self, session: Session) -> None:
        if self.snapshot_dir is None:
            return
        self.snapshot_dir.mkdir(parents=True, exist_ok=True)
        data = {
            "session_id": session.session_id,
            "bundle_id": session.bundle.bundle_id,
            "done": sorted(session.done),
            "hint_level": session.hint_level,
            "revision": session.revision,
            "history": session.history,
        }
        path = self.snapshot_dir / f"{session.session_id}.json"
        path.write_text(json.dumps(data, indent=2) + "\n", "utf-8")


# ----------------------------------------------------------------------
# HTTP wiring
# ----------------------------------------------------------------------

try:
    from pydantic import BaseModel as _BaseModel
except ImportError:  # pragma: no cover - fastapi always brings pydantic
    _BaseModel = object


class AttemptBody(_BaseModel):
    text: str


def create_app(service: PlayService, ui_dir: str | Path | None = None):
    from fastapi import FastAPI, HTTPException
    from fastapi.responses import HTMLResponse, Response

    app = FastAPI(title="escape-forge play service")

    def guard(fn, *args):
        try:
            return fn(*args)
        except UnknownBundle as exc:
            raise HTTPException(status_code=404, detail=str(exc)) from exc
        except SessionClosed as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from exc
        except UnparseableAttempt as exc:
            raise HTTPException(
                status_code=422,
                detail=f"Could not understand that; please rephrase. ({exc})",
            ) from exc

    @app.get("/bundles")
    def bundles():
        return {"bundles": service.bundle_list(), "revision": service.revision}

    @app.post("/bundles/{bundle_id}/sessions")
    def create_session(bundle_id: str):
        session = guard(service.create_session, bundle_id)
        return {"session_id": session.session_id, "revision": session.revision,
                "view": session.view()}

    @app.get("/sessions/{session_id}")
    def get_session(session_id: str):
        return guard(service.get_view, session_id)

    @app.post("/sessions/{session_id}/actions")
    def post_action(session_id: str, body: AttemptBody):
        feedback = guard(service.submit_action, session_id, body.text)
        session = service.sessions[session_id]
        return {**feedback.to_dict(), "revision": session.revision,
                "progress": session.progress}

    @app.post("/sessions/{session_id}/hint")
    def post_hint(session_id: str):
        feedback = guard(service.hint, session_id)
        session = service.sessions[session_id]
        return {**feedback.to_dict(), "revision": session.revision,
                "progress": session.progress}

    @app.get("/bundles/{bundle_id}/image")
    def bundle_image(bundle_id: str):
        bundle = service.bundles.get(bundle_id)
        if bundle is None or bundle.image is None or bundle.image.image is None:
            raise HTTPException(status_code=404, detail="no image for this bundle")
        return Response(content=bundle.image.image, media_type="image/png")

    @app.get("/bundles/{bundle_id}/layout.svg")
    def bundle_layout(bundle_id: str):
        from ..layout import emit_svg

        bundle = service.bundles.get(bundle_id)
        if bundle is None or bundle.layout is None:
            raise HTTPException(status_code=404, detail="no layout for this bundle")
        return Response(content=emit_svg(bundle.layout), media_type="image/svg+xml")

    if ui_dir is not None and Path(ui_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        index = Path(ui_dir) / "index.html"

        @app.get("/", response_class=HTMLResponse)
        def ui_index():
            return index.read_text("utf-8")

        app.mount("/dist", StaticFiles(directory=Path(ui_dir) / "dist"), name="ui")

    return app
