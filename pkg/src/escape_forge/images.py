"""Photorealistic-render and localized-edit request composition.

Requests are pure data: deterministic for fixed inputs, serializable for
dry runs, and replayable against any backend. Edits are addressed by the
normalized bbox of the object's layout icon.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace

from .errors import BboxMismatch
from .layout import Layout, emit_svg

DEFAULT_RESOLUTION = (1024, 1024)


@dataclass(frozen=True)
class Attachment:
    name: str
    media_type: str
    data: bytes

    @property
    def digest(self) -> str:
        return hashlib.sha256(self.data).hexdigest()


@dataclass(frozen=True)
class Message:
    role: str
    text: str
    attachments: tuple[Attachment, ...] = ()


@dataclass(frozen=True)
class BackendRequest:
    role: str
    stage: str
    kind: str  # text | image | image_edit
    messages: tuple[Message, ...]
    seed: int = 0
    resolution: tuple[int, int] = DEFAULT_RESOLUTION

    def to_record(self) -> dict:
        return {
            "role": self.role,
            "stage": self.stage,
            "kind": self.kind,
            "seed": self.seed,
            "resolution": list(self.resolution),
            "messages": [
                {
                    "role": m.role,
                    "text": m.text,
                    "attachments": [a.digest for a in m.attachments],
                }
                for m in self.messages
            ],
        }


@dataclass(frozen=True)
class BackendResponse:
    text: str = ""
    image: bytes | None = None
    usage: dict = field(default_factory=dict)

    @property
    def digest(self) -> str:
        h = hashlib.sha256(self.text.encode("utf-8"))
        if self.image is not None:
            h.update(self.image)
        return h.hexdigest()


@dataclass(frozen=True)
class EditInstruction:
    object_id: str
    bbox: tuple[float, float, float, float]
    current_condition: str
    desired_condition: str


@dataclass(frozen=True)
class ImageArtifact:
    prompt: str
    parent_layout_digest: str
    image: bytes | None = None
    edits: tuple[EditInstruction, ...] = ()
    resolution: tuple[int, int] = DEFAULT_RESOLUTION

    def with_edit(self, edit: EditInstruction, image: bytes | None) -> "ImageArtifact":
        return replace(self, edits=self.edits + (edit,), image=image or self.image)


def _positions_text(layout: Layout) -> str:
    lines = []
    for icon in layout.icons:
        x0, y0, x1, y1 = icon.bbox
        line = f"- {icon.label} at [{x0:.2f}, {y0:.2f}, {x1:.2f}, {y1:.2f}]"
        if icon.condition_text:
            line += f" ({icon.condition_text})"
        lines.append(line)
    return "\n".join(lines)


def compose_render_request(
    description: str, layout: Layout, prompt_text: str, stage: str = "Image", seed: int = 0
) -> BackendRequest:
    """Render request carrying the description, icon positions and sketch."""
    svg = emit_svg(layout).encode("utf-8")
    body = prompt_text + "\n\nObject positions (side view, unit square):\n" + _positions_text(layout)
    return BackendRequest(
        role="Builder",
        stage=stage,
        kind="image",
        seed=seed,
        messages=(
            Message(
                role="user",
                text=body,
                attachments=(Attachment("layout.svg", "image/svg+xml", svg),),
            ),
        ),
    )


def compose_edit_request(
    artifact: ImageArtifact, layout: Layout, edit: EditInstruction, stage: str = "Image", seed: int = 0
) -> BackendRequest:
    """Single-object local edit addressed by the layout icon's bbox."""
    icon = layout.icon(edit.object_id)
    if icon is None:
        raise BboxMismatch(f"{edit.object_id} has no icon in the parent layout")
    if layout.source_graph_digest != artifact.parent_layout_digest and artifact.parent_layout_digest:
        raise BboxMismatch("edit layout does not match the artifact's parent layout")
    if tuple(icon.bbox) != tuple(edit.bbox):
        raise BboxMismatch(
            f"edit bbox {edit.bbox} disagrees with layout icon {icon.bbox}"
        )
    x0, y0, x1, y1 = edit.bbox
    text = (
        f"change the {icon.label} in the region [{x0:.2f}, {y0:.2f}, {x1:.2f}, {y1:.2f}] "
        f"(normalized, origin bottom-left) to: {edit.desired_condition}. "
        "Edit only this object; keep the rest of the image unchanged."
    )
    attachments = []
    if artifact.image is not None:
        attachments.append(Attachment("scene.png", "image/png", artifact.image))
    return BackendRequest(
        role="Builder",
        stage=stage,
        kind="image_edit",
        seed=seed,
        messages=(Message(role="user", text=text, attachments=tuple(attachments)),),
    )


def request_to_json(request: BackendRequest) -> str:
    data = request.to_record()
    data["prompt"] = request.messages[-1].text if request.messages else ""
    data["attachments"] = [
        a.digest for m in request.messages for a in m.attachments
    ]
    return json.dumps(data, indent=2, sort_keys=True) + "\n"
