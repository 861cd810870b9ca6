"""The four agent roles: prompt rendering + response parsing wrappers.

Each role is a stateless function over an AgentContext (backend +
transcript). Symbolic modes bypass the backend entirely; llm modes send
the appendix prompts verbatim and parse the reply with the verb lexicon.
"""

from __future__ import annotations

import re

from ..errors import (
    NoSolutionFound,
    NullPatch,
    ResponseParseError,
    SchemaError,
    SceneSyntaxError,
)
from ..images import (
    Attachment,
    BackendRequest,
    EditInstruction,
    ImageArtifact,
    Message,
    compose_edit_request,
)
from ..layout import Layout, emit_svg, layout_to_json, synthesize_layout
from ..scene import (
    GraphPatch,
    PuzzleSpec,
    SceneGraph,
    apply_patch,
    emit_scene_graph,
    parse_scene_graph,
    structural_diff,
)
from ..solver import DiffReport, diff_solutions, solution_text, solve
from ..world import Solution
from . import lexicon
from .backends import AgentContext
from .prompts import render_prompt

REPAIR_BUDGET = 2


def _text_request(role: str, stage: str, messages, seed: int = 0) -> BackendRequest:
    return BackendRequest(role=role, stage=stage, kind="text",
                          messages=tuple(messages), seed=seed)


# ----------------------------------------------------------------------
# Designer
# ----------------------------------------------------------------------

def _split_description_and_steps(text: str) -> tuple[str, str]:
    lines = text.splitlines()
    step_start = None
    for i, line in enumerate(lines):
        if re.match(r"^\s*(steps?\b.*:|\d+[.):])", line.strip(), re.IGNORECASE):
            step_start = i
            break
    if step_start is None:
        return text.strip(), ""
    description = "\n".join(lines[:step_start]).strip()
    steps = "\n".join(lines[step_start:]).strip()
    return description, steps


def designer_design(spec: PuzzleSpec, ctx: AgentContext) -> tuple[str, SceneGraph, Solution]:
    """Three aligned outputs: description, scene graph, official solution."""
    design_prompt = render_prompt("designer_design", {
        "scene": spec.scene_keyword,
        "objects": ", ".join(spec.core_objects),
        "max_steps": spec.max_steps,
        "max_objects": max(4, len(spec.core_objects) + 2),
    })
    conversation = [Message(role="user", text=design_prompt)]
    reply = ctx.call(_text_request("Designer", "Graph", conversation, seed=ctx.seed))
    description, steps_text = _split_description_and_steps(reply.text)
    conversation.append(Message(role="assistant", text=reply.text))

    graph_prompt = render_prompt("designer_graph")
    conversation.append(Message(role="user", text=graph_prompt))
    graph: SceneGraph | None = None
    last_error: Exception | None = None
    for attempt in range(1 + REPAIR_BUDGET):
        reply = ctx.call(_text_request("Designer", "Graph", conversation, seed=ctx.seed))
        conversation.append(Message(role="assistant", text=reply.text))
        try:
            graph = parse_scene_graph(reply.text, description=description)
            break
        except (SceneSyntaxError, SchemaError) as exc:
            last_error = exc
            if attempt == REPAIR_BUDGET:
                break
            conversation.append(Message(
                role="user",
                text=(
                    f"That scene graph was rejected: {exc}. "
                    "Please output the corrected scene graph in the same yaml format."
                ),
            ))
    if graph is None:
        raise ResponseParseError(f"designer graph unusable after repairs: {last_error}")

    if not steps_text:
        raise ResponseParseError("designer reply contained no solution steps")
    solution = lexicon.parse_steps(steps_text, graph)
    if solution.length > spec.max_steps:
        raise ResponseParseError(
            f"solution too long: {solution.length} steps > max {spec.max_steps}"
        )
    return description, graph, solution


# ----------------------------------------------------------------------
# Player
# ----------------------------------------------------------------------

def _artifact_message(payload, stage: str, graph: SceneGraph,
                      include_description: bool = False) -> Message:
    prompt = render_prompt("player_solve")
    preamble = ""
    if include_description and graph.description:
        preamble = graph.description + "\n\n"
    if stage == "Graph":
        body = preamble + "Scene graph:\n\n" + emit_scene_graph(graph) + "\n" + prompt
        return Message(role="user", text=body)
    if stage == "Layout":
        body = preamble + "Scene layout (side view):\n\n" + layout_to_json(payload) + "\n" + prompt
        svg = Attachment("layout.svg", "image/svg+xml", emit_svg(payload).encode("utf-8"))
        return Message(role="user", text=body, attachments=(svg,))
    attachments = ()
    if isinstance(payload, ImageArtifact) and payload.image is not None:
        attachments = (Attachment("scene.png", "image/png", payload.image),)
    return Message(role="user", text=preamble + prompt, attachments=attachments)


def player_solve(
    payload,
    stage: str,
    ctx: AgentContext,
    mode: str,
    graph: SceneGraph,
    max_steps: int,
    memory: list[Message] | None = None,
    include_description: bool = False,
) -> Solution:
    """The player's proposed solution for the current stage artifact.

    `memory`, when given, carries the conversation across loop
    iterations; the default is memoryless (fresh context every turn).
    """
    if mode == "symbolic":
        found = solve(graph, max_steps)
        if not found:
            raise NoSolutionFound(f"no solution within {max_steps} steps")
        return found[0]
    message = _artifact_message(payload, stage, graph, include_description)
    prior = list(memory) if memory is not None else []
    reply = ctx.call(_text_request("Player", stage, prior + [message], seed=ctx.seed))
    if memory is not None:
        memory.append(message)
        memory.append(Message(role="assistant", text=reply.text))
    solution = lexicon.parse_steps(reply.text, graph)
    if mode == "hybrid":
        # Annotate with the symbolic check; the llm answer stays the result.
        symbolic = solve(graph, max_steps)
        agrees = any(diff_solutions(s, solution).is_match for s in symbolic)
        ctx.transcript.records[-1]["symbolic_agreement"] = agrees
    return solution


# ----------------------------------------------------------------------
# Examiner
# ----------------------------------------------------------------------

def examiner_check(
    official: Solution, found: Solution, ctx: AgentContext, mode: str = "symbolic",
    stage: str = "Graph",
) -> DiffReport:
    if mode == "symbolic":
        return diff_solutions(official, found)
    prompt = render_prompt("examiner_check", {"solution": solution_text(official)})
    body = "Your solution:\n" + solution_text(found) + "\n" + prompt
    reply = ctx.call(_text_request("Examiner", stage, [Message(role="user", text=body)],
                                   seed=ctx.seed))
    text = reply.text.strip()
    if re.match(r"^\W*yes\b", text, re.IGNORECASE):
        return DiffReport(verdict="match")
    bullets = tuple(
        re.sub(r"^[-*•]\s*", "", line.strip())
        for line in text.splitlines()
        if line.strip().startswith(("-", "*", "•"))
    )
    if not bullets:
        bullets = (text,) if text else ("unspecified difference",)
    return DiffReport(verdict="mismatch", bullets=bullets, shortcut_found=found)


def examiner_refine_graph(
    graph: SceneGraph, report: DiffReport, ctx: AgentContext
) -> GraphPatch:
    """A revised graph from the examiner, as a minimal structural patch."""
    if report.is_match:
        raise ValueError("refine called on a matching report")
    prompt = render_prompt("examiner_refine_graph")
    body = (
        "Current scene graph:\n\n" + emit_scene_graph(graph)
        + "\nDifferences found:\n"
        + "".join(f"- {b}\n" for b in report.bullets)
        + "\n" + prompt
    )
    conversation = [Message(role="user", text=body)]
    last_error: Exception | None = None
    for attempt in range(1 + REPAIR_BUDGET):
        reply = ctx.call(_text_request("Examiner", "Graph", conversation, seed=ctx.seed))
        conversation.append(Message(role="assistant", text=reply.text))
        try:
            revised = parse_scene_graph(reply.text, description=graph.description)
        except (SceneSyntaxError, SchemaError) as exc:
            last_error = exc
            if attempt == REPAIR_BUDGET:
                raise ResponseParseError(f"examiner revision unusable: {exc}") from exc
            conversation.append(Message(
                role="user",
                text=f"That revision was rejected: {exc}. Please correct the yaml.",
            ))
            continue
        patch = structural_diff(graph, revised)
        if patch.is_empty():
            raise NullPatch("examiner revision is identical to the input graph")
        apply_patch(graph, patch)  # validates; raises PatchRejected on bad revisions
        return patch
    raise ResponseParseError(f"examiner revision unusable: {last_error}")


# ----------------------------------------------------------------------
# Builder
# ----------------------------------------------------------------------

_OBJECT_LINE_RE = re.compile(r"^\s*object\s*:\s*(.+)$", re.IGNORECASE | re.MULTILINE)
_CONDITION_LINE_RE = re.compile(r"^\s*condition\s*:\s*(.+)$", re.IGNORECASE | re.MULTILINE)


def _find_icon(layout: Layout, text: str):
    normalized = " " + re.sub(r"[^a-z0-9 ]+", " ", text.lower()) + " "
    best = None
    for icon in layout.icons:
        for surface in (icon.label.lower(), icon.object_id.replace("_", " ")):
            if f" {surface} " in normalized and (best is None or len(surface) > best[0]):
                best = (len(surface), icon)
    return best[1] if best else None


def builder_refine_layout(
    report: DiffReport, graph: SceneGraph, seed: int, iteration: int
) -> Layout:
    """Regenerated layout for the same graph; jitter differs per iteration."""
    return synthesize_layout(graph, seed=seed + iteration)


def builder_refine_image(
    artifact: ImageArtifact,
    report: DiffReport,
    layout: Layout,
    ctx: AgentContext,
) -> ImageArtifact:
    """One localized edit per bullet, addressed via the layout icon."""
    from ..errors import UnknownObjectInBullet

    if report.is_match or not report.bullets:
        return artifact
    current = artifact
    for bullet in report.bullets:
        prompt = render_prompt("examiner_refine_image")
        body = (
            prompt
            + f"\nDifference to fix: {bullet}\n"
            + "Reply with two lines: 'object: <name>' and 'condition: <new condition>'."
        )
        reply = ctx.call(_text_request("Builder", "Image", [Message(role="user", text=body)],
                                       seed=ctx.seed))
        object_match = _OBJECT_LINE_RE.search(reply.text)
        condition_match = _CONDITION_LINE_RE.search(reply.text)
        icon = None
        if object_match:
            icon = _find_icon(layout, object_match.group(1))
        if icon is None:
            icon = _find_icon(layout, bullet)
        if icon is None:
            raise UnknownObjectInBullet(f"no layout object named in: {bullet!r}")
        desired = condition_match.group(1).strip() if condition_match else bullet.strip()
        edit = EditInstruction(
            object_id=icon.object_id,
            bbox=tuple(icon.bbox),
            current_condition=icon.condition_text,
            desired_condition=desired,
        )
        request = compose_edit_request(current, layout, edit, stage="Image", seed=ctx.seed)
        response = ctx.call(request)
        current = current.with_edit(edit, response.image)
    return current
