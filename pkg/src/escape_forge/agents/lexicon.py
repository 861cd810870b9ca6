"""Verb lexicon: free-text step lines into engine actions.

The bridge between LLM/player prose and the closed action grammar.
Object mentions are matched against node names and ids (longest match
first); surface verb patterns map onto engine verbs, with tool slots
resolved from "with the X" phrases or, when unambiguous, from the only
affording object in the scene.
"""

from __future__ import annotations

import re

from ..errors import UnparseableAttempt, UnparseableSteps
from ..scene import SceneGraph, tokens_of
from ..world import Action, Solution
from .. import rules

# (regex, verb); checked in order, first hit wins.
_PATTERNS: tuple[tuple[re.Pattern, str], ...] = tuple(
    (re.compile(p), v)
    for p, v in (
        (r"\buse\b.*\bto\b.*\b(retrieve|pull|reach|grab|fish|attract|hook|get)\b", "reach_with"),
        (r"\buse\b.*\bto\b.*\bunlock\b", "unlock"),
        (r"\buse\b.*\bto\b.*\b(light|ignite)\b", "ignite"),
        (r"\buse\b.*\bto\b.*\bcut\b", "cut"),
        (r"\buse\b.*\bto\b.*\bopen\b", "open"),
        (r"\b(place|position|put|move|set)\b.*\b(under|beneath|below)\b", "place_under"),
        (r"\b(place|put|set|stack|rest|lay)\b.*\b(on|onto|atop)\b", "place_on"),
        (r"\bthrow\b.*\bat\b", "throw_at"),
        (r"\b(attach|fasten|secure|clip|mount|fix)\b", "attach"),
        (r"\bcombine\b", "combine"),
        (r"\bwrap\b", "wrap"),
        (r"\b(soak|dip|dunk)\b", "soak"),
        (r"\bpour\b", "pour"),
        (r"\b(cut|snip|sever)\b", "cut"),
        (r"\b(ignite|light|burn|kindle)\b", "ignite"),
        (r"\bunlock\b", "unlock"),
        (r"\bopen\b", "open"),
        (r"\b(climb|ascend|scale)\b", "climb"),
        (r"\b(detach|unfasten|unclip)\b", "detach"),
        (r"\bwait\b", "wait_for_effect"),
        (r"\b(pull|yank|tug)\b", "pull"),
        (r"\b(exit|escape|leave)\b", "exit_room"),
        (r"\b(move|drag|slide|bring|carry|shift|reposition)\b", "move_to"),
        (r"\b(take|pick|grab|collect|retrieve|fetch|get)\b", "take"),
    )
)

_TWO_ARG = {
    "attach", "place_on", "place_under", "move_to", "combine", "wrap",
    "soak", "pour", "throw_at", "reach_with", "cut", "ignite",
}


def _normalize(text: str) -> str:
    text = text.lower()
    text = re.sub(r"[’']s\b", "", text)
    text = re.sub(r"[^a-z0-9 ]+", " ", text)
    return re.sub(r"\s+", " ", text).strip()


def _object_mentions(text: str, graph: SceneGraph) -> list[tuple[int, str]]:
    """(position, node_id) for every object mention, longest names first."""
    nodes = graph.nodes()
    variants: list[tuple[str, str]] = []
    heads: dict[str, list[str]] = {}
    for nid, node in nodes.items():
        if nid == graph.root.id:
            continue
        surfaces = {node.name.lower(), nid.replace("_", " ")}
        for surface in surfaces:
            variants.append((_normalize(surface), nid))
            words = _normalize(surface).split()
            if len(words) > 1:
                heads.setdefault(words[-1], []).append(nid)
    # "door" may stand in for "exit door" when that is unambiguous.
    for head, nids in heads.items():
        owners = {nid for nid in nids}
        clash = any(
            head in _normalize(n.name).split() or head in n.id.split("_")
            for n in nodes.values()
            if n.id not in owners and n.id != graph.root.id
        )
        if len(owners) == 1 and not clash:
            variants.append((head, next(iter(owners))))
    variants.sort(key=lambda pair: -len(pair[0]))

    found: list[tuple[int, int, str]] = []  # (start, end, id)
    taken: list[tuple[int, int]] = []
    padded = f" {text} "
    for surface, nid in variants:
        start = 0
        needle = f" {surface} "
        while True:
            pos = padded.find(needle, start)
            if pos < 0:
                break
            span = (pos, pos + len(surface))
            start = pos + 1
            if any(not (span[1] <= s or span[0] >= t) for s, t in taken):
                continue
            taken.append(span)
            found.append((pos, span[1], nid))
    found.sort()
    ordered: list[tuple[int, str]] = []
    for pos, _, nid in found:
        if nid not in [n for _, n in ordered]:
            ordered.append((pos, nid))
    return ordered


def _unique_afford(graph: SceneGraph, kind: str) -> str | None:
    matches = [
        n.id for n in graph.root.walk()
        if kind in rules.affordances(tokens_of(n))
    ]
    return matches[0] if len(matches) == 1 else None


def parse_action(line: str, graph: SceneGraph) -> Action:
    """One step line into an Action; raises UnparseableAttempt."""
    text = _normalize(line)
    if not text:
        raise UnparseableAttempt("empty step")
    verb = None
    for pattern, candidate in _PATTERNS:
        if pattern.search(text):
            verb = candidate
            break
    if verb is None:
        raise UnparseableAttempt(f"no known action in: {line.strip()!r}")

    mentions = _object_mentions(text, graph)
    if verb == "exit_room":
        passages = [
            nid for _, nid in mentions
            if "passage" in rules.affordances(tokens_of(graph.node(nid)))
        ]
        subject = passages[0] if passages else graph.exit_id
        return Action(verb, subject, None, gloss=line.strip())
    if not mentions:
        raise UnparseableAttempt(f"no known object in: {line.strip()!r}")

    ids = [nid for _, nid in mentions]

    def after(anchor: str) -> list[str]:
        pos = text.find(f"{anchor} ")
        if pos < 0 and text.startswith(anchor):
            pos = 0
        if pos < 0:
            return []
        return [nid for p, nid in mentions if p > pos]

    if verb == "reach_with":
        # "use the <tool> to ... <target>"
        anchored = after("use")
        if len(anchored) >= 2:
            return Action(verb, anchored[0], anchored[1], gloss=line.strip())
        if len(ids) < 2:
            raise UnparseableAttempt(f"cannot tell tool from target in: {line.strip()!r}")
        return Action(verb, ids[0], ids[1], gloss=line.strip())
    if verb in ("cut", "ignite"):
        subject = ids[0]
        tool = None
        anchored = after("use")
        if len(anchored) >= 2:
            tool, subject = anchored[0], anchored[1]
        elif len(ids) >= 2:
            subject, tool = ids[0], ids[1]
        if tool is None:
            kind = "cutter" if verb == "cut" else "igniter_flame"
            tool = _unique_afford(graph, kind)
            if tool is None and verb == "ignite":
                tool = _unique_afford(graph, "igniter_focus")
            if tool is None:
                raise UnparseableAttempt(f"no tool named for {verb} in: {line.strip()!r}")
        return Action(verb, subject, tool, gloss=line.strip())
    if verb == "unlock":
        non_keys = [
            nid for nid in ids
            if "key" not in rules.affordances(tokens_of(graph.node(nid)))
        ]
        subject = non_keys[0] if non_keys else ids[0]
        return Action(verb, subject, None, gloss=line.strip())
    if verb in _TWO_ARG:
        if len(ids) < 2:
            raise UnparseableAttempt(f"{verb} needs two objects in: {line.strip()!r}")
        return Action(verb, ids[0], ids[1], gloss=line.strip())
    return Action(verb, ids[0], None, gloss=line.strip())


_STEP_LINE_RE = re.compile(r"^\s*(?:step\s*)?(?:\d+[.):]|[-*•])\s*(.+)$", re.IGNORECASE)


def split_steps(text: str) -> list[str]:
    """Step lines from free-form solution text."""
    steps = []
    for raw in text.splitlines():
        raw = raw.strip()
        if not raw:
            continue
        match = _STEP_LINE_RE.match(raw)
        if match:
            steps.append(match.group(1).strip().strip("*_"))
    if not steps:
        # Single-paragraph answers: treat sentences as steps.
        steps = [s.strip() for s in re.split(r"(?<=[.!])\s+", text.strip()) if s.strip()]
    return steps


def parse_steps(text: str, graph: SceneGraph) -> Solution:
    """Whole solution text into a Solution; collects offending lines."""
    lines = split_steps(text)
    actions = []
    bad: list[str] = []
    for line in lines:
        try:
            actions.append(parse_action(line, graph))
        except UnparseableAttempt:
            bad.append(line)
    if bad:
        raise UnparseableSteps(bad)
    if not actions:
        raise UnparseableSteps(["<empty solution>"])
    return Solution(tuple(actions))
