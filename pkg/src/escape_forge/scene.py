"""Scene-graph data model: parsing, canonical emission, validation, patching.

A scene is a rooted tree of objects. Parent-child edges carry a spatial
relation; nodes carry state flags and an optional cue annotation. The text
format is an indentation-nested mapping (two-space indent), one node per
mapping key, with attributes ``name``, ``relation``, ``states`` (inline
list), ``cue``, ``exit`` and a nested ``children`` mapping. Canonical
emission sorts sibling keys lexicographically, so parse(emit(g)) == g.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, replace

import yaml

from .errors import PatchRejected, SceneSyntaxError, SchemaError

RELATIONS = (
    "contains",
    "contains_locked",
    "supports",
    "attached_to",
    "hangs_from",
    "adjacent_to",
    "leans_on",
    "embedded_in",
)

STATES = (
    "locked",
    "sealed",
    "frozen",
    "burning",
    "broken",
    "unreachable_high",
    "fixed_in_place",
    "flammable",
    "magnetic",
    "metallic",
    "heavy",
    "open",
    "lit",
)

# Pairs that cannot coexist on one node.
EXCLUSIVE_STATE_PAIRS = (("open", "locked"), ("open", "sealed"))

# States on a parent that justify a contains_locked edge.
LOCKING_STATES = frozenset({"locked", "frozen", "sealed"})


@dataclass(frozen=True)
class ObjectNode:
    id: str
    name: str
    relation: str | None = None  # None only for the room root
    states: frozenset[str] = frozenset()
    cue: str | None = None
    children: tuple["ObjectNode", ...] = ()

    def walk(self):
        yield self
        for child in self.children:
            yield from child.walk()


@dataclass(frozen=True)
class SceneGraph:
    root: ObjectNode
    exit_id: str
    description: str = ""

    def nodes(self) -> dict[str, ObjectNode]:
        return {n.id: n for n in self.root.walk()}

    def parent_of(self, node_id: str) -> str | None:
        for node in self.root.walk():
            for child in node.children:
                if child.id == node_id:
                    return node.id
        return None

    def node(self, node_id: str) -> ObjectNode:
        found = self.nodes().get(node_id)
        if found is None:
            raise KeyError(node_id)
        return found


@dataclass(frozen=True)
class Violation:
    node_id: str
    rule: str
    message: str

    def __str__(self):
        return f"{self.rule}({self.node_id}): {self.message}"


@dataclass(frozen=True)
class PuzzleSpec:
    scene_keyword: str
    core_objects: tuple[str, ...]
    max_steps: int = 5
    seed: int = 0

    def __post_init__(self):
        if not (1 <= self.max_steps <= 8):
            raise ValueError("max_steps must be in 1..8")
        if not self.core_objects:
            raise ValueError("core_objects must be non-empty")


# ----------------------------------------------------------------------
# Patch ops
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class AddNode:
    parent_id: str
    node: ObjectNode


@dataclass(frozen=True)
class RemoveNode:
    id: str


@dataclass(frozen=True)
class MoveNode:
    id: str
    new_parent_id: str
    relation: str


@dataclass(frozen=True)
class SetStates:
    id: str
    states: frozenset[str]


@dataclass(frozen=True)
class SetCue:
    id: str
    cue: str | None


PatchOp = AddNode | RemoveNode | MoveNode | SetStates | SetCue


@dataclass(frozen=True)
class GraphPatch:
    ops: tuple[PatchOp, ...]

    def is_empty(self) -> bool:
        return not self.ops


# ----------------------------------------------------------------------
# Helpers
# ----------------------------------------------------------------------

def slugify(name: str) -> str:
    slug = re.sub(r"[^a-z0-9]+", "_", name.strip().lower()).strip("_")
    return slug or "object"


def _humanize(node_id: str) -> str:
    return node_id.replace("_", " ")


def tokens_of(node: ObjectNode) -> frozenset[str]:
    """Word tokens of id and name, used by the affordance tables."""
    raw = re.split(r"[^a-z0-9]+", (node.id + " " + node.name).lower())
    return frozenset(t for t in raw if t)


def normalize(root: ObjectNode) -> ObjectNode:
    children = tuple(sorted((normalize(c) for c in root.children), key=lambda n: n.id))
    return replace(root, children=children)


def graph_digest(graph: SceneGraph) -> str:
    return hashlib.sha256(emit_scene_graph(graph).encode("utf-8")).hexdigest()


# ----------------------------------------------------------------------
# Parsing
# ----------------------------------------------------------------------

_FENCE_RE = re.compile(r"^```[a-zA-Z]*\s*\n(.*?)\n```\s*$", re.DOTALL)

_NODE_KEYS = {"name", "relation", "states", "cue", "children", "exit"}


def strip_code_fences(text: str) -> str:
    match = _FENCE_RE.match(text.strip())
    return match.group(1) if match else text


def parse_scene_graph(text: str, description: str = "") -> SceneGraph:
    """Parse a scene document into a normalized SceneGraph.

    Raises SceneSyntaxError on malformed nesting and SchemaError on
    schema violations (unknown relation/state, duplicate id, multiple
    roots, missing exit).
    """
    try:
        data = yaml.safe_load(strip_code_fences(text))
    except yaml.YAMLError as exc:
        raise SceneSyntaxError(f"malformed scene document: {exc}") from exc
    if not isinstance(data, dict):
        raise SceneSyntaxError("scene document must be a mapping of node ids")
    if len(data) != 1:
        raise SchemaError("multiple roots" if len(data) > 1 else "empty document")

    seen: set[str] = set()
    exit_ids: list[str] = []

    def build(node_id, payload, relation_default) -> ObjectNode:
        nid = slugify(str(node_id))
        base = nid
        suffix = 2
        while nid in seen:
            nid = f"{base}_{suffix}"
            suffix += 1
        seen.add(nid)
        if payload is None:
            payload = {}
        if not isinstance(payload, dict):
            raise SceneSyntaxError(f"node {nid}: expected a mapping of attributes")
        unknown = set(payload) - _NODE_KEYS
        if unknown:
            raise SchemaError(f"node {nid}: unknown attributes {sorted(unknown)}")

        relation = payload.get("relation", relation_default)
        if relation is not None and relation not in RELATIONS:
            raise SchemaError(f"node {nid}: unknown relation '{relation}'")

        raw_states = payload.get("states", [])
        if isinstance(raw_states, str):
            raw_states = [raw_states]
        states = frozenset(str(s) for s in raw_states)
        bad = states - set(STATES)
        if bad:
            raise SchemaError(f"node {nid}: unknown states {sorted(bad)}")

        cue = payload.get("cue")
        if cue is not None:
            cue = str(cue)
        if payload.get("exit"):
            exit_ids.append(nid)

        children_map = payload.get("children", {}) or {}
        if not isinstance(children_map, dict):
            raise SceneSyntaxError(f"node {nid}: children must be a mapping")
        children = tuple(
            build(cid, cpayload, "contains") for cid, cpayload in children_map.items()
        )
        name = str(payload.get("name", _humanize(nid)))
        return ObjectNode(
            id=nid, name=name, relation=relation, states=states, cue=cue,
            children=children,
        )

    (root_id, root_payload), = data.items()
    root = normalize(build(root_id, root_payload, None))

    if len(exit_ids) > 1:
        raise SchemaError(f"multiple exit markers: {sorted(exit_ids)}")
    exit_id = exit_ids[0] if exit_ids else _detect_exit(root)
    if exit_id is None:
        raise SchemaError("missing exit: no `exit: true` node and no id contains 'exit'")

    graph = SceneGraph(root=root, exit_id=exit_id, description=description)
    problems = validate(graph)
    if problems:
        raise SchemaError("; ".join(str(v) for v in problems))
    return graph


def _detect_exit(root: ObjectNode) -> str | None:
    candidates = [n.id for n in root.walk() if "exit" in n.id.split("_")]
    return candidates[0] if len(candidates) == 1 else None


# ----------------------------------------------------------------------
# Emission
# ----------------------------------------------------------------------

def _quote(value: str) -> str:
    # Plain scalars are kept bare; anything yaml might misread is quoted.
    if re.fullmatch(r"[A-Za-z0-9_][A-Za-z0-9_ .,'/-]*", value) and not value.endswith(" "):
        return value
    return '"' + value.replace("\\", "\\\\").replace('"', '\\"') + '"'


def emit_scene_graph(graph: SceneGraph) -> str:
    """Canonical, byte-stable text for a scene graph."""
    lines: list[str] = []

    def emit_node(node: ObjectNode, indent: int):
        pad = "  " * indent
        lines.append(f"{pad}{node.id}:")
        attr = "  " * (indent + 1)
        lines.append(f"{attr}name: {_quote(node.name)}")
        if node.relation is not None:
            lines.append(f"{attr}relation: {node.relation}")
        if node.states:
            ordered = [s for s in STATES if s in node.states]
            lines.append(f"{attr}states: [{', '.join(ordered)}]")
        if node.cue is not None:
            lines.append(f"{attr}cue: {_quote(node.cue)}")
        if node.id == graph.exit_id:
            lines.append(f"{attr}exit: true")
        if node.children:
            lines.append(f"{attr}children:")
            for child in sorted(node.children, key=lambda n: n.id):
                emit_node(child, indent + 2)

    emit_node(normalize(graph.root), 0)
    return "\n".join(lines) + "\n"


# ----------------------------------------------------------------------
# Validation
# ----------------------------------------------------------------------

def validate(graph: SceneGraph) -> list[Violation]:
    """All type invariants as violation values; empty list means valid."""
    out: list[Violation] = []
    seen: set[str] = set()
    nodes: dict[str, ObjectNode] = {}
    parents: dict[str, str] = {}

    for node in graph.root.walk():
        if node.id in seen:
            out.append(Violation(node.id, "DuplicateId", "id appears more than once"))
        seen.add(node.id)
        nodes[node.id] = node
        for child in node.children:
            parents[child.id] = node.id

    if graph.root.relation is not None:
        out.append(Violation(graph.root.id, "RootHasRelation", "room root cannot carry a relation"))

    for node in graph.root.walk():
        if node is not graph.root and node.relation is None:
            out.append(Violation(node.id, "MissingRelation", "non-root node needs a relation"))
        if node.relation is not None and node.relation not in RELATIONS:
            out.append(Violation(node.id, "UnknownRelation", node.relation))
        bad = node.states - set(STATES)
        for state in sorted(bad):
            out.append(Violation(node.id, "UnknownState", state))
        for a, b in EXCLUSIVE_STATE_PAIRS:
            if a in node.states and b in node.states:
                out.append(Violation(node.id, "MutuallyExclusiveStates", f"{a} and {b}"))
        if node.relation == "contains_locked":
            parent = nodes.get(parents.get(node.id, ""), None)
            if parent is not None and not (parent.states & LOCKING_STATES):
                out.append(Violation(
                    node.id, "UnlockedContainer",
                    f"contains_locked under '{parent.id}' which is not locked/frozen/sealed"))

    if graph.exit_id not in nodes:
        out.append(Violation(graph.exit_id, "MissingExit", "exit_id does not resolve"))
    else:
        exit_node = nodes[graph.exit_id]
        secured = (
            "locked" in exit_node.states
            or any("locked" in c.states for c in exit_node.children)
            or bool(exit_node.states & {"sealed", "broken"})
        )
        if not secured:
            out.append(Violation(
                graph.exit_id, "ExitNotSecured",
                "exit must be locked (itself or a child) or a sealed/broken alternative goal"))
    return out


# ----------------------------------------------------------------------
# Patching
# ----------------------------------------------------------------------

def apply_patch(graph: SceneGraph, patch: GraphPatch) -> SceneGraph:
    """Apply ops in order, returning a new valid graph.

    The whole patch is atomic: any structural failure or a final
    validation failure raises PatchRejected and the input is untouched.
    """
    nodes: dict[str, ObjectNode] = {
        n.id: replace(n, children=()) for n in graph.root.walk()
    }
    parents: dict[str, str | None] = {graph.root.id: None}
    for node in graph.root.walk():
        for child in node.children:
            parents[child.id] = node.id
    root_id = graph.root.id
    exit_id = graph.exit_id

    def is_ancestor(candidate: str, of: str) -> bool:
        cursor: str | None = of
        while cursor is not None:
            if cursor == candidate:
                return True
            cursor = parents.get(cursor)
        return False

    for index, op in enumerate(patch.ops):
        if isinstance(op, AddNode):
            if op.parent_id not in nodes:
                raise PatchRejected(index, Violation(op.parent_id, "UnknownNode", "add_node parent missing"))
            for sub in op.node.walk():
                if sub.id in nodes:
                    raise PatchRejected(index, Violation(sub.id, "DuplicateId", "add_node id exists"))
            stack = [(op.node, op.parent_id)]
            while stack:
                sub, parent_id = stack.pop()
                nodes[sub.id] = replace(sub, children=())
                parents[sub.id] = parent_id
                for child in sub.children:
                    stack.append((child, sub.id))
        elif isinstance(op, RemoveNode):
            if op.id not in nodes:
                raise PatchRejected(index, Violation(op.id, "UnknownNode", "remove_node id missing"))
            if op.id == root_id:
                raise PatchRejected(index, Violation(op.id, "RootRemoved", "cannot remove the room"))
            doomed = [nid for nid in nodes if is_ancestor(op.id, nid)]
            for nid in doomed:
                del nodes[nid]
                del parents[nid]
        elif isinstance(op, MoveNode):
            if op.id not in nodes or op.new_parent_id not in nodes:
                raise PatchRejected(index, Violation(op.id, "UnknownNode", "move_node endpoint missing"))
            if op.id == root_id:
                raise PatchRejected(index, Violation(op.id, "RootMoved", "cannot move the room"))
            if is_ancestor(op.id, op.new_parent_id):
                raise PatchRejected(index, Violation(op.id, "CycleDetected", "move would create a cycle"))
            if op.relation not in RELATIONS:
                raise PatchRejected(index, Violation(op.id, "UnknownRelation", op.relation))
            parents[op.id] = op.new_parent_id
            nodes[op.id] = replace(nodes[op.id], relation=op.relation)
        elif isinstance(op, SetStates):
            if op.id not in nodes:
                raise PatchRejected(index, Violation(op.id, "UnknownNode", "set_states id missing"))
            nodes[op.id] = replace(nodes[op.id], states=frozenset(op.states))
        elif isinstance(op, SetCue):
            if op.id not in nodes:
                raise PatchRejected(index, Violation(op.id, "UnknownNode", "set_cue id missing"))
            nodes[op.id] = replace(nodes[op.id], cue=op.cue)
        else:
            raise PatchRejected(index, Violation("?", "UnknownOp", repr(op)))

    def assemble(node_id: str) -> ObjectNode:
        child_ids = sorted(nid for nid, pid in parents.items() if pid == node_id)
        return replace(nodes[node_id], children=tuple(assemble(c) for c in child_ids))

    if exit_id not in nodes:
        raise PatchRejected(len(patch.ops) - 1, Violation(exit_id, "MissingExit", "patch removed the exit"))
    result = SceneGraph(root=assemble(root_id), exit_id=exit_id, description=graph.description)
    problems = validate(result)
    if problems:
        raise PatchRejected(len(patch.ops) - 1, problems[0])
    return result


def structural_diff(old: SceneGraph, new: SceneGraph) -> GraphPatch:
    """Minimal patch turning `old` into `new`, matching nodes by id."""
    old_nodes = old.nodes()
    new_nodes = new.nodes()
    old_parents = {c.id: n.id for n in old.root.walk() for c in n.children}
    new_parents = {c.id: n.id for n in new.root.walk() for c in n.children}

    ops: list[PatchOp] = []
    removed = [nid for nid in old_nodes if nid not in new_nodes]
    # Children first so subtree removals do not double-fire.
    removed_set = set(removed)
    for nid in sorted(removed):
        parent = old_parents.get(nid)
        if parent in removed_set:
            continue
        ops.append(RemoveNode(nid))

    added = {nid for nid in new_nodes if nid not in old_nodes}

    def added_subtree(node: ObjectNode) -> ObjectNode:
        return replace(
            node,
            children=tuple(added_subtree(c) for c in node.children if c.id in added),
        )

    for nid in sorted(added):
        parent = new_parents.get(nid)
        if parent in added:
            continue  # carried along with its added ancestor
        ops.append(AddNode(parent_id=parent, node=added_subtree(new_nodes[nid])))

    for nid in sorted(new_nodes):
        if nid in added or nid not in old_nodes:
            continue
        old_n, new_n = old_nodes[nid], new_nodes[nid]
        if (old_parents.get(nid) != new_parents.get(nid)
                or old_n.relation != new_n.relation) and new_parents.get(nid) is not None:
            ops.append(MoveNode(nid, new_parents[nid], new_n.relation))
        if old_n.states != new_n.states:
            ops.append(SetStates(nid, new_n.states))
        if old_n.cue != new_n.cue:
            ops.append(SetCue(nid, new_n.cue))
    return GraphPatch(tuple(ops))
