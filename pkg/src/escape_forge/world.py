"""Deterministic action semantics over scene graphs.

Twenty verbs, each with exactly one rule (precondition check + effect).
World state is compiled to a compact tuple form per graph so the solver
can hash and deduplicate many states cheaply; a per-state View caches
reachability, accessibility and subtree masks so precondition checks are
O(1)-ish. The public WorldState wrapper exposes the graph/inventory view
the rest of the package works with.

Conventions baked into the rule table (see docs/RULES.md):
  * light loose items are grabbed implicitly by the verb that uses them;
  * wielded reach tools must already be held, heavy items must be taken
    explicitly, and unlocking always requires a key in the inventory;
  * passages (doors, windows, walls, trapdoors) are structural and can
    never be picked up or moved;
  * exiting the room is always an explicit final action through a
    passage (door, window, trapdoor, broken wall).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from . import rules
from .errors import IllegalAction
from .scene import RELATIONS, STATES, SceneGraph, graph_digest, tokens_of

ROOT = -1
INV = -2

_REL_CODE = {rel: i for i, rel in enumerate(RELATIONS)}
_STATE_BIT = {state: 1 << i for i, state in enumerate(STATES)}

R_CONTAINS = _REL_CODE["contains"]
R_CONTAINS_LOCKED = _REL_CODE["contains_locked"]
R_SUPPORTS = _REL_CODE["supports"]
R_ATTACHED = _REL_CODE["attached_to"]
R_HANGS = _REL_CODE["hangs_from"]
R_ADJACENT = _REL_CODE["adjacent_to"]
R_LEANS = _REL_CODE["leans_on"]
R_EMBEDDED = _REL_CODE["embedded_in"]

B_LOCKED = _STATE_BIT["locked"]
B_SEALED = _STATE_BIT["sealed"]
B_FROZEN = _STATE_BIT["frozen"]
B_BURNING = _STATE_BIT["burning"]
B_BROKEN = _STATE_BIT["broken"]
B_HIGH = _STATE_BIT["unreachable_high"]
B_FIXED = _STATE_BIT["fixed_in_place"]
B_FLAMMABLE = _STATE_BIT["flammable"]
B_MAGNETIC = _STATE_BIT["magnetic"]
B_METALLIC = _STATE_BIT["metallic"]
B_HEAVY = _STATE_BIT["heavy"]
B_OPEN = _STATE_BIT["open"]
B_LIT = _STATE_BIT["lit"]

# Relations through which being out of reach propagates to children.
_HEIGHT_INHERIT = frozenset({
    R_CONTAINS, R_CONTAINS_LOCKED, R_SUPPORTS, R_ATTACHED, R_HANGS,
    R_EMBEDDED, R_LEANS,
})
# Relations along which fire spreads: resting or containment contact.
# Lateral fastenings and hangings do not carry the flame.
_CONTACT = frozenset({
    R_CONTAINS, R_CONTAINS_LOCKED, R_SUPPORTS, R_EMBEDDED, R_LEANS,
})

_GLOSS = {
    "take": "Take the {s}.",
    "open": "Open the {s}.",
    "unlock": "Unlock the {s}.",
    "attach": "Attach the {s} to the {t}.",
    "detach": "Detach the {s}.",
    "place_on": "Place the {s} on the {t}.",
    "place_under": "Place the {s} under the {t}.",
    "climb": "Climb the {s}.",
    "reach_with": "Use the {s} to retrieve the {t}.",
    "cut": "Cut the {s} with the {t}.",
    "ignite": "Ignite the {s} with the {t}.",
    "soak": "Soak the {s} in the {t}.",
    "pour": "Pour from the {s} onto the {t}.",
    "wrap": "Wrap the {s} around the {t}.",
    "wait_for_effect": "Wait for the effect on the {s}.",
    "throw_at": "Throw the {s} at the {t}.",
    "move_to": "Move the {s} next to the {t}.",
    "combine": "Combine the {s} with the {t}.",
    "pull": "Pull the {s}.",
    "exit_room": "Exit through the {s}.",
}


@dataclass(frozen=True)
class Action:
    verb: str
    subject: str
    target: str | None = None
    gloss: str = ""

    def signature(self) -> tuple[str, str, str | None]:
        return (self.verb, self.subject, self.target)

    def __str__(self):
        inner = self.subject if self.target is None else f"{self.subject}, {self.target}"
        return f"{self.verb}({inner})"


@dataclass(frozen=True)
class Solution:
    steps: tuple[Action, ...]

    @property
    def length(self) -> int:
        return len(self.steps)

    def signatures(self):
        return tuple(a.signature() for a in self.steps)


# Core layout: (parents, relations, states, standing, attached_mask, escaped)
Core = tuple


class Engine:
    """Compiled rule evaluator for one scene graph."""

    def __init__(self, graph: SceneGraph):
        self.graph = graph
        self.base_digest = graph_digest(graph)
        nodes = sorted(graph.root.walk(), key=lambda n: n.id)
        self.ids: tuple[str, ...] = tuple(n.id for n in nodes)
        self.index: dict[str, int] = {nid: i for i, nid in enumerate(self.ids)}
        self.names: tuple[str, ...] = tuple(n.name for n in nodes)
        self.afford: tuple[frozenset[str], ...] = tuple(
            rules.affordances(tokens_of(n)) for n in nodes
        )
        self.root_idx = self.index[graph.root.id]
        self.exit_idx = self.index[graph.exit_id]
        self.n = len(nodes)

        parents = [ROOT] * self.n
        rels = [ROOT] * self.n
        states = [0] * self.n
        for node in graph.root.walk():
            i = self.index[node.id]
            mask = 0
            for s in node.states:
                mask |= _STATE_BIT[s]
            states[i] = mask
            if node.relation is not None:
                rels[i] = _REL_CODE[node.relation]
            for child in node.children:
                parents[self.index[child.id]] = i
        self.initial: Core = (tuple(parents), tuple(rels), tuple(states), -1, 0, False)


class View:
    """Per-state caches so precondition checks avoid repeated tree walks."""

    __slots__ = ("core", "in_graph", "access", "high", "children", "desc")

    def __init__(self, e: Engine, core: Core):
        n = e.n
        parents, rels, states = core[0], core[1], core[2]
        self.core = core
        children: list[list[int]] = [[] for _ in range(n)]
        roots: list[int] = []
        for i in range(n):
            p = parents[i]
            if p >= 0:
                children[p].append(i)
            else:
                roots.append(i)
        self.children = children

        in_graph = [False] * n
        access = [True] * n
        high = [False] * n
        stack = list(roots)
        while stack:
            i = stack.pop()
            p = parents[i]
            if p < 0:
                in_graph[i] = p == ROOT
                access[i] = True
                high[i] = bool(states[i] & B_HIGH)
            else:
                in_graph[i] = in_graph[p]
                blocked = rels[i] in (R_CONTAINS, R_CONTAINS_LOCKED) and not (
                    states[p] & (B_OPEN | B_BROKEN)
                )
                access[i] = access[p] and not blocked
                high[i] = bool(states[i] & B_HIGH) or (
                    high[p] and rels[i] in _HEIGHT_INHERIT
                )
            stack.extend(children[i])
        self.in_graph = in_graph
        self.access = access
        self.high = high

        desc = [1 << i for i in range(n)]
        order: list[int] = []
        stack = list(roots)
        while stack:
            i = stack.pop()
            order.append(i)
            stack.extend(children[i])
        for i in reversed(order):
            for c in children[i]:
                desc[i] |= desc[c]
        self.desc = desc

    def reachable(self, i: int) -> bool:
        return self.in_graph[i] and self.access[i] and not self.high[i]


def _view(e: Engine, core: Core) -> View:
    return View(e, core)


def _positioned_under(v: View, c: int, x: int) -> bool:
    return v.core[0][c] == x and v.core[1][c] == R_ADJACENT


def _climbable_ok(e: Engine, v: View, c: int) -> bool:
    return (
        "climbable" in e.afford[c]
        and not v.core[2][c] & (B_BROKEN | B_FIXED)
        and v.in_graph[c]
    )


def _blocking_container(e: Engine, v: View, i: int) -> str:
    parents, rels, states = v.core[0], v.core[1], v.core[2]
    while parents[i] >= 0:
        p = parents[i]
        if rels[i] in (R_CONTAINS, R_CONTAINS_LOCKED) and not (states[p] & (B_OPEN | B_BROKEN)):
            return e.names[p]
        i = p
    return "container"


def _hand_takeable(e: Engine, v: View, i: int) -> str | None:
    """None if the player could pick i up by hand, else a reason."""
    core = v.core
    states = core[2]
    name = e.names[i]
    if i == e.root_idx:
        return "you cannot pick up the room"
    if "passage" in e.afford[i] and "lock_part" not in e.afford[i]:
        return f"the {name} is part of the room"
    if "liquid" in e.afford[i]:
        return f"the {name} would run through your fingers"
    if not v.in_graph[i]:
        return f"the {name} is not here"
    if states[i] & B_FIXED:
        return f"the {name} is fixed in place"
    if states[i] & B_BURNING:
        return f"the {name} is burning"
    rel = core[1][i]
    if rel == R_ATTACHED:
        return f"the {name} is fastened to the {e.names[core[0][i]]}"
    if rel == R_EMBEDDED:
        return f"the {name} is embedded in the {e.names[core[0][i]]}"
    if not v.access[i]:
        return f"the {name} is shut inside the {_blocking_container(e, v, i)}"
    if v.high[i]:
        standing = core[3]
        if rel == R_HANGS:
            return f"the {name} hangs out of reach"
        if standing < 0 or not _positioned_under(v, standing, i):
            return f"the {name} is out of reach"
    return None


def _in_inventory(v: View, i: int) -> bool:
    return not v.in_graph[i]


def _held_root(v: View, i: int) -> bool:
    return v.core[0][i] == INV


def _auto_grabbable(e: Engine, v: View, i: int) -> str | None:
    """Light loose items may be grabbed implicitly by the using verb."""
    if _in_inventory(v, i):
        return None if v.access[i] else f"the {e.names[i]} is packed away"
    reason = _hand_takeable(e, v, i)
    if reason is not None:
        return reason
    if v.core[2][i] & B_HEAVY:
        return f"the {e.names[i]} needs both hands; pick it up first"
    return None


def _has_key_in_inventory(e: Engine, v: View) -> bool:
    # A key still tied or embedded in something cannot be turned.
    return any(
        "key" in e.afford[i]
        and not v.in_graph[i]
        and v.access[i]
        and v.core[1][i] not in (R_EMBEDDED, R_ATTACHED)
        for i in range(e.n)
    )


def _locked_part(e: Engine, v: View, i: int) -> int | None:
    if v.core[2][i] & B_LOCKED:
        return i
    for c in v.children[i]:
        if v.core[2][c] & B_LOCKED and "lock_part" in e.afford[c]:
            return c
    return None


# ----------------------------------------------------------------------
# Tree surgery (effects work on raw cores)
# ----------------------------------------------------------------------

def _descendants(core: Core, i: int, n: int) -> set[int]:
    parents = core[0]
    out = {i}
    grew = True
    while grew:
        grew = False
        for j in range(n):
            if j not in out and parents[j] in out:
                out.add(j)
                grew = True
    return out


def _move(e: Engine, core: Core, i: int, new_parent: int, new_rel: int) -> Core:
    parents = list(core[0])
    rels = list(core[1])
    parents[i] = new_parent
    rels[i] = new_rel
    standing = core[3]
    if standing >= 0 and standing in _descendants((tuple(parents),), i, e.n):
        standing = -1
    return (tuple(parents), tuple(rels), core[2], standing, core[4], core[5])


def _to_inventory(e: Engine, core: Core, i: int) -> Core:
    core = _move(e, core, i, INV, ROOT)
    states = list(core[2])
    states[i] &= ~B_HIGH
    attached = core[4] & ~(1 << i)
    return (core[0], core[1], tuple(states), core[3], attached, core[5])


def _set_bits(core: Core, i: int, set_mask: int = 0, clear_mask: int = 0) -> Core:
    states = list(core[2])
    states[i] = (states[i] | set_mask) & ~clear_mask
    return (core[0], core[1], tuple(states), core[3], core[4], core[5])


def _children_raw(core: Core, i: int, n: int) -> list[int]:
    parents = core[0]
    return [j for j in range(n) if parents[j] == i]


# ----------------------------------------------------------------------
# Rule table: one (check, effect) pair per verb
# ----------------------------------------------------------------------

def _check_take(e, v, s, t):
    return _hand_takeable(e, v, s)


def _effect_take(e, c, s, t):
    return _to_inventory(e, c, s)


def _check_open(e, v, s, t):
    if "openable" not in e.afford[s]:
        return f"the {e.names[s]} does not open"
    states = v.core[2][s]
    if states & B_OPEN:
        return f"the {e.names[s]} is already open"
    if _locked_part(e, v, s) is not None:
        return f"the {e.names[s]} is locked"
    if states & B_SEALED:
        return f"the {e.names[s]} is sealed shut"
    if states & B_FROZEN:
        return f"the {e.names[s]} is frozen shut"
    if v.in_graph[s] and not v.reachable(s):
        return f"the {e.names[s]} is out of reach"
    if not v.access[s]:
        return f"the {e.names[s]} is shut away"
    return None


def _effect_open(e, c, s, t):
    return _set_bits(c, s, set_mask=B_OPEN)


def _check_unlock(e, v, s, t):
    if "lock_part" in e.afford[s] and v.core[0][s] >= 0:
        return f"unlock the {e.names[v.core[0][s]]} it secures instead"
    part = _locked_part(e, v, s)
    if part is None:
        return f"the {e.names[s]} is not locked"
    if v.core[2][part] & B_FROZEN:
        return f"the {e.names[part]} is frozen solid"
    if not v.in_graph[s] or not v.reachable(s):
        return f"the {e.names[s]} is out of reach"
    if not _has_key_in_inventory(e, v):
        return "you have no key"
    return None


def _effect_unlock(e, c, s, t):
    c = _set_bits(c, s, clear_mask=B_LOCKED)
    for child in _children_raw(c, s, e.n):
        if "lock_part" in e.afford[child]:
            c = _set_bits(c, child, clear_mask=B_LOCKED)
    return c


_FASTENABLE = (
    "grabber", "cutter", "igniter_flame", "igniter_focus", "key", "cuttable",
)


def _fastenable(e: Engine, v: View, s: int) -> bool:
    # Small rigid parts only; magnetism is a state, not a token affordance.
    return (
        any(kind in e.afford[s] for kind in _FASTENABLE)
        or bool(v.core[2][s] & B_MAGNETIC)
    )


def _check_attach(e, v, s, t):
    if s == t:
        return "cannot attach a thing to itself"
    if not _fastenable(e, v, s):
        return f"the {e.names[s]} is not a part you can fasten onto something"
    grab = _auto_grabbable(e, v, s)
    if grab is not None:
        return grab
    if v.desc[s] & (1 << t):
        return "that would fold the assembly into itself"
    if _in_inventory(v, t):
        if not v.access[t]:
            return f"the {e.names[t]} is packed away"
        return None
    if "passage" in e.afford[t] or t == e.root_idx:
        return f"nothing fastens to the {e.names[t]}"
    if not v.reachable(t):
        return f"the {e.names[t]} is out of reach"
    return None


def _effect_attach(e, c, s, t):
    v = View(e, c)
    base_takeable = (
        v.in_graph[t]
        and _hand_takeable(e, v, t) is None
        and not c[2][t] & B_HEAVY
    )
    c = _move(e, c, s, t, R_ATTACHED)
    c = (c[0], c[1], c[2], c[3], c[4] | (1 << s), c[5])
    if base_takeable:
        # Fastening onto a portable base leaves the assembly in hand.
        c = _to_inventory(e, c, t)
    return c


def _check_detach(e, v, s, t):
    if not (v.core[4] & (1 << s)) or v.core[1][s] != R_ATTACHED:
        return f"the {e.names[s]} is not something you fastened"
    if not v.access[s]:
        return f"the {e.names[s]} is shut away"
    if v.in_graph[s] and v.high[s]:
        return f"the {e.names[s]} is out of reach"
    return None


def _effect_detach(e, c, s, t):
    return _to_inventory(e, c, s)


def _placeable(e, v, s):
    if _held_root(v, s):
        return None
    if v.core[2][s] & B_HEAVY and v.in_graph[s]:
        return f"the {e.names[s]} needs both hands; pick it up first"
    return _auto_grabbable(e, v, s)


def _placement_target_ok(e, v, s, t, what: str):
    if s == t:
        return f"cannot {what} a thing {what.split()[-1]} itself"
    if v.desc[s] & (1 << t):
        return "that would pile a thing onto its own cargo"
    if t == e.root_idx:
        return None
    if not v.in_graph[t]:
        return f"the {e.names[t]} is not here"
    return None


def _check_place_on(e, v, s, t):
    reason = _placeable(e, v, s) or _placement_target_ok(e, v, s, t, "place on")
    if reason is not None:
        return reason
    if "passage" in e.afford[t]:
        return f"nothing rests on the {e.names[t]}"
    if not v.reachable(t):
        return f"the {e.names[t]} is out of reach"
    if v.core[2][t] & B_BURNING:
        return f"the {e.names[t]} is on fire"
    return None


def _effect_place_on(e, c, s, t):
    c = _move(e, c, s, t, R_SUPPORTS)
    return (c[0], c[1], c[2], c[3], c[4] & ~(1 << s), c[5])


def _check_place_under(e, v, s, t):
    reason = _placeable(e, v, s) or _placement_target_ok(e, v, s, t, "place under")
    if reason is not None:
        return reason
    if not v.high[t]:
        return f"the {e.names[t]} is not overhead; just move things next to it"
    if not v.access[t]:
        return f"the {e.names[t]} is shut away"
    return None


def _effect_place_under(e, c, s, t):
    c = _move(e, c, s, t, R_ADJACENT)
    c = (c[0], c[1], c[2], c[3], c[4] & ~(1 << s), c[5])
    if "vessel" in e.afford[s]:
        # Anything dripping from the target flows into the vessel.
        for child in _children_raw(c, t, e.n):
            if child != s and "liquid" in e.afford[child]:
                c = _move(e, c, child, s, R_CONTAINS)
    if c[2][t] & B_LIT and "warm_source" in e.afford[t] and "vessel" in e.afford[s]:
        # Radiant heat warms standing liquid in an open vessel only.
        for node in _children_raw(c, s, e.n):
            if "liquid" in e.afford[node]:
                c = _set_bits(c, node, set_mask=B_LIT)
    return c


def _check_move_to(e, v, s, t):
    reason = _placeable(e, v, s) or _placement_target_ok(e, v, s, t, "move next to")
    if reason is not None:
        return reason
    if not v.reachable(t):
        return f"the {e.names[t]} is out of reach"
    return None


def _effect_move_to(e, c, s, t):
    c = _move(e, c, s, t, R_ADJACENT)
    return (c[0], c[1], c[2], c[3], c[4] & ~(1 << s), c[5])


def _check_climb(e, v, s, t):
    if not _climbable_ok(e, v, s):
        return f"the {e.names[s]} cannot be climbed"
    if not v.reachable(s):
        return f"the {e.names[s]} is out of reach"
    if v.core[3] == s:
        return f"you are already on the {e.names[s]}"
    parent = v.core[0][s]
    if not (parent >= 0 and v.core[1][s] == R_ADJACENT and v.high[parent]):
        return f"the {e.names[s]} is not positioned under anything you need to reach"
    return None


def _effect_climb(e, c, s, t):
    return (c[0], c[1], c[2], s, c[4], c[5])


def _check_reach_with(e, v, s, t):
    if not _held_root(v, s):
        return f"you are not holding the {e.names[s]}"
    if not v.in_graph[t]:
        return f"the {e.names[t]} is not here"
    states_t = v.core[2][t]
    if states_t & B_FIXED:
        return f"the {e.names[t]} will not come loose"
    if v.core[1][t] == R_EMBEDDED:
        return f"the {e.names[t]} is embedded in the {e.names[v.core[0][t]]}"
    if v.high[t]:
        if "long_reach" not in e.afford[s]:
            return f"the {e.names[s]} is too short to reach that far"
        sub = v.desc[s]
        if not any(sub & (1 << j) and "grabber" in e.afford[j] for j in range(e.n)):
            return f"the {e.names[s]} has nothing to grab with"
        if not v.access[t]:
            return f"the {e.names[t]} is shut away"
        if v.core[1][t] == R_HANGS:
            if not any(
                _positioned_under(v, j, t) and _climbable_ok(e, v, j)
                for j in v.children[t]
            ):
                return f"nothing stands under the {e.names[t]} to reach from"
        return None
    # Magnetic extraction through a closed container.
    if not (states_t & B_METALLIC):
        return f"the {e.names[t]} is within reach; just take it"
    sub = v.desc[s]
    if not any(
        j != s and sub & (1 << j) and v.core[2][j] & B_MAGNETIC for j in range(e.n)
    ):
        return f"the {e.names[s]} carries no mounted magnet"
    parent = v.core[0][t]
    if parent < 0 or v.core[1][t] != R_CONTAINS:
        return f"the {e.names[t]} is within reach; just take it"
    pstates = v.core[2][parent]
    if pstates & (B_OPEN | B_BROKEN):
        return f"the {e.names[t]} is within reach; just take it"
    if pstates & (B_SEALED | B_LOCKED | B_FROZEN):
        return f"the {e.names[parent]} is sealed tight; the magnet cannot work through it"
    if not v.access[parent] or not v.reachable(parent):
        return f"the {e.names[parent]} is out of reach"
    return None


def _effect_reach_with(e, c, s, t):
    return _to_inventory(e, c, t)


def _check_cut(e, v, s, t):
    if "cuttable" not in e.afford[s]:
        return f"the {e.names[s]} cannot be cut"
    if v.core[2][s] & B_BROKEN:
        return f"the {e.names[s]} is already severed"
    if not v.in_graph[s] or not v.reachable(s):
        return f"the {e.names[s]} is out of reach"
    if "cutter" not in e.afford[t]:
        return f"the {e.names[t]} cannot cut"
    if not (_in_inventory(v, t) and v.access[t]) and not v.reachable(t):
        return f"the {e.names[t]} is out of reach"
    return None


def _effect_cut(e, c, s, t):
    c = _set_bits(c, s, set_mask=B_BROKEN)
    freed = [j for j in _children_raw(c, s, e.n) if c[1][j] == R_ATTACHED]
    for j in sorted(freed, key=lambda j: e.ids[j]):
        c = _to_inventory(e, c, j)
    return c


def _check_ignite(e, v, s, t):
    if not (v.core[2][s] & B_FLAMMABLE):
        return f"the {e.names[s]} is not flammable"
    if v.core[2][s] & B_BURNING:
        return f"the {e.names[s]} is already burning"
    if not v.in_graph[s] or not v.reachable(s):
        return f"the {e.names[s]} is out of reach"
    if "igniter_flame" in e.afford[t]:
        pass
    elif "igniter_focus" in e.afford[t]:
        if "tinder" not in e.afford[s]:
            return f"focused light will not catch on the {e.names[s]}; it needs tinder"
        if not any(
            "sun_source" in e.afford[j] and v.core[2][j] & B_LIT and v.in_graph[j]
            for j in range(e.n)
        ):
            return "no sunlight to focus"
    else:
        return f"the {e.names[t]} cannot start a fire"
    if not (_in_inventory(v, t) and v.access[t]) and not v.reachable(t):
        return f"the {e.names[t]} is out of reach"
    return None


def _effect_ignite(e, c, s, t):
    c = _set_bits(c, s, set_mask=B_BURNING)
    # Fire spreads across touching flammable parent/child pairs.
    changed = True
    while changed:
        changed = False
        for i in range(e.n):
            if c[2][i] & B_BURNING or not (c[2][i] & B_FLAMMABLE):
                continue
            parent = c[0][i]
            touching = (
                parent >= 0 and c[1][i] in _CONTACT and c[2][parent] & B_BURNING
            ) or any(
                c[2][j] & B_BURNING and c[1][j] in _CONTACT
                for j in _children_raw(c, i, e.n)
            )
            if touching:
                c = _set_bits(c, i, set_mask=B_BURNING)
                changed = True
    # Soft embedding media release their cargo as they burn away.
    for i in sorted(range(e.n), key=lambda j: e.ids[j]):
        parent = c[0][i]
        if (
            parent >= 0
            and c[1][i] == R_EMBEDDED
            and c[2][parent] & B_BURNING
            and not (c[2][i] & (B_FLAMMABLE | B_BURNING))
        ):
            c = _to_inventory(e, c, i)
    return c


def _check_soak(e, v, s, t):
    if "absorbent" not in e.afford[s]:
        return f"the {e.names[s]} will not hold liquid"
    reason = _placeable(e, v, s)
    if reason is not None:
        return reason
    if "vessel" not in e.afford[t]:
        return f"the {e.names[t]} holds nothing to soak in"
    if not v.in_graph[t] or not v.reachable(t):
        return f"the {e.names[t]} is out of reach"
    if not any("liquid" in e.afford[j] for j in v.children[t]):
        return f"the {e.names[t]} is empty"
    return None


def _effect_soak(e, c, s, t):
    liquids = [j for j in _children_raw(c, t, e.n) if "liquid" in e.afford[j]]
    for j in sorted(liquids, key=lambda j: e.ids[j]):
        c = _move(e, c, j, s, R_CONTAINS)
    return c


def _check_pour(e, v, s, t):
    if "pour_source" not in e.afford[s]:
        return f"the {e.names[s]} cannot be poured from"
    if not (_in_inventory(v, s) and v.access[s]) and not v.reachable(s):
        return f"the {e.names[s]} is out of reach"
    if "absorbent" not in e.afford[t]:
        return f"the {e.names[t]} will not soak that up"
    if v.core[2][t] & B_FLAMMABLE:
        return f"the {e.names[t]} is already soaked"
    if not v.in_graph[t] or not v.reachable(t):
        return f"the {e.names[t]} is out of reach"
    return None


def _effect_pour(e, c, s, t):
    return _set_bits(c, t, set_mask=B_FLAMMABLE)


def _check_wrap(e, v, s, t):
    if s == t:
        return "cannot wrap a thing around itself"
    if "absorbent" not in e.afford[s]:
        return f"the {e.names[s]} is not flexible enough to wrap"
    reason = _placeable(e, v, s)
    if reason is not None:
        return reason
    if v.desc[s] & (1 << t):
        return "that would wrap a thing around its own cargo"
    if t == e.root_idx:
        return f"the {e.names[t]} is too big to wrap"
    if not v.in_graph[t] or not v.reachable(t):
        return f"the {e.names[t]} is out of reach"
    return None


def _effect_wrap(e, c, s, t):
    c = _move(e, c, s, t, R_ATTACHED)
    return (c[0], c[1], c[2], c[3], c[4] | (1 << s), c[5])


def _warm_wrap(e: Engine, v: View, s: int) -> bool:
    # Thermal contact needs a warm-soaked wrap hugging the frozen thing;
    # a vessel resting nearby is not enough, and the liquid must be held
    # in the wrap itself.
    for a in v.children[s]:
        if v.core[1][a] != R_ATTACHED or "absorbent" not in e.afford[a]:
            continue
        if any(
            v.core[1][j] == R_CONTAINS
            and "liquid" in e.afford[j]
            and v.core[2][j] & B_LIT
            for j in v.children[a]
        ):
            return True
    return False


def _pending_transformations(e: Engine, v: View, s: int) -> list[str]:
    pending = []
    core = v.core
    states = core[2][s]
    sub = v.desc[s]
    if states & B_FROZEN and _warm_wrap(e, v, s):
        pending.append("thaw")
    if "explosive" in e.afford[s] and not states & B_BROKEN and any(
        j != s and sub & (1 << j) and core[2][j] & B_BURNING for j in range(e.n)
    ):
        pending.append("explode")
    if "balance" in e.afford[s]:
        counts = _balance_counts(e, v, s)
        if counts is not None and counts[0] == counts[1] > 0 and core[2][e.exit_idx] & B_LOCKED:
            pending.append("balance")
    return pending


def _balance_counts(e: Engine, v: View, s: int):
    left = right = None
    for child in v.children[s]:
        toks = e.ids[child].split("_")
        if "left" in toks:
            left = child
        if "right" in toks:
            right = child
    if left is None or right is None:
        return None

    def count(side):
        # Only direct load-bearing children press on a side.
        return sum(
            1
            for j in v.children[side]
            if v.core[2][j] & B_HEAVY
            and v.core[1][j] in (R_SUPPORTS, R_CONTAINS, R_CONTAINS_LOCKED)
        )

    return (count(left), count(right))


def _check_wait(e, v, s, t):
    if not v.in_graph[s]:
        return f"the {e.names[s]} is not here"
    if _pending_transformations(e, v, s):
        return None
    return f"nothing is happening to the {e.names[s]}"


def _effect_wait(e, c, s, t):
    v = View(e, c)
    for kind in _pending_transformations(e, v, s):
        if kind == "thaw":
            c = _set_bits(c, s, clear_mask=B_FROZEN)
            for j in _children_raw(c, s, e.n):
                if c[1][j] == R_EMBEDDED and "key" in e.afford[j] and c[2][s] & B_LOCKED:
                    # The lock's own key sits in it; once thawed it turns.
                    c = _set_bits(c, s, clear_mask=B_LOCKED)
        elif kind == "explode":
            c = _set_bits(c, s, set_mask=B_BROKEN)
            for j in range(e.n):
                if "wall" in e.afford[j] and c[2][j] & B_SEALED:
                    c = _set_bits(c, j, set_mask=B_BROKEN, clear_mask=B_SEALED)
        elif kind == "balance":
            c = _set_bits(c, e.exit_idx, clear_mask=B_LOCKED)
    return c


def _check_throw_at(e, v, s, t):
    if "throwable" not in e.afford[s]:
        return f"the {e.names[s]} is not something to throw"
    if _held_root(v, s):
        pass
    elif v.core[2][s] & B_HEAVY:
        return f"the {e.names[s]} needs both hands; pick it up first"
    else:
        reason = _auto_grabbable(e, v, s)
        if reason is not None:
            return reason
    if s == t:
        return "cannot throw a thing at itself"
    if not v.in_graph[t]:
        return f"the {e.names[t]} is not here"
    if "fragile" not in e.afford[t]:
        return f"throwing things at the {e.names[t]} achieves nothing"
    if v.core[2][t] & B_BROKEN:
        return f"the {e.names[t]} is already broken"
    if not v.access[t]:
        return f"the {e.names[t]} is shut away"
    return None


def _effect_throw_at(e, c, s, t):
    c = _set_bits(c, t, set_mask=B_BROKEN, clear_mask=B_SEALED | B_HIGH)
    c = _move(e, c, s, t, R_ADJACENT)
    return (c[0], c[1], c[2], c[3], c[4] & ~(1 << s), c[5])


def _check_combine(e, v, s, t):
    if s == t:
        return "cannot combine a thing with itself"
    if not _held_root(v, s) or not _held_root(v, t):
        return "both parts must be in hand to combine them"
    return None


def _effect_combine(e, c, s, t):
    c = _move(e, c, s, t, R_ATTACHED)
    return (c[0], c[1], c[2], c[3], c[4] | (1 << s), c[5])


def _check_pull(e, v, s, t):
    if "pullable" not in e.afford[s]:
        return f"the {e.names[s]} offers nothing to pull"
    if not v.in_graph[s] or not v.reachable(s):
        return f"the {e.names[s]} is out of reach"
    parent = v.core[0][s]
    if parent < 0:
        return f"pulling the {e.names[s]} does nothing"
    if v.core[2][parent] & B_LOCKED:
        return f"the {e.names[parent]} is still latched firm"
    if not (v.core[2][parent] & B_SEALED):
        return f"the {e.names[parent]} is already loose"
    return None


def _effect_pull(e, c, s, t):
    parent = c[0][s]
    return _set_bits(c, parent, set_mask=B_OPEN, clear_mask=B_SEALED)


def _check_exit(e, v, s, t):
    if "passage" not in e.afford[s] or "lock_part" in e.afford[s]:
        return f"the {e.names[s]} is not a way out"
    if not v.in_graph[s] or not v.reachable(s):
        return f"the {e.names[s]} is out of reach"
    states = v.core[2][s]
    if states & B_BROKEN:
        return None
    if "wall" in e.afford[s]:
        return f"the {e.names[s]} is solid"
    if states & B_LOCKED:
        return f"the {e.names[s]} is locked"
    if states & B_SEALED:
        return f"the {e.names[s]} is sealed"
    part = _locked_part(e, v, s)
    if part is not None:
        return f"the {e.names[part]} holds the {e.names[s]} shut"
    return None


def _effect_exit(e, c, s, t):
    return (c[0], c[1], c[2], c[3], c[4], True)


_RULE_TABLE = {
    "take": (_check_take, _effect_take, False),
    "open": (_check_open, _effect_open, False),
    "unlock": (_check_unlock, _effect_unlock, False),
    "attach": (_check_attach, _effect_attach, True),
    "detach": (_check_detach, _effect_detach, False),
    "place_on": (_check_place_on, _effect_place_on, True),
    "place_under": (_check_place_under, _effect_place_under, True),
    "climb": (_check_climb, _effect_climb, False),
    "reach_with": (_check_reach_with, _effect_reach_with, True),
    "cut": (_check_cut, _effect_cut, True),
    "ignite": (_check_ignite, _effect_ignite, True),
    "soak": (_check_soak, _effect_soak, True),
    "pour": (_check_pour, _effect_pour, True),
    "wrap": (_check_wrap, _effect_wrap, True),
    "wait_for_effect": (_check_wait, _effect_wait, False),
    "throw_at": (_check_throw_at, _effect_throw_at, True),
    "move_to": (_check_move_to, _effect_move_to, True),
    "combine": (_check_combine, _effect_combine, True),
    "pull": (_check_pull, _effect_pull, False),
    "exit_room": (_check_exit, _effect_exit, False),
}

assert set(_RULE_TABLE) == set(rules.VERBS)


# ----------------------------------------------------------------------
# Candidate generation
# ----------------------------------------------------------------------

def _candidates(e: Engine, v: View, verb: str, in_graph, held, placeable):
    """Candidate (subject, target) pairs cheap enough to filter by check.

    Node indices follow sorted id order, so plain index loops already
    yield the deterministic ordering the solver relies on.
    """
    n = e.n
    all_nodes = range(n)
    if verb == "take":
        return ((i, None) for i in in_graph if i != e.root_idx)
    if verb == "open":
        return ((i, None) for i in all_nodes if "openable" in e.afford[i])
    if verb == "unlock":
        return ((i, None) for i in in_graph if _locked_part(e, v, i) is not None)
    if verb == "attach":
        return (
            (a, b)
            for a in placeable if _fastenable(e, v, a)
            for b in all_nodes if a != b
        )
    if verb == "detach":
        return ((i, None) for i in all_nodes if v.core[4] & (1 << i))
    if verb == "place_on":
        return ((a, b) for a in placeable for b in in_graph if a != b)
    if verb == "place_under":
        return ((a, b) for a in placeable for b in in_graph if a != b and v.high[b])
    if verb == "move_to":
        return ((a, b) for a in placeable for b in in_graph if a != b and not v.high[b])
    if verb == "climb":
        return ((i, None) for i in in_graph if "climbable" in e.afford[i])
    if verb == "reach_with":
        return ((tool, x) for tool in held for x in in_graph)
    if verb == "cut":
        return (
            (x, tool)
            for x in in_graph if "cuttable" in e.afford[x]
            for tool in all_nodes if "cutter" in e.afford[tool]
        )
    if verb == "ignite":
        return (
            (x, tool)
            for x in in_graph if v.core[2][x] & B_FLAMMABLE
            for tool in all_nodes
            if "igniter_flame" in e.afford[tool] or "igniter_focus" in e.afford[tool]
        )
    if verb == "soak":
        return (
            (x, vv)
            for x in placeable if "absorbent" in e.afford[x]
            for vv in in_graph if "vessel" in e.afford[vv] and x != vv
        )
    if verb == "pour":
        return (
            (src, x)
            for src in all_nodes if "pour_source" in e.afford[src]
            for x in in_graph if "absorbent" in e.afford[x]
        )
    if verb == "wrap":
        return (
            (x, y)
            for x in placeable if "absorbent" in e.afford[x]
            for y in in_graph if y != x
        )
    if verb == "wait_for_effect":
        return (
            (i, None) for i in in_graph
            if v.core[2][i] & B_FROZEN
            or "explosive" in e.afford[i]
            or "balance" in e.afford[i]
        )
    if verb == "throw_at":
        return (
            (p, x)
            for p in all_nodes if "throwable" in e.afford[p]
            for x in in_graph if "fragile" in e.afford[x]
        )
    if verb == "combine":
        return ((a, b) for a in held for b in held if a != b)
    if verb == "pull":
        return ((i, None) for i in in_graph if "pullable" in e.afford[i])
    if verb == "exit_room":
        return (
            (i, None) for i in in_graph
            if "passage" in e.afford[i] and "lock_part" not in e.afford[i]
        )
    return ()


def _legal_pairs(e: Engine, core: Core) -> list[tuple[str, int, int | None]]:
    if core[5]:
        return []
    v = View(e, core)
    all_nodes = range(e.n)
    in_graph = [i for i in all_nodes if v.in_graph[i]]
    held = [i for i in all_nodes if core[0][i] == INV]
    placeable = [
        i for i in all_nodes if i != e.root_idx and _placeable(e, v, i) is None
    ]
    out = []
    for verb in rules.VERBS:
        check = _RULE_TABLE[verb][0]
        for s, t in _candidates(e, v, verb, in_graph, held, placeable):
            if check(e, v, s, t) is None:
                out.append((verb, s, t))
    return out


# ----------------------------------------------------------------------
# Public world state
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class WorldState:
    engine: Engine = field(compare=False, repr=False, hash=False)
    core: Core = ()
    digest: str = ""

    @property
    def escaped(self) -> bool:
        return self.core[5]

    @property
    def standing_on(self) -> str | None:
        idx = self.core[3]
        return self.engine.ids[idx] if idx >= 0 else None

    @property
    def inventory(self) -> frozenset[str]:
        e = self.engine
        return frozenset(e.ids[i] for i in range(e.n) if self.core[0][i] == INV)

    @property
    def derived_flags(self) -> dict[str, frozenset[str]]:
        """States that differ from the base graph, by node id."""
        e = self.engine
        out = {}
        base = e.initial[2]
        for i in range(e.n):
            if self.core[2][i] != base[i]:
                out[e.ids[i]] = frozenset(
                    s for s, bit in _STATE_BIT.items() if self.core[2][i] & bit
                )
        return out

    @property
    def graph(self) -> SceneGraph:
        """Materialize the current in-graph tree as a SceneGraph."""
        e = self.engine
        base_nodes = e.graph.nodes()

        def build(i: int):
            kids = sorted(
                (j for j in range(e.n) if self.core[0][j] == i), key=lambda j: e.ids[j]
            )
            rel_code = self.core[1][i]
            rel = RELATIONS[rel_code] if rel_code >= 0 else None
            states = frozenset(s for s, bit in _STATE_BIT.items() if self.core[2][i] & bit)
            return replace(
                base_nodes[e.ids[i]],
                relation=rel, states=states,
                children=tuple(build(j) for j in kids),
            )

        return SceneGraph(
            root=build(e.root_idx),
            exit_id=e.graph.exit_id,
            description=e.graph.description,
        )


def initial_state(graph: SceneGraph) -> WorldState:
    engine = Engine(graph)
    return WorldState(engine=engine, core=engine.initial, digest=engine.base_digest)


def _mk_action(e: Engine, verb: str, s: int, t: int | None) -> Action:
    subject = e.ids[s]
    target = e.ids[t] if t is not None else None
    gloss = _GLOSS[verb].format(s=e.names[s], t=e.names[t] if t is not None else "")
    return Action(verb=verb, subject=subject, target=target, gloss=gloss)


def legal_actions(world: WorldState) -> list[Action]:
    """Every action whose preconditions hold, deterministically ordered."""
    e = world.engine
    return [_mk_action(e, verb, s, t) for verb, s, t in _legal_pairs(e, world.core)]


def check_action(world: WorldState, action: Action) -> str | None:
    """Reason the action is illegal, or None if it may be applied."""
    e = world.engine
    if world.core[5]:
        return "you already escaped"
    if action.verb not in _RULE_TABLE:
        return f"unknown verb {action.verb}"
    if action.subject not in e.index:
        return f"there is no {action.subject} here"
    s = e.index[action.subject]
    t = None
    check, _, needs_target = _RULE_TABLE[action.verb]
    if needs_target:
        if action.target is None:
            return f"{action.verb} needs a target"
        if action.target not in e.index:
            return f"there is no {action.target} here"
        t = e.index[action.target]
    return check(e, View(e, world.core), s, t)


def apply(world: WorldState, action: Action) -> WorldState:
    """Apply one action, returning the successor state. Inputs unchanged."""
    reason = check_action(world, action)
    if reason is not None:
        raise IllegalAction(action.verb, reason)
    e = world.engine
    s = e.index[action.subject]
    needs_target = _RULE_TABLE[action.verb][2]
    t = e.index[action.target] if needs_target else None
    effect = _RULE_TABLE[action.verb][1]
    return WorldState(engine=e, core=effect(e, world.core, s, t), digest=world.digest)


def apply_raw(e: Engine, core: Core, verb: str, s: int, t: int | None) -> Core:
    """Solver-internal fast path; callers guarantee legality."""
    return _RULE_TABLE[verb][1](e, core, s, t)
