"""Affordance tables for the action rule set.

Affordances are derived from word tokens of a node's id and name. The
tables are closed on purpose: decidable symbolic checking needs a fixed
vocabulary, and these sets cover the bundled scenes plus headroom for
designer output. Flags (locked, heavy, ...) are orthogonal and live on
the node's states.
"""

from __future__ import annotations

VERBS = (
    "take",
    "open",
    "unlock",
    "attach",
    "detach",
    "place_on",
    "place_under",
    "climb",
    "reach_with",
    "cut",
    "ignite",
    "soak",
    "pour",
    "wrap",
    "wait_for_effect",
    "throw_at",
    "move_to",
    "combine",
    "pull",
    "exit_room",
)

KEY = frozenset({"key", "keycard"})
CLIMBABLE = frozenset({
    "ladder", "stepladder", "chair", "stool", "desk", "table", "bench",
    "crate", "box",
})
LONG_REACH = frozenset({
    "pole", "skimmer", "net", "rod", "rake", "broom", "cane", "pointer",
    "stick",
})
GRABBER = frozenset({"hook", "hooked", "clamp", "grabber", "claw", "tongs"})
CUTTER = frozenset({"scissors", "knife", "shears", "cutter", "blade", "saw"})
IGNITER_FLAME = frozenset({"match", "matchstick", "matches", "lighter"})
IGNITER_FOCUS = frozenset({"magnifier", "magnifying", "lens"})
TINDER = frozenset({"cotton", "paper", "cloth", "rag", "straw", "tinder", "wool"})
FLAME_TARGET_EXTRA = frozenset({"fuse", "wick", "candle", "rope"})
THROWABLE = frozenset({"dart", "ball", "rock", "stone", "brick", "crowbar", "hammer", "wrench"})
FRAGILE = frozenset({"balloon", "glass", "dome", "window", "jar", "vase"})
OPENABLE = frozenset({
    "locker", "cabinet", "drawer", "box", "chest", "door", "gate", "window",
    "lid", "trunk", "wardrobe", "closet", "pouch", "trapdoor", "hatch",
})
VESSEL = frozenset({"bucket", "bowl", "pot", "cup", "basin", "pail", "kettle"})
POUR_SOURCE = frozenset({"bottle", "flask", "jug", "vial", "canister"})
ABSORBENT = frozenset({"blanket", "cloth", "towel", "rag", "cotton", "sponge", "wool"})
LIQUID = frozenset({"water", "liquid", "drip"})
WARM_SOURCE = frozenset({"lamp", "heater", "radiator", "stove", "sun", "heat"})
SUN_SOURCE = frozenset({"window", "skylight", "sun"})
BALANCE = frozenset({"seesaw", "scale", "balance"})
EXPLOSIVE = frozenset({"bomb", "dynamite", "tnt", "firework"})
PULLABLE = frozenset({"handle", "lever", "cord", "chain"})
PASSAGE = frozenset({"door", "window", "trapdoor", "hatch", "gate", "wall", "opening"})
WALL = frozenset({"wall"})
CUTTABLE = frozenset({"string", "rope", "cord", "ribbon", "thread", "strap", "tape"})
LOCK_PART = frozenset({"lock", "padlock", "latch", "bolt"})

AFFORDANCE_TABLES: dict[str, frozenset[str]] = {
    "key": KEY,
    "climbable": CLIMBABLE,
    "long_reach": LONG_REACH,
    "grabber": GRABBER,
    "cutter": CUTTER,
    "igniter_flame": IGNITER_FLAME,
    "igniter_focus": IGNITER_FOCUS,
    "tinder": TINDER,
    "flame_target_extra": FLAME_TARGET_EXTRA,
    "throwable": THROWABLE,
    "fragile": FRAGILE,
    "openable": OPENABLE,
    "vessel": VESSEL,
    "pour_source": POUR_SOURCE,
    "absorbent": ABSORBENT,
    "liquid": LIQUID,
    "warm_source": WARM_SOURCE,
    "sun_source": SUN_SOURCE,
    "balance": BALANCE,
    "explosive": EXPLOSIVE,
    "pullable": PULLABLE,
    "passage": PASSAGE,
    "wall": WALL,
    "cuttable": CUTTABLE,
    "lock_part": LOCK_PART,
}


def affordances(token_set: frozenset[str]) -> frozenset[str]:
    return frozenset(
        kind for kind, table in AFFORDANCE_TABLES.items() if token_set & table
    )
