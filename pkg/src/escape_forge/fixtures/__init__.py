"""Bundled scene fixtures: the eight reference scenes plus test helpers.

Each fixture pairs a scene document with its official solution. The
documents live as .scene files so loading them exercises the parser.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources

from ..scene import GraphPatch, SceneGraph, SetStates, parse_scene_graph
from ..solver import deserialize_solution
from ..world import Solution

# Appendix-style scenes in canonical order; loft/minimal/classroom_desk are
# engineering fixtures for diff and shortcut tests.
SCENE_NAMES = (
    "pool", "classroom", "prison", "balloon", "magnet", "hospital",
    "seesaw", "bomb",
)
EXPECTED_LENGTHS = {
    "pool": 5, "classroom": 5, "prison": 6, "balloon": 4, "magnet": 4,
    "hospital": 4, "seesaw": 7, "bomb": 6,
    "minimal": 3,
    # loft's official path (ladder) is deliberately one step longer than
    # the climbable-desk route; it exists to exercise diff_solutions.
    "loft": 4,
}
ALL_NAMES = SCENE_NAMES + ("minimal", "loft", "classroom_desk")


@dataclass(frozen=True)
class Fixture:
    name: str
    graph: SceneGraph
    official: Solution
    max_steps: int
    description: str


def _read(filename: str) -> str:
    return resources.files("escape_forge.fixtures").joinpath("data", filename).read_text("utf-8")


def scene_text(name: str) -> str:
    return _read(f"{name}.scene")


def load(name: str) -> Fixture:
    """Load a fixture by name; classroom_desk reuses classroom's official."""
    meta_name = "classroom" if name == "classroom_desk" else name
    meta = json.loads(_read(f"{meta_name}.json"))
    graph = parse_scene_graph(scene_text(name), description=meta["description"])
    return Fixture(
        name=name,
        graph=graph,
        official=deserialize_solution(meta["steps"]),
        max_steps=meta["max_steps"],
        description=meta["description"],
    )


def desk_blocking_patch() -> GraphPatch:
    """The documented patch that removes the climbable-desk shortcut."""
    return GraphPatch((SetStates("desk", frozenset({"fixed_in_place", "broken"})),))
