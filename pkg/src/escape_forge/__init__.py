"""escape-forge: verifiable escape-room puzzle engine and refinement pipeline."""

from .scene import (
    GraphPatch,
    ObjectNode,
    PuzzleSpec,
    SceneGraph,
    apply_patch,
    emit_scene_graph,
    parse_scene_graph,
    validate,
)
from .solver import DiffReport, detect_shortcuts, diff_solutions, solve
from .world import Action, Solution, WorldState, apply, initial_state, legal_actions

__version__ = "0.1.0"

__all__ = [
    "Action",
    "DiffReport",
    "GraphPatch",
    "ObjectNode",
    "PuzzleSpec",
    "SceneGraph",
    "Solution",
    "WorldState",
    "apply",
    "apply_patch",
    "detect_shortcuts",
    "diff_solutions",
    "emit_scene_graph",
    "initial_state",
    "legal_actions",
    "parse_scene_graph",
    "solve",
    "validate",
]
