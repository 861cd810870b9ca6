"""Scripted backend scenarios for offline end-to-end runs.

Each factory lays out the exact (role, stage) turn sequence a pipeline
run will consume, so runs are fully deterministic and auditable. The
classroom scenario mirrors the paper's running example: the designer's
first graph contains a climbable desk right under the key, the examiner
patches it at the Graph stage, and one local image edit makes the desk
look unusable at the Image stage.
"""

from __future__ import annotations

import json

from ..agents.backends import ScriptedBackend
from ..scene import PuzzleSpec, apply_patch, emit_scene_graph
from ..solver import solution_text
from . import desk_blocking_patch, load

OFFICIAL_STEPS_TEXT = """\
Steps to solve:
1. Pick up the hooked pole from the teacher desk.
2. Position the ladder beneath the key.
3. Use the hooked pole to retrieve the key.
4. Use the key to unlock the exit door.
5. Exit through the exit door.
"""

DESK_SHORTCUT_TEXT = """\
1. Climb the desk under the key.
2. Take the key.
3. Use the key to unlock the exit door.
4. Exit through the exit door.
"""


def classroom_spec() -> PuzzleSpec:
    return PuzzleSpec(
        scene_keyword="classroom",
        core_objects=("ladder", "hooked pole"),
        max_steps=5,
        seed=7,
    )


def build_classroom_scenario() -> ScriptedBackend:
    """The full A.2-style run: flawed first graph, one patch, one edit."""
    flawed = load("classroom_desk")
    fixed_graph = apply_patch(flawed.graph, desk_blocking_patch())
    backend = ScriptedBackend()
    backend.add("Designer", "Graph", flawed.description + "\n\n" + OFFICIAL_STEPS_TEXT)
    backend.add("Designer", "Graph", emit_scene_graph(flawed.graph))
    # Graph stage: the symbolic player finds the desk shortcut; the
    # examiner revises the graph to make the desk unusable.
    backend.add("Examiner", "Graph", emit_scene_graph(fixed_graph))
    # Layout stage: the player reads the sketch correctly first try.
    backend.add("Player", "Layout", solution_text(flawed.official))
    # Image stage: the rendered image still suggests climbing the desk;
    # after one local edit the player reads the intended path.
    backend.add("Player", "Image", DESK_SHORTCUT_TEXT)
    backend.add("Examiner", "Image", "No.\n- the desk must look unclimbable")
    backend.add("Builder", "Image", "object: desk\ncondition: broken, cluttered surface")
    backend.add("Player", "Image", solution_text(flawed.official))
    backend.add("Examiner", "Image", "Yes.")
    return backend


def build_repair_scenario() -> ScriptedBackend:
    """Designer emits one malformed graph, then a valid one."""
    fx = load("classroom")
    backend = ScriptedBackend()
    backend.add("Designer", "Graph", fx.description + "\n\n" + OFFICIAL_STEPS_TEXT)
    backend.add("Designer", "Graph", "classroom:\n  children:\n    exit_door:\n      relation: orbits\n")
    backend.add("Designer", "Graph", emit_scene_graph(fx.graph))
    return backend


def build_never_accepting_examiner(cap: int = 8) -> ScriptedBackend:
    """Examiner that always rejects and never actually changes the graph."""
    fx = load("classroom")
    backend = ScriptedBackend()
    for _ in range(cap):
        backend.add("Examiner", "Graph", "No.\n- still not convincing")
        backend.add("Examiner", "Graph", emit_scene_graph(fx.graph))  # identical: NullPatch
    return backend


# ----------------------------------------------------------------------
# Scripted corpus (15 scenes x 2 core objects) for the eval harness
# ----------------------------------------------------------------------

CORPUS_SCENES = (
    ("garden", ("watering can", "trellis")),
    ("library", ("ladder", "globe")),
    ("kitchen", ("kettle", "magnet")),
    ("garage", ("crowbar", "toolbox")),
    ("attic", ("rope", "chest")),
    ("bakery", ("rolling pin", "oven mitt")),
    ("museum", ("velvet rope", "pedestal")),
    ("arcade", ("claw machine", "tokens")),
    ("greenhouse", ("pruning shears", "pot")),
    ("workshop", ("clamp", "saw")),
    ("studio", ("easel", "canvas")),
    ("cabin", ("axe", "lantern")),
    ("diner", ("tray", "napkin")),
    ("theater", ("curtain", "spotlight")),
    ("observatory", ("telescope", "star chart")),
)

WRONG_PROBE_TEXT = "1. Take the table.\n2. Exit through the exit door.\n"


def corpus_specs() -> list[PuzzleSpec]:
    return [
        PuzzleSpec(scene_keyword=scene, core_objects=objs, max_steps=3, seed=i)
        for i, (scene, objs) in enumerate(CORPUS_SCENES)
    ]


def _corpus_graph_text(scene: str, with_window: bool, window_sealed: bool = False) -> str:
    lines = [
        f"{scene}_room:",
        "  children:",
        "    exit_door:",
        "      relation: adjacent_to",
        "      states: [locked]",
        "      exit: true",
        "    table:",
        "      relation: adjacent_to",
        "      states: [fixed_in_place]",
        "      children:",
        "        key:",
        "          relation: supports",
        "          states: [metallic]",
    ]
    if with_window:
        lines += [
            "    window:",
            "      relation: attached_to",
        ]
        if window_sealed:
            lines.append("      states: [sealed]")
    return "\n".join(lines) + "\n"


def _corpus_fixed_graph_text(scene: str) -> str:
    return _corpus_graph_text(scene, with_window=True, window_sealed=True)


CORPUS_OFFICIAL_TEXT = """\
Steps to solve:
1. Take the key.
2. Use the key to unlock the exit door.
3. Exit through the exit door.
"""


def spec_has_shortcut(index: int) -> bool:
    return index % 3 == 0


def probe_misreads_without_layout(index: int) -> bool:
    return index % 4 == 1


def probe_misreads_without_edit(index: int) -> bool:
    return spec_has_shortcut(index) or index % 5 == 4


def build_corpus_scenario(spec: PuzzleSpec, features: tuple[str, ...]) -> ScriptedBackend:
    """Turn sequence for one corpus spec under one ablation config.

    The fixtures are constructed to exhibit the comparison table's
    directional trends: graphs start with a window shortcut on a third
    of the scenes (fixed only when the SceneGraph stage runs), image
    convergence takes three extra edits without layout conditioning,
    and the final probe player misreads un-edited or un-conditioned
    images on a known subset of scenes.
    """
    index = spec.seed
    scene = spec.scene_keyword
    has_shortcut = spec_has_shortcut(index)
    backend = ScriptedBackend()
    description = (
        f"A bright {scene} escape room featuring {spec.core_objects[0]} and "
        f"{spec.core_objects[1]}. A key rests on the fixed table; the exit door is locked."
    )
    backend.add("Designer", "Graph", description + "\n\n" + CORPUS_OFFICIAL_TEXT)
    backend.add("Designer", "Graph", _corpus_graph_text(scene, with_window=has_shortcut))
    if "SceneGraph" in features and has_shortcut:
        backend.add("Examiner", "Graph", _corpus_fixed_graph_text(scene))
    if "Layout" in features:
        backend.add("Player", "Layout", CORPUS_OFFICIAL_TEXT)
    if "ImageEdit" in features:
        edit_rounds = 1 if "Layout" in features else 3
        for i in range(edit_rounds):
            backend.add("Player", "Image", WRONG_PROBE_TEXT)
            backend.add("Examiner", "Image", "No.\n- the key must look shinier")
            backend.add("Builder", "Image", "object: key\ncondition: bright polished brass")
        backend.add("Player", "Image", CORPUS_OFFICIAL_TEXT)
        backend.add("Examiner", "Image", "Yes.")
    # Final solvability probe: one more read of the finished artifact.
    probe_correct = True
    if "SceneGraph" not in features and has_shortcut:
        probe_correct = False
    if "ImageEdit" not in features and probe_misreads_without_edit(index):
        probe_correct = False
    if "Layout" not in features and probe_misreads_without_layout(index):
        probe_correct = False
    if "Description" not in features and index % 2 == 0:
        probe_correct = False
    backend.add(
        "Player", "Image",
        CORPUS_OFFICIAL_TEXT if probe_correct else WRONG_PROBE_TEXT,
    )
    return backend


def export_scenario(backend: ScriptedBackend, path) -> None:
    """Write a scripted scenario as the JSON fixture-file format."""
    entries = []
    for (role, stage), queue in sorted(backend._turns.items()):
        for turn, entry in enumerate(queue):
            record = {"role": role, "stage": stage, "turn": turn}
            record.update({k: v for k, v in entry.items() if k != "image" or v})
            entries.append(record)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(entries, fh, indent=2)
        fh.write("\n")
