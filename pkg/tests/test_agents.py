"""Prompt templates, verb lexicon, scripted agent roles, transcripts."""

import pytest

from escape_forge import fixtures
from escape_forge.agents import (
    AgentContext,
    ScriptedBackend,
    Transcript,
    parse_action,
    parse_steps,
    render_prompt,
)
from escape_forge.agents.roles import (
    builder_refine_image,
    designer_design,
    examiner_check,
    examiner_refine_graph,
    player_solve,
)
from escape_forge.errors import (
    BackendError,
    NullPatch,
    PatchRejected,
    ResponseParseError,
    UnboundPlaceholder,
    UnparseableSteps,
)
from escape_forge.fixtures import scenarios
from escape_forge.images import ImageArtifact
from escape_forge.layout import synthesize_layout
from escape_forge.scene import PuzzleSpec, SetStates, emit_scene_graph
from escape_forge.solver import DiffReport, replay


# ----------------------------------------------------------------------
# Templates
# ----------------------------------------------------------------------

def test_designer_prompt_verbatim_sentences():
    text = render_prompt("designer_design", {
        "scene": "classroom", "objects": "ladder", "max_steps": 3, "max_objects": 4,
    })
    assert "Help me design a mechanical and tactile escape room puzzle." in text
    assert "There should be a visible lock on an exit door." in text
    assert "sets in a classroom with ladder" in text
    assert "Try to generate a very easy puzzle that can be solved in 3 steps with at most 4 objects involved." in text


def test_examiner_prompt_verbatim():
    text = render_prompt("examiner_check", {"solution": "1. take key"})
    assert "summarize the major differences in bullet points" in text
    assert "If yes, just say yes." in text
    assert "1. take key" in text


def test_player_and_graph_prompts_verbatim():
    assert "Pick one most reasonable sequence of actions." in render_prompt("player_solve")
    assert "tree form, with the room as the highest ancestor" in render_prompt("designer_graph")
    assert "minimalist, black and white 2D scene layout sketch" in render_prompt("designer_layout")
    assert "Rewrite that scene graph by adding or deleting objects" in render_prompt("examiner_refine_graph")
    assert "photorealistic image of the escape room" in render_prompt(
        "builder_image", {"description": "d", "layout": "l"})


def test_unbound_placeholder():
    with pytest.raises(UnboundPlaceholder):
        render_prompt("designer_design", {"scene": "classroom"})


# ----------------------------------------------------------------------
# Lexicon
# ----------------------------------------------------------------------

@pytest.mark.parametrize("name", fixtures.SCENE_NAMES + ("minimal", "loft"))
def test_official_glosses_parse_back_to_their_actions(name):
    fx = fixtures.load(name)
    for step in fx.official.steps:
        parsed = parse_action(step.gloss, fx.graph)
        assert parsed.signature() == step.signature(), step.gloss


def test_lexicon_parses_appendix_style_text():
    fx = fixtures.load("balloon")
    text = (
        "1. Throw the dart at the balloon.\n"
        "2. Cut the string with the scissors.\n"
        "3. Use the key to unlock the exit door.\n"
        "4. Exit through the exit door.\n"
    )
    solution = parse_steps(text, fx.graph)
    assert solution.length == 4
    assert solution.steps[0].signature() == ("throw_at", "dart", "balloon")
    assert replay(fx.graph, solution).escaped


def test_lexicon_unknown_verb_is_offending_line():
    fx = fixtures.load("minimal")
    with pytest.raises(UnparseableSteps) as err:
        parse_steps("1. Take the key.\n2. Levitate the door.\n", fx.graph)
    assert any("levitate" in line.lower() for line in err.value.lines)


def test_lexicon_head_noun_fallback():
    fx = fixtures.load("classroom")
    action = parse_action("unlock the door", fx.graph)
    assert action.signature() == ("unlock", "exit_door", None)


# ----------------------------------------------------------------------
# Designer
# ----------------------------------------------------------------------

def _ctx(backend):
    return AgentContext(backend=backend, transcript=Transcript(clock=lambda: 0.0))


def test_designer_round_trip_classroom():
    fx = fixtures.load("classroom")
    backend = ScriptedBackend()
    backend.add("Designer", "Graph", fx.description + "\n\n" + scenarios.OFFICIAL_STEPS_TEXT)
    backend.add("Designer", "Graph", emit_scene_graph(fx.graph))
    ctx = _ctx(backend)
    spec = PuzzleSpec("classroom", ("ladder",), max_steps=5)
    description, graph, solution = designer_design(spec, ctx)
    assert "classroom" in description.lower()
    assert emit_scene_graph(graph) == emit_scene_graph(fx.graph)
    assert solution.length == 5
    assert replay(graph, solution).escaped


def test_designer_repairs_malformed_graph_once():
    ctx = _ctx(scenarios.build_repair_scenario())
    spec = PuzzleSpec("classroom", ("ladder",), max_steps=5)
    _, graph, _ = designer_design(spec, ctx)
    assert graph.exit_id == "exit_door"
    designer_calls = [r for r in ctx.transcript.records if r["role"] == "Designer"]
    assert len(designer_calls) == 3  # design + bad graph + repaired graph


def test_designer_rejects_overlong_solution():
    fx = fixtures.load("classroom")
    backend = ScriptedBackend()
    backend.add("Designer", "Graph", fx.description + "\n\n" + scenarios.OFFICIAL_STEPS_TEXT)
    backend.add("Designer", "Graph", emit_scene_graph(fx.graph))
    spec = PuzzleSpec("classroom", ("ladder",), max_steps=4)
    with pytest.raises(ResponseParseError, match="solution too long"):
        designer_design(spec, _ctx(backend))


# ----------------------------------------------------------------------
# Player / Examiner
# ----------------------------------------------------------------------

def test_player_symbolic_minimal():
    fx = fixtures.load("minimal")
    solution = player_solve(fx.graph, "Graph", _ctx(ScriptedBackend()), "symbolic",
                            graph=fx.graph, max_steps=3)
    assert solution.signatures() == (
        ("take", "key", None), ("unlock", "door", None), ("exit_room", "door", None))


def test_player_llm_parses_scripted_steps():
    fx = fixtures.load("balloon")
    backend = ScriptedBackend()
    backend.add("Player", "Image",
                "1. Throw the dart at the balloon.\n2. Cut the string with the scissors.\n"
                "3. Use the key to unlock the exit door.\n4. Exit through the exit door.")
    artifact = ImageArtifact(prompt="", parent_layout_digest="")
    solution = player_solve(artifact, "Image", _ctx(backend), "llm",
                            graph=fx.graph, max_steps=5)
    assert solution.length == 4


def test_examiner_llm_yes_means_match():
    fx = fixtures.load("minimal")
    backend = ScriptedBackend().add("Examiner", "Graph", "Yes.")
    report = examiner_check(fx.official, fx.official, _ctx(backend), mode="llm")
    assert report.is_match and report.bullets == ()


def test_examiner_llm_bullets_mean_mismatch():
    fx = fixtures.load("minimal")
    backend = ScriptedBackend().add("Examiner", "Graph", "No.\n- the order differs\n- an extra step")
    report = examiner_check(fx.official, fx.official, _ctx(backend), mode="llm")
    assert not report.is_match
    assert report.bullets == ("the order differs", "an extra step")


def test_examiner_refine_graph_produces_minimal_patch():
    flawed = fixtures.load("classroom_desk")
    from escape_forge.scene import apply_patch

    fixed = apply_patch(flawed.graph, fixtures.desk_blocking_patch())
    backend = ScriptedBackend().add("Examiner", "Graph", emit_scene_graph(fixed))
    report = DiffReport(verdict="mismatch", bullets=("found uses climb(desk)",))
    patch = examiner_refine_graph(flawed.graph, report, _ctx(backend))
    assert patch.ops == (SetStates("desk", frozenset({"fixed_in_place", "broken"})),)


def test_examiner_refine_identical_revision_is_null_patch():
    fx = fixtures.load("classroom")
    backend = ScriptedBackend().add("Examiner", "Graph", emit_scene_graph(fx.graph))
    report = DiffReport(verdict="mismatch", bullets=("something",))
    with pytest.raises(NullPatch):
        examiner_refine_graph(fx.graph, report, _ctx(backend))


def test_examiner_refine_cannot_delete_exit():
    fx = fixtures.load("minimal")
    no_exit = "room:\n  children:\n    table:\n      relation: adjacent_to\n"
    backend = ScriptedBackend()
    for _ in range(3):
        backend.add("Examiner", "Graph", no_exit)
    report = DiffReport(verdict="mismatch", bullets=("remove the door",))
    with pytest.raises((PatchRejected, ResponseParseError)):
        examiner_refine_graph(fx.graph, report, _ctx(backend))


# ----------------------------------------------------------------------
# Builder
# ----------------------------------------------------------------------

def test_builder_image_edit_localized_by_layout():
    flawed = fixtures.load("classroom_desk")
    layout = synthesize_layout(flawed.graph, seed=0)
    artifact = ImageArtifact(prompt="p", parent_layout_digest=layout.source_graph_digest,
                             image=b"\x89PNG fake")
    backend = ScriptedBackend()
    backend.add("Builder", "Image", "object: desk\ncondition: broken, cluttered surface")
    ctx = _ctx(backend)
    report = DiffReport(verdict="mismatch", bullets=("the desk must look unclimbable",))
    refined = builder_refine_image(artifact, report, layout, ctx)
    assert len(refined.edits) == 1
    edit = refined.edits[0]
    assert edit.object_id == "desk"
    assert edit.bbox == layout.icon("desk").bbox
    assert edit.desired_condition == "broken, cluttered surface"
    kinds = [r["kind"] for r in ctx.transcript.records]
    assert kinds == ["text", "image_edit"]


def test_builder_unknown_object_in_bullet():
    from escape_forge.errors import UnknownObjectInBullet

    fx = fixtures.load("minimal")
    layout = synthesize_layout(fx.graph, seed=0)
    artifact = ImageArtifact(prompt="p", parent_layout_digest=layout.source_graph_digest)
    backend = ScriptedBackend().add("Builder", "Image", "object: unicorn\ncondition: sparkly")
    report = DiffReport(verdict="mismatch", bullets=("the unicorn should glow",))
    with pytest.raises(UnknownObjectInBullet):
        builder_refine_image(artifact, report, layout, _ctx(backend))


def test_builder_noop_on_match():
    fx = fixtures.load("minimal")
    layout = synthesize_layout(fx.graph, seed=0)
    artifact = ImageArtifact(prompt="p", parent_layout_digest=layout.source_graph_digest)
    out = builder_refine_image(artifact, DiffReport(verdict="match"), layout,
                               _ctx(ScriptedBackend()))
    assert out is artifact


# ----------------------------------------------------------------------
# Transcript and backend behavior
# ----------------------------------------------------------------------

def test_scripted_backend_exhaustion_is_loud():
    fx = fixtures.load("minimal")
    backend = ScriptedBackend()
    with pytest.raises(BackendError, match="exhausted"):
        examiner_check(fx.official, fx.official, _ctx(backend), mode="llm")


def test_transcript_records_every_call():
    ctx = _ctx(scenarios.build_repair_scenario())
    designer_design(PuzzleSpec("classroom", ("ladder",), max_steps=5), ctx)
    assert len(ctx.transcript.records) == ctx.backend.calls
    for record in ctx.transcript.records:
        assert set(record) >= {"stage", "role", "kind", "request", "response_digest", "ts"}


def test_transcripts_byte_identical_across_runs():
    def run():
        ctx = _ctx(scenarios.build_classroom_scenario())
        from escape_forge.pipeline import run_pipeline

        run_pipeline(scenarios.classroom_spec(), ctx)
        return ctx.transcript.dumps()

    assert run() == run()


def test_player_hybrid_annotates_symbolic_agreement():
    fx = fixtures.load("classroom")
    backend = ScriptedBackend()
    backend.add("Player", "Graph", scenarios.OFFICIAL_STEPS_TEXT)
    ctx = _ctx(backend)
    solution = player_solve(fx.graph, "Graph", ctx, "hybrid",
                            graph=fx.graph, max_steps=5)
    assert solution.length == 5
    assert ctx.transcript.records[-1]["symbolic_agreement"] is True

    backend = ScriptedBackend()
    backend.add("Player", "Graph", "1. Take the ladder.\n2. Exit through the exit door.")
    ctx = _ctx(backend)
    solution = player_solve(fx.graph, "Graph", ctx, "hybrid",
                            graph=fx.graph, max_steps=5)
    assert solution.length == 2  # the llm answer is returned as-is
    assert ctx.transcript.records[-1]["symbolic_agreement"] is False


def test_reach_still_legal_while_standing_on_ladder():
    from escape_forge.world import Action, apply, check_action, initial_state

    fx = fixtures.load("classroom")
    w = initial_state(fx.graph)
    w = apply(w, Action("take", "hooked_pole"))
    w = apply(w, Action("place_under", "ladder", "key"))
    w = apply(w, Action("climb", "ladder"))
    assert w.standing_on == "ladder"
    assert check_action(w, Action("reach_with", "hooked_pole", "key")) is None
