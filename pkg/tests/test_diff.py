"""diff_solutions and detect_shortcuts."""

from escape_forge import fixtures
from escape_forge.scene import apply_patch
from escape_forge.solver import detect_shortcuts, diff_solutions, replay, solve
from escape_forge.world import Action, Solution


def test_identical_solutions_match():
    fx = fixtures.load("classroom")
    report = diff_solutions(fx.official, fx.official)
    assert report.is_match and report.bullets == ()


def test_independent_swap_still_matches():
    fx = fixtures.load("classroom")
    steps = list(fx.official.steps)
    # take(hooked_pole) and place_under(ladder, key) touch disjoint objects.
    swapped = Solution((steps[1], steps[0], *steps[2:]))
    assert replay(fx.graph, swapped).escaped
    assert diff_solutions(fx.official, swapped).is_match


def test_dependent_reorder_is_mismatch():
    # The two bucket placements share a subject, so their order matters.
    fx = fixtures.load("prison")
    official = fx.official
    reordered = Solution((official.steps[1], official.steps[0], *official.steps[2:]))
    report = diff_solutions(official, reordered)
    assert not report.is_match
    assert report.missing_dependencies
    assert any("reorders" in b for b in report.bullets)


def test_desk_climb_shortcut_bullets():
    fx = fixtures.load("loft")
    found = Solution((
        Action("climb", "desk", gloss="Climb the desk."),
        Action("take", "key", gloss="Take the key."),
        Action("unlock", "exit_door", gloss="Use the key to unlock the exit door."),
        Action("exit_room", "exit_door", gloss="Exit through the exit door."),
    ))
    assert replay(fx.graph, found).escaped
    assert replay(fx.graph, fx.official).escaped
    report = diff_solutions(fx.official, found)
    assert not report.is_match
    assert any("found uses climb(desk) absent from official" in b for b in report.bullets)
    assert any("official uses place_under(ladder, key)" in b for b in report.bullets)
    assert report.shortcut_found == found


def test_verdict_symmetry():
    fx = fixtures.load("loft")
    found = Solution((
        Action("climb", "desk"),
        Action("take", "key"),
        Action("unlock", "exit_door"),
        Action("exit_room", "exit_door"),
    ))
    assert diff_solutions(fx.official, found).verdict == diff_solutions(found, fx.official).verdict
    assert diff_solutions(fx.official, fx.official).verdict == "match"


def test_detect_shortcuts_single_path_graph():
    fx = fixtures.load("minimal")
    assert detect_shortcuts(fx.graph, fx.official, 3) == []


def test_detect_shortcuts_classroom_desk_before_and_after_patch():
    fx = fixtures.load("classroom_desk")
    before = detect_shortcuts(fx.graph, fx.official, 6)
    assert len(before) >= 1
    assert all(not diff_solutions(fx.official, s).is_match for s in before)
    patched = apply_patch(fx.graph, fixtures.desk_blocking_patch())
    after = detect_shortcuts(patched, fx.official, 6)
    assert after == []
    # Blocking is monotone: strictly fewer shortcuts after the patch.
    assert len(after) < len(before)


def test_window_shortcut_blocked_by_sealing():
    from escape_forge.scene import AddNode, GraphPatch, ObjectNode, SetStates

    fx = fixtures.load("classroom")
    window = ObjectNode(id="window", name="window", relation="attached_to")
    with_window = apply_patch(fx.graph, GraphPatch((AddNode("classroom", window),)))
    before = detect_shortcuts(with_window, fx.official, fx.max_steps)
    assert any(s.length == 1 for s in before)  # walk straight out the window
    sealed = apply_patch(with_window, GraphPatch((SetStates("window", frozenset({"sealed"})),)))
    assert detect_shortcuts(sealed, fx.official, fx.max_steps) == []


def test_permutations_of_seesaw_all_match():
    fx = fixtures.load("seesaw")
    sols = solve(fx.graph, fx.max_steps)
    assert len(sols) == 6
    for s in sols:
        assert diff_solutions(fx.official, s).is_match
