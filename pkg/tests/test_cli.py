"""forge CLI subcommands and exit codes."""

import json

from escape_forge import fixtures
from escape_forge.cli import main


def test_validate_and_solve(tmp_path, capsys):
    graph_path = tmp_path / "scene.scene"
    graph_path.write_text(fixtures.scene_text("minimal"))
    assert main(["validate", str(graph_path)]) == 0
    assert "valid" in capsys.readouterr().out

    out_json = tmp_path / "solutions.json"
    assert main(["solve", str(graph_path), "--max-steps", "3",
                 "--json", str(out_json)]) == 0
    printed = capsys.readouterr().out
    assert "take(key)" in printed and "—" in printed
    data = json.loads(out_json.read_text())
    assert data[0][0]["verb"] == "take"


def test_solve_unsolvable_exit_code(tmp_path):
    doc = (
        "room:\n  children:\n"
        "    exit_door:\n      relation: adjacent_to\n      states: [locked]\n      exit: true\n"
    )
    path = tmp_path / "dead.scene"
    path.write_text(doc)
    assert main(["solve", str(path), "--max-steps", "3"]) == 2


def test_shortcuts_command(tmp_path, capsys):
    graph_path = tmp_path / "scene.scene"
    graph_path.write_text(fixtures.scene_text("classroom_desk"))
    official_path = tmp_path / "official.json"
    from escape_forge.solver import serialize_solution

    fx = fixtures.load("classroom_desk")
    official_path.write_text(json.dumps({"steps": serialize_solution(fx.official)}))
    assert main(["shortcuts", str(graph_path), str(official_path),
                 "--max-steps", "6"]) == 2
    assert "shortcut" in capsys.readouterr().out


def test_layout_command(tmp_path, capsys):
    graph_path = tmp_path / "scene.scene"
    graph_path.write_text(fixtures.scene_text("classroom"))
    assert main(["layout", str(graph_path), "--out", str(tmp_path / "out")]) == 0
    assert (tmp_path / "out" / "layout.svg").exists()
    assert (tmp_path / "out" / "layout.json").exists()


def test_pipeline_with_exported_fixture_file(tmp_path, capsys):
    fixture_path = tmp_path / "classroom.json"
    assert main(["export-fixtures", "--scenario", "classroom",
                 "--out", str(fixture_path)]) == 0
    code = main([
        "pipeline", "--scene", "classroom", "--objects", "ladder,hooked pole",
        "--max-steps", "5", "--seed", "7", "--backend", "scripted",
        "--fixtures", str(fixture_path), "--out", str(tmp_path / "runs"),
        "--run-name", "classroom",
    ])
    assert code == 0
    out = capsys.readouterr().out
    assert "status: ok" in out
    run_dir = tmp_path / "runs" / "classroom"
    for name in ("graph.scene", "layout.json", "layout.svg", "solution.json",
                 "report.json", "transcript.jsonl", "description.txt", "image.png"):
        assert (run_dir / name).exists(), name

    assert main(["eval", "--runs", str(tmp_path / "runs"),
                 "--out", str(tmp_path / "report.csv")]) == 0
    assert (tmp_path / "report.csv").exists()


def test_demo_bundles_and_eval(tmp_path, capsys):
    assert main(["demo-bundles", "--out", str(tmp_path / "runs")]) == 0
    assert (tmp_path / "runs" / "classroom" / "graph.scene").exists()
    assert main(["eval", "--runs", str(tmp_path / "runs")]) == 0
    out = capsys.readouterr().out
    assert "classroom" in out


def test_ablate_command(tmp_path, capsys):
    assert main(["ablate", "--out", str(tmp_path / "ablate.csv")]) == 0
    out = capsys.readouterr().out
    assert "full" in out and "Solv." in out
    assert (tmp_path / "ablate.csv").exists()


def test_pipeline_dryrun_backend(tmp_path):
    fixture_path = tmp_path / "classroom.json"
    main(["export-fixtures", "--scenario", "classroom", "--out", str(fixture_path)])
    code = main([
        "pipeline", "--scene", "classroom", "--objects", "ladder,hooked pole",
        "--max-steps", "5", "--seed", "7", "--backend", "dryrun",
        "--fixtures", str(fixture_path), "--out", str(tmp_path / "runs"),
        "--run-name", "dry",
    ])
    assert code == 0
    run_dir = tmp_path / "runs" / "dry"
    assert (run_dir / "request.json").exists()
    assert not (run_dir / "image.png").exists()  # no pixels in dry-run


def test_pipeline_nonconvergence_exit_code(tmp_path, capsys):
    from escape_forge.agents import ScriptedBackend
    from escape_forge.fixtures import scenarios
    from escape_forge.scene import parse_scene_graph, emit_scene_graph

    doc = (
        "room:\n  children:\n"
        "    door:\n      relation: adjacent_to\n      states: [locked]\n      exit: true\n"
    )
    backend = ScriptedBackend()
    backend.add("Designer", "Graph",
                "A locked room.\n\nSteps to solve:\n1. Exit through the door.")
    backend.add("Designer", "Graph", doc)
    graph = parse_scene_graph(doc)
    for _ in range(8):
        backend.add("Examiner", "Graph", emit_scene_graph(graph))
    fixture_path = tmp_path / "deadend.json"
    scenarios.export_scenario(backend, fixture_path)

    code = main([
        "pipeline", "--scene", "deadend", "--max-steps", "1",
        "--backend", "scripted", "--fixtures", str(fixture_path),
        "--out", str(tmp_path / "runs"), "--run-name", "deadend",
    ])
    assert code == 2
    assert "failed:Graph" in capsys.readouterr().out
