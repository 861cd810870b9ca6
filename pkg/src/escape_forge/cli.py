"""forge: command-line interface.

Subcommands: pipeline, solve, shortcuts, validate, layout, eval, ablate,
demo-bundles, export-fixtures, serve. Exit codes: 0 success/convergence,
2 non-convergence, 1 error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import fixtures
from .agents.backends import AgentContext, Transcript, make_backend
from .errors import ForgeError
from .evalharness import ABLATION_PRESETS, eval_bundle, report_csv, report_text, run_corpus
from .fixtures import scenarios
from .layout import emit_svg, layout_to_json, lint_layout, synthesize_layout
from .pipeline import FEATURES, LoopConfig, load_bundle, run_pipeline
from .scene import PuzzleSpec, parse_scene_graph, validate
from .solver import detect_shortcuts, serialize_solution, solution_text, solve
from .world import Solution


def _read_graph(path: str):
    return parse_scene_graph(Path(path).read_text("utf-8"))


def _load_official(path: str) -> Solution:
    from .solver import deserialize_solution

    data = json.loads(Path(path).read_text("utf-8"))
    steps = data["steps"] if isinstance(data, dict) else data
    return deserialize_solution(steps)


def cmd_pipeline(args) -> int:
    spec = PuzzleSpec(
        scene_keyword=args.scene,
        core_objects=tuple(args.objects.split(",")) if args.objects else (args.scene,),
        max_steps=args.max_steps,
        seed=args.seed,
    )
    out_dir = Path(args.out) / args.run_name if args.out else None
    transcript = Transcript(path=(out_dir / "transcript.jsonl") if out_dir else None)
    if out_dir:
        out_dir.mkdir(parents=True, exist_ok=True)
        if transcript.path.exists():
            transcript.path.unlink()
    backend = make_backend(args.backend, args.fixtures)
    ctx = AgentContext(backend=backend, transcript=transcript)
    features = tuple(f for f in FEATURES if f not in (args.disable or "").split(","))
    bundle = run_pipeline(spec, ctx, LoopConfig(seed=args.seed), out_dir=out_dir,
                          features=features)
    print(f"status: {bundle.report.status}")
    print(f"stage iterations: {bundle.report.stage_iterations}")
    print(f"image generations: {bundle.report.total_image_generations}")
    if out_dir:
        print(f"bundle: {out_dir}")
    return 0 if bundle.report.status == "ok" else 2


def cmd_solve(args) -> int:
    graph = _read_graph(args.graph)
    solutions = solve(graph, args.max_steps)
    if not solutions:
        print("unsolvable within the step bound")
        return 2
    for i, sol in enumerate(solutions):
        print(f"# solution {i + 1}")
        print(solution_text(sol), end="")
    if args.json:
        Path(args.json).write_text(
            json.dumps([serialize_solution(s) for s in solutions], indent=2) + "\n",
            "utf-8",
        )
    return 0


def cmd_shortcuts(args) -> int:
    graph = _read_graph(args.graph)
    official = _load_official(args.official)
    found = detect_shortcuts(graph, official, args.max_steps)
    print(f"{len(found)} shortcut(s)")
    for sol in found:
        print(solution_text(sol), end="")
    return 0 if not found else 2


def cmd_validate(args) -> int:
    graph = _read_graph(args.graph)
    problems = validate(graph)
    for violation in problems:
        print(violation)
    print("valid" if not problems else f"{len(problems)} violation(s)")
    return 0 if not problems else 1


def cmd_layout(args) -> int:
    graph = _read_graph(args.graph)
    layout = synthesize_layout(graph, seed=args.seed)
    problems = lint_layout(layout, graph)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "layout.json").write_text(layout_to_json(layout), "utf-8")
    (out / "layout.svg").write_text(emit_svg(layout), "utf-8")
    print(f"wrote {out / 'layout.json'} and {out / 'layout.svg'}")
    print("lint:", "clean" if not problems else "; ".join(str(p) for p in problems))
    return 0 if not problems else 1


def cmd_eval(args) -> int:
    rows = []
    root = Path(args.runs)
    for child in sorted(root.iterdir()) if root.is_dir() else []:
        if not (child / "report.json").exists():
            continue
        bundle = load_bundle(child)
        metrics = eval_bundle(bundle)
        rows.append((child.name, metrics))
    if not rows:
        print("no bundles found")
        return 0
    print(f"{'bundle':<24} {'solv':>5} {'short':>6} {'align':>6} {'gens':>5}")
    for name, m in rows:
        align = "-" if m.alignment_violations is None else str(m.alignment_violations)
        print(f"{name:<24} {str(m.solvable):>5} {m.shortcut_count:>6d} {align:>6} "
              f"{m.image_generations:>5d}")
    if args.out:
        import csv

        with open(args.out, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["bundle", "solvable", "shortcuts", "alignment", "generations"])
            for name, m in rows:
                writer.writerow([
                    name, int(m.solvable), m.shortcut_count,
                    "" if m.alignment_violations is None else m.alignment_violations,
                    m.image_generations,
                ])
        print(f"wrote {args.out}")
    return 0


def cmd_ablate(args) -> int:
    if args.config:
        config_names = json.loads(Path(args.config).read_text("utf-8"))["ablations"]
    else:
        config_names = ["vanilla", "d", "d_sg", "d_sg_l", "d_sg_i", "full"]
    specs = scenarios.corpus_specs()
    reports = [
        run_corpus(specs, ABLATION_PRESETS[name], scenarios.build_corpus_scenario)
        for name in config_names
    ]
    print(report_text(reports), end="")
    if args.out:
        Path(args.out).write_text(report_csv(reports), "utf-8")
        print(f"wrote {args.out}")
    return 0


def cmd_demo_bundles(args) -> int:
    """Build offline bundles for every reference scene (playable locally)."""
    from .pipeline import PuzzleBundle, RunReport, save_bundle

    out_root = Path(args.out)
    for name in fixtures.SCENE_NAMES:
        fx = fixtures.load(name)
        layout = synthesize_layout(fx.graph, seed=0)
        spec = PuzzleSpec(scene_keyword=name, core_objects=(name,),
                          max_steps=fx.max_steps)
        bundle = PuzzleBundle(
            spec=spec,
            description=fx.description,
            graph=fx.graph,
            layout=layout,
            image=None,
            official=fx.official,
            report=RunReport(status="ok", converged={"Graph": True, "Layout": True}),
            bundle_id=name,
        )
        save_bundle(bundle, out_root / name)
        print(f"wrote {out_root / name}")
    return 0


def cmd_export_fixtures(args) -> int:
    builders = {
        "classroom": scenarios.build_classroom_scenario,
        "repair": scenarios.build_repair_scenario,
        "never_accepting": scenarios.build_never_accepting_examiner,
    }
    backend = builders[args.scenario]()
    scenarios.export_scenario(backend, args.out)
    print(f"wrote {args.out}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .play.service import PlayService, create_app

    service = PlayService(snapshot_dir=args.snapshots)
    count = service.load_runs(args.runs)
    print(f"loaded {count} bundle(s) from {args.runs}")
    app = create_app(service, ui_dir=args.ui)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="forge", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("pipeline", help="run the full refinement pipeline")
    p.add_argument("--scene", required=True)
    p.add_argument("--objects", default="")
    p.add_argument("--max-steps", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--backend", default="scripted", choices=["scripted", "dryrun", "live"])
    p.add_argument("--fixtures", default=None, help="scripted fixture JSON file")
    p.add_argument("--out", default=None, help="runs directory")
    p.add_argument("--run-name", default="run")
    p.add_argument("--disable", default="", help="comma list of stages to ablate")
    p.set_defaults(fn=cmd_pipeline)

    p = sub.add_parser("solve", help="solve a scene graph document")
    p.add_argument("graph")
    p.add_argument("--max-steps", type=int, default=5)
    p.add_argument("--json", default=None)
    p.set_defaults(fn=cmd_solve)

    p = sub.add_parser("shortcuts", help="enumerate shortcut solutions")
    p.add_argument("graph")
    p.add_argument("official", help="solution JSON file")
    p.add_argument("--max-steps", type=int, default=5)
    p.set_defaults(fn=cmd_shortcuts)

    p = sub.add_parser("validate", help="validate a scene graph document")
    p.add_argument("graph")
    p.set_defaults(fn=cmd_validate)

    p = sub.add_parser("layout", help="synthesize layout.json and layout.svg")
    p.add_argument("graph")
    p.add_argument("--out", default=".")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=cmd_layout)

    p = sub.add_parser("eval", help="metrics over a runs directory")
    p.add_argument("--runs", required=True)
    p.add_argument("--out", default=None, help="CSV output path")
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("ablate", help="scripted corpus ablation table")
    p.add_argument("--config", default=None, help='JSON {"ablations": [...]}')
    p.add_argument("--out", default=None, help="CSV output path")
    p.set_defaults(fn=cmd_ablate)

    p = sub.add_parser("demo-bundles", help="materialize the reference scenes as bundles")
    p.add_argument("--out", default="runs")
    p.set_defaults(fn=cmd_demo_bundles)

    p = sub.add_parser("export-fixtures", help="write a scripted scenario JSON file")
    p.add_argument("--scenario", default="classroom",
                   choices=["classroom", "repair", "never_accepting"])
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_export_fixtures)

    p = sub.add_parser("serve", help="run the play service")
    p.add_argument("--runs", default="runs")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--snapshots", default=None)
    p.add_argument("--ui", default=None, help="directory with the built frontend")
    p.set_defaults(fn=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ForgeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
