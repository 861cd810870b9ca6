"""Staged refinement loop: Graph, then Layout, then Image.

Each stage repeats {player solves, examiner checks, refine} until the
diff is empty or the iteration cap is hit. Refinement dispatch depends
on the stage: the examiner patches the graph, the builder regenerates
the layout, and the builder applies localized image edits using the
layout for addressing. A converged run is persisted as a PuzzleBundle
directory with a fixed file layout.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

logger = logging.getLogger(__name__)

from .agents.backends import AgentContext
from .agents.roles import (
    builder_refine_image,
    builder_refine_layout,
    designer_design,
    examiner_check,
    examiner_refine_graph,
    player_solve,
)
from .agents.prompts import render_prompt
from .errors import NonConvergence, NoSolutionFound, NullPatch
from .images import (
    BackendRequest,
    ImageArtifact,
    Message,
    compose_render_request,
    request_to_json,
)
from .layout import Layout, emit_svg, layout_from_json, layout_to_json, lint_layout, synthesize_layout
from .scene import PuzzleSpec, SceneGraph, apply_patch, emit_scene_graph, parse_scene_graph
from .solver import (
    DiffReport,
    deserialize_solution,
    detect_shortcuts,
    diff_solutions,
    serialize_solution,
    solve,
)
from .world import Solution

STAGES = ("Graph", "Layout", "Image")
# Ablation switches, mirroring the comparison table's row labels.
FEATURES = ("Description", "SceneGraph", "Layout", "ImageEdit")


@dataclass(frozen=True)
class StageArtifact:
    stage: str
    payload: object

    def __post_init__(self):
        expected = {"Graph": SceneGraph, "Layout": Layout, "Image": ImageArtifact}
        if self.stage not in expected:
            raise ValueError(f"unknown stage {self.stage}")
        if not isinstance(self.payload, expected[self.stage]):
            raise TypeError(f"{self.stage} artifact cannot hold {type(self.payload).__name__}")


@dataclass(frozen=True)
class LoopConfig:
    max_iterations_per_stage: int = 8
    player_modes: dict = field(default_factory=lambda: {
        "Graph": "symbolic", "Layout": "llm", "Image": "llm",
    })
    examiner_modes: dict = field(default_factory=lambda: {
        "Graph": "symbolic", "Layout": "symbolic", "Image": "llm",
    })
    solver_state_cap: int = 2_000_000
    seed: int = 0
    # Loop iterations are memoryless by default; turning this on carries
    # the player's conversation across iterations of one stage.
    player_memory: bool = False
    # The Graph-stage player sees only the graph unless this is set.
    player_sees_description: bool = False

    def __post_init__(self):
        if self.max_iterations_per_stage < 1:
            raise ValueError("max_iterations_per_stage must be >= 1")


@dataclass
class RunReport:
    stage_iterations: dict = field(default_factory=dict)
    converged: dict = field(default_factory=dict)
    total_image_generations: int = 0
    status: str = "ok"
    failed_stage: str | None = None
    transcript_path: str | None = None

    def to_dict(self) -> dict:
        return {
            "stage_iterations": self.stage_iterations,
            "converged": self.converged,
            "total_image_generations": self.total_image_generations,
            "status": self.status,
            "failed_stage": self.failed_stage,
            "transcript_path": self.transcript_path,
        }


@dataclass
class PuzzleBundle:
    spec: PuzzleSpec
    description: str
    graph: SceneGraph
    layout: Layout | None
    image: ImageArtifact | None
    official: Solution
    report: RunReport
    bundle_id: str = ""

    @property
    def playable(self) -> bool:
        return self.report.status == "ok"


def _graph_stage_verified(graph: SceneGraph, official: Solution, max_steps: int,
                          state_cap: int) -> bool:
    # Machine check independent of any backend: no shortcuts remain and
    # the official solution is among the minimal ones.
    shortcuts = detect_shortcuts(graph, official, max_steps, state_cap=state_cap)
    if shortcuts:
        return False
    return any(
        diff_solutions(official, s).is_match
        for s in solve(graph, max_steps, state_cap=state_cap)
    )


def run_stage(
    stage: str,
    artifact: StageArtifact,
    official: Solution,
    ctx: AgentContext,
    cfg: LoopConfig,
    graph: SceneGraph,
    max_steps: int,
    layout_context: Layout | None = None,
) -> tuple[StageArtifact, int]:
    """Repeat {solve, check, refine} until the diff is empty or the cap."""
    if artifact.stage != stage:
        raise ValueError(f"artifact tagged {artifact.stage}, stage is {stage}")
    payload = artifact.payload
    current_graph = graph
    last_report = DiffReport(verdict="mismatch", bullets=("never checked",))
    player_memory = [] if cfg.player_memory else None
    for iteration in range(1, cfg.max_iterations_per_stage + 1):
        try:
            found = player_solve(
                payload, stage, ctx, cfg.player_modes[stage],
                graph=current_graph, max_steps=max_steps,
                memory=player_memory,
                include_description=cfg.player_sees_description,
            )
        except NoSolutionFound as exc:
            # An unsolvable graph is exactly what refinement is for.
            last_report = DiffReport(verdict="mismatch", bullets=(str(exc),))
            found = None
        if found is not None:
            last_report = examiner_check(
                official, found, ctx, mode=cfg.examiner_modes[stage], stage=stage,
            )
        if last_report.is_match:
            if stage == "Graph" and not _graph_stage_verified(
                current_graph, official, max_steps, cfg.solver_state_cap
            ):
                last_report = DiffReport(
                    verdict="mismatch",
                    bullets=("symbolic verification found remaining shortcuts",),
                )
            else:
                if stage == "Graph":
                    payload = current_graph
                logger.info("stage %s converged after %d iteration(s)", stage, iteration)
                return StageArtifact(stage, payload), iteration
        if iteration == cfg.max_iterations_per_stage:
            break
        if stage == "Graph":
            try:
                patch = examiner_refine_graph(current_graph, last_report, ctx)
            except NullPatch:
                continue  # a wasted iteration, counted against the cap
            current_graph = apply_patch(current_graph, patch)
            payload = current_graph
        elif stage == "Layout":
            payload = builder_refine_layout(last_report, current_graph, cfg.seed, iteration)
        else:
            payload = builder_refine_image(payload, last_report, layout_context, ctx)
    logger.warning("stage %s hit the %d-iteration cap", stage, cfg.max_iterations_per_stage)
    raise NonConvergence(stage, last_report)


def run_pipeline(
    spec: PuzzleSpec,
    ctx: AgentContext,
    cfg: LoopConfig | None = None,
    out_dir: str | Path | None = None,
    features: tuple[str, ...] = FEATURES,
) -> PuzzleBundle:
    """Designer, then the staged loops, then a persisted bundle."""
    cfg = cfg or LoopConfig()
    report = RunReport()
    if ctx.transcript.path is not None:
        report.transcript_path = str(ctx.transcript.path)

    logger.info("pipeline start: scene=%s max_steps=%d features=%s",
                spec.scene_keyword, spec.max_steps, ",".join(features))
    description, graph, official = designer_design(spec, ctx)
    if "Description" not in features:
        description = f"An escape room in a {spec.scene_keyword}."

    layout: Layout | None = None
    image: ImageArtifact | None = None
    try:
        if "SceneGraph" in features:
            artifact, iterations = run_stage(
                "Graph", StageArtifact("Graph", graph), official, ctx, cfg,
                graph, spec.max_steps,
            )
            graph = artifact.payload
            report.stage_iterations["Graph"] = iterations
            report.converged["Graph"] = True

        # Layout geometry is always synthesized (edits are addressed by
        # icon boxes); the Layout stage loop and render conditioning are
        # what the ablation toggles.
        layout = synthesize_layout(graph, seed=cfg.seed)
        problems = lint_layout(layout, graph)
        if problems:
            raise RuntimeError(f"synthesized layout failed lint: {problems[0]}")
        if "Layout" in features:
            artifact, iterations = run_stage(
                "Layout", StageArtifact("Layout", layout), official, ctx, cfg,
                graph, spec.max_steps,
            )
            layout = artifact.payload
            report.stage_iterations["Layout"] = iterations
            report.converged["Layout"] = True

        prompt = render_prompt("builder_image", {
            "description": description if "Description" in features else spec.scene_keyword,
            "layout": "the attached layout sketch" if "Layout" in features else "your own composition",
        })
        if "Layout" in features:
            render_request = compose_render_request(description, layout, prompt, seed=cfg.seed)
        else:
            # Ablated runs render from the prompt alone; the layout still
            # exists internally so edits can be addressed by icon boxes.
            render_request = BackendRequest(
                role="Builder", stage="Image", kind="image", seed=cfg.seed,
                messages=(Message(role="user", text=prompt),),
            )
        response = ctx.call(render_request)
        image = ImageArtifact(
            prompt=render_request.messages[-1].text,
            parent_layout_digest=layout.source_graph_digest,
            image=response.image,
        )
        if out_dir is not None:
            _write_request_json(Path(out_dir), render_request)

        if "ImageEdit" in features:
            artifact, iterations = run_stage(
                "Image", StageArtifact("Image", image), official, ctx, cfg,
                graph, spec.max_steps, layout_context=layout,
            )
            image = artifact.payload
            report.stage_iterations["Image"] = iterations
            report.converged["Image"] = True
    except NonConvergence as exc:
        report.status = f"failed:{exc.stage}"
        report.failed_stage = exc.stage
    finally:
        report.total_image_generations = ctx.transcript.image_generation_count()

    bundle = PuzzleBundle(
        spec=spec,
        description=description,
        graph=graph,
        layout=layout,
        image=image,
        official=official,
        report=report,
        bundle_id=Path(out_dir).name if out_dir else spec.scene_keyword,
    )
    if out_dir is not None:
        save_bundle(bundle, out_dir)
    return bundle


def _write_request_json(out_dir: Path, request) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "request.json").write_text(request_to_json(request), "utf-8")


# ----------------------------------------------------------------------
# Bundle persistence
# ----------------------------------------------------------------------

def save_bundle(bundle: PuzzleBundle, out_dir: str | Path) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "description.txt").write_text(bundle.description + "\n", "utf-8")
    (out / "graph.scene").write_text(emit_scene_graph(bundle.graph), "utf-8")
    if bundle.layout is not None:
        (out / "layout.json").write_text(layout_to_json(bundle.layout), "utf-8")
        (out / "layout.svg").write_text(emit_svg(bundle.layout), "utf-8")
    if bundle.image is not None and bundle.image.image is not None:
        (out / "image.png").write_bytes(bundle.image.image)
    (out / "solution.json").write_text(
        json.dumps({
            "max_steps": bundle.spec.max_steps,
            "steps": serialize_solution(bundle.official),
        }, indent=2) + "\n",
        "utf-8",
    )
    (out / "report.json").write_text(
        json.dumps({
            "spec": {
                "scene_keyword": bundle.spec.scene_keyword,
                "core_objects": list(bundle.spec.core_objects),
                "max_steps": bundle.spec.max_steps,
                "seed": bundle.spec.seed,
            },
            **bundle.report.to_dict(),
        }, indent=2, sort_keys=True) + "\n",
        "utf-8",
    )
    return out


def load_bundle(path: str | Path) -> PuzzleBundle:
    root = Path(path)
    report_data = json.loads((root / "report.json").read_text("utf-8"))
    spec_data = report_data.pop("spec")
    spec = PuzzleSpec(
        scene_keyword=spec_data["scene_keyword"],
        core_objects=tuple(spec_data["core_objects"]),
        max_steps=spec_data["max_steps"],
        seed=spec_data.get("seed", 0),
    )
    description = (root / "description.txt").read_text("utf-8").strip()
    graph = parse_scene_graph((root / "graph.scene").read_text("utf-8"),
                              description=description)
    layout = None
    if (root / "layout.json").exists():
        layout = layout_from_json((root / "layout.json").read_text("utf-8"))
    image = None
    if (root / "image.png").exists():
        image = ImageArtifact(
            prompt="", parent_layout_digest=layout.source_graph_digest if layout else "",
            image=(root / "image.png").read_bytes(),
        )
    solution_data = json.loads((root / "solution.json").read_text("utf-8"))
    report = RunReport(
        stage_iterations=report_data.get("stage_iterations", {}),
        converged=report_data.get("converged", {}),
        total_image_generations=report_data.get("total_image_generations", 0),
        status=report_data.get("status", "ok"),
        failed_stage=report_data.get("failed_stage"),
        transcript_path=report_data.get("transcript_path"),
    )
    return PuzzleBundle(
        spec=spec,
        description=description,
        graph=graph,
        layout=layout,
        image=image,
        official=deserialize_solution(solution_data["steps"]),
        report=report,
        bundle_id=root.name,
    )
