"""Automated counterparts of the human evaluation metrics, plus ablations.

Solvability: the run converged, the final graph's minimal solutions
contain an official-equivalent one, and (in corpus mode) a probe player
reading the finished artifact reproduces the official solution.
Shortcut count: |detect_shortcuts| on the final graph. Alignment: layout
lint violations against the final graph. Generation count comes from the
run report. Human-vote percentages from the paper's study are not
reproducible here; these are the directional analogues.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

from .agents.backends import AgentContext
from .agents.roles import player_solve
from .errors import MissingArtifact, UnparseableSteps
from .layout import lint_layout
from .pipeline import FEATURES, LoopConfig, PuzzleBundle, run_pipeline
from .scene import PuzzleSpec
from .solver import detect_shortcuts, diff_solutions, solve


@dataclass(frozen=True)
class Metrics:
    solvable: bool
    shortcut_count: int
    alignment_violations: int | None
    image_generations: int
    stage_iterations: dict
    missing: tuple[str, ...] = ()


@dataclass(frozen=True)
class AblationConfig:
    name: str
    enabled: frozenset[str]

    def __post_init__(self):
        unknown = self.enabled - set(FEATURES)
        if unknown:
            raise ValueError(f"unknown stages {sorted(unknown)}")
        if "SceneGraph" in self.enabled and "Description" not in self.enabled:
            raise ValueError("Description must be on whenever SceneGraph is on")

    @property
    def features(self) -> tuple[str, ...]:
        return tuple(f for f in FEATURES if f in self.enabled)


ABLATION_PRESETS = {
    "vanilla": AblationConfig("vanilla", frozenset()),
    "d": AblationConfig("d", frozenset({"Description"})),
    "d_sg": AblationConfig("d_sg", frozenset({"Description", "SceneGraph"})),
    "d_sg_l": AblationConfig("d_sg_l", frozenset({"Description", "SceneGraph", "Layout"})),
    "d_sg_i": AblationConfig("d_sg_i", frozenset({"Description", "SceneGraph", "ImageEdit"})),
    "full": AblationConfig("full", frozenset(FEATURES)),
}


def eval_bundle(bundle: PuzzleBundle, probe_matches: bool | None = None) -> Metrics:
    """Metrics for one bundle; deterministic given the bundle bytes."""
    if bundle.graph is None:
        raise MissingArtifact("Graph")
    missing: list[str] = []
    solutions = solve(bundle.graph, bundle.spec.max_steps)
    graph_ok = any(diff_solutions(bundle.official, s).is_match for s in solutions)
    shortcut_count = len(detect_shortcuts(bundle.graph, bundle.official, bundle.spec.max_steps))
    solvable = bundle.report.status == "ok" and graph_ok
    if probe_matches is not None:
        solvable = solvable and probe_matches
    if bundle.layout is not None:
        alignment = len(lint_layout(bundle.layout, bundle.graph))
    else:
        alignment = None
        missing.append("Layout")
    return Metrics(
        solvable=solvable,
        shortcut_count=shortcut_count,
        alignment_violations=alignment,
        image_generations=bundle.report.total_image_generations,
        stage_iterations=dict(bundle.report.stage_iterations),
        missing=tuple(missing),
    )


@dataclass
class CorpusRow:
    scene: str
    metrics: Metrics | None
    error: str | None = None


@dataclass
class CorpusReport:
    ablation: str
    rows: list[CorpusRow] = field(default_factory=list)

    @property
    def solvable_rate(self) -> float:
        rows = [r for r in self.rows if r.metrics is not None]
        if not rows:
            return 0.0
        return sum(1 for r in rows if r.metrics.solvable) / len(rows)

    @property
    def mean_shortcuts(self) -> float:
        rows = [r for r in self.rows if r.metrics is not None]
        return sum(r.metrics.shortcut_count for r in rows) / len(rows) if rows else 0.0

    @property
    def mean_alignment(self) -> float:
        rows = [r for r in self.rows
                if r.metrics is not None and r.metrics.alignment_violations is not None]
        return (sum(r.metrics.alignment_violations for r in rows) / len(rows)) if rows else 0.0

    @property
    def mean_generations(self) -> float:
        rows = [r for r in self.rows if r.metrics is not None]
        return sum(r.metrics.image_generations for r in rows) / len(rows) if rows else 0.0

    def summary(self) -> dict:
        return {
            "ablation": self.ablation,
            "solvable_rate": round(self.solvable_rate, 4),
            "mean_shortcuts": round(self.mean_shortcuts, 4),
            "mean_alignment": round(self.mean_alignment, 4),
            "mean_generations": round(self.mean_generations, 4),
            "runs": len(self.rows),
            "failures": sum(1 for r in self.rows if r.error),
        }


def run_corpus(
    specs: list[PuzzleSpec],
    ablation: AblationConfig,
    scenario_factory,
    cfg: LoopConfig | None = None,
) -> CorpusReport:
    """Run every spec under one ablation with scripted agents.

    scenario_factory(spec, features) must return a fresh backend whose
    turn sequence covers the whole run plus one final probe read.
    """
    report = CorpusReport(ablation=ablation.name)
    for spec in specs:
        try:
            backend = scenario_factory(spec, ablation.features)
            ctx = AgentContext(backend=backend)
            bundle = run_pipeline(spec, ctx, cfg, features=ablation.features)
            probe = None
            if bundle.report.status == "ok":
                try:
                    probe_solution = player_solve(
                        bundle.image, "Image", ctx, "llm",
                        graph=bundle.graph, max_steps=spec.max_steps,
                    )
                    probe = diff_solutions(bundle.official, probe_solution).is_match
                except UnparseableSteps:
                    probe = False
            report.rows.append(CorpusRow(
                scene=spec.scene_keyword,
                metrics=eval_bundle(bundle, probe_matches=probe),
            ))
        except Exception as exc:  # noqa: BLE001 - individual failures are data
            report.rows.append(CorpusRow(scene=spec.scene_keyword, metrics=None,
                                         error=str(exc)))
    return report


def report_text(reports: list[CorpusReport]) -> str:
    """Aligned-text table shaped like the paper's comparison table."""
    header = f"{'Method':<10} {'Solv.':>7} {'Short.':>7} {'Align.':>7} {'#Gen.':>7} {'Runs':>5}"
    lines = [header, "-" * len(header)]
    for report in reports:
        s = report.summary()
        lines.append(
            f"{s['ablation']:<10} {s['solvable_rate'] * 100:>6.1f}% "
            f"{s['mean_shortcuts']:>7.2f} {s['mean_alignment']:>7.2f} "
            f"{s['mean_generations']:>7.2f} {s['runs']:>5d}"
        )
    return "\n".join(lines) + "\n"


def report_csv(reports: list[CorpusReport]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer)
    writer.writerow(["method", "solvable_rate", "mean_shortcuts", "mean_alignment",
                     "mean_generations", "runs", "failures"])
    for report in reports:
        s = report.summary()
        writer.writerow([
            s["ablation"], s["solvable_rate"], s["mean_shortcuts"],
            s["mean_alignment"], s["mean_generations"], s["runs"], s["failures"],
        ])
    rows_header = ["method", "scene", "solvable", "shortcuts", "alignment", "generations"]
    writer.writerow([])
    writer.writerow(rows_header)
    for report in reports:
        for row in report.rows:
            if row.metrics is None:
                writer.writerow([report.ablation, row.scene, "error", "", "", ""])
            else:
                m = row.metrics
                writer.writerow([
                    report.ablation, row.scene, int(m.solvable), m.shortcut_count,
                    "" if m.alignment_violations is None else m.alignment_violations,
                    m.image_generations,
                ])
    return buffer.getvalue()
