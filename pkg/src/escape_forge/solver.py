"""Bounded exhaustive solving, solution comparison, shortcut enumeration.

solve() does breadth-first search over legal actions with visited-state
deduplication, then enumerates every distinct minimal action sequence by
walking the minimal-distance DAG. Output ordering is fully deterministic
for a given (graph, max_steps).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .errors import BudgetExceeded
from .scene import SceneGraph, validate
from .world import Action, Engine, Solution, _legal_pairs, _mk_action, apply_raw

DEFAULT_STATE_CAP = 2_000_000


@dataclass(frozen=True)
class DiffReport:
    verdict: str  # "match" | "mismatch"
    bullets: tuple[str, ...] = ()
    shortcut_found: Solution | None = None
    missing_dependencies: tuple[tuple[str, str], ...] = ()

    @property
    def is_match(self) -> bool:
        return self.verdict == "match"


def solve(graph: SceneGraph, max_steps: int, state_cap: int = DEFAULT_STATE_CAP) -> list[Solution]:
    """All minimal-length solutions within max_steps, deterministic order.

    Empty list iff the puzzle is unsolvable within the bound. Raises
    BudgetExceeded once more than state_cap distinct states are seen, so
    an unsolvable verdict is never silently a truncated search.
    """
    problems = validate(graph)
    if problems:
        raise ValueError(f"graph invalid: {problems[0]}")
    if not 1 <= max_steps <= 8:
        raise ValueError("max_steps must be in 1..8")

    engine = Engine(graph)
    start = engine.initial
    dist: dict = {start: 0}
    pairs_cache: dict = {}
    frontier = deque([start])
    goal_depth: int | None = None

    def pairs_of(core):
        cached = pairs_cache.get(core)
        if cached is None:
            cached = _legal_pairs(engine, core)
            pairs_cache[core] = cached
        return cached

    while frontier:
        core = frontier.popleft()
        depth = dist[core]
        if goal_depth is not None and depth >= goal_depth:
            break
        for verb, s, t in pairs_of(core):
            succ = apply_raw(engine, core, verb, s, t)
            if succ in dist:
                continue
            if len(dist) >= state_cap:
                raise BudgetExceeded(f"state cap {state_cap} exceeded")
            dist[succ] = depth + 1
            if succ[5]:
                goal_depth = depth + 1
            elif depth + 1 < max_steps:
                frontier.append(succ)

    if goal_depth is None:
        return []

    # Prune to states that can still reach a goal along minimal edges,
    # then enumerate every minimal action sequence; legal-action order
    # keeps the output deterministic.
    useful: dict = {}

    def can_reach(core, depth: int) -> bool:
        known = useful.get(core)
        if known is not None:
            return known
        ok = False
        for verb, s, t in pairs_of(core):
            succ = apply_raw(engine, core, verb, s, t)
            if dist.get(succ) != depth + 1:
                continue
            if succ[5]:
                ok = ok or depth + 1 == goal_depth
            elif depth + 1 < goal_depth and can_reach(succ, depth + 1):
                ok = True
        useful[core] = ok
        return ok

    solutions: list[Solution] = []

    def walk(core, depth: int, prefix: list[Action]):
        for verb, s, t in pairs_of(core):
            succ = apply_raw(engine, core, verb, s, t)
            if dist.get(succ) != depth + 1:
                continue
            if succ[5]:
                if depth + 1 == goal_depth:
                    action = _mk_action(engine, verb, s, t)
                    solutions.append(Solution(tuple(prefix) + (action,)))
            elif depth + 1 < goal_depth and useful.get(succ):
                prefix.append(_mk_action(engine, verb, s, t))
                walk(succ, depth + 1, prefix)
                prefix.pop()

    if can_reach(start, 0):
        walk(start, 0, [])
    return solutions


def _dependent(a: Action, b: Action) -> bool:
    # Syntactic dependency: one step's subject is touched by the other.
    # Sharing only a target (two weights placed on one plate) stays
    # independent.
    return (
        a.subject == b.subject
        or a.subject == b.target
        or b.subject == a.target
    )


def _fmt(sig: tuple[str, str, str | None]) -> str:
    verb, subject, target = sig
    inner = subject if target is None else f"{subject}, {target}"
    return f"{verb}({inner})"


def diff_solutions(official: Solution, found: Solution) -> DiffReport:
    """Compare two solutions the way the examiner does.

    Match iff the multisets of (verb, subject, target) triples are equal
    and every pair of steps that touch a common object keeps its relative
    order. Both inputs are assumed to replay to escaped on their graphs.
    """
    bullets: list[str] = []
    official_sigs = list(official.signatures())
    found_sigs = list(found.signatures())

    from collections import Counter

    official_count = Counter(official_sigs)
    found_count = Counter(found_sigs)
    for sig in sorted((found_count - official_count).elements()):
        bullets.append(f"found uses {_fmt(sig)} absent from official")
    for sig in sorted((official_count - found_count).elements()):
        bullets.append(f"official uses {_fmt(sig)} absent from found")

    missing: list[tuple[str, str]] = []
    if official_count == found_count:
        # Pair equal triples by occurrence order, then compare the order
        # of dependent pairs.
        pos_in_found: dict[tuple, list[int]] = {}
        for idx, sig in enumerate(found_sigs):
            pos_in_found.setdefault(sig, []).append(idx)
        mapped = []
        consumed: dict[tuple, int] = {}
        for sig in official_sigs:
            k = consumed.get(sig, 0)
            consumed[sig] = k + 1
            mapped.append(pos_in_found[sig][k])
        for i in range(len(official_sigs)):
            for j in range(i + 1, len(official_sigs)):
                if not _dependent(official.steps[i], official.steps[j]):
                    continue
                if mapped[i] > mapped[j]:
                    a, b = _fmt(official_sigs[i]), _fmt(official_sigs[j])
                    bullets.append(f"found reorders {b} before {a}")
                    missing.append((a, b))

    if not bullets:
        return DiffReport(verdict="match")
    return DiffReport(
        verdict="mismatch",
        bullets=tuple(bullets),
        shortcut_found=found,
        missing_dependencies=tuple(missing),
    )


def detect_shortcuts(
    graph: SceneGraph,
    official: Solution,
    max_steps: int,
    state_cap: int = DEFAULT_STATE_CAP,
) -> list[Solution]:
    """Minimal solutions that do not match the official one.

    Empty list is the Graph-stage success condition.
    """
    return [
        candidate
        for candidate in solve(graph, max_steps, state_cap=state_cap)
        if not diff_solutions(official, candidate).is_match
    ]


def replay(graph: SceneGraph, solution: Solution):
    """Replay a solution from the initial state; returns the final world.

    Raises IllegalAction if any step fails, so tests can assert soundness.
    """
    from .world import apply, initial_state

    world = initial_state(graph)
    for step in solution.steps:
        world = apply(world, step)
    return world


def serialize_solution(solution: Solution) -> list[dict]:
    return [
        {"verb": a.verb, "subject": a.subject, "target": a.target, "gloss": a.gloss}
        for a in solution.steps
    ]


def deserialize_solution(data: list[dict]) -> Solution:
    return Solution(tuple(
        Action(
            verb=item["verb"],
            subject=item["subject"],
            target=item.get("target"),
            gloss=item.get("gloss", ""),
        )
        for item in data
    ))


def solution_text(solution: Solution) -> str:
    """Line-oriented form: `step N: verb(subject[, target]) — gloss`."""
    lines = []
    for i, action in enumerate(solution.steps, start=1):
        inner = action.subject if action.target is None else f"{action.subject}, {action.target}"
        lines.append(f"step {i}: {action.verb}({inner}) — {action.gloss}")
    return "\n".join(lines) + "\n"
