"""Exception types shared across the package."""

from __future__ import annotations


class ForgeError(Exception):
    """Base class for all package errors."""


class SceneSyntaxError(ForgeError):
    """Scene document is not well-formed (bad nesting / not a mapping)."""


class SchemaError(ForgeError):
    """Scene document violates the schema (unknown relation, duplicate id, ...)."""


class PatchRejected(ForgeError):
    """A graph patch failed; the original graph is untouched."""

    def __init__(self, op_index: int, violation, message: str = ""):
        self.op_index = op_index
        self.violation = violation
        super().__init__(message or f"patch op {op_index} rejected: {violation}")


class IllegalAction(ForgeError):
    """Action precondition failed."""

    def __init__(self, verb: str, reason: str):
        self.verb = verb
        self.reason = reason
        super().__init__(f"{verb}: {reason}")


class BudgetExceeded(ForgeError):
    """Solver explored more states than the configured cap."""


class BackendError(ForgeError):
    """Backend call failed or was exhausted."""


class ResponseParseError(ForgeError):
    """Backend text could not be parsed into the expected artifact."""


class NullPatch(ForgeError):
    """Examiner revision was identical to the input graph."""


class UnboundPlaceholder(ForgeError):
    """Prompt template rendered with a missing placeholder binding."""

    def __init__(self, name: str):
        self.name = name
        super().__init__(f"unbound placeholder <{name}>")


class NoSolutionFound(ForgeError):
    """Player could not produce a solution."""


class UnparseableSteps(ForgeError):
    """LLM step text contained lines the verb lexicon cannot parse."""

    def __init__(self, lines: list[str]):
        self.lines = lines
        super().__init__("unparseable steps: " + "; ".join(lines))


class UnknownObjectInBullet(ForgeError):
    """A diff bullet names an object absent from the layout."""


class BboxMismatch(ForgeError):
    """Edit instruction bbox disagrees with the parent layout."""


class DigestMismatch(ForgeError):
    """Layout digest does not match the graph it is checked against."""


class OverconstrainedLayout(ForgeError):
    """Layout constraints are unsatisfiable."""


class MissingArtifact(ForgeError):
    """A metric's input artifact is absent from the bundle."""

    def __init__(self, stage: str):
        self.stage = stage
        super().__init__(f"missing artifact for stage {stage}")


class NonConvergence(ForgeError):
    """A refinement stage hit its iteration cap without an empty diff."""

    def __init__(self, stage, last_report):
        self.stage = stage
        self.last_report = last_report
        super().__init__(f"stage {stage} did not converge")


class UnknownBundle(ForgeError):
    """Bundle id not found or not playable."""


class SessionClosed(ForgeError):
    """Play session already escaped or otherwise closed."""


class UnparseableAttempt(ForgeError):
    """Player attempt text could not be parsed; ask them to rephrase."""
