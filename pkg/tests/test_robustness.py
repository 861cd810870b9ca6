"""Parser totality: adversarial text yields typed errors, never crashes."""

import pytest
from hypothesis import given, settings, strategies as st

from escape_forge import fixtures
from escape_forge.agents.lexicon import parse_action, parse_steps
from escape_forge.errors import (
    ForgeError,
    SceneSyntaxError,
    SchemaError,
    UnparseableAttempt,
    UnparseableSteps,
)
from escape_forge.scene import parse_scene_graph

ADVERSARIAL_DOCS = [
    "",
    "::::",
    "[1, 2, 3]",
    "room: 5",
    "room:\n  children: [a, b]",
    "room:\n  children:\n    a: {relation: contains, states: {locked: true}}",
    "```json\n{\"not\": \"yaml... wait it is\"}\n```",
    "\x00\x01\x02",
    "a:\n" + "  " * 40 + "b: c",
    "room:\n  children:\n    exit_door:\n      relation: adjacent_to\n      exit: maybe",
]


@pytest.mark.parametrize("doc", ADVERSARIAL_DOCS)
def test_scene_parser_yields_typed_errors(doc):
    try:
        parse_scene_graph(doc)
    except (SceneSyntaxError, SchemaError):
        pass  # the only acceptable failure modes


@settings(max_examples=150, deadline=None)
@given(st.text(max_size=200))
def test_scene_parser_never_panics(text):
    try:
        parse_scene_graph(text)
    except (SceneSyntaxError, SchemaError):
        pass


@settings(max_examples=150, deadline=None)
@given(st.text(max_size=120))
def test_lexicon_never_panics(text):
    graph = fixtures.load("classroom").graph
    try:
        parse_action(text, graph)
    except UnparseableAttempt:
        pass


@settings(max_examples=60, deadline=None)
@given(st.text(max_size=400))
def test_step_splitter_never_panics(text):
    graph = fixtures.load("balloon").graph
    try:
        parse_steps(text, graph)
    except (UnparseableSteps, UnparseableAttempt):
        pass


def test_all_forge_errors_share_base():
    # The service layer maps ForgeError subtypes onto HTTP statuses; a
    # stray non-ForgeError escape would become a 500.
    from escape_forge import errors

    for name in dir(errors):
        obj = getattr(errors, name)
        if isinstance(obj, type) and issubclass(obj, Exception) and obj is not Exception:
            assert issubclass(obj, ForgeError), name
