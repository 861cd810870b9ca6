"""Prompt templates as versioned data files, with strict placeholder binding."""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources

from ..errors import UnboundPlaceholder

DEFAULT_VERSION = "v1"

ROLES = ("Designer", "Player", "Examiner", "Builder")

_TEMPLATE_ROLES = {
    "designer_design": ("Designer", "Graph"),
    "designer_graph": ("Designer", "Graph"),
    "designer_layout": ("Designer", "Layout"),
    "player_solve": ("Player", "any"),
    "examiner_check": ("Examiner", "any"),
    "examiner_refine_graph": ("Examiner", "Graph"),
    "examiner_refine_layout": ("Examiner", "Layout"),
    "examiner_refine_image": ("Examiner", "Image"),
    "builder_layout": ("Builder", "Layout"),
    "builder_image": ("Builder", "Image"),
}

_PLACEHOLDER_RE = re.compile(r"<([a-z_]+)>")


@dataclass(frozen=True)
class PromptTemplate:
    name: str
    role: str
    stage: str
    text: str
    version: str


def load_template(name: str, version: str = DEFAULT_VERSION) -> PromptTemplate:
    if name not in _TEMPLATE_ROLES:
        raise KeyError(f"unknown template {name}")
    text = (
        resources.files("escape_forge.agents")
        .joinpath("templates", version, f"{name}.txt")
        .read_text("utf-8")
        .rstrip("\n")
    )
    role, stage = _TEMPLATE_ROLES[name]
    return PromptTemplate(name=name, role=role, stage=stage, text=text, version=version)


def render_prompt(name: str, context: dict | None = None, version: str = DEFAULT_VERSION) -> str:
    """Substitute <placeholders>; any left unbound is an error."""
    template = load_template(name, version)
    text = template.text
    for key, value in (context or {}).items():
        text = text.replace(f"<{key}>", str(value))
    leftovers = _PLACEHOLDER_RE.findall(text)
    if leftovers:
        raise UnboundPlaceholder(leftovers[0])
    return text
