from .backends import (
    AgentContext,
    Backend,
    DryRunBackend,
    LiveBackend,
    ScriptedBackend,
    Transcript,
    make_backend,
)
from .lexicon import parse_action, parse_steps, split_steps
from .prompts import PromptTemplate, load_template, render_prompt
from .roles import (
    builder_refine_image,
    builder_refine_layout,
    designer_design,
    examiner_check,
    examiner_refine_graph,
    player_solve,
)

__all__ = [
    "AgentContext",
    "Backend",
    "DryRunBackend",
    "LiveBackend",
    "ScriptedBackend",
    "Transcript",
    "make_backend",
    "parse_action",
    "parse_steps",
    "split_steps",
    "PromptTemplate",
    "load_template",
    "render_prompt",
    "builder_refine_image",
    "builder_refine_layout",
    "designer_design",
    "examiner_check",
    "examiner_refine_graph",
    "player_solve",
]
