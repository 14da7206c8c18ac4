"""Memory transistency models: relational checking and bounded ELT synthesis."""

from .canon import canonical_form, compare, dedup
from .eltio import parse, parse_file, to_text
from .model import Model, check, get_model, x86_tso, x86t_elt
from .oracle import classify, enumerate_executions
from .relgraph import DEFAULT_SEMANTICS, Event, ExecutionGraph, Kind, Program, Semantics, derive
from .synth import SynthConfig, SynthResult, SynthTimeout, is_minimal, synthesize

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_SEMANTICS", "Event", "ExecutionGraph", "Kind", "Model", "Program", "Semantics",
    "SynthConfig", "SynthResult", "SynthTimeout", "canonical_form", "check", "classify",
    "compare", "dedup", "derive", "enumerate_executions", "get_model", "is_minimal", "parse",
    "parse_file", "synthesize", "to_text", "x86_tso", "x86t_elt",
]
