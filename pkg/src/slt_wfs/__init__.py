"""Query evaluation under the well-founded semantics by SLT-resolution."""

from .dot import to_dot, write_dot
from .engine import (
    BuiltinError, EngineError, FlounderError, GeneralizedSltTree, Guard, GuardTripped,
    Options, SltNode, SltTree,
)
from .oracle import Model, OracleError, wf_model
from .parser import ParseError, parse_program, parse_query, render
from .solver import (
    FALSE, TRUE, UNDEFINED, UNOPTIMIZED, Evaluation, Verdict, build_generalized_tree, slt, sltp,
)
from .tables import Flags, Stats, Tables
from .terms import Atom, Clause, Literal, Program

__all__ = [
    "Atom", "BuiltinError", "Clause", "EngineError", "Evaluation", "FALSE", "Flags",
    "FlounderError", "GeneralizedSltTree", "Guard", "GuardTripped", "Literal", "Model",
    "Options", "OracleError", "ParseError", "Program", "SltNode", "SltTree", "Stats",
    "TRUE", "Tables", "UNDEFINED", "UNOPTIMIZED", "Verdict", "build_generalized_tree",
    "parse_program", "parse_query", "render", "slt", "sltp", "to_dot", "wf_model",
    "write_dot",
]
