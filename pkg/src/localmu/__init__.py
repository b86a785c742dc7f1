"""Local symmetry reduction and local mu-calculus checking for process networks."""
from .dsl import ModelDocument, ParseError, parse_formula, parse_model, pretty_print
from .model import GlobalState, LocalState, ModelError, ProcessNetwork, ProcessTemplate

__version__ = "0.1.0"

__all__ = [
    "ModelDocument", "ParseError", "parse_formula", "parse_model", "pretty_print",
    "GlobalState", "LocalState", "ModelError", "ProcessNetwork", "ProcessTemplate",
]
