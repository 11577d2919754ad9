"""Interpreter for a normative specification language.

Parse specifications and scenarios, close knowledge bases under derivation
rules, execute transitions, check results against a stable-model oracle and
export the ASP translation.
"""

from .knowledge import Instance, KnowledgeBase, TruthValue
from .syntax import parse_expression, parse_program
from .transition import Session, SessionOptions
from .typesystem import Registry

__version__ = "0.1.0"

__all__ = ["Instance", "KnowledgeBase", "Registry", "Session", "SessionOptions", "TruthValue",
           "parse_expression", "parse_program"]
