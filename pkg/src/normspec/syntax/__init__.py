from . import ast
from .lexer import Location, Token, tokenize
from .parser import default_resolver, parse_expression, parse_program
from .printer import print_decl, print_expr, print_phrase, print_program

__all__ = [
    "ast", "Location", "Token", "tokenize", "default_resolver", "parse_expression",
    "parse_program", "print_decl", "print_expr", "print_phrase", "print_program",
]
