"""Phrase-level abstract syntax.

All nodes are frozen dataclasses so that structural equality gives the
round-trip property ``parse(print(p)) == p`` for free.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

# -- expressions --------------------------------------------------------------


@dataclass(frozen=True)
class IntLit:
    value: int


@dataclass(frozen=True)
class StrLit:
    value: str


@dataclass(frozen=True)
class BoolLit:
    value: bool


@dataclass(frozen=True)
class Ref:
    """Variable reference; the name may carry primes or a numeric alias suffix."""

    name: str


@dataclass(frozen=True)
class Arg:
    name: Optional[str]
    expr: "Expr"


@dataclass(frozen=True)
class App:
    """Constructor application ``type(arg, field = arg, ...)``."""

    name: str
    args: tuple[Arg, ...] = ()


@dataclass(frozen=True)
class Proj:
    expr: "Expr"
    field: str


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Not:
    expr: "Expr"


@dataclass(frozen=True)
class Holds:
    expr: "Expr"


@dataclass(frozen=True)
class Enabled:
    expr: "Expr"


@dataclass(frozen=True)
class Violated:
    expr: "Expr"


@dataclass(frozen=True)
class Quant:
    kind: str  # Foreach | Forall | Exists
    vars: tuple[str, ...]
    body: "Expr"


@dataclass(frozen=True)
class Agg:
    kind: str  # Count | Sum | Max | Min
    body: "Expr"


@dataclass(frozen=True)
class When:
    expr: "Expr"
    guard: "Expr"
    keyword: str = "When"  # When and Where are synonyms; kept for faithful printing


Expr = Union[IntLit, StrLit, BoolLit, Ref, App, Proj, BinOp, Not, Holds, Enabled,
             Violated, Quant, Agg, When]

BOOL_OPS = ("&&", "||")
COMPARE_OPS = ("==", "!=", "<", "<=", ">", ">=")
ADD_OPS = ("+", "-")
MUL_OPS = ("*", "/")

# -- declarations ------------------------------------------------------------


@dataclass(frozen=True)
class IdentifiedBy:
    """``Identified by``: a primitive (String/Int), an int range, or a field list."""

    kind: str  # String | Int | range | fields
    fields: tuple[str, ...] = ()
    low: int = 0
    high: int = 0


@dataclass(frozen=True)
class DomainLits:
    values: tuple[Union[int, str], ...]


@dataclass(frozen=True)
class RelatedTo:
    fields: tuple[str, ...]


@dataclass(frozen=True)
class Role:
    role: str  # Actor | Recipient | Holder | Claimant
    field: str


DomainClause = Union[IdentifiedBy, DomainLits, RelatedTo, Role]

CLAUSE_KEYWORDS = {
    "holds_when": ("Holds", "when"),
    "derived_from": ("Derived", "from"),
    "conditioned_by": ("Conditioned", "by"),
    "creates": ("Creates",),
    "terminates": ("Terminates",),
    "obfuscates": ("Obfuscates",),
    "violated_when": ("Violated", "when"),
    "syncs_with": ("Syncs", "with"),
}


@dataclass(frozen=True)
class Clause:
    kind: str  # key of CLAUSE_KEYWORDS
    exprs: tuple[Expr, ...]


@dataclass(frozen=True)
class TypeDecl:
    kind: str  # Fact | Act | Event | Duty
    name: str
    modifiers: frozenset[str] = frozenset()
    domain: tuple[DomainClause, ...] = ()
    clauses: tuple[Clause, ...] = ()

    @property
    def is_extend(self) -> bool:
        return "Extend" in self.modifiers


# -- phrases ----------------------------------------------------------------


@dataclass(frozen=True)
class Decls:
    decls: tuple[TypeDecl, ...]


@dataclass(frozen=True)
class Statement:
    kind: str  # "+" | "-" | "trigger"
    expr: Expr


@dataclass(frozen=True)
class BoolQuery:
    expr: Expr


@dataclass(frozen=True)
class InstQuery:
    expr: Expr


@dataclass(frozen=True)
class Parallel:
    phrases: tuple["Phrase", ...] = field(default=())


Phrase = Union[Decls, Statement, BoolQuery, InstQuery, Parallel]
