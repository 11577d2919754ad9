"""Exception hierarchy shared by all normspec modules."""

from __future__ import annotations


class NormSpecError(Exception):
    """Base class for every error raised by the package."""


# -- syntax -----------------------------------------------------------------


class ParseError(NormSpecError):
    def __init__(self, message: str, location=None, expected: frozenset[str] = frozenset()):
        self.location = location
        self.expected = frozenset(expected)
        where = f"{location}: " if location is not None else ""
        hint = f" (expected one of: {', '.join(sorted(self.expected))})" if self.expected else ""
        super().__init__(f"{where}{message}{hint}")


class IncludeCycleError(NormSpecError):
    pass


class MissingFileError(NormSpecError):
    pass


# -- types ------------------------------------------------------------------


class TypeSystemError(NormSpecError):
    pass


class ExtendUnknownType(TypeSystemError):
    pass


class DuplicateFieldName(TypeSystemError):
    pass


class DutyMissingHolderClaimant(TypeSystemError):
    pass


class UnknownType(TypeSystemError):
    pass


class UnresolvableField(TypeSystemError):
    pass


class ArityMismatch(TypeSystemError):
    pass


# -- evaluation ---------------------------------------------------------------


class EvalError(NormSpecError):
    pass


class TypeMismatch(EvalError):
    pass


class DivisionByZero(EvalError):
    pass


class UnknownField(EvalError):
    pass


class EmptyAggregate(EvalError):
    pass


class NotAnAction(EvalError):
    pass


class EvalInterrupt(NormSpecError):
    """Evaluation needs input from the execution context.

    Raised only for open types: either the truth of a single instance is
    Unknown, or an open type with an infinite domain has to be enumerated.
    """


class UnknownInstance(EvalInterrupt):
    def __init__(self, instance):
        self.instance = instance
        super().__init__(f"unknown instance: {instance}")


class OpenEnumeration(EvalInterrupt):
    def __init__(self, type_name: str):
        self.type_name = type_name
        super().__init__(f"cannot enumerate open type with infinite domain: {type_name}")


class UnboundInNonEnumerableContext(EvalError):
    pass


# -- derivation -------------------------------------------------------------


class NonStratifiedError(NormSpecError):
    def __init__(self, cycle, detail: str = ""):
        self.cycle = cycle
        self.detail = detail
        text = f"specification is not stratified: {cycle}"
        if detail:
            text += f" ({detail})"
        super().__init__(text)


class FixpointBudgetExceeded(NormSpecError):
    pass


# -- oracle -----------------------------------------------------------------


class UniverseTooLarge(NormSpecError):
    pass


class UngroundableOpenType(NormSpecError):
    pass


# -- asp export ----------------------------------------------------------------


class OpenInfiniteEnumeration(NormSpecError):
    pass


class UnsupportedExpression(NormSpecError):
    pass


class EmptyCriterion(NormSpecError):
    pass


# -- cli --------------------------------------------------------------------


class CorrectnessFailure(NormSpecError):
    pass
