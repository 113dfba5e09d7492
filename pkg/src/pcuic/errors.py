"""Exception hierarchy shared by the kernel and the frontend.

Every error class carries a stable ``code`` (used in diagnostics) and the
process ``exit_code`` the CLI maps it to.
"""

from __future__ import annotations


class PcuicError(Exception):
    code = "error"
    exit_code = 1

    def __init__(self, message: str = "", term=None):
        super().__init__(message or self.code)
        self.message = message or self.code
        self.term = term


# -- frontend ---------------------------------------------------------------


class FrontendError(PcuicError):
    exit_code = 2

    def __init__(self, message: str = "", span=None):
        super().__init__(message)
        self.span = span


class ParseError(FrontendError):
    code = "parse-error"


class UnboundName(FrontendError):
    code = "unbound-name"


class DuplicateName(FrontendError):
    code = "duplicate-name"


# -- typing -----------------------------------------------------------------


class TypeCheckError(PcuicError):
    """Any failure of the checker; ``term`` is the offending subterm."""

    code = "type-error"


class UnboundRel(TypeCheckError):
    code = "unbound-rel"


class NotAProduct(TypeCheckError):
    code = "not-a-product"


class NotASort(TypeCheckError):
    code = "not-a-sort"


class NotAnInductive(TypeCheckError):
    code = "not-an-inductive"


class CumulFailure(TypeCheckError):
    code = "cumul-failure"

    def __init__(self, message="", term=None, inferred=None, expected=None, reason=None):
        super().__init__(message, term)
        self.inferred = inferred
        self.expected = expected
        self.reason = reason


class UndeclaredConstant(TypeCheckError):
    code = "unbound-constant"


class UndeclaredInductive(TypeCheckError):
    code = "unbound-inductive"


class NoSuchConstructor(TypeCheckError):
    code = "no-such-constructor"


class IllFormedCase(TypeCheckError):
    code = "ill-formed-case"

    def __init__(self, detail: str, term=None, message: str = ""):
        super().__init__(message or f"ill-formed match ({detail})", term)
        self.detail = detail


class IllFormedInductive(TypeCheckError):
    code = "ill-formed-inductive"

    def __init__(self, detail: str, term=None, message: str = ""):
        super().__init__(message or f"ill-formed inductive ({detail})", term)
        self.detail = detail


class GuardError(TypeCheckError):
    code = "guard-error"


class PositivityError(TypeCheckError):
    code = "positivity-error"

    def __init__(self, ctor: str, position: int, message: str = ""):
        super().__init__(message or f"non strictly positive occurrence in argument {position} of {ctor}")
        self.ctor = ctor
        self.position = position


class UndeclaredLevel(TypeCheckError):
    code = "undeclared-level"

    def __init__(self, name: str):
        super().__init__(f"undeclared universe level {name!r}")
        self.name = name


class UniverseInconsistency(TypeCheckError):
    code = "universe-inconsistency"
    exit_code = 3


# -- evaluation -------------------------------------------------------------


class OutOfFuel(PcuicError):
    code = "out-of-fuel"
    exit_code = 4


class Stuck(PcuicError):
    code = "stuck"


class AxiomNotComputational(PcuicError):
    code = "axiom-not-computational"


class SizeExceeded(PcuicError):
    code = "size-exceeded"
