"""Exception taxonomy shared by all relaxlab modules."""


class RelaxlabError(Exception):
    """Base class for every error raised by this package."""


class ExtRealArithmeticError(RelaxlabError):
    """Raised on (+inf) + (-inf); a bug detector, never a valid evaluation."""


class PatternError(RelaxlabError):
    """Invalid pattern construction or divergent tail sum."""


class ConvexityError(RelaxlabError):
    """An expression constructor would break convexity-by-construction."""


class EvalError(RelaxlabError):
    """Missing family index, unknown scalar, or space mismatch."""


class SpaceMismatchError(EvalError):
    """Point space tag does not match the expression's declared space."""


class ConjugacyRefusal(RelaxlabError):
    """A conjugacy precondition is not structurally certifiable.

    Carries the offending subtree so callers can report exactly which
    node blocked the rewrite instead of producing a silently wrong answer.
    """

    def __init__(self, message, subtree=None):
        super().__init__(message)
        self.subtree = subtree


class ReduceRefusal(ConjugacyRefusal):
    """The exact finite reduction does not cover the given structure."""


class SolverError(RelaxlabError):
    """Unexpected state inside the LP solver (resource limits, bugs)."""


class MultiplierValidationError(RelaxlabError):
    """Penalized-problem value disagrees with v(P); indicates a reduction bug.

    Carries both values so the mismatch is inspectable.
    """

    def __init__(self, message, expected, got):
        super().__init__(message)
        self.expected = expected
        self.got = got


class ParseError(RelaxlabError):
    """Problem document violates the schema; carries the JSON path."""

    def __init__(self, message, path=""):
        super().__init__(f"{path or '$'}: {message}")
        self.path = path


class GalleryError(RelaxlabError):
    """Unknown gallery name or malformed gallery query."""


class InternalInvariantError(RelaxlabError):
    """A re-verified report inequality failed; aborts report emission."""
