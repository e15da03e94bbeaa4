"""Exception hierarchy shared by all baryscore modules."""


class BaryScoreError(Exception):
    """Base class for every error raised by this package."""


class DimensionMismatch(BaryScoreError):
    """Point clouds or tensors do not share the required dimension."""


class NonFinite(BaryScoreError):
    """A coordinate, weight, or cost entry is NaN or infinite."""


class InfeasibleMarginals(BaryScoreError):
    """A marginal weight vector is negative or too far from summing to 1."""


class SolverFailure(BaryScoreError):
    """The exact solver exhausted its pivot budget without terminating."""


class NonConvergence(BaryScoreError):
    """An iterative solver did not meet its tolerance within max_iter."""


class SizeMismatch(BaryScoreError):
    """A support-size requirement of the chosen strategy is violated."""


class ParseError(BaryScoreError):
    """A bundle or dataset file failed to parse.

    Carries the 1-based line number of the offending line.
    """

    def __init__(self, message, line_no=None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no


class SchemaError(BaryScoreError):
    """A parsed record violates a structural invariant (named in the message)."""


class EmptyCorpus(BaryScoreError):
    """IDF computation was given no documents."""


class EmptyText(BaryScoreError):
    """A text with zero tokens cannot be scored."""


class DegenerateInput(BaryScoreError):
    """A correlation is undefined (zero variance / all ties)."""


class AllRowsDegenerate(BaryScoreError):
    """Every text-level row was degenerate; the mean correlation is undefined."""


class DomainError(BaryScoreError):
    """An argument lies outside the mathematical domain of the operation."""


class MissingScores(BaryScoreError):
    """Dataset cells without a matching score row; cells are listed in the message."""
