"""Exception types raised across the package.

Every failure mode a caller may want to branch on gets its own class;
all inherit from WhkError so blanket handling stays possible.
"""


class WhkError(Exception):
    """Base class for all package errors."""


class MalformedOperatorError(WhkError):
    """Matrix is not Hermitian within tolerance, or shape disagrees with dims."""


class DimensionMismatchError(WhkError):
    """Two operands carry incompatible bipartite dimensions."""


class NotPositiveError(WhkError):
    """Operator expected to be positive semidefinite has a negative eigenvalue."""


class GenerationFailureError(WhkError):
    """Random sampling exhausted its retry budget."""


class InvalidArgumentError(WhkError):
    """Argument outside its documented range (zero operator, starts=0, ...)."""


class PreconditionError(WhkError):
    """Input violates an operation's stated precondition."""


class NoWitnessError(WhkError):
    """Witness requested for a separable state; none can exist."""


class SearchInconclusiveError(WhkError):
    """Iterative search exhausted its budget without a certificate either way."""


class StratumViolationError(WhkError):
    """A constructed object landed in the wrong stratum (e.g. product ground
    eigenvector of a supposed witness)."""


class NotInOtherObservablesError(WhkError):
    """Operator is block-positive, so it has no product-state counterexample."""


class IndistinguishableError(WhkError):
    """The two states coincide within tolerance; no separator exists."""


class InconsistencyError(WhkError):
    """Internal certificates disagree; indicates a tolerance fault, never
    silently swallowed."""


class NoSeparatorFoundError(WhkError):
    """Separating functional search failed; legitimate when the target lies
    inside the sampled hull."""


class SchemaError(WhkError):
    """A JSON payload violates the operator/UPB schema.  `field` names the
    offending entry."""

    def __init__(self, message: str, field: str = ""):
        super().__init__(message)
        self.field = field
