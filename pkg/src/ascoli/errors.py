"""Exception types shared across the package.

Two families matter to callers: :class:`SemanticFailure` means a hypothesis
or certificate check failed (the input is wrong), :class:`ResourceBound`
means a finite horizon, depth or precision budget ran out (raise it and
retry).
"""


class AscoliError(Exception):
    pass


class SemanticFailure(AscoliError):
    pass


class ResourceBound(AscoliError):
    pass


class ModulusViolation(SemanticFailure):
    """A claimed modulus of continuity was contradicted by exact values."""


class CertificateFailure(SemanticFailure):
    """A convergence-rate claim could not be certified.

    ``witness`` is ``(y, n, n2)`` when a concrete grid point and pair of
    indices violate the bound, else ``None``.
    """

    def __init__(self, message, witness=None, k=None):
        super().__init__(message)
        self.witness = witness
        self.k = k


class TreeFormatError(SemanticFailure):
    pass


class DeadEnd(SemanticFailure):
    """Both children of a node are dead at the given lookahead."""

    def __init__(self, message, node=""):
        super().__init__(message)
        self.node = node


class UnresolvedLocation(ResourceBound):
    def __init__(self, message, depth):
        super().__init__(message)
        self.depth = depth


class BudgetExceeded(ResourceBound):
    pass


class HorizonInsufficient(ResourceBound):
    """Too few surviving indices at some bisection level.

    ``partial`` holds whatever subsequence was built before the failure.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial
