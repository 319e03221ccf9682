"""Exception types shared across the package."""


class MdpError(Exception):
    """Base class for all package-specific errors."""


class InvalidPolicyError(MdpError, ValueError):
    """A policy references a SAP that does not exist or belongs to another state."""


class EnumerationTooLargeError(MdpError):
    """The deterministic policy space exceeds the enumeration cap."""


class NotUnichainError(MdpError):
    """An operation that needs a single closed irreducible class got a multichain kernel."""


class NotPrimitiveError(MdpError):
    """No power of the kernel within the Wielandt bound is entrywise positive."""


class CriterionMismatchError(MdpError):
    """A discounted-only operation was called at gamma = 1, or vice versa."""


class AssumptionViolatedError(MdpError):
    """A diagnostic required by the contraction analysis failed.

    ``diagnostic`` names the failed check ("uniqueness", "unichain" or
    "aperiodicity").
    """

    def __init__(self, diagnostic: str, message: str = ""):
        self.diagnostic = diagnostic
        super().__init__(message or f"assumption violated: {diagnostic}")


class SingularMatrixError(MdpError):
    """A dense factorization hit a pivot below the relative threshold."""


class ModelFormatError(MdpError, ValueError):
    """A model document is syntactically or structurally malformed."""


class UnsupportedVersionError(ModelFormatError):
    """The document's schema_version is not supported."""


class ValidationFailedError(ModelFormatError):
    """A parsed model violates the data-model invariants.

    ``violations`` holds the full report from ``validate_model``.
    """

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))
