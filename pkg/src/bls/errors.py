"""Exception types shared across the package."""


class BlsError(Exception):
    """Base class for all library errors."""


class InvalidParamsError(BlsError, ValueError):
    """Profile or bump parameters outside their documented ranges."""


class DomainError(BlsError, ValueError):
    """Evaluation requested outside an operation's admissible domain.

    Covers the tagged conditions: nonpositive-time, origin-singularity,
    too-close-to-support, height-too-large, missing-t0star.
    """


class ToleranceError(BlsError, ArithmeticError):
    """A quadrature failed its panel-doubling self check (tolerance-not-met)."""


class CacheMissError(BlsError, LookupError):
    """A field evaluation left the precomputed radial cache (cache-miss)."""


class AmbiguousSignError(BlsError, ValueError):
    """Sign-change bracketing could not be certified (ambiguous-sign)."""


class ConfigError(BlsError, ValueError):
    """CLI configuration file failed to parse or validate."""
