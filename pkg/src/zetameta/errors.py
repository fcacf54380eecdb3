"""Exception hierarchy shared by every stage of the pipeline."""


class ZetaMetaError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(ZetaMetaError, ValueError):
    """An argument lies outside the region where an operation is defined."""


class CapabilityError(ZetaMetaError):
    """The requested precision cannot be delivered at this height."""


class RangeError(ZetaMetaError, ValueError):
    """A point or iterate escapes the tabulated ladder range."""


class AnchorError(ZetaMetaError):
    """The ladder anchor violates phi(t) < t somewhere on the table."""


class ConsistencyError(ZetaMetaError):
    """An internal invariant (monotonicity, bracketing) failed."""


class CertificateError(ZetaMetaError):
    """A mean-value certificate could not be constructed."""


class DegeneratePointError(CertificateError):
    """A mean-value point made a denominator vanish."""


class ConfigurationError(ZetaMetaError, ValueError):
    """Inconsistent user configuration."""


class NotFoundError(ZetaMetaError):
    """A search exhausted its window without a solution."""


class AssemblyError(ZetaMetaError):
    """Bindings for a meta-functional equation are missing or stale."""


class EliminationError(ZetaMetaError):
    """Symbolic elimination or substitution could not be performed."""


class DegenerateTargetError(ZetaMetaError):
    """A graft target fell on 0 or 1, outside the open unit interval."""


class StaleBindingError(AssemblyError):
    """A graft was built for a different certificate than the one supplied."""


class SubstitutionError(ZetaMetaError):
    """A rational substitution lacks the identity it needs."""
