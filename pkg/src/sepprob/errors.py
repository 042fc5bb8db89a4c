"""Exception hierarchy shared by all sepprob modules."""


class SepprobError(Exception):
    """Base class for every error raised by this package."""


class DomainError(SepprobError):
    """A parameter lies outside the domain an operation is defined on."""


class UncancelledPole(SepprobError):
    """A factored ratio has more zero factors in the denominator than in the
    numerator, so no finite cancellation limit exists."""


class SingularityError(SepprobError):
    """A closed-form evaluation point sits on a pole of the formula."""


class StructureViolation(SepprobError):
    """An exact polynomial fit failed its consistency witness."""


class NoCandidateError(SepprobError):
    """No rational with the requested denominator bound lies within the
    stated error radius of the approximant."""


class PrecisionError(SepprobError):
    """The working precision is too low to resolve the requested quantity."""


class CacheError(SepprobError):
    """Base class for moment-cache problems."""


class CacheHeaderError(CacheError):
    """Cache file header does not match the requested scenario or format."""


class CacheIntegrityError(CacheError):
    """Cache file records are malformed or fail spot re-verification."""


class CacheLockedError(CacheError):
    """Another writer holds the cache lock."""
