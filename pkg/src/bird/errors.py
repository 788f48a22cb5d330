"""Exception hierarchy shared across the package."""


class BirdError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(BirdError):
    """A domain object or serialized document violates its invariants."""


class SpaceTooLargeError(BirdError):
    """The complete-information space exceeds the configured enumeration cap."""

    def __init__(self, cardinality: int, cap: int):
        super().__init__(
            f"complete-information space has {cardinality} assignments, "
            f"exceeding the cap of {cap}"
        )
        self.cardinality = cardinality
        self.cap = cap


class DomainError(BirdError):
    """A probability argument lies outside the open interval (0, 1)."""


class NotComparableError(BirdError):
    """Pairwise comparison requested on an observation with no information."""


class NothingToAskError(BirdError):
    """A follow-up question was requested but every factor is observed."""


class AlreadyObservedError(BirdError):
    """An answer targets a factor that the observation already pins."""


class ProviderError(BirdError):
    """The completion provider failed or returned a malformed payload."""


class FixtureMissError(ProviderError):
    """A fixture-backed provider has no recording for the requested digest."""

    def __init__(self, digest: str):
        super().__init__(f"no fixture recording for digest {digest}")
        self.digest = digest


class ParseError(BirdError):
    """A completion could not be parsed against its closed vocabulary."""


class UnknownScenarioError(BirdError):
    """No bundle is loaded for the requested scenario id."""


class UnknownSessionError(BirdError):
    """No session exists with the requested id."""
