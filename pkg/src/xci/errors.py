"""Exception hierarchy shared by every xci module."""

from __future__ import annotations

from typing import Any


class XCIError(Exception):
    """Base class for all xci errors."""


class InvalidIndices(XCIError, ValueError):
    pass


class InvalidPartition(XCIError, ValueError):
    pass


class InvalidDistribution(XCIError, ValueError):
    """Malformed distribution: bad coordinates, negative masses, total != 1."""


class InvalidRegion(XCIError, ValueError):
    pass


class ZeroProbabilityEvent(XCIError):
    """Conditioning event carries no mass."""


class EnumerationTooLarge(XCIError):
    def __init__(self, count: int, cap: int):
        super().__init__(f"enumeration would visit {count} rectangles (cap {cap})")
        self.count = count
        self.cap = cap


class SupportOutsideRegion(XCIError):
    def __init__(self, point: tuple):
        super().__init__(f"support point {point} lies outside the region")
        self.point = point


class WitnessError(XCIError):
    """A witness could not be built. ``certificate`` explains why, if known."""

    def __init__(self, message: str, certificate: Any = None):
        super().__init__(message)
        self.certificate = certificate


class PreconditionEHFailed(WitnessError):
    pass


class CornerMassZero(WitnessError):
    pass


class IncompleteGridSupport(WitnessError):
    pass


class SupportNotCross(WitnessError):
    pass


class OuterCheckFailed(WitnessError):
    pass


class VerificationFailed(WitnessError):
    pass


class GeneratorError(XCIError, ValueError):
    pass


class EmptyRegionOnGrid(GeneratorError):
    pass


class MassWouldGoNonpositive(GeneratorError):
    pass


class SlabNotInSupport(GeneratorError):
    pass
