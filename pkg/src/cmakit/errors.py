"""Exception types raised across the package.

Each class marks one failure mode of the numerical contracts, so callers (and
the CLI) can map failures to stable machine-readable names instead of parsing
messages.
"""


class CmakitError(Exception):
    """Base class for all package errors."""


class DomainError(CmakitError, ValueError):
    """An argument lies outside the mathematical domain of the operation."""


class NearMultipleRoots(CmakitError):
    """Autoregressive roots closer than the separation tolerance."""


class OrderTooLarge(CmakitError):
    """Requested recursion or polynomial order beyond the supported range."""


class UnitModulusBranch(CmakitError):
    """Both branches of the quadratic have modulus one; no contraction exists."""


class QuadratureFailure(CmakitError):
    """Adaptive quadrature did not reach the requested tolerance."""


class NonPositiveDensity(CmakitError):
    """A spectral density evaluated to a non-positive value."""


class LagTooLarge(CmakitError):
    """Autocovariance requested at a lag the data cannot support."""


class NonPositiveV(CmakitError):
    """Innovation variance hit zero or below; the ACVF is not positive definite."""


class NonCausalAR(CmakitError):
    """An autoregressive polynomial has a zero inside or on the unit circle."""


class MRequired(CmakitError):
    """The default order rule exceeds the data; pass m explicitly."""


class BesselFailure(CmakitError):
    """The Bessel K integral did not converge to tolerance."""


class EmbeddingFailure(CmakitError):
    """Circulant embedding stayed indefinite after the allowed grid doublings."""


class NonStationaryInit(CmakitError):
    """No stationary state covariance exists for the requested model."""


class SegmentTooLong(CmakitError):
    """Welch segment length exceeds the series length."""


class InsufficientPoints(CmakitError):
    """Too few frequency points in the requested band for a stable fit."""
