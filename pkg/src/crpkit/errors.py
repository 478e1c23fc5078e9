"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class CRPError(Exception):
    """Base class for every error raised by crpkit."""


class DimensionError(CRPError, ValueError):
    pass


class DomainError(CRPError, ValueError):
    pass


class UnsupportedNormError(CRPError, ValueError):
    pass


class ConfigurationError(CRPError):
    """Family parameters violate an assumption the constructions rely on.

    ``distance`` carries the offending exact value when the failure is a
    separation check.
    """

    def __init__(self, message: str, distance=None):
        super().__init__(message)
        self.distance = distance


class DeterminismError(CRPError):
    """A subject gave different answers on identical oracle transcripts."""


class ContractError(CRPError):
    """A caller-supplied object broke its stated contract (monotonicity, prefix consistency, ...)."""


class CertificateError(CRPError):
    """A certificate failed exact re-verification. Always a defect."""


class NotApplicableError(CRPError):
    pass


class BudgetExhausted(CRPError):
    pass


class ProtocolError(CRPError):
    pass


class RegistryError(CRPError, KeyError):
    def __str__(self):
        return Exception.__str__(self)
