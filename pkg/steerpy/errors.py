"""
Exception hierarchy.

InvalidParameter is also a ValueError so that config and argument checks
behave like the rest of the config layer; DomainError marks outcomes that are
legitimate answers about the physics (no key, no surviving pair) rather than
misuse.
"""


class SteerpyError(Exception):
	pass


class InvalidParameter(SteerpyError, ValueError):
	pass


class DimensionError(InvalidParameter):
	pass


class ChannelError(SteerpyError):
	"""Kraus set violates completeness."""


class DomainError(SteerpyError):
	pass


class NeverSecure(DomainError):
	"""Key rate is not positive anywhere in the searched range."""


class ZeroSuccessProbability(DomainError):
	pass


class NotBellDiagonal(DomainError):
	"""State has Bell-basis coherences; twirl it first."""


class ConvergenceError(DomainError):
	pass


class SearchError(DomainError):
	"""Bisection bracket is not monotone."""
