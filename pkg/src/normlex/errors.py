"""Shared exception base class."""


class NormlexError(Exception):
    """Base class for all errors raised by this package."""
