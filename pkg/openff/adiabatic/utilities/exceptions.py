"""Common exceptions raised by the framework."""


class AdiabaticException(Exception):
    """The base exception from which all custom exceptions should inherit."""
