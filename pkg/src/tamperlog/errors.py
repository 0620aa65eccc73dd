"""Exception hierarchy. Each class maps to one CLI exit code."""


class TamperLogError(Exception):
    exit_code = 70


class ConfigError(TamperLogError, ValueError):
    """Invalid parameters (rounds, tau, sizes, core index)."""

    exit_code = 64


class StructuralError(TamperLogError, ValueError):
    """Mismatched tag lengths or sequence lengths."""

    exit_code = 70


class SchemaError(TamperLogError, KeyError):
    exit_code = 65

    def __str__(self):
        return str(self.args[0]) if self.args else ""


class ParseError(TamperLogError, ValueError):
    """Malformed encoded bytes; ``offset`` is the failing byte position."""

    exit_code = 65

    def __init__(self, message, offset=None):
        super().__init__(message if offset is None else f"{message} (at byte {offset})")
        self.offset = offset


class FormatError(ParseError):
    """Malformed archive, key or trace file."""


class RoutingError(TamperLogError, IndexError):
    exit_code = 70


class InputError(TamperLogError, ValueError):
    """Well-typed but unusable input (unsorted trace, empty archive, ...)."""

    exit_code = 65


class DegenerateInputError(InputError):
    pass


class InvalidIntervalError(InputError):
    pass


class DesignError(InputError):
    pass


class HarnessError(TamperLogError):
    """An adversary returned output of the wrong shape to a game."""
