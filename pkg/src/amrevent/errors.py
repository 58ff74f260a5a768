"""Exception hierarchy shared by all amrevent modules."""


class AmreventError(Exception):
    """Base class for every error raised by this package."""


class ParseError(AmreventError):
    """Malformed input text (JSONL line or graph serialization).

    Carries enough location information (line number or character
    offset) to point a user at the offending spot.
    """

    def __init__(self, message, *, line=None, offset=None):
        loc = []
        if line is not None:
            loc.append(f"line {line}")
        if offset is not None:
            loc.append(f"offset {offset}")
        if loc:
            message = f"{message} ({', '.join(loc)})"
        super().__init__(message)
        self.line = line
        self.offset = offset


class ValidationError(AmreventError):
    """Structurally well-formed data that violates an invariant."""


class SpanUnavailableError(ValidationError):
    """A span's markers were dropped during truncation, so no
    representation exists for it."""


class ConfigError(AmreventError):
    """Bad configuration: unknown keys, out-of-range values."""


class NumericError(AmreventError):
    """Non-finite values where finite ones are required."""


class CheckpointError(AmreventError):
    """Base class for checkpoint I/O failures."""


class BadMagicError(CheckpointError):
    """File does not start with the checkpoint magic bytes."""


class VersionMismatchError(CheckpointError):
    """Checkpoint format version is not supported."""


class CrcMismatchError(CheckpointError):
    """Stored CRC32 does not match the file contents."""


class TruncatedCheckpointError(CheckpointError):
    """File ends in the middle of a record."""
