"""
DCLED - Exceptions
Every failure carries a stable machine code; daemons send it back in ERROR frames.
"""

from collections.abc import Iterable


class DelegationError(Exception):
    """Base class for all DCLED errors."""

    code = "internal"

    def __init__(self, detail: str = "") -> None:
        super().__init__(detail)
        self.detail = detail


class ParameterError(DelegationError, ValueError):
    """Invalid argument: mismatched moduli, wrong lengths, indices out of range."""

    code = "parameter"


class DecodeError(DelegationError, ValueError):
    """Bytes or hex that do not decode to a canonical value."""

    code = "decode"


class FieldDivisionError(DelegationError, ZeroDivisionError):
    """Inversion of zero in Z_p."""

    code = "division_by_zero"


class UnsupportedDegreeError(DelegationError):
    """Program degree exceeds what the scheme can evaluate."""

    code = "unsupported_degree"


class DuplicateLabelError(DelegationError):
    """A label was stored (or encrypted) twice for the same scheme."""

    code = "duplicate_label"


class MalformedShareError(DelegationError):
    """Share bytes do not parse under the declared scheme."""

    code = "malformed_share"


class MissingLabelError(DelegationError):
    """A program references labels the server does not hold."""

    code = "missing_label"

    def __init__(self, labels: Iterable[str]) -> None:
        self.labels = sorted(labels)
        super().__init__(f"missing labels: {', '.join(self.labels)}")


class StorageError(DelegationError):
    """Append-only log I/O failure."""

    code = "storage"


class ProtocolError(DelegationError):
    """Frame or header that violates the wire grammar."""

    code = "protocol"


class TransportError(DelegationError):
    """Server unreachable, timed out or closed the connection."""

    code = "transport"


ERROR_CLASSES: dict[str, type[DelegationError]] = {
    cls.code: cls
    for cls in (
        DelegationError,
        ParameterError,
        DecodeError,
        FieldDivisionError,
        UnsupportedDegreeError,
        DuplicateLabelError,
        MalformedShareError,
        StorageError,
        ProtocolError,
        TransportError,
    )
}


def error_from_code(code: str, detail: str) -> DelegationError:
    """Rebuild the exception a daemon reported in an ERROR frame."""
    if code == MissingLabelError.code:
        labels = detail.removeprefix("missing labels: ").split(", ") if detail else []
        return MissingLabelError(labels)
    cls = ERROR_CLASSES.get(code, DelegationError)
    return cls(detail)
