"""
DCLED - Store Record
One persisted share on one daemon, and the scheme-aware share parser.
"""

from __future__ import annotations

from datetime import datetime, timezone
from enum import Enum

from pydantic import BaseModel, ConfigDict, Field, field_validator

from app.core.exceptions import MalformedShareError
from app.core.field import SchemeParams
from app.models.shares import Share1, Share2, ShareMatrixRow, VShare1, VShare2

ShareObject = Share1 | Share2 | VShare1 | VShare2 | ShareMatrixRow


class SchemeTag(str, Enum):
    """Scheme a stored share belongs to."""

    TWO_SERVER = "2S"
    TWO_SERVER_VERIFIABLE = "2V"
    MULTI_SERVER = "DS"
    MULTI_SERVER_VERIFIABLE = "DV"

    @property
    def verifiable(self) -> bool:
        return self in (SchemeTag.TWO_SERVER_VERIFIABLE, SchemeTag.MULTI_SERVER_VERIFIABLE)

    @property
    def two_server(self) -> bool:
        return self in (SchemeTag.TWO_SERVER, SchemeTag.TWO_SERVER_VERIFIABLE)


class StoreRecord(BaseModel):
    """Immutable (label, scheme) -> share bytes entry of a daemon's log."""

    model_config = ConfigDict(frozen=True, ser_json_bytes="hex", val_json_bytes="hex")

    label: str = Field(min_length=1)
    scheme: SchemeTag
    server_index: int = Field(ge=1)
    share: bytes
    inserted_at: datetime = Field(default_factory=lambda: datetime.now(timezone.utc))

    @field_validator("label")
    @classmethod
    def label_is_utf8(cls, v: str) -> str:
        try:
            v.encode("utf-8")
        except UnicodeEncodeError as exc:
            raise ValueError("label must be valid UTF-8") from exc
        return v

    @property
    def key(self) -> tuple[SchemeTag, str]:
        return self.scheme, self.label

    def to_log_body(self) -> bytes:
        """JSON body written to the append-only log (share as hex)."""
        return self.model_dump_json(round_trip=True).encode("utf-8")

    @classmethod
    def from_log_body(cls, body: bytes) -> StoreRecord:
        return cls.model_validate_json(body)

    def parse(self, params: SchemeParams) -> ShareObject:
        return parse_share(self.scheme, self.server_index, self.share, params)


def parse_share(
    scheme: SchemeTag, server_index: int, data: bytes, params: SchemeParams
) -> ShareObject:
    """Decode share bytes as the type `server_index` holds under `scheme`."""
    if scheme.two_server:
        if server_index not in (1, 2):
            raise MalformedShareError(f"two-server schemes have no server {server_index}")
        if scheme is SchemeTag.TWO_SERVER:
            return (Share1 if server_index == 1 else Share2).from_bytes(data, params)
        return (VShare1 if server_index == 1 else VShare2).from_bytes(data, params)

    row = ShareMatrixRow.from_bytes(data, params)
    if row.verifiable != scheme.verifiable:
        raise MalformedShareError(f"row type does not match scheme {scheme.value}")
    if row.owner != server_index:
        raise MalformedShareError(f"row belongs to server {row.owner}, not {server_index}")
    return row
