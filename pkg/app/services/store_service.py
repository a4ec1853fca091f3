"""
DCLED - Share Store
Append-only share log with an in-memory index, one file per daemon.

File layout:

    header   b"DCLEDLOG" || version (1 byte)
    record   length (4 bytes BE) || CRC32 of body (4 bytes BE) || JSON body

On open the log is replayed; the first short or CRC-failing record marks a
torn tail, which is truncated so the store holds a prefix of acknowledged
records.
"""

from __future__ import annotations

import logging
import os
import zlib
from collections.abc import Iterable
from pathlib import Path
from typing import BinaryIO

from pydantic import ValidationError

from app.core.exceptions import DuplicateLabelError, MissingLabelError, StorageError
from app.core.field import SchemeParams
from app.models.store_record import SchemeTag, ShareObject, StoreRecord

logger = logging.getLogger(__name__)


LOG_MAGIC = b"DCLEDLOG"
LOG_VERSION = 1
HEADER = LOG_MAGIC + bytes([LOG_VERSION])
FRAME_PREFIX = 8


def encode_frame(body: bytes) -> bytes:
    return len(body).to_bytes(4, "big") + zlib.crc32(body).to_bytes(4, "big") + body


class ShareStore:
    """Durable (scheme, label) -> share map for one server role."""

    def __init__(
        self,
        path: Path,
        server_index: int,
        params: SchemeParams,
        fsync: bool = True,
    ) -> None:
        self.path = Path(path)
        self.server_index = server_index
        self.params = params
        self.fsync = fsync
        self._index: dict[tuple[SchemeTag, str], StoreRecord] = {}
        self._parsed: dict[tuple[SchemeTag, str], ShareObject] = {}
        self._file: BinaryIO | None = None

    # -------------------------------------------------------------------------
    # Lifecycle
    # -------------------------------------------------------------------------

    def open(self) -> ShareStore:
        """Create or replay the log; truncates a torn tail."""
        try:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            if not self.path.exists() or self.path.stat().st_size == 0:
                with open(self.path, "wb") as fh:
                    fh.write(HEADER)
                    self._sync(fh)
            good_end = self._replay()
            self._file = open(self.path, "r+b")
            self._file.seek(0, os.SEEK_END)
            if self._file.tell() != good_end:
                logger.warning(
                    f"Truncating torn tail of {self.path}: {self._file.tell() - good_end} bytes"
                )
                self._file.truncate(good_end)
                self._file.seek(good_end)
                self._sync(self._file)
        except OSError as exc:
            raise StorageError(f"cannot open {self.path}: {exc}") from exc
        logger.info(f"Share store {self.path} opened with {len(self._index)} records")
        return self

    def close(self) -> None:
        if self._file is not None:
            self._file.close()
            self._file = None

    def __enter__(self) -> ShareStore:
        return self.open()

    def __exit__(self, *exc: object) -> None:
        self.close()

    def _sync(self, fh: BinaryIO) -> None:
        fh.flush()
        if self.fsync:
            os.fsync(fh.fileno())

    def _replay(self) -> int:
        """Load every intact record; return the offset after the last one."""
        data = self.path.read_bytes()
        if not data.startswith(LOG_MAGIC) or len(data) < len(HEADER):
            raise StorageError(f"{self.path} is not a share log")
        if data[len(LOG_MAGIC)] != LOG_VERSION:
            raise StorageError(f"unsupported log version {data[len(LOG_MAGIC)]}")

        offset = len(HEADER)
        while offset + FRAME_PREFIX <= len(data):
            length = int.from_bytes(data[offset : offset + 4], "big")
            crc = int.from_bytes(data[offset + 4 : offset + 8], "big")
            body = data[offset + FRAME_PREFIX : offset + FRAME_PREFIX + length]
            if len(body) != length or zlib.crc32(body) != crc:
                break
            try:
                record = StoreRecord.from_log_body(body)
            except ValidationError:
                break
            self._index[record.key] = record
            offset += FRAME_PREFIX + length
        return offset

    # -------------------------------------------------------------------------
    # Access
    # -------------------------------------------------------------------------

    def __len__(self) -> int:
        return len(self._index)

    def __contains__(self, key: tuple[SchemeTag, str]) -> bool:
        return key in self._index

    def get(self, scheme: SchemeTag, label: str) -> StoreRecord | None:
        return self._index.get((scheme, label))

    def records(self) -> list[StoreRecord]:
        return list(self._index.values())

    def append(self, record: StoreRecord) -> StoreRecord:
        """Validate, persist and index one record.

        Raises:
            DuplicateLabelError: (scheme, label) already stored
            MalformedShareError: share bytes do not parse for this role
            StorageError: the write failed
        """
        if record.key in self._index:
            raise DuplicateLabelError(
                f"label {record.label} already stored for {record.scheme.value}"
            )
        if record.server_index != self.server_index:
            record = record.model_copy(update={"server_index": self.server_index})
        parsed = record.parse(self.params)
        if self._file is None:
            raise StorageError("share store is not open")

        frame = encode_frame(record.to_log_body())
        start = self._file.tell()
        try:
            self._file.write(frame)
            self._sync(self._file)
        except OSError as exc:
            try:
                self._file.truncate(start)
                self._file.seek(start)
            except OSError:
                pass
            raise StorageError(f"write to {self.path} failed: {exc}") from exc

        self._index[record.key] = record
        self._parsed[record.key] = parsed
        logger.debug(f"Stored {record.scheme.value} share for label {record.label}")
        return record

    def resolve(self, scheme: SchemeTag, labels: Iterable[str]) -> list[ShareObject]:
        """Parsed shares for the labels, in order; all or MissingLabelError."""
        labels = list(labels)
        missing = [lb for lb in labels if (scheme, lb) not in self._index]
        if missing:
            raise MissingLabelError(missing)
        shares = []
        for lb in labels:
            key = (scheme, lb)
            parsed = self._parsed.get(key)
            if parsed is None:
                parsed = self._index[key].parse(self.params)
                self._parsed[key] = parsed
            shares.append(parsed)
        return shares
