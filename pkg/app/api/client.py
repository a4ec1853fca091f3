"""
DCLED - Delegation Client
Uploads label-encrypted shares to the daemons and orchestrates delegated
evaluations: EVAL goes to every server concurrently, all answers are awaited,
then the scheme decrypts or reconstructs locally.

Any transport failure aborts the whole delegation; there is never a partial
answer. Retries happen only when configured explicitly.
"""

from __future__ import annotations

import asyncio
import logging
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Any

from app.core.exceptions import (
    DecodeError,
    ParameterError,
    ProtocolError,
    TransportError,
    error_from_code,
)
from app.core.field import FieldElement, SchemeParams, fe_from_hex
from app.core.prf import Label, PrfKey
from app.models.program import MonomialProgram, QuadraticProgram
from app.models.store_record import SchemeTag
from app.schemas.common import BaseSchema
from app.schemas.wire import (
    MAX_FRAME_BYTES,
    PROTOCOL_VERSION,
    AckFrame,
    ErrorFrame,
    EvalFrame,
    PingFrame,
    PongFrame,
    ProgramPayload,
    ResultFrame,
    StoreFrame,
    decode_response,
    encode_frame,
    header_line,
    parse_header,
)
from app.services.eval_service import decode_tag_payload
from app.services.scheme2s_service import SecretKey2S, TwoServerScheme
from app.services.scheme2v_service import Reject, SecretKey2V, VerifiableTwoServerScheme
from app.services.schemeds_service import MultiServerKeyV, MultiServerScheme

logger = logging.getLogger(__name__)


@dataclass(frozen=True, slots=True)
class Endpoint:
    host: str
    port: int

    @classmethod
    def parse(cls, text: str) -> Endpoint:
        """'host:port' (IPv6 hosts in brackets)."""
        host, sep, port = text.strip().rpartition(":")
        if not sep or not port.isdigit():
            raise ParameterError(f"endpoint {text!r} is not host:port")
        return cls(host.strip("[]") or "127.0.0.1", int(port))

    def __str__(self) -> str:
        return f"{self.host}:{self.port}"


class ServerConnection:
    """One framed connection to one daemon."""

    def __init__(self, endpoint: Endpoint, timeout: float) -> None:
        self.endpoint = endpoint
        self.timeout = timeout
        self._reader: asyncio.StreamReader | None = None
        self._writer: asyncio.StreamWriter | None = None

    async def __aenter__(self) -> ServerConnection:
        await self.open()
        return self

    async def __aexit__(self, *exc: object) -> None:
        await self.close()

    async def open(self) -> None:
        try:
            self._reader, self._writer = await asyncio.wait_for(
                asyncio.open_connection(
                    self.endpoint.host, self.endpoint.port, limit=MAX_FRAME_BYTES
                ),
                self.timeout,
            )
            self._writer.write(header_line())
            await self._writer.drain()
            line = await asyncio.wait_for(self._reader.readline(), self.timeout)
        except (OSError, asyncio.TimeoutError) as exc:
            await self.close()
            raise TransportError(f"cannot reach {self.endpoint}: {exc!r}") from exc
        if not line:
            await self.close()
            raise TransportError(f"{self.endpoint} closed during handshake")
        version = parse_header(line)
        if version != PROTOCOL_VERSION:
            await self.close()
            raise ProtocolError(f"{self.endpoint} speaks protocol version {version}")

    async def close(self) -> None:
        if self._writer is not None:
            self._writer.close()
            try:
                await self._writer.wait_closed()
            except (ConnectionError, OSError):
                pass
            self._writer = None
            self._reader = None

    async def request(self, frame: BaseSchema) -> AckFrame | ResultFrame | PongFrame:
        """Send one frame, await its one response; ERROR frames are raised."""
        if self._reader is None or self._writer is None:
            raise TransportError(f"connection to {self.endpoint} is not open")
        try:
            self._writer.write(encode_frame(frame))
            await self._writer.drain()
            line = await asyncio.wait_for(self._reader.readline(), self.timeout)
        except (OSError, asyncio.TimeoutError, ValueError) as exc:
            raise TransportError(f"request to {self.endpoint} failed: {exc!r}") from exc
        if not line:
            raise TransportError(f"{self.endpoint} closed the connection")
        response = decode_response(line)
        if isinstance(response, ErrorFrame):
            raise error_from_code(response.code, response.detail)
        return response


class DelegationClient:
    """Client side of every scheme over a fixed list of server endpoints."""

    def __init__(
        self,
        endpoints: Sequence[Endpoint],
        params: SchemeParams,
        timeout: float = 30.0,
        retries: int = 0,
    ) -> None:
        if len(endpoints) < 2:
            raise ParameterError("delegation needs at least two servers")
        self.endpoints = list(endpoints)
        self.params = params
        self.timeout = timeout
        self.retries = retries

    # -------------------------------------------------------------------------
    # Fan-out
    # -------------------------------------------------------------------------

    async def _each(self, frames: Sequence[Sequence[BaseSchema]]) -> list[list[Any]]:
        """Send frames[k] over one connection to server k, all servers concurrently."""

        async def run(endpoint: Endpoint, batch: Sequence[BaseSchema]) -> list[Any]:
            async with ServerConnection(endpoint, self.timeout) as conn:
                return [await conn.request(frame) for frame in batch]

        attempt = 0
        while True:
            results = await asyncio.gather(
                *(run(ep, batch) for ep, batch in zip(self.endpoints, frames, strict=True)),
                return_exceptions=True,
            )
            errors = [r for r in results if isinstance(r, BaseException)]
            if not errors:
                return [list(r) for r in results]  # type: ignore[arg-type]
            transport = [e for e in errors if isinstance(e, TransportError)]
            if transport and attempt < self.retries:
                attempt += 1
                logger.warning(f"Retrying after transport failure ({attempt}/{self.retries})")
                continue
            raise transport[0] if transport else errors[0]

    async def ping(self) -> list[PongFrame]:
        answers = await self._each([[PingFrame()] for _ in self.endpoints])
        return [batch[0] for batch in answers]

    async def store(
        self, scheme: SchemeTag, per_server: Sequence[Sequence[tuple[str, bytes]]]
    ) -> int:
        """Upload (label, share bytes) lists, list k going to server k."""
        if len(per_server) != len(self.endpoints):
            raise ParameterError(f"{len(self.endpoints)} servers, {len(per_server)} share lists")
        frames = [
            [StoreFrame(label=label, scheme=scheme, share=share.hex()) for label, share in batch]
            for batch in per_server
        ]
        answers = await self._each(frames)
        return sum(len(batch) for batch in answers)

    async def evaluate(
        self, scheme: SchemeTag, prog: QuadraticProgram | MonomialProgram, servers: int
    ) -> list[str]:
        """RESULT payloads from the first `servers` endpoints, in server order."""
        if servers > len(self.endpoints):
            raise ParameterError(f"{servers} servers needed, {len(self.endpoints)} configured")
        payload = ProgramPayload.from_program(prog)
        frame = EvalFrame(scheme=scheme, program=payload)
        client = self if servers == len(self.endpoints) else self._subset(servers)
        answers = await client._each([[frame] for _ in range(servers)])
        return [batch[0].payload for batch in answers]

    def _subset(self, servers: int) -> DelegationClient:
        return DelegationClient(self.endpoints[:servers], self.params, self.timeout, self.retries)

    # -------------------------------------------------------------------------
    # Uploads
    # -------------------------------------------------------------------------

    async def upload_2s(
        self, sk: SecretKey2S, items: Sequence[tuple[Label, FieldElement]]
    ) -> int:
        shares = TwoServerScheme(self.params).encrypt_dataset(sk, items)
        first = [(tau.text(), s1.to_bytes()) for (tau, _), (s1, _) in zip(items, shares)]
        second = [(tau.text(), s2.to_bytes()) for (tau, _), (_, s2) in zip(items, shares)]
        return await self._subset(2).store(SchemeTag.TWO_SERVER, [first, second])

    async def upload_2v(
        self, sk: SecretKey2V, items: Sequence[tuple[Label, FieldElement]]
    ) -> int:
        scheme = VerifiableTwoServerScheme(self.params)
        first, second = [], []
        for tau, m in items:
            s1, s2 = scheme.encrypt(sk, tau, m)
            first.append((tau.text(), s1.to_bytes()))
            second.append((tau.text(), s2.to_bytes()))
        return await self._subset(2).store(SchemeTag.TWO_SERVER_VERIFIABLE, [first, second])

    async def upload_ds(
        self, sk: PrfKey, items: Sequence[tuple[Label, FieldElement]], d: int
    ) -> int:
        """Per-label rows for a d-server deployment."""
        scheme = MultiServerScheme(self.params)
        per_server: list[list[tuple[str, bytes]]] = [[] for _ in range(d)]
        for tau, m in items:
            for j, row in enumerate(scheme.encrypt_rows(sk, tau, m, d)):
                per_server[j].append((tau.text(), row.to_bytes()))
        return await self._subset(d).store(SchemeTag.MULTI_SERVER, per_server)

    async def upload_dv(
        self, sk: MultiServerKeyV, items: Sequence[tuple[Label, FieldElement]]
    ) -> int:
        scheme = MultiServerScheme(self.params)
        per_server: list[list[tuple[str, bytes]]] = [[] for _ in range(sk.d)]
        for tau, m in items:
            for j, row in enumerate(scheme.vencrypt_rows(sk, tau, m)):
                per_server[j].append((tau.text(), row.to_bytes()))
        return await self._subset(sk.d).store(SchemeTag.MULTI_SERVER_VERIFIABLE, per_server)

    # -------------------------------------------------------------------------
    # Delegation
    # -------------------------------------------------------------------------

    async def delegate_2s(self, sk: SecretKey2S, prog: QuadraticProgram) -> FieldElement:
        c1, c2 = await self.evaluate(SchemeTag.TWO_SERVER, prog, 2)
        return TwoServerScheme(self.params).decrypt(
            sk, prog, fe_from_hex(c1, self.params), fe_from_hex(c2, self.params)
        )

    async def delegate_2v(
        self, sk: SecretKey2V, prog: QuadraticProgram
    ) -> FieldElement | Reject:
        c1, c2 = await self.evaluate(SchemeTag.TWO_SERVER_VERIFIABLE, prog, 2)
        try:
            tags = [decode_tag_payload(c, self.params) for c in (c1, c2)]
        except DecodeError:
            return Reject("malformed_result")
        return VerifiableTwoServerScheme(self.params).decrypt(sk, prog, *tags)

    async def delegate_ds(self, sk: PrfKey, prog: MonomialProgram) -> FieldElement:
        payloads = await self.evaluate(SchemeTag.MULTI_SERVER, prog, prog.degree)
        values = [fe_from_hex(text, self.params) for text in payloads]
        return MultiServerScheme(self.params).reconstruct(sk, prog.labels, values)

    async def delegate_dv(
        self, sk: MultiServerKeyV, prog: MonomialProgram
    ) -> FieldElement | Reject:
        payloads = await self.evaluate(SchemeTag.MULTI_SERVER_VERIFIABLE, prog, prog.degree)
        try:
            tags = [decode_tag_payload(text, self.params) for text in payloads]
        except DecodeError:
            return Reject("malformed_result")
        return MultiServerScheme(self.params).vdecrypt(sk, prog.labels, tags)
