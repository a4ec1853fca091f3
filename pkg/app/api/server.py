"""
DCLED - Share Daemon
Asyncio stream server holding one role's shares. Every request line gets
exactly one response line.

There is no frame by which a daemon reads, forwards or requests another
server's shares, and the daemon is configured without peer addresses.
"""

from __future__ import annotations

import asyncio
import logging
import traceback

from pydantic import ValidationError

from app.core.exceptions import DelegationError, MalformedShareError, ProtocolError
from app.core.field import SchemeParams
from app.models.store_record import StoreRecord
from app.schemas.wire import (
    MAX_FRAME_BYTES,
    PROTOCOL_VERSION,
    AckFrame,
    EvalFrame,
    ErrorFrame,
    PingFrame,
    PongFrame,
    ResultFrame,
    StoreFrame,
    decode_request,
    encode_frame,
    header_line,
    parse_header,
)
from app.services.eval_service import ServerEvaluator, check_program, encode_payload, program_labels
from app.services.store_service import ShareStore

logger = logging.getLogger(__name__)


class ShareDaemon:
    """One server role: a share store plus the evaluation routine for that role."""

    def __init__(
        self,
        store: ShareStore,
        params: SchemeParams,
        server_index: int,
        protocol_version: int = PROTOCOL_VERSION,
    ) -> None:
        self.store = store
        self.params = params
        self.server_index = server_index
        self.protocol_version = protocol_version
        self.evaluator = ServerEvaluator(params, server_index)
        self._write_lock = asyncio.Lock()
        self._server: asyncio.Server | None = None

    # -------------------------------------------------------------------------
    # Lifecycle
    # -------------------------------------------------------------------------

    async def start(self, host: str, port: int) -> tuple[str, int]:
        """Bind and listen; returns the bound address (port 0 picks a free one)."""
        self._server = await asyncio.start_server(
            self.handle_connection, host, port, limit=MAX_FRAME_BYTES
        )
        bound = self._server.sockets[0].getsockname()
        logger.info(f"Server {self.server_index} listening on {bound[0]}:{bound[1]}")
        return bound[0], bound[1]

    async def serve_forever(self) -> None:
        if self._server is None:
            raise RuntimeError("daemon not started")
        async with self._server:
            await self._server.serve_forever()

    async def stop(self) -> None:
        if self._server is not None:
            self._server.close()
            await self._server.wait_closed()
            self._server = None
        self.store.close()
        logger.info(f"Server {self.server_index} stopped")

    # -------------------------------------------------------------------------
    # Connections
    # -------------------------------------------------------------------------

    async def handle_connection(
        self, reader: asyncio.StreamReader, writer: asyncio.StreamWriter
    ) -> None:
        peer = writer.get_extra_info("peername")
        try:
            line = await reader.readline()
            if not line:
                return
            try:
                version = parse_header(line)
            except ProtocolError as exc:
                writer.write(encode_frame(ErrorFrame(code=exc.code, detail=exc.detail)))
                await writer.drain()
                return

            writer.write(header_line(self.protocol_version))
            if version != self.protocol_version:
                detail = f"unsupported protocol version {version}"
                logger.warning(f"Closing {peer}: {detail}")
                writer.write(encode_frame(ErrorFrame(code=ProtocolError.code, detail=detail)))
                await writer.drain()
                return
            await writer.drain()

            while True:
                try:
                    line = await reader.readline()
                except ValueError:
                    writer.write(
                        encode_frame(ErrorFrame(code=ProtocolError.code, detail="frame too large"))
                    )
                    await writer.drain()
                    return
                if not line:
                    break
                response = await self.dispatch(line)
                writer.write(encode_frame(response))
                await writer.drain()
        except (ConnectionError, asyncio.IncompleteReadError) as exc:
            logger.debug(f"Connection {peer} dropped: {exc}")
        finally:
            writer.close()
            try:
                await writer.wait_closed()
            except (ConnectionError, OSError):
                pass

    async def dispatch(self, line: bytes) -> AckFrame | ResultFrame | ErrorFrame | PongFrame:
        """Answer one request frame; failures become ERROR frames."""
        try:
            request = decode_request(line)
            if isinstance(request, PingFrame):
                return PongFrame(server_index=self.server_index, records=len(self.store))
            if isinstance(request, StoreFrame):
                return await self._store(request)
            return await self._eval(request)
        except DelegationError as exc:
            logger.warning(f"ERROR {exc.code}: {exc.detail}")
            return ErrorFrame(code=exc.code, detail=exc.detail)
        except Exception as exc:
            logger.error(f"Unhandled exception: {type(exc).__name__}: {exc}")
            logger.error(traceback.format_exc())
            return ErrorFrame(code=DelegationError.code, detail=str(exc))

    async def _store(self, frame: StoreFrame) -> AckFrame:
        try:
            share = bytes.fromhex(frame.share)
        except ValueError as exc:
            raise MalformedShareError(f"share is not whole bytes of hex: {exc}") from exc
        try:
            record = StoreRecord(
                label=frame.label,
                scheme=frame.scheme,
                server_index=self.server_index,
                share=share,
            )
        except ValidationError as exc:
            raise ProtocolError(f"invalid record: {exc.errors()[0]['msg']}") from exc

        async with self._write_lock:
            await asyncio.to_thread(self.store.append, record)
        return AckFrame(label=frame.label, scheme=frame.scheme)

    async def _eval(self, frame: EvalFrame) -> ResultFrame:
        prog = frame.program.to_program(self.params)
        check_program(frame.scheme, prog)
        # Resolved on the loop: sees the index either before or after any STORE.
        shares = self.store.resolve(frame.scheme, program_labels(prog))
        result = await asyncio.to_thread(self.evaluator.evaluate, frame.scheme, prog, shares)
        return ResultFrame(payload=encode_payload(result))
