"""
DCLED - Wire Schemas
Newline-delimited JSON frames exchanged after the `DCLED/1` header line.

    -> DCLED/1
    <- DCLED/1
    -> {"type":"STORE","label":"alice","scheme":"2S","share":"01…"}
    <- {"type":"ACK","label":"alice","scheme":"2S"}
    -> {"type":"EVAL","scheme":"2S","program":{"kind":"quadratic","labels":["alice"],…}}
    <- {"type":"RESULT","payload":"<32 hex chars per field element>"}
    <- {"type":"ERROR","code":"missing_label","detail":"missing labels: bob"}
"""

from __future__ import annotations

from typing import Annotated, Literal

from pydantic import ConfigDict, Field, TypeAdapter, ValidationError

from app.core.exceptions import DecodeError, ProtocolError
from app.core.field import FieldElement, SchemeParams, fe_from_hex
from app.core.prf import Label
from app.models.program import LinTerm, MonomialProgram, QuadraticProgram, QuadTerm
from app.models.store_record import SchemeTag
from app.schemas.common import BaseSchema, HexString

PROTOCOL_NAME = "DCLED"
PROTOCOL_VERSION = 1
MAX_FRAME_BYTES = 256 * 1024 * 1024


def header_line(version: int = PROTOCOL_VERSION) -> bytes:
    return f"{PROTOCOL_NAME}/{version}\n".encode("ascii")


def parse_header(line: bytes) -> int:
    """Version number from a header line; ProtocolError if it is not one."""
    text = line.decode("ascii", errors="replace").strip()
    name, _, version = text.partition("/")
    if name != PROTOCOL_NAME or not version.isdigit():
        raise ProtocolError(f"bad header line {text!r}")
    return int(version)


# =============================================================================
# Programs
# =============================================================================


class WireSchema(BaseSchema):
    """Labels are opaque: no whitespace stripping on the wire."""

    model_config = ConfigDict(str_strip_whitespace=False)


class QuadTermPayload(WireSchema):
    i: int = Field(ge=1)
    j: int = Field(ge=1)
    alpha: HexString


class LinTermPayload(WireSchema):
    k: int = Field(ge=1)
    beta: HexString


class ProgramPayload(WireSchema):
    """Serialized labeled program; terms sorted by (i, j) then k."""

    kind: Literal["quadratic", "monomial"] = "quadratic"
    labels: list[str] = Field(default_factory=list)
    quad: list[QuadTermPayload] = Field(default_factory=list)
    lin: list[LinTermPayload] = Field(default_factory=list)
    gamma: HexString | None = None

    @classmethod
    def from_program(cls, prog: QuadraticProgram | MonomialProgram) -> ProgramPayload:
        labels = [lb.text() for lb in prog.labels]
        if isinstance(prog, MonomialProgram):
            return cls(kind="monomial", labels=labels)
        assert prog.gamma is not None
        return cls(
            kind="quadratic",
            labels=labels,
            quad=[
                QuadTermPayload(i=t.i, j=t.j, alpha=t.alpha.to_hex())
                for t in sorted(prog.quad_terms, key=lambda t: (t.i, t.j))
            ],
            lin=[
                LinTermPayload(k=t.k, beta=t.beta.to_hex())
                for t in sorted(prog.lin_terms, key=lambda t: t.k)
            ],
            gamma=prog.gamma.to_hex(),
        )

    def to_program(self, params: SchemeParams) -> QuadraticProgram | MonomialProgram:
        labels = tuple(Label.of(lb) for lb in self.labels)
        if self.kind == "monomial":
            if self.quad or self.lin or self.gamma:
                raise DecodeError("monomial programs carry no coefficients")
            return MonomialProgram(labels)

        def element(text: str) -> FieldElement:
            return fe_from_hex(text, params)

        return QuadraticProgram(
            params,
            labels,
            tuple(QuadTerm(t.i, t.j, element(t.alpha)) for t in self.quad),
            tuple(LinTerm(t.k, element(t.beta)) for t in self.lin),
            element(self.gamma) if self.gamma is not None else None,
        )


# =============================================================================
# Frames
# =============================================================================


class StoreFrame(WireSchema):
    type: Literal["STORE"] = "STORE"
    label: str = Field(min_length=1)
    scheme: SchemeTag
    share: HexString


class EvalFrame(WireSchema):
    type: Literal["EVAL"] = "EVAL"
    scheme: SchemeTag
    program: ProgramPayload


class PingFrame(WireSchema):
    type: Literal["PING"] = "PING"


class AckFrame(WireSchema):
    type: Literal["ACK"] = "ACK"
    label: str
    scheme: SchemeTag


class ResultFrame(WireSchema):
    type: Literal["RESULT"] = "RESULT"
    payload: HexString


class ErrorFrame(WireSchema):
    type: Literal["ERROR"] = "ERROR"
    code: str
    detail: str = ""


class PongFrame(WireSchema):
    type: Literal["PONG"] = "PONG"
    server_index: int
    records: int


RequestFrame = Annotated[StoreFrame | EvalFrame | PingFrame, Field(discriminator="type")]
ResponseFrame = Annotated[
    AckFrame | ResultFrame | ErrorFrame | PongFrame, Field(discriminator="type")
]

_request_adapter: TypeAdapter[StoreFrame | EvalFrame | PingFrame] = TypeAdapter(RequestFrame)
_response_adapter: TypeAdapter[AckFrame | ResultFrame | ErrorFrame | PongFrame] = TypeAdapter(
    ResponseFrame
)


def encode_frame(frame: BaseSchema) -> bytes:
    """One JSON object plus the terminating newline."""
    return frame.model_dump_json().encode("utf-8") + b"\n"


def decode_request(line: bytes) -> StoreFrame | EvalFrame | PingFrame:
    try:
        return _request_adapter.validate_json(line)
    except ValidationError as exc:
        raise ProtocolError(f"invalid request frame: {exc.errors()[0]['msg']}") from exc


def decode_response(line: bytes) -> AckFrame | ResultFrame | ErrorFrame | PongFrame:
    try:
        return _response_adapter.validate_json(line)
    except ValidationError as exc:
        raise ProtocolError(f"invalid response frame: {exc.errors()[0]['msg']}") from exc
