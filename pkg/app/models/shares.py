"""
DCLED - Share Types
Per-server ciphertext payloads, MAC tag polynomials and their byte encodings.

Encodings are fixed-width field elements behind a one-byte type tag, so every
fresh share and every evaluated result has a size that depends on lambda only.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from enum import IntEnum

from app.core.exceptions import MalformedShareError, ParameterError
from app.core.field import FieldElement, SchemeParams, fe_decode


class ShareType(IntEnum):
    """Leading byte of every serialized share."""

    SHARE1 = 0x01
    SHARE2 = 0x02
    VSHARE1 = 0x11
    VSHARE2 = 0x12
    DS_ROW = 0x21
    DV_ROW = 0x22


def _read_elements(data: bytes, offset: int, count: int, params: SchemeParams) -> list[int]:
    width = params.byte_length
    end = offset + count * width
    if len(data) < end:
        raise MalformedShareError(f"need {end} bytes, got {len(data)}")
    try:
        return [
            fe_decode(data[offset + k * width : offset + (k + 1) * width], params).value
            for k in range(count)
        ]
    except ValueError as exc:
        raise MalformedShareError(str(exc)) from exc


def _expect(data: bytes, share_type: ShareType, size: int) -> None:
    if not data or data[0] != share_type:
        raise MalformedShareError(f"expected share type {share_type.name}")
    if len(data) != size:
        raise MalformedShareError(f"{share_type.name} must be {size} bytes, got {len(data)}")


def _pack(p: int, width: int, values: Sequence[int]) -> bytes:
    return b"".join((v % p).to_bytes(width, "big") for v in values)


# =============================================================================
# Two-server shares
# =============================================================================


@dataclass(frozen=True, slots=True)
class Share1:
    """First server's share: (m - a, a - b)."""

    u: FieldElement
    v: FieldElement

    def to_bytes(self) -> bytes:
        return bytes([ShareType.SHARE1]) + self.u.to_bytes() + self.v.to_bytes()

    @classmethod
    def from_bytes(cls, data: bytes, params: SchemeParams) -> Share1:
        _expect(data, ShareType.SHARE1, 1 + 2 * params.byte_length)
        u, v = _read_elements(data, 1, 2, params)
        return cls(FieldElement(u, params.p), FieldElement(v, params.p))


@dataclass(frozen=True, slots=True)
class Share2:
    """Second server's share: (m - b, a)."""

    w: FieldElement
    a: FieldElement

    def to_bytes(self) -> bytes:
        return bytes([ShareType.SHARE2]) + self.w.to_bytes() + self.a.to_bytes()

    @classmethod
    def from_bytes(cls, data: bytes, params: SchemeParams) -> Share2:
        _expect(data, ShareType.SHARE2, 1 + 2 * params.byte_length)
        w, a = _read_elements(data, 1, 2, params)
        return cls(FieldElement(w, params.p), FieldElement(a, params.p))


# =============================================================================
# Tag polynomials
# =============================================================================


@dataclass(frozen=True, slots=True)
class TagPolynomial:
    """Polynomial over Z_p, constant coefficient first.

    The declared length is kept as-is (a linear result embedded in degree 2
    keeps its zero top coefficient) so encodings have a fixed size.
    """

    coefficients: tuple[int, ...]
    p: int

    def __post_init__(self) -> None:
        if not self.coefficients:
            raise ParameterError("tag polynomial needs at least one coefficient")
        for c in self.coefficients:
            if not 0 <= c < self.p:
                raise ParameterError("tag coefficients must be reduced mod p")

    @classmethod
    def of(cls, coefficients: Sequence[int | FieldElement], p: int) -> TagPolynomial:
        return cls(tuple(int(c) % p for c in coefficients), p)

    @classmethod
    def zero(cls, degree: int, p: int) -> TagPolynomial:
        return cls((0,) * (degree + 1), p)

    @classmethod
    def constant(cls, value: int | FieldElement, p: int) -> TagPolynomial:
        return cls((int(value) % p,), p)

    @property
    def degree(self) -> int:
        """Declared degree (length - 1), the value carried on the wire."""
        return len(self.coefficients) - 1

    @property
    def coeffs(self) -> tuple[FieldElement, ...]:
        return tuple(FieldElement(c, self.p) for c in self.coefficients)

    def evaluate(self, x: int | FieldElement) -> FieldElement:
        """Horner evaluation; evaluate(0) is the payload."""
        point = int(x) % self.p
        acc = 0
        for c in reversed(self.coefficients):
            acc = (acc * point + c) % self.p
        return FieldElement(acc, self.p)

    def payload(self) -> FieldElement:
        return FieldElement(self.coefficients[0], self.p)

    def _other(self, other: TagPolynomial | FieldElement | int) -> tuple[int, ...]:
        if isinstance(other, TagPolynomial):
            if other.p != self.p:
                raise ParameterError(f"mismatched moduli {self.p} and {other.p}")
            return other.coefficients
        return (int(other) % self.p,)

    def __add__(self, other: TagPolynomial | FieldElement | int) -> TagPolynomial:
        a, b = self.coefficients, self._other(other)
        size = max(len(a), len(b))
        return TagPolynomial(
            tuple(
                ((a[k] if k < len(a) else 0) + (b[k] if k < len(b) else 0)) % self.p
                for k in range(size)
            ),
            self.p,
        )

    __radd__ = __add__

    def __neg__(self) -> TagPolynomial:
        return TagPolynomial(tuple(-c % self.p for c in self.coefficients), self.p)

    def __sub__(self, other: TagPolynomial | FieldElement | int) -> TagPolynomial:
        if isinstance(other, TagPolynomial):
            return self + (-other)
        return self + (-int(other) % self.p)

    def __mul__(self, other: TagPolynomial | FieldElement | int) -> TagPolynomial:
        a, b = self.coefficients, self._other(other)
        out = [0] * (len(a) + len(b) - 1)
        for i, ca in enumerate(a):
            if ca:
                for j, cb in enumerate(b):
                    out[i + j] += ca * cb
        return TagPolynomial(tuple(c % self.p for c in out), self.p)

    __rmul__ = __mul__

    def padded(self, degree: int) -> TagPolynomial:
        """Same polynomial with declared degree raised to `degree`."""
        if degree < self.degree:
            raise ParameterError("cannot lower the declared degree")
        return TagPolynomial(self.coefficients + (0,) * (degree - self.degree), self.p)

    def to_bytes(self) -> bytes:
        width = (self.p.bit_length() + 7) // 8
        return bytes([self.degree]) + _pack(self.p, width, self.coefficients)

    @classmethod
    def from_bytes(cls, data: bytes, params: SchemeParams) -> TagPolynomial:
        tag, rest = cls.read(data, 0, params)
        if rest != len(data):
            raise MalformedShareError("trailing bytes after tag polynomial")
        return tag

    @classmethod
    def read(cls, data: bytes, offset: int, params: SchemeParams) -> tuple[TagPolynomial, int]:
        """Parse one tag at offset; returns it and the offset after it."""
        if len(data) <= offset:
            raise MalformedShareError("missing tag degree byte")
        count = data[offset] + 1
        coeffs = _read_elements(data, offset + 1, count, params)
        return cls(tuple(coeffs), params.p), offset + 1 + count * params.byte_length


@dataclass(frozen=True, slots=True)
class VShare1:
    """Verifiable first-server share: tags over (m - a) and (a - b), point s1."""

    y1: TagPolynomial
    y2: TagPolynomial

    def to_bytes(self) -> bytes:
        return bytes([ShareType.VSHARE1]) + self.y1.to_bytes() + self.y2.to_bytes()

    @classmethod
    def from_bytes(cls, data: bytes, params: SchemeParams) -> VShare1:
        first, second = _read_tag_pair(data, ShareType.VSHARE1, params)
        return cls(first, second)


@dataclass(frozen=True, slots=True)
class VShare2:
    """Verifiable second-server share: tags over (m - b) and a, point s2."""

    y3: TagPolynomial
    y4: TagPolynomial

    def to_bytes(self) -> bytes:
        return bytes([ShareType.VSHARE2]) + self.y3.to_bytes() + self.y4.to_bytes()

    @classmethod
    def from_bytes(cls, data: bytes, params: SchemeParams) -> VShare2:
        first, second = _read_tag_pair(data, ShareType.VSHARE2, params)
        return cls(first, second)


def _read_tag_pair(
    data: bytes, share_type: ShareType, params: SchemeParams
) -> tuple[TagPolynomial, TagPolynomial]:
    if not data or data[0] != share_type:
        raise MalformedShareError(f"expected share type {share_type.name}")
    first, offset = TagPolynomial.read(data, 1, params)
    second, offset = TagPolynomial.read(data, offset, params)
    if offset != len(data):
        raise MalformedShareError("trailing bytes after share")
    if first.degree != 1 or second.degree != 1:
        raise MalformedShareError("fresh tags must have degree 1")
    return first, second


# =============================================================================
# d-server share matrix
# =============================================================================


@dataclass(frozen=True, slots=True)
class ShareMatrixRow:
    """Server `owner`'s view of one data item.

    entries[k] = a_{i,k+1} for columns other than the owner's, and
    m_i - a_{i,owner} at the owner's column. slopes is set for the verifiable
    variant: entry k's tag is entries[k] + slopes[k] * x.
    """

    owner: int
    entries: tuple[FieldElement, ...]
    slopes: tuple[FieldElement, ...] | None = None

    def __post_init__(self) -> None:
        if not 1 <= self.owner <= len(self.entries):
            raise ParameterError(f"owner {self.owner} outside [1, {len(self.entries)}]")
        if self.slopes is not None and len(self.slopes) != len(self.entries):
            raise ParameterError("one slope per entry required")

    @property
    def width(self) -> int:
        return len(self.entries)

    @property
    def verifiable(self) -> bool:
        return self.slopes is not None

    @property
    def masked(self) -> FieldElement:
        """m_i - a_{i,owner}."""
        return self.entries[self.owner - 1]

    def tags(self) -> tuple[TagPolynomial, ...]:
        if self.slopes is None:
            raise ParameterError("row carries no tags")
        return tuple(
            TagPolynomial((e.value, s.value), e.p)
            for e, s in zip(self.entries, self.slopes, strict=True)
        )

    def to_bytes(self) -> bytes:
        share_type = ShareType.DV_ROW if self.verifiable else ShareType.DS_ROW
        body = b"".join(e.to_bytes() for e in self.entries)
        if self.slopes is not None:
            body += b"".join(s.to_bytes() for s in self.slopes)
        return bytes([share_type, self.owner, self.width]) + body

    @classmethod
    def from_bytes(cls, data: bytes, params: SchemeParams) -> ShareMatrixRow:
        if len(data) < 3 or data[0] not in (ShareType.DS_ROW, ShareType.DV_ROW):
            raise MalformedShareError("expected a share-matrix row")
        verifiable = data[0] == ShareType.DV_ROW
        owner, width = data[1], data[2]
        count = width * (2 if verifiable else 1)
        if len(data) != 3 + count * params.byte_length:
            raise MalformedShareError("share-matrix row has the wrong length")
        values = _read_elements(data, 3, count, params)
        p = params.p
        entries = tuple(FieldElement(v, p) for v in values[:width])
        slopes = tuple(FieldElement(v, p) for v in values[width:]) if verifiable else None
        try:
            return cls(owner, entries, slopes)
        except ParameterError as exc:
            raise MalformedShareError(str(exc)) from exc


@dataclass(frozen=True, slots=True)
class ShareMatrix:
    """Server `owner`'s d x d table for one monomial (rows in label order).

    Never serialized as a whole: rows are stored and sent one label at a time.
    """

    owner: int
    rows: tuple[ShareMatrixRow, ...]

    def __post_init__(self) -> None:
        d = len(self.rows)
        for row in self.rows:
            if row.width != d or row.owner != self.owner:
                raise ParameterError("rows must be d wide and owned by the matrix owner")

    @property
    def d(self) -> int:
        return len(self.rows)

    @property
    def verifiable(self) -> bool:
        return all(row.verifiable for row in self.rows)


def encode_result(result: FieldElement | TagPolynomial) -> bytes:
    """Evaluated ciphertext bytes: one element, or a tag with its degree byte."""
    return result.to_bytes()
