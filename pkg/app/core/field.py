"""
DCLED - Prime Field Arithmetic
Exact arithmetic in Z_p with fixed-width big-endian serialization.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from functools import lru_cache

from sympy import isprime, prevprime

from app.core.exceptions import DecodeError, FieldDivisionError, ParameterError


DEFAULT_LAMBDA = 128
# Largest prime below 2^128.
DEFAULT_PRIME = 2**128 - 159


@dataclass(frozen=True, slots=True)
class SchemeParams:
    """Prime modulus p and security parameter lambda = bit-length(p)."""

    p: int
    security_lambda: int

    def __post_init__(self) -> None:
        if self.p.bit_length() != self.security_lambda:
            raise ParameterError(
                f"modulus has {self.p.bit_length()} bits, expected {self.security_lambda}"
            )
        if not isprime(self.p):
            raise ParameterError(f"modulus {self.p} is not prime")

    @classmethod
    def create(cls, p: int, security_lambda: int | None = None) -> SchemeParams:
        """Build params for an explicit modulus (lambda defaults to its bit-length)."""
        return _cached_params(p, security_lambda or p.bit_length())

    @classmethod
    def for_lambda(cls, security_lambda: int = DEFAULT_LAMBDA) -> SchemeParams:
        """Default modulus for lambda: 2^128 - 159, otherwise the largest prime below 2^lambda."""
        if security_lambda == DEFAULT_LAMBDA:
            return _cached_params(DEFAULT_PRIME, DEFAULT_LAMBDA)
        if security_lambda < 2:
            raise ParameterError("security_lambda must be at least 2")
        return _cached_params(int(prevprime(1 << security_lambda)), security_lambda)

    @property
    def byte_length(self) -> int:
        return (self.security_lambda + 7) // 8

    @property
    def hex_length(self) -> int:
        return 2 * self.byte_length

    def element(self, value: int) -> FieldElement:
        """Reduce an arbitrary integer into Z_p."""
        return FieldElement(value % self.p, self.p)

    def zero(self) -> FieldElement:
        return FieldElement(0, self.p)

    def one(self) -> FieldElement:
        return FieldElement(1, self.p)

    def random_element(self, rng: random.Random) -> FieldElement:
        return FieldElement(rng.randrange(self.p), self.p)

    def random_nonzero(self, rng: random.Random) -> FieldElement:
        return FieldElement(rng.randrange(1, self.p), self.p)


@lru_cache(maxsize=64)
def _cached_params(p: int, security_lambda: int) -> SchemeParams:
    return SchemeParams(p, security_lambda)


@dataclass(frozen=True, slots=True)
class FieldElement:
    """Canonical representative of Z_p: 0 <= value < p."""

    value: int
    p: int

    def __post_init__(self) -> None:
        if not 0 <= self.value < self.p:
            raise ParameterError(f"value {self.value} is not reduced mod {self.p}")

    def _coerce(self, other: FieldElement | int) -> int:
        if isinstance(other, FieldElement):
            if other.p != self.p:
                raise ParameterError(f"mismatched moduli {self.p} and {other.p}")
            return other.value
        if isinstance(other, int):
            return other % self.p
        raise TypeError(f"expected FieldElement or int, got {type(other).__name__}")

    def __add__(self, other: FieldElement | int) -> FieldElement:
        return FieldElement((self.value + self._coerce(other)) % self.p, self.p)

    __radd__ = __add__

    def __sub__(self, other: FieldElement | int) -> FieldElement:
        return FieldElement((self.value - self._coerce(other)) % self.p, self.p)

    def __rsub__(self, other: int) -> FieldElement:
        return FieldElement((self._coerce(other) - self.value) % self.p, self.p)

    def __mul__(self, other: FieldElement | int) -> FieldElement:
        return FieldElement(self.value * self._coerce(other) % self.p, self.p)

    __rmul__ = __mul__

    def __neg__(self) -> FieldElement:
        return FieldElement(-self.value % self.p, self.p)

    def __truediv__(self, other: FieldElement | int) -> FieldElement:
        return self * FieldElement(self._coerce(other), self.p).inverse()

    def __pow__(self, exponent: int) -> FieldElement:
        if exponent < 0:
            return self.inverse() ** (-exponent)
        return FieldElement(pow(self.value, exponent, self.p), self.p)

    def inverse(self) -> FieldElement:
        if self.value == 0:
            raise FieldDivisionError("cannot invert zero")
        return FieldElement(pow(self.value, -1, self.p), self.p)

    def __int__(self) -> int:
        return self.value

    def __bool__(self) -> bool:
        return self.value != 0

    def __repr__(self) -> str:
        return f"FieldElement({self.value} mod {self.p})"

    @property
    def byte_length(self) -> int:
        return (self.p.bit_length() + 7) // 8

    def to_bytes(self) -> bytes:
        return self.value.to_bytes(self.byte_length, "big")

    def to_hex(self) -> str:
        return self.to_bytes().hex()


# =============================================================================
# Functional interface
# =============================================================================


def fe_add(x: FieldElement, y: FieldElement) -> FieldElement:
    """(x + y) mod p."""
    return x + y


def fe_sub(x: FieldElement, y: FieldElement) -> FieldElement:
    """(x - y) mod p."""
    return x - y


def fe_mul(x: FieldElement, y: FieldElement) -> FieldElement:
    """(x * y) mod p."""
    return x * y


def fe_neg(x: FieldElement) -> FieldElement:
    return -x


def fe_inv(x: FieldElement) -> FieldElement:
    """Multiplicative inverse; raises FieldDivisionError for zero."""
    return x.inverse()


def fe_pow(x: FieldElement, exponent: int) -> FieldElement:
    return x**exponent


def fe_encode(x: FieldElement) -> bytes:
    """Big-endian, ceil(lambda/8) bytes."""
    return x.to_bytes()


def fe_decode(data: bytes, params: SchemeParams) -> FieldElement:
    """Inverse of fe_encode; rejects wrong lengths and values >= p."""
    if len(data) != params.byte_length:
        raise DecodeError(f"expected {params.byte_length} bytes, got {len(data)}")
    value = int.from_bytes(data, "big")
    if value >= params.p:
        raise DecodeError("encoded value is not below the modulus")
    return FieldElement(value, params.p)


def fe_to_hex(x: FieldElement) -> str:
    """Lowercase hex, 32 characters for lambda = 128."""
    return x.to_hex()


def fe_from_hex(text: str, params: SchemeParams) -> FieldElement:
    if len(text) != params.hex_length:
        raise DecodeError(f"expected {params.hex_length} hex chars, got {len(text)}")
    try:
        data = bytes.fromhex(text)
    except ValueError as exc:
        raise DecodeError(f"invalid hex: {exc}") from exc
    return fe_decode(data, params)
