"""
DCLED - Pseudorandom Function
AES-128-CMAC keyed derivation of field elements from labels.

The MAC input is len(label) as 4-byte big-endian || label || index byte, so
(label, index) -> input is injective across labels of different lengths. The
128-bit tag is reduced mod p; for p = 2^128 - 159 the bias is below 2^-120.
"""

from __future__ import annotations

import secrets
from dataclasses import dataclass

from cryptography.hazmat.primitives import cmac
from cryptography.hazmat.primitives.ciphers import algorithms

from app.core.exceptions import ParameterError
from app.core.field import FieldElement, SchemeParams


SEED_BYTES = 16
# Index bytes used by the two-server schemes (a, b under K / K1; r1..r4 under K2).
TWO_SERVER_INDICES = range(4)
MAX_INDEX = 255


@dataclass(frozen=True, slots=True)
class PrfKey:
    """128-bit PRF seed."""

    seed: bytes

    def __post_init__(self) -> None:
        if len(self.seed) != SEED_BYTES:
            raise ParameterError(f"PRF seed must be {SEED_BYTES} bytes, got {len(self.seed)}")

    @classmethod
    def generate(cls) -> PrfKey:
        return cls(secrets.token_bytes(SEED_BYTES))

    def __repr__(self) -> str:
        return "PrfKey(<redacted>)"


@dataclass(frozen=True, slots=True)
class Label:
    """Opaque, non-empty identifier of one data item."""

    data: bytes

    def __post_init__(self) -> None:
        if not self.data:
            raise ParameterError("label must be non-empty")

    @classmethod
    def of(cls, value: str | bytes | Label) -> Label:
        if isinstance(value, Label):
            return value
        if isinstance(value, str):
            return cls(value.encode("utf-8"))
        return cls(bytes(value))

    def text(self) -> str:
        """UTF-8 rendering used on the wire."""
        return self.data.decode("utf-8")

    def __str__(self) -> str:
        return self.data.decode("utf-8", errors="backslashreplace")


def prf_input(label: Label, index: int) -> bytes:
    """Injective MAC input for (label, index)."""
    if not 0 <= index <= MAX_INDEX:
        raise ParameterError(f"PRF index {index} outside [0, {MAX_INDEX}]")
    return len(label.data).to_bytes(4, "big") + label.data + bytes([index])


def cmac_to_field(seed: bytes, message: bytes, params: SchemeParams) -> FieldElement:
    """AES-128-CMAC(seed, message) as a big-endian integer, reduced mod p."""
    mac = cmac.CMAC(algorithms.AES(seed))
    mac.update(message)
    return params.element(int.from_bytes(mac.finalize(), "big"))


def prf_eval(
    key: PrfKey,
    label: Label,
    index: int,
    params: SchemeParams,
    index_limit: int = len(TWO_SERVER_INDICES),
) -> FieldElement:
    """F_K(label || index) as an element of Z_p.

    index_limit bounds the declared index range: 4 for the two-server schemes,
    d or d*d for the d-server scheme.
    """
    if not 0 <= index < index_limit:
        raise ParameterError(f"PRF index {index} outside [0, {index_limit})")
    return cmac_to_field(key.seed, prf_input(label, index), params)


def derive_masks_2s(
    key: PrfKey, label: Label, params: SchemeParams
) -> tuple[FieldElement, FieldElement]:
    """(a, b) = (F_K(label || 0), F_K(label || 1))."""
    return prf_eval(key, label, 0, params), prf_eval(key, label, 1, params)


def derive_tag_targets(
    key: PrfKey, label: Label, params: SchemeParams
) -> tuple[FieldElement, FieldElement, FieldElement, FieldElement]:
    """(r1, r2, r3, r4) = F_K2(label || 0..3)."""
    r1, r2, r3, r4 = (prf_eval(key, label, j, params) for j in TWO_SERVER_INDICES)
    return r1, r2, r3, r4
