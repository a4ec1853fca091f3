"""
DCLED - Key Store
Secret-key generation and key-file persistence.

Key files are JSON, written atomically (temp file + rename) with mode 0600:

    {"scheme": "2V", "security_lambda": 128, "modulus": "ffff…61",
     "seeds": ["<K1 hex>", "<K2 hex>"], "points": ["<s1 hex>", "<s2 hex>"]}
"""

import os
import secrets
import tempfile
from datetime import datetime, timezone
from pathlib import Path

from pydantic import Field, ValidationError

from app.core.exceptions import DecodeError, ParameterError, StorageError
from app.core.field import SchemeParams, fe_from_hex
from app.core.prf import SEED_BYTES, PrfKey
from app.models.store_record import SchemeTag
from app.schemas.common import BaseSchema, HexString
from app.services.scheme2s_service import SecretKey2S, TwoServerScheme
from app.services.scheme2v_service import SecretKey2V, VerifiableTwoServerScheme
from app.services.schemeds_service import MultiServerKeyV, MultiServerScheme

SecretKey = SecretKey2S | SecretKey2V | PrfKey | MultiServerKeyV

KEY_FILE_MODE = 0o600


class KeyFile(BaseSchema):
    """On-disk form of a secret key."""

    scheme: SchemeTag
    security_lambda: int = Field(ge=2)
    modulus: HexString
    seeds: list[HexString] = Field(min_length=1, max_length=2)
    points: list[HexString] = Field(default_factory=list)
    created_at: datetime = Field(default_factory=lambda: datetime.now(timezone.utc))


# =============================================================================
# Generation
# =============================================================================


def generate_seed() -> bytes:
    """Uniformly random PRF seed."""
    return secrets.token_bytes(SEED_BYTES)


def generate_key(scheme: SchemeTag, params: SchemeParams, d: int | None = None) -> SecretKey:
    """
    Fresh key for a scheme.

    Args:
        scheme: Scheme the key is for
        params: Field parameters
        d: Number of servers, required for DV

    Returns:
        The scheme's secret key
    """
    if scheme is SchemeTag.TWO_SERVER:
        return TwoServerScheme(params).keygen()[0]
    if scheme is SchemeTag.TWO_SERVER_VERIFIABLE:
        return VerifiableTwoServerScheme(params).keygen()[0]
    if scheme is SchemeTag.MULTI_SERVER:
        return MultiServerScheme(params).keygen()[0]
    if d is None:
        raise ParameterError("verifiable d-server keys need the number of servers")
    return MultiServerScheme(params).vkeygen(d)[0]


# =============================================================================
# Persistence
# =============================================================================


def key_to_file(key: SecretKey, params: SchemeParams) -> KeyFile:
    modulus = format(params.p, "x")
    if isinstance(key, SecretKey2S):
        return KeyFile(
            scheme=SchemeTag.TWO_SERVER,
            security_lambda=params.security_lambda,
            modulus=modulus,
            seeds=[key.k.seed.hex()],
        )
    if isinstance(key, PrfKey):
        return KeyFile(
            scheme=SchemeTag.MULTI_SERVER,
            security_lambda=params.security_lambda,
            modulus=modulus,
            seeds=[key.seed.hex()],
        )
    if isinstance(key, SecretKey2V):
        scheme, points = SchemeTag.TWO_SERVER_VERIFIABLE, (key.s1, key.s2)
    else:
        scheme, points = SchemeTag.MULTI_SERVER_VERIFIABLE, key.points
    seeds = (key.k1, key.k2)
    return KeyFile(
        scheme=scheme,
        security_lambda=params.security_lambda,
        modulus=modulus,
        seeds=[k.seed.hex() for k in seeds],
        points=[s.to_hex() for s in points],
    )


def key_from_file(doc: KeyFile) -> tuple[SecretKey, SchemeParams]:
    try:
        params = SchemeParams.create(int(doc.modulus, 16), doc.security_lambda)
        seeds = [PrfKey(bytes.fromhex(s)) for s in doc.seeds]
    except ValueError as exc:
        raise DecodeError(f"malformed key file: {exc}") from exc
    points = tuple(fe_from_hex(s, params) for s in doc.points)

    if doc.scheme in (SchemeTag.TWO_SERVER, SchemeTag.MULTI_SERVER):
        if len(seeds) != 1 or points:
            raise ParameterError(f"{doc.scheme.value} keys hold exactly one seed")
        key: SecretKey = SecretKey2S(seeds[0]) if doc.scheme is SchemeTag.TWO_SERVER else seeds[0]
        return key, params
    if len(seeds) != 2:
        raise ParameterError(f"{doc.scheme.value} keys hold two seeds")
    if doc.scheme is SchemeTag.TWO_SERVER_VERIFIABLE:
        if len(points) != 2:
            raise ParameterError("2V keys hold two verification points")
        return SecretKey2V(seeds[0], seeds[1], points[0], points[1]), params
    if len(points) < 2:
        raise ParameterError("DV keys hold one verification point per server")
    return MultiServerKeyV(seeds[0], seeds[1], points), params


def save_key_file(path: Path, key: SecretKey, params: SchemeParams) -> None:
    """Write the key file atomically with owner-only permissions."""
    path = Path(path)
    body = key_to_file(key, params).model_dump_json(indent=2)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
        try:
            os.fchmod(fd, KEY_FILE_MODE)
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                fh.write(body)
                fh.flush()
                os.fsync(fh.fileno())
            os.replace(tmp, path)
        except BaseException:
            Path(tmp).unlink(missing_ok=True)
            raise
    except OSError as exc:
        raise StorageError(f"cannot write key file {path}: {exc}") from exc


def load_key_file(path: Path) -> tuple[SchemeTag, SecretKey, SchemeParams]:
    """Read a key file; returns its scheme, key and field parameters."""
    try:
        raw = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise StorageError(f"cannot read key file {path}: {exc}") from exc
    try:
        doc = KeyFile.model_validate_json(raw)
    except ValidationError as exc:
        raise DecodeError(f"malformed key file {path}: {exc.errors()[0]['msg']}") from exc
    key, params = key_from_file(doc)
    return doc.scheme, key, params
