"""
DCLED - d-Server Scheme
Delegation of a degree-d monomial prod m_i to d non-colluding servers.

Server j holds, for every row i, a_{i,k} for k != j and m_i - a_{i,j}. It
returns

    S_j = sum over increasing (j-1)-tuples T of c_j(T) * prod_{i not in T} (m_i - a_{i,j})

where c_1(()) = 1 and c_j(T) cancels every coefficient the monomial
prod_{i not in T} m_i picks up in S_1..S_{j-1}:

    c_j(T) = - sum_{l < j} sum_{T' subset of T, |T'| = l-1} c_l(T') * prod_{k in T \\ T'} (-a_{k,l})

c_j only needs columns 1..j-1, which server j holds. Sum_j S_j is then
prod m_i plus a constant the client recomputes from the PRF.

The cascade is written against +, * and unary - only, so the same code runs
on field elements, tag polynomials and symbolic expressions.
"""

from __future__ import annotations

import logging
import secrets
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from itertools import combinations
from typing import Any, Protocol, TypeVar

from app.core.config import get_settings
from app.core.exceptions import ParameterError
from app.core.field import FieldElement, SchemeParams
from app.core.prf import Label, PrfKey, prf_eval
from app.models.program import MonomialProgram
from app.models.shares import ShareMatrix, ShareMatrixRow, TagPolynomial
from app.services.scheme2v_service import Reject

logger = logging.getLogger(__name__)


class RingElement(Protocol):
    def __add__(self, other: Any) -> Any: ...
    def __mul__(self, other: Any) -> Any: ...
    def __neg__(self) -> Any: ...


R = TypeVar("R", bound=RingElement)

# (key, label, d) -> (a_{i,1}, ..., a_{i,d}).
MaskRowProvider = Callable[[PrfKey, Label, int], tuple[FieldElement, ...]]

# Tag targets use PRF index (j-1)*d + (k-1), one byte.
MAX_VERIFIABLE_SERVERS = 16


# =============================================================================
# Cascade
# =============================================================================


def cascade_coefficients(
    columns: Sequence[Sequence[R]], d: int, j: int, one: R
) -> dict[tuple[int, ...], R]:
    """c_j(T) for every increasing (j-1)-tuple T of 0-based row indices.

    columns[l-1][i] is a_{i,l}; only columns 1..j-1 are read.
    """
    if not 1 <= j <= d:
        raise ParameterError(f"server index {j} outside [1, {d}]")
    levels: list[dict[tuple[int, ...], R]] = [{}, {(): one}]
    for level in range(2, j + 1):
        current: dict[tuple[int, ...], R] = {}
        for subset in combinations(range(d), level - 1):
            total: R | None = None
            for prev in range(1, level):
                column = columns[prev - 1]
                for inner in combinations(subset, prev - 1):
                    term = levels[prev][inner]
                    for k in subset:
                        if k not in inner:
                            term = term * (-column[k])
                    total = term if total is None else total + term
            assert total is not None
            current[subset] = -total
        levels.append(current)
    return levels[j]


def cascade_residual(
    columns: Sequence[Sequence[R]], d: int, j: int, subset: tuple[int, ...], one: R
) -> R:
    """sum_{l<j} c'_l(T) + c_j(T): the coefficient left on prod_{i not in T} m_i."""
    total = cascade_coefficients(columns, d, j, one)[subset]
    for prev in range(1, j):
        coeffs = cascade_coefficients(columns, d, prev, one)
        column = columns[prev - 1]
        for inner in combinations(subset, prev - 1):
            term = coeffs[inner]
            for k in subset:
                if k not in inner:
                    term = term * (-column[k])
            total = total + term
    return total


def compute_share_sum(
    j: int,
    masked: Sequence[R],
    columns: Sequence[Sequence[R]],
    one: R,
) -> R:
    """S_j from server j's view: masked[i] = m_i - a_{i,j}, columns 1..j-1."""
    d = len(masked)
    total: R | None = None
    for subset, coeff in cascade_coefficients(columns, d, j, one).items():
        term = coeff
        for i in range(d):
            if i not in subset:
                term = term * masked[i]
        total = term if total is None else total + term
    assert total is not None
    return total


# =============================================================================
# Keys
# =============================================================================


@dataclass(frozen=True, slots=True)
class MultiServerKeyV:
    """Verifiable d-server key: mask seed, MAC seed, one point per server."""

    k1: PrfKey
    k2: PrfKey
    points: tuple[FieldElement, ...]

    def __post_init__(self) -> None:
        if any(not s for s in self.points):
            raise ParameterError("verification points must be non-zero")

    @property
    def d(self) -> int:
        return len(self.points)

    def __repr__(self) -> str:
        return f"MultiServerKeyV(d={self.d}, <redacted>)"


def _server_view(matrix: ShareMatrix, j: int) -> tuple[list[Any], list[list[Any]]]:
    rows = matrix.rows
    masked = [row.entries[j - 1] for row in rows]
    columns = [[row.entries[col] for row in rows] for col in range(j - 1)]
    return masked, columns


def _tag_view(matrix: ShareMatrix, j: int) -> tuple[list[TagPolynomial], list[list[TagPolynomial]]]:
    tags = [row.tags() for row in matrix.rows]
    masked = [t[j - 1] for t in tags]
    columns = [[t[col] for t in tags] for col in range(j - 1)]
    return masked, columns


class MultiServerScheme:
    """d-server delegation of monomials, plain and verifiable."""

    def __init__(
        self,
        params: SchemeParams | None = None,
        mask_provider: MaskRowProvider | None = None,
        max_servers: int | None = None,
    ) -> None:
        self.params = params or SchemeParams.for_lambda()
        self._masks = mask_provider or self._prf_masks
        self.max_servers = max_servers or get_settings().max_servers
        if not 2 <= self.max_servers <= MAX_VERIFIABLE_SERVERS:
            raise ParameterError(
                f"max_servers must lie in [2, {MAX_VERIFIABLE_SERVERS}], got {self.max_servers}"
            )

    def _prf_masks(self, key: PrfKey, label: Label, d: int) -> tuple[FieldElement, ...]:
        return tuple(prf_eval(key, label, col, self.params, index_limit=d) for col in range(d))

    def _tag_target(self, key: PrfKey, label: Label, j: int, col: int, d: int) -> FieldElement:
        return prf_eval(key, label, (j - 1) * d + (col - 1), self.params, index_limit=d * d)

    def _check_d(self, d: int) -> None:
        if d < 2:
            raise ParameterError("the d-server scheme needs d >= 2")
        if d > self.max_servers:
            raise ParameterError(f"d = {d} exceeds the {self.max_servers}-server limit")

    def _check_labels(self, labels: Sequence[Label]) -> int:
        d = len(labels)
        self._check_d(d)
        if len(set(labels)) != d:
            raise ParameterError("labels must be distinct")
        return d

    # -------------------------------------------------------------------------
    # Keys
    # -------------------------------------------------------------------------

    def keygen(self) -> tuple[PrfKey, SchemeParams]:
        return PrfKey.generate(), self.params

    def vkeygen(self, d: int) -> tuple[MultiServerKeyV, SchemeParams]:
        """Fresh K1, K2 and d points uniform in Z_p*."""
        self._check_d(d)
        p = self.params.p
        points = []
        while len(points) < d:
            s = secrets.randbelow(p)
            if s:
                points.append(FieldElement(s, p))
        return MultiServerKeyV(PrfKey.generate(), PrfKey.generate(), tuple(points)), self.params

    # -------------------------------------------------------------------------
    # Encryption
    # -------------------------------------------------------------------------

    def mask_row(self, sk: PrfKey, label: Label, d: int) -> tuple[FieldElement, ...]:
        """(a_{i,1}, ..., a_{i,d}) with a_{i,j} = F_K(label || j-1)."""
        self._check_d(d)
        return self._masks(sk, label, d)

    def encrypt_rows(
        self, sk: PrfKey, label: Label, m: FieldElement, d: int
    ) -> tuple[ShareMatrixRow, ...]:
        """One row per server j = 1..d for a single data item."""
        if m.p != self.params.p:
            raise ParameterError("message modulus does not match scheme")
        masks = self.mask_row(sk, label, d)
        rows = []
        for j in range(1, d + 1):
            entries = list(masks)
            entries[j - 1] = m - masks[j - 1]
            rows.append(ShareMatrixRow(j, tuple(entries)))
        return tuple(rows)

    def encrypt(
        self, sk: PrfKey, labels: Sequence[Label], m: Sequence[FieldElement]
    ) -> list[ShareMatrix]:
        """ds_encrypt: one d x d share matrix per server."""
        d = self._check_labels(labels)
        if len(m) != d:
            raise ParameterError(f"expected {d} messages, got {len(m)}")
        per_label = [self.encrypt_rows(sk, tau, mi, d) for tau, mi in zip(labels, m, strict=True)]
        return [ShareMatrix(j, tuple(rows[j - 1] for rows in per_label)) for j in range(1, d + 1)]

    # -------------------------------------------------------------------------
    # Server side
    # -------------------------------------------------------------------------

    @staticmethod
    def _check_payload(j: int, payload: ShareMatrix, prog: MonomialProgram) -> None:
        if payload.d != prog.degree:
            raise ParameterError(f"payload is {payload.d} wide, program has degree {prog.degree}")
        if not 1 <= j <= payload.d:
            raise ParameterError(f"server index {j} outside [1, {payload.d}]")
        if payload.owner != j:
            raise ParameterError(f"payload belongs to server {payload.owner}, not {j}")

    def compute_sj(self, j: int, payload: ShareMatrix, prog: MonomialProgram) -> FieldElement:
        """Server j's contribution S_j."""
        self._check_payload(j, payload, prog)
        masked, columns = _server_view(payload, j)
        return compute_share_sum(j, masked, columns, self.params.one())

    # -------------------------------------------------------------------------
    # Client side
    # -------------------------------------------------------------------------

    def offset(self, sk: PrfKey, labels: Sequence[Label]) -> FieldElement:
        """Constant term of sum_j S_j: every S_j evaluated with m_i = 0."""
        d = self._check_labels(labels)
        rows = [self.mask_row(sk, tau, d) for tau in labels]
        one = self.params.one()
        total = self.params.zero()
        for j in range(1, d + 1):
            masked = [-row[j - 1] for row in rows]
            columns = [[row[col] for row in rows] for col in range(j - 1)]
            total = total + compute_share_sum(j, masked, columns, one)
        return total

    def reconstruct(
        self, sk: PrfKey, labels: Sequence[Label], responses: Sequence[FieldElement]
    ) -> FieldElement:
        """prod m_i = sum_j S_j - offset."""
        if len(responses) != len(labels):
            raise ParameterError(f"expected {len(labels)} responses, got {len(responses)}")
        total = self.params.zero()
        for value in responses:
            total = total + value
        return total - self.offset(sk, labels)

    # -------------------------------------------------------------------------
    # Verifiable variant
    # -------------------------------------------------------------------------

    def vencrypt_rows(
        self, sk: MultiServerKeyV, label: Label, m: FieldElement
    ) -> tuple[ShareMatrixRow, ...]:
        """Rows with a degree-1 tag per entry; server j's tags open at s_j."""
        d = sk.d
        plain = self.encrypt_rows(sk.k1, label, m, d)
        rows = []
        for j, row in enumerate(plain, start=1):
            point = sk.points[j - 1]
            slopes = tuple(
                (self._tag_target(sk.k2, label, j, col, d) - entry) / point
                for col, entry in enumerate(row.entries, start=1)
            )
            rows.append(ShareMatrixRow(j, row.entries, slopes))
        return tuple(rows)

    def vencrypt(
        self, sk: MultiServerKeyV, labels: Sequence[Label], m: Sequence[FieldElement]
    ) -> list[ShareMatrix]:
        d = self._check_labels(labels)
        if d != sk.d:
            raise ParameterError(f"key serves {sk.d} servers, got {d} labels")
        if len(m) != d:
            raise ParameterError(f"expected {d} messages, got {len(m)}")
        per_label = [self.vencrypt_rows(sk, tau, mi) for tau, mi in zip(labels, m, strict=True)]
        return [ShareMatrix(j, tuple(rows[j - 1] for rows in per_label)) for j in range(1, d + 1)]

    def veval(self, j: int, payload: ShareMatrix, prog: MonomialProgram) -> TagPolynomial:
        """S_j mirrored on tags; declared degree d."""
        self._check_payload(j, payload, prog)
        if not payload.verifiable:
            raise ParameterError("payload carries no tags")
        masked, columns = _tag_view(payload, j)
        one = TagPolynomial.constant(1, self.params.p)
        result = compute_share_sum(j, masked, columns, one)
        return result.padded(payload.d)

    def expected_tags(self, sk: MultiServerKeyV, labels: Sequence[Label]) -> list[FieldElement]:
        """R_j: the S_j formula on the PRF targets of server j's entries."""
        d = self._check_labels(labels)
        one = self.params.one()
        expected = []
        for j in range(1, d + 1):
            targets = [
                [self._tag_target(sk.k2, tau, j, col, d) for col in range(1, d + 1)]
                for tau in labels
            ]
            masked = [row[j - 1] for row in targets]
            columns = [[row[col] for row in targets] for col in range(j - 1)]
            expected.append(compute_share_sum(j, masked, columns, one))
        return expected

    def vdecrypt(
        self,
        sk: MultiServerKeyV,
        labels: Sequence[Label],
        responses: Sequence[TagPolynomial],
    ) -> FieldElement | Reject:
        """Check every tag at its server's point, then reconstruct from tag(0)."""
        d = self._check_labels(labels)
        if len(responses) != d or sk.d != d:
            raise ParameterError(f"expected {d} responses for a {sk.d}-server key")
        for tag in responses:
            if tag.p != self.params.p or tag.degree != d:
                raise ParameterError(f"evaluated tags must have degree {d}")

        expected = self.expected_tags(sk, labels)
        failed = [
            j
            for j, (tag, point, r) in enumerate(zip(responses, sk.points, expected), start=1)
            if tag.evaluate(point) != r
        ]
        if failed:
            logger.debug(f"Verification rejected for servers {failed}")
            return Reject("servers:" + ",".join(str(j) for j in failed))
        return self.reconstruct(sk.k1, labels, [tag.payload() for tag in responses])
