"""
DCLED - Verifiable Two-Server Scheme (2S-VDCLED)
Every share component carries a degree-1 tag y with y(0) = payload and
y(s) = r, where r is a PRF target under K2. Servers evaluate on tags; the
client checks C1(s1) = R1 and C2(s2) = R2 before decrypting.
"""

from __future__ import annotations

import logging
import secrets
from collections.abc import Sequence
from dataclasses import dataclass
from enum import Enum

from app.core.exceptions import ParameterError
from app.core.field import FieldElement, SchemeParams
from app.core.prf import Label, PrfKey, derive_masks_2s, derive_tag_targets
from app.models.program import QuadraticProgram
from app.models.shares import TagPolynomial, VShare1, VShare2

logger = logging.getLogger(__name__)


EVALUATED_DEGREE = 2


@dataclass(frozen=True, slots=True)
class SecretKey2V:
    """sk = (K1, K2, s1, s2) with s1, s2 in Z_p*."""

    k1: PrfKey
    k2: PrfKey
    s1: FieldElement
    s2: FieldElement

    def __post_init__(self) -> None:
        if not self.s1 or not self.s2:
            raise ParameterError("verification points must be non-zero")

    def __repr__(self) -> str:
        return "SecretKey2V(<redacted>)"


class RejectReason(str, Enum):
    """Which verification equation failed."""

    FIRST_SERVER = "first_server"
    SECOND_SERVER = "second_server"
    BOTH = "both"


@dataclass(frozen=True, slots=True)
class Reject:
    """The distinguished decryption outcome: verification failed."""

    reason: str

    def __bool__(self) -> bool:
        return False


@dataclass(frozen=True, slots=True)
class VerificationContext:
    """Values the client recomputes from K1/K2 for one program."""

    r1: FieldElement
    r2: FieldElement
    b_offset: FieldElement


def make_tag(value: FieldElement, target: FieldElement, point: FieldElement) -> TagPolynomial:
    """y = value + ((target - value) / point) x, so y(0) = value and y(point) = target."""
    slope = (target - value) / point
    return TagPolynomial((value.value, slope.value), value.p)


class VerifiableTwoServerScheme:
    """2S-VDCLED over a fixed prime field."""

    def __init__(self, params: SchemeParams | None = None) -> None:
        self.params = params or SchemeParams.for_lambda()

    def keygen(self) -> tuple[SecretKey2V, SchemeParams]:
        """Fresh K1, K2; s1, s2 uniform in Z_p* (zero is resampled)."""
        p = self.params.p

        def point() -> FieldElement:
            while True:
                s = secrets.randbelow(p)
                if s:
                    return FieldElement(s, p)

        return SecretKey2V(PrfKey.generate(), PrfKey.generate(), point(), point()), self.params

    def encrypt(self, sk: SecretKey2V, tau: Label, m: FieldElement) -> tuple[VShare1, VShare2]:
        if m.p != self.params.p:
            raise ParameterError("message modulus does not match scheme")
        a, b = derive_masks_2s(sk.k1, tau, self.params)
        r1, r2, r3, r4 = derive_tag_targets(sk.k2, tau, self.params)
        return (
            VShare1(make_tag(m - a, r1, sk.s1), make_tag(a - b, r2, sk.s1)),
            VShare2(make_tag(m - b, r3, sk.s2), make_tag(a, r4, sk.s2)),
        )

    def _check_alignment(self, prog: QuadraticProgram, count: int) -> None:
        if prog.params.p != self.params.p:
            raise ParameterError("program modulus does not match scheme")
        if count != prog.n:
            raise ParameterError(f"program has {prog.n} inputs, got {count} shares")

    def eval1(self, prog: QuadraticProgram, shares: Sequence[VShare1]) -> TagPolynomial:
        """sum alpha * [y1_i y1_j - y2_i y2_j] as a degree-2 polynomial."""
        self._check_alignment(prog, len(shares))
        p = self.params.p
        y1 = [s.y1.coefficients for s in shares]
        y2 = [s.y2.coefficients for s in shares]
        c0 = c1 = c2 = 0
        for i, j, alpha in prog.quad_view:
            a0, a1 = y1[i]
            b0, b1 = y1[j]
            e0, e1 = y2[i]
            f0, f1 = y2[j]
            c0 += alpha * (a0 * b0 - e0 * f0)
            c1 += alpha * (a0 * b1 + a1 * b0 - e0 * f1 - e1 * f0)
            c2 += alpha * (a1 * b1 - e1 * f1)
        return TagPolynomial((c0 % p, c1 % p, c2 % p), p)

    def eval2(self, prog: QuadraticProgram, shares: Sequence[VShare2]) -> TagPolynomial:
        """sum alpha * [y3_i y4_j + y4_i y3_j] + sum beta * y3_k."""
        self._check_alignment(prog, len(shares))
        p = self.params.p
        y3 = [s.y3.coefficients for s in shares]
        y4 = [s.y4.coefficients for s in shares]
        c0 = c1 = c2 = 0
        for i, j, alpha in prog.quad_view:
            w0, w1 = y3[i]
            x0, x1 = y4[j]
            g0, g1 = y4[i]
            h0, h1 = y3[j]
            c0 += alpha * (w0 * x0 + g0 * h0)
            c1 += alpha * (w0 * x1 + w1 * x0 + g0 * h1 + g1 * h0)
            c2 += alpha * (w1 * x1 + g1 * h1)
        for k, beta in prog.lin_view:
            w0, w1 = y3[k]
            c0 += beta * w0
            c1 += beta * w1
        return TagPolynomial((c0 % p, c1 % p, c2 % p), p)

    def prepare_verification(self, sk: SecretKey2V, prog: QuadraticProgram) -> VerificationContext:
        """Recompute R1, R2 and f(b) from the keys; nothing is stored client-side."""
        p = self.params.p
        targets = [derive_tag_targets(sk.k2, tau, self.params) for tau in prog.labels]
        r = [tuple(t.value for t in row) for row in targets]
        b = [derive_masks_2s(sk.k1, tau, self.params)[1].value for tau in prog.labels]

        acc1 = acc2 = 0
        for i, j, alpha in prog.quad_view:
            acc1 += alpha * (r[i][0] * r[j][0] - r[i][1] * r[j][1])
            acc2 += alpha * (r[i][2] * r[j][3] + r[i][3] * r[j][2])
        for k, beta in prog.lin_view:
            acc2 += beta * r[k][2]

        return VerificationContext(
            r1=FieldElement(acc1 % p, p),
            r2=FieldElement(acc2 % p, p),
            b_offset=FieldElement(prog.evaluate_ints(b), p),
        )

    def check(
        self,
        sk: SecretKey2V,
        context: VerificationContext,
        c1: TagPolynomial,
        c2: TagPolynomial,
    ) -> FieldElement | Reject:
        """Accept iff c1(s1) = R1 and c2(s2) = R2; then m = c1(0) + c2(0) + f(b)."""
        for tag in (c1, c2):
            if tag.p != self.params.p:
                raise ParameterError("result modulus does not match scheme")
            if tag.degree != EVALUATED_DEGREE:
                raise ParameterError(f"evaluated tags have degree {EVALUATED_DEGREE}")

        first_ok = c1.evaluate(sk.s1) == context.r1
        second_ok = c2.evaluate(sk.s2) == context.r2
        if not (first_ok and second_ok):
            if not first_ok and not second_ok:
                reason = RejectReason.BOTH
            elif not first_ok:
                reason = RejectReason.FIRST_SERVER
            else:
                reason = RejectReason.SECOND_SERVER
            logger.debug(f"Verification rejected: {reason.value}")
            return Reject(reason.value)
        return c1.payload() + c2.payload() + context.b_offset

    def decrypt(
        self,
        sk: SecretKey2V,
        prog: QuadraticProgram,
        c1: TagPolynomial,
        c2: TagPolynomial,
    ) -> FieldElement | Reject:
        """2V.Dec: verify both equations, then decrypt."""
        return self.check(sk, self.prepare_verification(sk, prog), c1, c2)
