"""
DCLED - Two-Server Scheme (2S-DCLED)
Masking encryption, the two server evaluations and client decryption.

For a quadratic term alpha * x_i * x_j the servers split

    m_i m_j = (m_i - a_i)(m_j - a_j) - (a_i - b_i)(a_j - b_j)      server 1
            + a_j (m_i - b_i) + a_i (m_j - b_j)                     server 2
            + b_i b_j                                               client

so the client adds f(b_1, ..., b_n) to the two partial results.
"""

from __future__ import annotations

import logging
import random
from collections.abc import Callable, Sequence
from dataclasses import dataclass

from app.core.exceptions import DuplicateLabelError, ParameterError
from app.core.field import FieldElement, SchemeParams
from app.core.prf import Label, PrfKey, derive_masks_2s
from app.models.program import QuadraticProgram
from app.models.shares import Share1, Share2

logger = logging.getLogger(__name__)


@dataclass(frozen=True, slots=True)
class SecretKey2S:
    """sk = K."""

    k: PrfKey


# (sk, label) -> (a, b). Production uses the PRF; tests may enumerate masks.
MaskProvider = Callable[[SecretKey2S, Label], tuple[FieldElement, FieldElement]]


class TwoServerScheme:
    """2S-DCLED over a fixed prime field."""

    def __init__(
        self,
        params: SchemeParams | None = None,
        mask_provider: MaskProvider | None = None,
    ) -> None:
        self.params = params or SchemeParams.for_lambda()
        self._masks = mask_provider or self._prf_masks

    def _prf_masks(self, sk: SecretKey2S, label: Label) -> tuple[FieldElement, FieldElement]:
        return derive_masks_2s(sk.k, label, self.params)

    def keygen(self) -> tuple[SecretKey2S, SchemeParams]:
        """Fresh uniformly random PRF seed; pk is the modulus."""
        return SecretKey2S(PrfKey.generate()), self.params

    def encrypt(self, sk: SecretKey2S, tau: Label, m: FieldElement) -> tuple[Share1, Share2]:
        """C1 = (m - a, a - b), C2 = (m - b, a)."""
        if m.p != self.params.p:
            raise ParameterError("message modulus does not match scheme")
        a, b = self._masks(sk, tau)
        return Share1(m - a, a - b), Share2(m - b, a)

    def encrypt_dataset(
        self, sk: SecretKey2S, items: Sequence[tuple[Label, FieldElement]]
    ) -> list[tuple[Share1, Share2]]:
        """Encrypt a dataset; a label may appear only once."""
        seen: set[Label] = set()
        shares = []
        for tau, m in items:
            if tau in seen:
                raise DuplicateLabelError(f"label {tau} already encrypted")
            seen.add(tau)
            shares.append(self.encrypt(sk, tau, m))
        return shares

    def _check_alignment(self, prog: QuadraticProgram, count: int) -> None:
        if prog.params.p != self.params.p:
            raise ParameterError("program modulus does not match scheme")
        if count != prog.n:
            raise ParameterError(f"program has {prog.n} inputs, got {count} shares")

    def eval1(self, prog: QuadraticProgram, shares: Sequence[Share1]) -> FieldElement:
        """sum alpha * [u_i u_j - v_i v_j]; linear terms leave server 1 idle."""
        self._check_alignment(prog, len(shares))
        u = [s.u.value for s in shares]
        v = [s.v.value for s in shares]
        acc = 0
        for i, j, alpha in prog.quad_view:
            acc += alpha * (u[i] * u[j] - v[i] * v[j])
        return FieldElement(acc % self.params.p, self.params.p)

    def eval2(self, prog: QuadraticProgram, shares: Sequence[Share2]) -> FieldElement:
        """sum alpha * [a_j w_i + a_i w_j] + sum beta * w_k."""
        self._check_alignment(prog, len(shares))
        w = [s.w.value for s in shares]
        a = [s.a.value for s in shares]
        acc = 0
        for i, j, alpha in prog.quad_view:
            acc += alpha * (a[j] * w[i] + a[i] * w[j])
        for k, beta in prog.lin_view:
            acc += beta * w[k]
        return FieldElement(acc % self.params.p, self.params.p)

    def offset(self, sk: SecretKey2S, prog: QuadraticProgram) -> FieldElement:
        """f(b_1, ..., b_n), recomputed from the PRF."""
        b = [self._masks(sk, tau)[1].value for tau in prog.labels]
        return FieldElement(prog.evaluate_ints(b), self.params.p)

    def decrypt(
        self,
        sk: SecretKey2S,
        prog: QuadraticProgram,
        c1: FieldElement,
        c2: FieldElement,
    ) -> FieldElement:
        """m = C1 + C2 + f(b)."""
        if c1.p != self.params.p or c2.p != self.params.p:
            raise ParameterError("result modulus does not match scheme")
        return c1 + c2 + self.offset(sk, prog)


def simulate_results(
    prog: QuadraticProgram,
    value: FieldElement,
    b_offset: FieldElement,
    rng: random.Random,
) -> tuple[FieldElement, FieldElement]:
    """Context-hiding simulator: (C1, C2) from f(m) and f(b) alone.

    Linear programs give (0, m - f(b)); quadratic ones (m - f(b) - r, r).
    """
    target = value - b_offset
    if prog.is_linear:
        return target - target, target
    r = prog.params.random_element(rng)
    return target - r, r
