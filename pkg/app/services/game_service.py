"""
DCLED - Forgery Game
Scripted adversary against the verifiable two-server scheme.

The challenger answers Q encryption queries, then the adversary plays one
server and returns a random degree-2 tag for a program:

    Type 1  the program reads a label that was never queried; the other
            server's result is the zero polynomial, so only the forged
            side's equation decides
    Type 2  all labels were queried; the other server answers honestly and
            the forged tag differs from the honest one

A trial counts as an acceptance when the forged side's equation holds.
"""

from __future__ import annotations

import logging
import random

from app.core.exceptions import ParameterError
from app.core.field import FieldElement, SchemeParams
from app.core.prf import Label
from app.models.program import LinTerm, QuadraticProgram, QuadTerm
from app.models.shares import TagPolynomial, VShare1, VShare2
from app.schemas.bench import GameReport
from app.services.scheme2v_service import (
    EVALUATED_DEGREE,
    Reject,
    RejectReason,
    VerifiableTwoServerScheme,
    VerificationContext,
)

logger = logging.getLogger(__name__)


def analytic_bound(queries: int, p: int) -> float:
    """Per-trial false-accept bound 2(Q+1)/(p-2Q)."""
    return 2 * (queries + 1) / (p - 2 * queries)


class ForgeryGame:
    """Seeded forgery harness; keys come from the scheme's own keygen."""

    def __init__(
        self,
        params: SchemeParams | None = None,
        seed: int = 0,
        queries: int = 16,
        program_pool: int = 32,
    ) -> None:
        self.params = params or SchemeParams.for_lambda()
        if queries < 2 or 2 * queries >= self.params.p:
            raise ParameterError(f"need 2 <= Q < p/2 encryption queries, got {queries}")
        self.seed = seed
        self.queries = queries
        self.program_pool = program_pool
        self.scheme = VerifiableTwoServerScheme(self.params)

    def _random_program(
        self, labels: tuple[Label, Label], rng: random.Random
    ) -> QuadraticProgram:
        p = self.params.p

        def coeff() -> FieldElement:
            return FieldElement(rng.randrange(1, p), p)

        return QuadraticProgram(
            self.params,
            labels,
            (QuadTerm(1, 2, coeff()), QuadTerm(1, 1, coeff())),
            (LinTerm(1, coeff()), LinTerm(2, coeff())),
        )

    def _forge(self, rng: random.Random) -> TagPolynomial:
        p = self.params.p
        return TagPolynomial(tuple(rng.randrange(p) for _ in range(EVALUATED_DEGREE + 1)), p)

    def run(self, trials: int) -> GameReport:
        rng = random.Random(self.seed)
        sk, _ = self.scheme.keygen()

        # Query phase
        queried = [Label.of(f"q{k}") for k in range(self.queries)]
        shares: dict[Label, tuple[VShare1, VShare2]] = {
            tau: self.scheme.encrypt(sk, tau, self.params.random_element(rng)) for tau in queried
        }

        type1: list[VerificationContext] = []
        type2: list[tuple[VerificationContext, TagPolynomial, TagPolynomial]] = []
        for k in range(self.program_pool):
            prog = self._random_program((Label.of(f"unqueried{k}"), rng.choice(queried)), rng)
            type1.append(self.scheme.prepare_verification(sk, prog))

            a, b = rng.sample(queried, 2)
            prog = self._random_program((a, b), rng)
            honest1 = self.scheme.eval1(prog, [shares[a][0], shares[b][0]])
            honest2 = self.scheme.eval2(prog, [shares[a][1], shares[b][1]])
            type2.append((self.scheme.prepare_verification(sk, prog), honest1, honest2))

        zero = TagPolynomial.zero(EVALUATED_DEGREE, self.params.p)
        counts = {1: 0, 2: 0}
        accepted = {1: 0, 2: 0}

        for trial in range(trials):
            kind = 1 if trial % 2 == 0 else 2
            side = rng.choice((1, 2))
            forged = self._forge(rng)
            if kind == 1:
                context = rng.choice(type1)
                c1, c2 = (forged, zero) if side == 1 else (zero, forged)
                outcome = self.scheme.check(sk, context, c1, c2)
                failed_side = (
                    RejectReason.FIRST_SERVER if side == 1 else RejectReason.SECOND_SERVER
                ).value
                won = not isinstance(outcome, Reject) or outcome.reason not in (
                    failed_side,
                    RejectReason.BOTH.value,
                )
            else:
                context, honest1, honest2 = rng.choice(type2)
                while forged == (honest1 if side == 1 else honest2):
                    forged = self._forge(rng)
                c1, c2 = (forged, honest2) if side == 1 else (honest1, forged)
                won = not isinstance(self.scheme.check(sk, context, c1, c2), Reject)
            counts[kind] += 1
            accepted[kind] += int(won)

        acceptances = accepted[1] + accepted[2]
        if acceptances:
            logger.warning(f"Forgery game: {acceptances} of {trials} forgeries accepted")
        logger.info(f"Forgery game finished: trials={trials} seed={self.seed}")
        return GameReport(
            trials=trials,
            acceptances=acceptances,
            rejections=trials - acceptances,
            seed=self.seed,
            queries=self.queries,
            type1_trials=counts[1],
            type2_trials=counts[2],
            type1_acceptances=accepted[1],
            type2_acceptances=accepted[2],
            modulus_bits=self.params.p.bit_length(),
            analytic_bound=analytic_bound(self.queries, self.params.p),
        )
