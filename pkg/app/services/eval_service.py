"""
DCLED - Server Evaluation
Dispatches a program to the evaluation routine for the scheme and this
daemon's role, over shares resolved from the store.
"""

from __future__ import annotations

import logging
import time
from collections.abc import Sequence
from typing import Any

from app.core.exceptions import DecodeError, ParameterError, UnsupportedDegreeError
from app.core.field import FieldElement, SchemeParams, fe_from_hex
from app.models.program import MonomialProgram, QuadraticProgram
from app.models.shares import ShareMatrix, TagPolynomial
from app.models.store_record import SchemeTag
from app.services.scheme2s_service import TwoServerScheme
from app.services.scheme2v_service import VerifiableTwoServerScheme
from app.services.schemeds_service import MultiServerScheme

logger = logging.getLogger(__name__)

Program = QuadraticProgram | MonomialProgram


def program_labels(prog: Program) -> list[str]:
    return [lb.text() for lb in prog.labels]


def check_program(scheme: SchemeTag, prog: Program) -> None:
    """Program kind must match the scheme family."""
    if scheme.two_server:
        if not isinstance(prog, QuadraticProgram):
            raise UnsupportedDegreeError(
                f"scheme {scheme.value} evaluates quadratic programs only"
            )
    elif not isinstance(prog, MonomialProgram):
        raise ParameterError(f"scheme {scheme.value} evaluates monomial programs only")


def encode_payload(result: FieldElement | TagPolynomial) -> str:
    """RESULT payload: fixed-width elements, tag coefficients constant first."""
    if isinstance(result, TagPolynomial):
        return "".join(c.to_hex() for c in result.coeffs)
    return result.to_hex()


def decode_tag_payload(payload: str, params: SchemeParams) -> TagPolynomial:
    width = params.hex_length
    if not payload or len(payload) % width:
        raise DecodeError(f"tag payload must be a multiple of {width} hex chars")
    return TagPolynomial(
        tuple(
            fe_from_hex(payload[k : k + width], params).value
            for k in range(0, len(payload), width)
        ),
        params.p,
    )


class ServerEvaluator:
    """Pure evaluation for one server role; holds no state beyond parameters."""

    def __init__(self, params: SchemeParams, server_index: int) -> None:
        self.params = params
        self.server_index = server_index
        self._two = TwoServerScheme(params)
        self._two_v = VerifiableTwoServerScheme(params)
        self._multi = MultiServerScheme(params)

    def evaluate(
        self, scheme: SchemeTag, prog: Program, shares: Sequence[Any]
    ) -> FieldElement | TagPolynomial:
        """Partial result of this server for prog over the resolved shares."""
        check_program(scheme, prog)
        started = time.perf_counter()
        role = self.server_index

        result: FieldElement | TagPolynomial
        if scheme.two_server:
            assert isinstance(prog, QuadraticProgram)
            if role not in (1, 2):
                raise ParameterError(f"two-server schemes have no server {role}")
            engine: TwoServerScheme | VerifiableTwoServerScheme = (
                self._two if scheme is SchemeTag.TWO_SERVER else self._two_v
            )
            result = engine.eval1(prog, shares) if role == 1 else engine.eval2(prog, shares)
        else:
            assert isinstance(prog, MonomialProgram)
            matrix = ShareMatrix(role, tuple(shares))
            if scheme is SchemeTag.MULTI_SERVER:
                result = self._multi.compute_sj(role, matrix, prog)
            else:
                result = self._multi.veval(role, matrix, prog)

        elapsed = time.perf_counter() - started
        terms = prog.term_count if isinstance(prog, QuadraticProgram) else prog.degree
        logger.info(f"EVAL {scheme.value} server={role} terms={terms} elapsed={elapsed:.4f}s")
        return result
