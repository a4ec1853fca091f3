"""
DCLED - Labeled Programs
Quadratic programs f = sum alpha_ij x_i x_j + sum beta_k x_k + gamma and
degree-d monomials, each bound to the labels of its inputs.
"""

from __future__ import annotations

import random
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple

from app.core.exceptions import ParameterError, UnsupportedDegreeError
from app.core.field import FieldElement, SchemeParams
from app.core.prf import Label


class QuadTerm(NamedTuple):
    """alpha * x_i * x_j, indices 1-based."""

    i: int
    j: int
    alpha: FieldElement


class LinTerm(NamedTuple):
    """beta * x_k, index 1-based."""

    k: int
    beta: FieldElement


def _check_distinct(labels: Sequence[Label]) -> None:
    if len(set(labels)) != len(labels):
        raise ParameterError("program labels must be pairwise distinct")


@dataclass(frozen=True)
class QuadraticProgram:
    """Sparse quadratic program over n labeled inputs.

    Terms are kept exactly as given: (1, 2) and (2, 1) are distinct terms.
    """

    params: SchemeParams
    labels: tuple[Label, ...]
    quad_terms: tuple[QuadTerm, ...] = ()
    lin_terms: tuple[LinTerm, ...] = ()
    gamma: FieldElement | None = field(default=None)

    def __post_init__(self) -> None:
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "quad_terms", tuple(QuadTerm(*t) for t in self.quad_terms))
        object.__setattr__(self, "lin_terms", tuple(LinTerm(*t) for t in self.lin_terms))
        if self.gamma is None:
            object.__setattr__(self, "gamma", self.params.zero())

        _check_distinct(self.labels)
        n = len(self.labels)
        p = self.params.p

        seen_pairs: set[tuple[int, int]] = set()
        for i, j, alpha in self.quad_terms:
            if not (1 <= i <= n and 1 <= j <= n):
                raise ParameterError(f"quadratic term ({i}, {j}) outside [1, {n}]")
            if (i, j) in seen_pairs:
                raise ParameterError(f"duplicate quadratic term ({i}, {j})")
            if alpha.p != p:
                raise ParameterError("coefficient modulus does not match program")
            seen_pairs.add((i, j))

        seen_k: set[int] = set()
        for k, beta in self.lin_terms:
            if not 1 <= k <= n:
                raise ParameterError(f"linear term {k} outside [1, {n}]")
            if k in seen_k:
                raise ParameterError(f"duplicate linear term {k}")
            if beta.p != p:
                raise ParameterError("coefficient modulus does not match program")
            seen_k.add(k)

        assert self.gamma is not None
        if self.gamma.p != p:
            raise ParameterError("coefficient modulus does not match program")

    # -------------------------------------------------------------------------
    # Builders
    # -------------------------------------------------------------------------

    @classmethod
    def identity(cls, label: Label | str, params: SchemeParams) -> QuadraticProgram:
        """L_tau: the program returning the input stored under label."""
        return cls(params, (Label.of(label),), lin_terms=((1, params.one()),))

    @classmethod
    def constant(
        cls, gamma: FieldElement, params: SchemeParams, labels: Iterable[Label] = ()
    ) -> QuadraticProgram:
        return cls(params, tuple(labels), gamma=gamma)

    @classmethod
    def full_quadratic(
        cls,
        labels: Sequence[Label],
        params: SchemeParams,
        rng: random.Random,
    ) -> QuadraticProgram:
        """All i <= j pairs, all linear terms, random coefficients: n(n+1)/2 + n terms."""
        n = len(labels)
        p = params.p
        quad = tuple(
            QuadTerm(i, j, FieldElement(rng.randrange(p), p))
            for i in range(1, n + 1)
            for j in range(i, n + 1)
        )
        lin = tuple(LinTerm(k, FieldElement(rng.randrange(p), p)) for k in range(1, n + 1))
        return cls(params, tuple(labels), quad, lin, FieldElement(rng.randrange(p), p))

    # -------------------------------------------------------------------------
    # Shape
    # -------------------------------------------------------------------------

    @property
    def n(self) -> int:
        return len(self.labels)

    @property
    def term_count(self) -> int:
        return len(self.quad_terms) + len(self.lin_terms)

    @property
    def degree(self) -> int:
        if any(t.alpha for t in self.quad_terms):
            return 2
        if any(t.beta for t in self.lin_terms):
            return 1
        return 0

    @property
    def is_linear(self) -> bool:
        return not self.quad_terms

    @cached_property
    def quad_view(self) -> list[tuple[int, int, int]]:
        """0-based (i, j, alpha) integer triples for evaluation loops."""
        return [(i - 1, j - 1, alpha.value) for i, j, alpha in self.quad_terms]

    @cached_property
    def lin_view(self) -> list[tuple[int, int]]:
        return [(k - 1, beta.value) for k, beta in self.lin_terms]

    def evaluate_ints(self, values: Sequence[int]) -> int:
        """f at a point given as reduced integers; result reduced mod p."""
        if len(values) != self.n:
            raise ParameterError(f"expected {self.n} values, got {len(values)}")
        acc = 0
        for i, j, alpha in self.quad_view:
            acc += alpha * values[i] * values[j]
        for k, beta in self.lin_view:
            acc += beta * values[k]
        assert self.gamma is not None
        return (acc + self.gamma.value) % self.params.p


def eval_plain(prog: QuadraticProgram, values: Sequence[FieldElement]) -> FieldElement:
    """Exact value of f at the point."""
    if len(values) != prog.n:
        raise ParameterError(f"expected {prog.n} values, got {len(values)}")
    p = prog.params.p
    for v in values:
        if v.p != p:
            raise ParameterError("value modulus does not match program")
    return FieldElement(prog.evaluate_ints([v.value for v in values]), p)


@dataclass(frozen=True)
class MonomialProgram:
    """prod_{i=1..d} x_i over d distinct labels."""

    labels: tuple[Label, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "labels", tuple(self.labels))
        if len(self.labels) < 2:
            raise ParameterError("monomial programs need degree d >= 2")
        _check_distinct(self.labels)

    @property
    def degree(self) -> int:
        return len(self.labels)

    def eval_plain(self, values: Sequence[FieldElement]) -> FieldElement:
        if len(values) != self.degree:
            raise ParameterError(f"expected {self.degree} values, got {len(values)}")
        result = values[0]
        for v in values[1:]:
            result = result * v
        return result


# =============================================================================
# Composition
# =============================================================================

# Sparse polynomial: sorted tuple of input positions -> coefficient.
_Poly = dict[tuple[int, ...], int]

MAX_TWO_SERVER_DEGREE = 2


def _to_poly(prog: QuadraticProgram, positions: Sequence[int]) -> _Poly:
    p = prog.params.p
    poly: _Poly = {}

    def add(key: tuple[int, ...], coeff: int) -> None:
        poly[key] = (poly.get(key, 0) + coeff) % p

    for i, j, alpha in prog.quad_view:
        add(tuple(sorted((positions[i], positions[j]))), alpha)
    for k, beta in prog.lin_view:
        add((positions[k],), beta)
    assert prog.gamma is not None
    add((), prog.gamma.value)
    return poly


def _mul(a: _Poly, b: _Poly, p: int) -> _Poly:
    out: _Poly = {}
    for ka, ca in a.items():
        if not ca:
            continue
        for kb, cb in b.items():
            if not cb:
                continue
            key = tuple(sorted(ka + kb))
            out[key] = (out.get(key, 0) + ca * cb) % p
    return out


def compose(
    outer: QuadraticProgram,
    inner: Sequence[QuadraticProgram],
    max_degree: int = MAX_TWO_SERVER_DEGREE,
) -> QuadraticProgram:
    """Evaluate outer on the inner programs; equal labels merge into one input.

    outer's own labels only name its t argument positions.
    """
    if len(inner) != outer.n:
        raise ParameterError(f"outer program takes {outer.n} inputs, got {len(inner)}")
    params = outer.params
    p = params.p
    for prog in inner:
        if prog.params.p != p:
            raise ParameterError("inner program modulus does not match outer program")

    merged: list[Label] = []
    position: dict[Label, int] = {}
    for prog in inner:
        for label in prog.labels:
            if label not in position:
                position[label] = len(merged)
                merged.append(label)

    polys = [_to_poly(prog, [position[lb] for lb in prog.labels]) for prog in inner]

    result: _Poly = {}

    def accumulate(poly: _Poly, scale: int) -> None:
        for key, coeff in poly.items():
            result[key] = (result.get(key, 0) + scale * coeff) % p

    for i, j, alpha in outer.quad_view:
        accumulate(_mul(polys[i], polys[j], p), alpha)
    for k, beta in outer.lin_view:
        accumulate(polys[k], beta)
    assert outer.gamma is not None
    accumulate({(): 1}, outer.gamma.value)

    degree = max((len(key) for key, coeff in result.items() if coeff), default=0)
    if degree > max_degree:
        raise UnsupportedDegreeError(
            f"composed program has degree {degree}, scheme supports {max_degree}"
        )

    quad: list[QuadTerm] = []
    lin: list[LinTerm] = []
    gamma = params.zero()
    for key, coeff in sorted(result.items()):
        if not coeff:
            continue
        if len(key) == 2:
            quad.append(QuadTerm(key[0] + 1, key[1] + 1, FieldElement(coeff, p)))
        elif len(key) == 1:
            lin.append(LinTerm(key[0] + 1, FieldElement(coeff, p)))
        else:
            gamma = FieldElement(coeff, p)
    return QuadraticProgram(params, tuple(merged), tuple(quad), tuple(lin), gamma)
