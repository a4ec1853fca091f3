"""
DCLED - Program Tests
"""

import pytest

from app.core.exceptions import ParameterError, UnsupportedDegreeError
from app.core.prf import Label
from app.models.program import (
    LinTerm,
    MonomialProgram,
    QuadraticProgram,
    QuadTerm,
    compose,
    eval_plain,
)


def labels(*names: str) -> tuple[Label, ...]:
    return tuple(Label.of(n) for n in names)


class TestQuadraticProgram:
    """Construction and plain evaluation."""

    def test_identity(self, params97):
        prog = QuadraticProgram.identity("x", params97)
        assert prog.n == 1
        assert prog.is_linear
        assert eval_plain(prog, [params97.element(42)]) == params97.element(42)

    def test_constant_program(self, params97):
        prog = QuadraticProgram.constant(params97.element(7), params97)
        assert prog.n == 0
        assert prog.degree == 0
        assert eval_plain(prog, []) == params97.element(7)

    def test_product_of_two(self, params97):
        e = params97.element
        prog = QuadraticProgram(params97, labels("x1", "x2"), [QuadTerm(1, 2, e(1))])
        assert prog.degree == 2
        assert eval_plain(prog, [e(3), e(4)]) == e(12)

    def test_mixed_terms(self, params97):
        e = params97.element
        prog = QuadraticProgram(
            params97,
            labels("x1", "x2"),
            [QuadTerm(1, 1, e(2))],
            [LinTerm(2, e(5))],
            e(1),
        )
        # 2*9 + 5*4 + 1
        assert eval_plain(prog, [e(3), e(4)]) == e(39)
        assert prog.term_count == 2

    def test_full_quadratic_term_counts(self, params, rng):
        """n = 10 gives 55 quadratic and 10 linear terms."""
        prog = QuadraticProgram.full_quadratic(labels(*(f"x{i}" for i in range(10))), params, rng)
        assert len(prog.quad_terms) == 55
        assert len(prog.lin_terms) == 10

    def test_index_out_of_range(self, params97):
        with pytest.raises(ParameterError):
            QuadraticProgram(params97, labels("x"), [QuadTerm(1, 2, params97.one())])
        with pytest.raises(ParameterError):
            QuadraticProgram(params97, labels("x"), lin_terms=[LinTerm(0, params97.one())])

    def test_duplicate_labels_rejected(self, params97):
        with pytest.raises(ParameterError):
            QuadraticProgram(params97, labels("x", "x"))

    def test_duplicate_terms_rejected(self, params97):
        one = params97.one()
        with pytest.raises(ParameterError):
            QuadraticProgram(params97, labels("x", "y"), [(1, 2, one), (1, 2, one)])
        with pytest.raises(ParameterError):
            QuadraticProgram(params97, labels("x"), lin_terms=[(1, one), (1, one)])

    def test_mismatched_coefficient_modulus(self, params97, params5):
        with pytest.raises(ParameterError):
            QuadraticProgram(params97, labels("x"), lin_terms=[(1, params5.one())])

    def test_eval_plain_length_mismatch(self, params97):
        prog = QuadraticProgram.identity("x", params97)
        with pytest.raises(ParameterError):
            eval_plain(prog, [])


class TestCompose:
    """Outer quadratic applied to inner programs."""

    def test_linear_of_linear(self, params97):
        e = params97.element
        outer = QuadraticProgram(params97, labels("p1", "p2"), lin_terms=[(1, e(2)), (2, e(3))])
        inner = [
            QuadraticProgram.identity("x", params97),
            QuadraticProgram(params97, labels("x", "y"), lin_terms=[(1, e(1)), (2, e(1))]),
        ]
        composed = compose(outer, inner)
        assert composed.labels == labels("x", "y")
        # 2x + 3(x + y) at (4, 5)
        assert eval_plain(composed, [e(4), e(5)]) == e(35)

    def test_product_of_linear_programs(self, params97):
        e = params97.element
        outer = QuadraticProgram(params97, labels("p1", "p2"), [(1, 2, e(1))])
        inner = [QuadraticProgram.identity("x", params97), QuadraticProgram.identity("y", params97)]
        composed = compose(outer, inner)
        assert composed.degree == 2
        assert eval_plain(composed, [e(6), e(7)]) == e(42)

    def test_degree_overflow(self, params97):
        e = params97.element
        square = QuadraticProgram(params97, labels("x"), [(1, 1, e(1))])
        outer = QuadraticProgram(params97, labels("p1", "p2"), [(1, 2, e(1))])
        with pytest.raises(UnsupportedDegreeError):
            compose(outer, [square, QuadraticProgram.identity("y", params97)])

    def test_arity_mismatch(self, params97):
        outer = QuadraticProgram.identity("p", params97)
        with pytest.raises(ParameterError):
            compose(outer, [])

    def test_same_label_merges_into_square(self, params97):
        """L_tau * L_tau is the single term x1^2 over one input."""
        one = params97.one()
        outer = QuadraticProgram(params97, labels("p1", "p2"), [(1, 2, one)])
        tau = QuadraticProgram.identity("tau", params97)
        composed = compose(outer, [tau, tau])
        assert composed.labels == labels("tau")
        assert composed.quad_terms == (QuadTerm(1, 1, one),)
        assert composed.lin_terms == ()
        assert composed.gamma == params97.zero()

    @pytest.mark.parametrize("trial", range(5))
    def test_compose_matches_nested_evaluation(self, params, rng, trial):
        e = params.element
        pool = labels("a", "b", "c", "d")
        inner = []
        for _ in range(3):
            picked = rng.sample(pool, rng.randint(1, 3))
            lin = [(k, e(rng.randrange(params.p))) for k in range(1, len(picked) + 1)]
            inner.append(
                QuadraticProgram(params, tuple(picked), lin_terms=lin, gamma=e(rng.randrange(9)))
            )
        outer = QuadraticProgram.full_quadratic(labels("p1", "p2", "p3"), params, rng)
        composed = compose(outer, inner)

        values = {label: e(rng.randrange(params.p)) for label in pool}
        nested = eval_plain(
            outer, [eval_plain(prog, [values[lb] for lb in prog.labels]) for prog in inner]
        )
        assert eval_plain(composed, [values[lb] for lb in composed.labels]) == nested

    def test_scaling_outer_scales_coefficients(self, params97):
        e = params97.element
        outer = QuadraticProgram(
            params97, labels("p1", "p2"), [(1, 2, e(3))], [(1, e(5))], e(2)
        )
        scaled = QuadraticProgram(
            params97, labels("p1", "p2"), [(1, 2, e(21))], [(1, e(35))], e(14)
        )
        inner = [
            QuadraticProgram(params97, labels("x", "y"), lin_terms=[(1, e(1)), (2, e(4))]),
            QuadraticProgram.identity("y", params97),
        ]
        base = compose(outer, inner)
        times_seven = compose(scaled, inner)
        assert times_seven.labels == base.labels
        assert times_seven.quad_terms == tuple(
            QuadTerm(i, j, alpha * 7) for i, j, alpha in base.quad_terms
        )
        assert times_seven.lin_terms == tuple(LinTerm(k, beta * 7) for k, beta in base.lin_terms)
        assert times_seven.gamma == base.gamma * 7


class TestMonomialProgram:
    def test_degree_and_eval(self, params97):
        e = params97.element
        prog = MonomialProgram(labels("a", "b", "c"))
        assert prog.degree == 3
        assert prog.eval_plain([e(2), e(3), e(4)]) == e(24)

    def test_needs_degree_two(self):
        with pytest.raises(ParameterError):
            MonomialProgram(labels("a"))

    def test_distinct_labels(self):
        with pytest.raises(ParameterError):
            MonomialProgram(labels("a", "a"))
