"""
DCLED - Verifiable Two-Server Scheme Tests
"""

import pytest

from app.core.exceptions import ParameterError
from app.core.field import FieldElement
from app.core.prf import Label, PrfKey, derive_tag_targets
from app.models.program import LinTerm, QuadraticProgram, QuadTerm, eval_plain
from app.models.shares import Share1, Share2, TagPolynomial, VShare1, VShare2
from app.services.game_service import ForgeryGame, analytic_bound
from app.services.scheme2s_service import SecretKey2S, TwoServerScheme
from app.services.scheme2v_service import (
    Reject,
    RejectReason,
    SecretKey2V,
    VerifiableTwoServerScheme,
    make_tag,
)
from tests.test_scheme2s import random_program


def tag(p: int, *coefficients: int) -> TagPolynomial:
    return TagPolynomial.of(coefficients, p)


def product_program(params, *names: str) -> QuadraticProgram:
    labels = tuple(Label.of(n) for n in names)
    return QuadraticProgram(params, labels, [QuadTerm(1, 2, params.one())])


def _share1(params, u: int, v: int) -> Share1:
    return Share1(FieldElement(u, params.p), FieldElement(v, params.p))


def _share2(params, w: int, a: int) -> Share2:
    return Share2(FieldElement(w, params.p), FieldElement(a, params.p))


def honest_run(scheme, sk, prog, values):
    shares = [scheme.encrypt(sk, tau, m) for tau, m in zip(prog.labels, values)]
    c1 = scheme.eval1(prog, [s[0] for s in shares])
    c2 = scheme.eval2(prog, [s[1] for s in shares])
    return c1, c2


class TestKeys:
    def test_points_nonzero_and_fresh(self, params):
        scheme = VerifiableTwoServerScheme(params)
        (a, pk), (b, _) = scheme.keygen(), scheme.keygen()
        assert a.s1 and a.s2
        assert a.k1.seed != b.k1.seed
        assert a.s1 != b.s1
        assert pk == TwoServerScheme(params).params

    def test_zero_point_rejected(self, params97):
        with pytest.raises(ParameterError):
            SecretKey2V(PrfKey.generate(), PrfKey.generate(), params97.zero(), params97.one())

    def test_repr_redacts(self, params):
        sk, _ = VerifiableTwoServerScheme(params).keygen()
        assert str(sk.s1.value) not in repr(sk)


class TestTags:
    def test_make_tag_example(self, params97):
        """(10 - 3) / 7 = 1 over Z_97."""
        e = params97.element
        y = make_tag(e(3), e(10), e(7))
        assert y.coefficients == (3, 1)
        assert y.evaluate(e(7)) == e(10)

    def test_target_equal_to_payload_gives_constant(self, params97):
        e = params97.element
        assert make_tag(e(5), e(5), e(11)).coefficients == (5, 0)

    def test_fresh_tags_open_to_targets(self, params):
        scheme = VerifiableTwoServerScheme(params)
        sk, _ = scheme.keygen()
        tau = Label.of("t")
        m = params.element(99)
        v1, v2 = scheme.encrypt(sk, tau, m)
        r1, r2, r3, r4 = derive_tag_targets(sk.k2, tau, params)
        assert v1.y1.evaluate(sk.s1) == r1
        assert v1.y2.evaluate(sk.s1) == r2
        assert v2.y3.evaluate(sk.s2) == r3
        assert v2.y4.evaluate(sk.s2) == r4
        plain1, plain2 = TwoServerScheme(params).encrypt(SecretKey2S(sk.k1), tau, m)
        assert (v1.y1.payload(), v1.y2.payload()) == (plain1.u, plain1.v)
        assert (v2.y3.payload(), v2.y4.payload()) == (plain2.w, plain2.a)
        for y in (v1.y1, v1.y2, v2.y3, v2.y4):
            assert y.degree == 1


class TestEvaluation:
    def test_eval1_hand_example(self, params97):
        p = params97.p
        scheme = VerifiableTwoServerScheme(params97)
        prog = product_program(params97, "x1", "x2")
        shares = [VShare1(tag(p, 3, 1), tag(p, 1, 0)), VShare1(tag(p, 2, 4), tag(p, 1, 0))]
        assert scheme.eval1(prog, shares).coefficients == (5, 14, 4)

    def test_constant_tags_reduce_to_plain_eval(self, params97, rng):
        p = params97.p
        plain = TwoServerScheme(params97)
        scheme = VerifiableTwoServerScheme(params97)
        prog = random_program(params97, 4, rng)
        values = [[rng.randrange(p) for _ in range(4)] for _ in range(4)]
        v1 = [VShare1(tag(p, u, 0), tag(p, v, 0)) for u, v, _, _ in values]
        v2 = [VShare2(tag(p, w, 0), tag(p, a, 0)) for _, _, w, a in values]
        c1, c2 = scheme.eval1(prog, v1), scheme.eval2(prog, v2)
        assert c1.coefficients[1:] == (0, 0)
        assert c2.coefficients[1:] == (0, 0)
        s1 = [_share1(params97, u, v) for u, v, _, _ in values]
        s2 = [_share2(params97, w, a) for _, _, w, a in values]
        assert c1.payload() == plain.eval1(prog, s1)
        assert c2.payload() == plain.eval2(prog, s2)

    def test_linear_program_degrees(self, params):
        scheme = VerifiableTwoServerScheme(params)
        sk, _ = scheme.keygen()
        labels = (Label.of("x1"), Label.of("x2"))
        prog = QuadraticProgram(
            params, labels, lin_terms=[LinTerm(1, params.one()), LinTerm(2, params.element(3))]
        )
        c1, c2 = honest_run(scheme, sk, prog, [params.element(4), params.element(5)])
        assert c1 == TagPolynomial.zero(2, params.p)
        assert c2.degree == 2
        assert c2.coefficients[2] == 0
        assert scheme.decrypt(sk, prog, c1, c2) == params.element(19)

    def test_payload_consistency_random(self, params, rng):
        """veval(0) equals the plain evaluation of the tag constants."""
        scheme = VerifiableTwoServerScheme(params)
        plain = TwoServerScheme(params)
        sk, _ = scheme.keygen()
        for _ in range(50):
            n = rng.randint(1, 10)
            prog = random_program(params, n, rng)
            shares = [scheme.encrypt(sk, tau, params.random_element(rng)) for tau in prog.labels]
            c1 = scheme.eval1(prog, [s[0] for s in shares])
            c2 = scheme.eval2(prog, [s[1] for s in shares])
            s1 = [_share1(params, s[0].y1.coefficients[0], s[0].y2.coefficients[0]) for s in shares]
            s2 = [_share2(params, s[1].y3.coefficients[0], s[1].y4.coefficients[0]) for s in shares]
            assert c1.payload() == plain.eval1(prog, s1)
            assert c2.payload() == plain.eval2(prog, s2)

    def test_eval2_opens_to_r2(self, params, rng):
        """C2(s2) = sum alpha [r3_i r4_j + r4_i r3_j] + sum beta r3_k."""
        scheme = VerifiableTwoServerScheme(params)
        sk, _ = scheme.keygen()
        prog = random_program(params, 6, rng)
        c1, c2 = honest_run(scheme, sk, prog, [params.random_element(rng) for _ in range(6)])
        r = [derive_tag_targets(sk.k2, tau, params) for tau in prog.labels]
        expected = params.zero()
        for i, j, alpha in prog.quad_terms:
            expected += alpha * (r[i - 1][2] * r[j - 1][3] + r[i - 1][3] * r[j - 1][2])
        for k, beta in prog.lin_terms:
            expected += beta * r[k - 1][2]
        assert c2.evaluate(sk.s2) == expected
        context = scheme.prepare_verification(sk, prog)
        assert c2.evaluate(sk.s2) == context.r2
        assert c1.evaluate(sk.s1) == context.r1

    def test_evaluated_size_is_constant(self, params, rng):
        scheme = VerifiableTwoServerScheme(params)
        sk, _ = scheme.keygen()
        sizes = set()
        for n in (1, 30):
            labels = [Label.of(f"x{k}") for k in range(n)]
            prog = QuadraticProgram.full_quadratic(labels, params, rng)
            c1, c2 = honest_run(scheme, sk, prog, [params.random_element(rng) for _ in range(n)])
            sizes.add((len(c1.to_bytes()), len(c2.to_bytes())))
        assert sizes == {(1 + 3 * 16, 1 + 3 * 16)}


class TestDecryption:
    def test_honest_runs_accept(self, params, rng):
        """1000 honest runs, n <= 20: all accepted with the plain value."""
        scheme = VerifiableTwoServerScheme(params)
        sk, _ = scheme.keygen()
        for _ in range(1000):
            n = rng.randint(1, 20)
            prog = random_program(params, n, rng)
            m = [params.random_element(rng) for _ in range(n)]
            c1, c2 = honest_run(scheme, sk, prog, m)
            result = scheme.decrypt(sk, prog, c1, c2)
            assert not isinstance(result, Reject)
            assert result == eval_plain(prog, m)

    def test_tampered_constant_rejected(self, params):
        scheme = VerifiableTwoServerScheme(params)
        sk, _ = scheme.keygen()
        prog = product_program(params, "x1", "x2")
        c1, c2 = honest_run(scheme, sk, prog, [params.element(3), params.element(4)])
        tampered = c1 + 1
        result = scheme.decrypt(sk, prog, tampered, c2)
        assert isinstance(result, Reject)
        assert result.reason == RejectReason.FIRST_SERVER.value
        assert not result

        result = scheme.decrypt(sk, prog, c1, c2 + 1)
        assert isinstance(result, Reject)
        assert result.reason == RejectReason.SECOND_SERVER.value

    def test_zero_results_rejected(self, params):
        scheme = VerifiableTwoServerScheme(params)
        sk, _ = scheme.keygen()
        prog = product_program(params, "x1", "x2")
        context = scheme.prepare_verification(sk, prog)
        assert context.r1
        zero = TagPolynomial.zero(2, params.p)
        result = scheme.check(sk, context, zero, zero)
        assert isinstance(result, Reject)
        assert result.reason == RejectReason.BOTH.value

    def test_sides_checked_independently(self, params):
        """An honest C1 next to a zeroed C2 only fails the second equation."""
        scheme = VerifiableTwoServerScheme(params)
        sk, _ = scheme.keygen()
        prog = product_program(params, "x1", "x2")
        c1, _ = honest_run(scheme, sk, prog, [params.element(3), params.element(4)])
        result = scheme.decrypt(sk, prog, c1, TagPolynomial.zero(2, params.p))
        assert isinstance(result, Reject)
        assert result.reason == RejectReason.SECOND_SERVER.value

    def test_wrong_degree_is_parameter_error(self, params):
        scheme = VerifiableTwoServerScheme(params)
        sk, _ = scheme.keygen()
        prog = product_program(params, "x1", "x2")
        short = TagPolynomial.zero(1, params.p)
        with pytest.raises(ParameterError):
            scheme.decrypt(sk, prog, short, short)


class TestForgeryGame:
    def test_no_acceptances(self, params):
        report = ForgeryGame(params, seed=7).run(1000)
        assert report.trials == 1000
        assert report.acceptances == 0
        assert report.rejections == 1000
        assert report.type1_trials == report.type2_trials == 500
        assert report.modulus_bits == 128

    @pytest.mark.slow
    def test_no_acceptances_at_scale(self, params):
        report = ForgeryGame(params, seed=11).run(100_000)
        assert report.acceptances == 0

    def test_small_field_report_is_consistent(self, params97):
        """Over Z_97 forgeries can land; the report still adds up."""
        report = ForgeryGame(params97, seed=3, queries=4).run(400)
        assert report.acceptances + report.rejections == 400
        assert report.acceptances == report.type1_acceptances + report.type2_acceptances
        assert report.type1_trials == report.type2_trials == 200
        assert report.modulus_bits == 7

    def test_analytic_bound(self, params):
        assert analytic_bound(16, params.p) == 2 * 17 / (params.p - 32)
        assert analytic_bound(16, params.p) < 2**-120

    def test_query_count_validated(self, params97):
        with pytest.raises(ParameterError):
            ForgeryGame(params97, queries=1)
        with pytest.raises(ParameterError):
            ForgeryGame(params97, queries=60)
