"""
DCLED - Two-Server Scheme Tests
"""

import itertools
import random
from collections import Counter

import pytest

from app.core.exceptions import DuplicateLabelError, ParameterError
from app.core.field import FieldElement, SchemeParams
from app.core.prf import Label, derive_masks_2s
from app.models.program import LinTerm, QuadraticProgram, QuadTerm, eval_plain
from app.models.shares import Share1, Share2
from app.services.scheme2s_service import TwoServerScheme, simulate_results


def fixed_masks(table: dict[str, tuple[int, int]], params: SchemeParams):
    """Mask provider backed by an explicit label -> (a, b) table."""

    def provider(key, label: Label) -> tuple[FieldElement, FieldElement]:
        a, b = table[label.text()]
        return params.element(a), params.element(b)

    return provider


class FixedRng:
    """Stands in for random.Random when enumerating simulator randomness."""

    def __init__(self, value: int) -> None:
        self.value = value

    def randrange(self, *args: int) -> int:
        return self.value


def random_program(
    params: SchemeParams,
    n: int,
    rng: random.Random,
    labels: tuple[Label, ...] | None = None,
) -> QuadraticProgram:
    """Sparse quadratic program with a random subset of terms."""
    p = params.p
    pairs = [(i, j) for i in range(1, n + 1) for j in range(i, n + 1)]
    quad = [
        QuadTerm(i, j, FieldElement(rng.randrange(p), p))
        for i, j in rng.sample(pairs, min(len(pairs), rng.randint(1, 3 * n)))
    ]
    lin = [
        LinTerm(k, FieldElement(rng.randrange(p), p))
        for k in rng.sample(range(1, n + 1), rng.randint(0, n))
    ]
    labels = labels or tuple(Label.of(f"x{k}") for k in range(n))
    return QuadraticProgram(params, labels, quad, lin, FieldElement(rng.randrange(p), p))


@pytest.fixture
def running97(params97):
    """m = (3, 4), a = (1, 2), b = (5, 6) over Z_97."""
    scheme = TwoServerScheme(params97, fixed_masks({"x1": (1, 5), "x2": (2, 6)}, params97))
    sk, _ = scheme.keygen()
    e = params97.element
    shares = [scheme.encrypt(sk, Label.of("x1"), e(3)), scheme.encrypt(sk, Label.of("x2"), e(4))]
    return scheme, sk, shares


# =============================================================================
# Worked examples
# =============================================================================


class TestExamples:
    def test_keygen(self, params):
        scheme = TwoServerScheme(params)
        (sk1, pk), (sk2, _) = scheme.keygen(), scheme.keygen()
        assert sk1.k.seed != sk2.k.seed
        assert pk.p == 2**128 - 159
        assert pk.p.bit_length() == 128

    def test_encrypt_example(self, params97):
        scheme = TwoServerScheme(params97, fixed_masks({"t": (2, 3)}, params97))
        sk, _ = scheme.keygen()
        c1, c2 = scheme.encrypt(sk, Label.of("t"), params97.element(5))
        assert (c1.u.value, c1.v.value) == (3, 96)
        assert (c2.w.value, c2.a.value) == (2, 2)

    def test_encrypt_zero(self, params97):
        scheme = TwoServerScheme(params97, fixed_masks({"t": (0, 0)}, params97))
        sk, _ = scheme.keygen()
        c1, c2 = scheme.encrypt(sk, Label.of("t"), params97.zero())
        assert c1 == Share1(params97.zero(), params97.zero())
        assert c2 == Share2(params97.zero(), params97.zero())

    def test_mask_provider_receives_secret_key(self, params97):
        seen = []

        def provider(sk, label):
            seen.append((sk, label))
            return params97.element(2), params97.element(3)

        scheme = TwoServerScheme(params97, provider)
        sk, _ = scheme.keygen()
        c1, _ = scheme.encrypt(sk, Label.of("t"), params97.element(5))
        prog = QuadraticProgram.identity("t", params97)
        assert scheme.offset(sk, prog).value == 3
        assert c1.u.value == 3
        assert seen == [(sk, Label.of("t"))] * 2

    def test_encrypt_deterministic(self, params):
        scheme = TwoServerScheme(params)
        sk, _ = scheme.keygen()
        m = params.element(123456789)
        assert scheme.encrypt(sk, Label.of("t"), m) == scheme.encrypt(sk, Label.of("t"), m)

    def test_eval1_example(self, running97, params97):
        scheme, _, shares = running97
        prog = QuadraticProgram(
            params97, (Label.of("x1"), Label.of("x2")), [QuadTerm(1, 2, params97.one())]
        )
        s1 = [s[0] for s in shares]
        assert [s.u.value for s in s1] == [2, 2]
        assert [s.v.value for s in s1] == [93, 93]
        assert scheme.eval1(prog, s1).value == 85

    def test_eval2_example(self, running97, params97):
        scheme, _, shares = running97
        prog = QuadraticProgram(
            params97, (Label.of("x1"), Label.of("x2")), [QuadTerm(1, 2, params97.one())]
        )
        s2 = [s[1] for s in shares]
        assert [s.w.value for s in s2] == [95, 95]
        assert scheme.eval2(prog, s2).value == 91

    def test_decrypt_example(self, running97, params97):
        scheme, sk, shares = running97
        prog = QuadraticProgram(
            params97, (Label.of("x1"), Label.of("x2")), [QuadTerm(1, 2, params97.one())]
        )
        c1 = scheme.eval1(prog, [s[0] for s in shares])
        c2 = scheme.eval2(prog, [s[1] for s in shares])
        assert scheme.decrypt(sk, prog, c1, c2).value == 12

    def test_linear_example(self, running97, params97):
        scheme, sk, shares = running97
        one = params97.one()
        prog = QuadraticProgram(
            params97, (Label.of("x1"), Label.of("x2")), lin_terms=[LinTerm(1, one), LinTerm(2, one)]
        )
        c1 = scheme.eval1(prog, [s[0] for s in shares])
        c2 = scheme.eval2(prog, [s[1] for s in shares])
        assert c1.value == 0
        assert c2.value == 93
        assert scheme.decrypt(sk, prog, c1, c2).value == 7

    def test_constant_program(self, params97):
        scheme = TwoServerScheme(params97)
        sk, _ = scheme.keygen()
        prog = QuadraticProgram.constant(params97.element(7), params97)
        c1, c2 = scheme.eval1(prog, []), scheme.eval2(prog, [])
        assert (c1.value, c2.value) == (0, 0)
        assert scheme.decrypt(sk, prog, c1, c2).value == 7

    def test_all_zero_shares(self, params97):
        scheme = TwoServerScheme(params97)
        zero = params97.zero()
        prog = QuadraticProgram(
            params97, (Label.of("x1"), Label.of("x2")), [QuadTerm(1, 2, params97.element(9))]
        )
        assert scheme.eval1(prog, [Share1(zero, zero)] * 2) == zero


class TestErrors:
    def test_share_count_mismatch(self, running97, params97):
        scheme, _, shares = running97
        prog = QuadraticProgram.identity("x1", params97)
        with pytest.raises(ParameterError):
            scheme.eval1(prog, [s[0] for s in shares])

    def test_duplicate_label_in_dataset(self, params97):
        scheme = TwoServerScheme(params97)
        sk, _ = scheme.keygen()
        e = params97.element
        with pytest.raises(DuplicateLabelError):
            scheme.encrypt_dataset(sk, [(Label.of("x"), e(1)), (Label.of("x"), e(2))])

    def test_message_modulus_mismatch(self, params97, params5):
        scheme = TwoServerScheme(params97)
        sk, _ = scheme.keygen()
        with pytest.raises(ParameterError):
            scheme.encrypt(sk, Label.of("x"), params5.one())


# =============================================================================
# Properties
# =============================================================================


def test_decomposition_identity_exhaustive_z5():
    """(m1-a1)(m2-a2) - (a1-b1)(a2-b2) + a1(m2-b2) + a2(m1-b1) + b1 b2 = m1 m2."""
    p = 5
    for m1, m2, a1, a2, b1, b2 in itertools.product(range(p), repeat=6):
        lhs = (m1 - a1) * (m2 - a2) - (a1 - b1) * (a2 - b2) + a1 * (m2 - b2) + a2 * (m1 - b1)
        assert (lhs + b1 * b2) % p == (m1 * m2) % p


def test_decomposition_identity_random_z97(rng):
    p = 97
    for _ in range(2000):
        m1, m2, a1, a2, b1, b2 = (rng.randrange(p) for _ in range(6))
        lhs = (m1 - a1) * (m2 - a2) - (a1 - b1) * (a2 - b2) + a1 * (m2 - b2) + a2 * (m1 - b1)
        assert (lhs + b1 * b2) % p == (m1 * m2) % p


def test_share_distribution_independent_of_message(params5):
    """Under uniform masks both servers' shares are uniform for any message."""
    label = Label.of("t")
    sk, _ = TwoServerScheme(params5).keygen()
    by_message = {}
    for m in (0, 3):
        first: Counter = Counter()
        second: Counter = Counter()
        for a, b in itertools.product(range(5), repeat=2):
            scheme = TwoServerScheme(params5, fixed_masks({"t": (a, b)}, params5))
            c1, c2 = scheme.encrypt(sk, label, params5.element(m))
            first[(c1.u.value, c1.v.value)] += 1
            second[(c2.w.value, c2.a.value)] += 1
        assert set(first.values()) == {1} and len(first) == 25
        assert set(second.values()) == {1} and len(second) == 25
        by_message[m] = (first, second)
    assert by_message[0] == by_message[3]


@pytest.mark.parametrize("quadratic", [True, False], ids=["quadratic", "linear"])
def test_context_hiding_simulator(params5, quadratic):
    """Simulated (C1, C2) match the real distribution over uniform a."""
    e = params5.element
    labels = (Label.of("x1"), Label.of("x2"))
    if quadratic:
        prog = QuadraticProgram(params5, labels, [QuadTerm(1, 2, e(1))], [LinTerm(1, e(2))], e(1))
    else:
        prog = QuadraticProgram(params5, labels, lin_terms=[LinTerm(1, e(2)), LinTerm(2, e(1))])
    m = (e(3), e(4))
    sk, _ = TwoServerScheme(params5).keygen()
    b = (1, 2)

    real: Counter = Counter()
    for a1, a2 in itertools.product(range(5), repeat=2):
        masks = fixed_masks({"x1": (a1, b[0]), "x2": (a2, b[1])}, params5)
        scheme = TwoServerScheme(params5, masks)
        shares = [scheme.encrypt(sk, tau, mi) for tau, mi in zip(labels, m)]
        c1 = scheme.eval1(prog, [s[0] for s in shares])
        c2 = scheme.eval2(prog, [s[1] for s in shares])
        real[(c1.value, c2.value)] += 1

    value = eval_plain(prog, list(m))
    b_offset = eval_plain(prog, [e(b[0]), e(b[1])])
    simulated: Counter = Counter()
    for r in range(5):
        c1, c2 = simulate_results(prog, value, b_offset, FixedRng(r))
        simulated[(c1.value, c2.value)] += 1

    def normalize(counts: Counter) -> dict:
        total = sum(counts.values())
        return {k: v / total for k, v in counts.items()}

    assert normalize(real) == normalize(simulated)
    for c1, c2 in real:
        assert (c1 + c2 + b_offset.value) % 5 == value.value


def test_succinctness(params, rng):
    """Shares and results have a size set by lambda alone."""
    scheme = TwoServerScheme(params)
    sk, _ = scheme.keygen()
    sizes = set()
    for n in (1, 40):
        labels = [Label.of(f"x{k}") for k in range(n)]
        prog = QuadraticProgram.full_quadratic(labels, params, rng)
        shares = [scheme.encrypt(sk, tau, params.random_element(rng)) for tau in labels]
        c1 = scheme.eval1(prog, [s[0] for s in shares])
        c2 = scheme.eval2(prog, [s[1] for s in shares])
        sizes.add(
            (
                len(shares[0][0].to_bytes()),
                len(shares[0][1].to_bytes()),
                len(c1.to_bytes()),
                len(c2.to_bytes()),
            )
        )
    assert sizes == {(33, 33, 16, 16)}


@pytest.mark.slow
def test_succinctness_at_half_a_million_terms(params, rng):
    scheme = TwoServerScheme(params)
    sk, _ = scheme.keygen()
    labels = [Label.of(f"x{k}") for k in range(1000)]
    prog = QuadraticProgram.full_quadratic(labels, params, rng)
    assert len(prog.quad_terms) == 500_500
    shares = [scheme.encrypt(sk, tau, params.random_element(rng)) for tau in labels]
    c1 = scheme.eval1(prog, [s[0] for s in shares])
    c2 = scheme.eval2(prog, [s[1] for s in shares])
    assert (len(c1.to_bytes()), len(c2.to_bytes())) == (16, 16)


def test_correctness_randomized(params, rng):
    """1000 random sparse programs, n in 1..50, exact equality with plain evaluation."""
    scheme = TwoServerScheme(params)
    sk, _ = scheme.keygen()
    for _ in range(1000):
        n = rng.randint(1, 50)
        prog = random_program(params, n, rng)
        m = [params.random_element(rng) for _ in range(n)]
        shares = [scheme.encrypt(sk, tau, mi) for tau, mi in zip(prog.labels, m)]
        c1 = scheme.eval1(prog, [s[0] for s in shares])
        c2 = scheme.eval2(prog, [s[1] for s in shares])
        assert scheme.decrypt(sk, prog, c1, c2) == eval_plain(prog, m)


def test_correctness_small_field(params97, rng):
    scheme = TwoServerScheme(params97)
    sk, _ = scheme.keygen()
    for _ in range(300):
        n = rng.randint(1, 8)
        prog = random_program(params97, n, rng)
        m = [params97.random_element(rng) for _ in range(n)]
        shares = [scheme.encrypt(sk, tau, mi) for tau, mi in zip(prog.labels, m)]
        c1 = scheme.eval1(prog, [s[0] for s in shares])
        c2 = scheme.eval2(prog, [s[1] for s in shares])
        assert scheme.decrypt(sk, prog, c1, c2) == eval_plain(prog, m)


def test_prf_masks_match_derivation(params):
    scheme = TwoServerScheme(params)
    sk, _ = scheme.keygen()
    m = params.element(10)
    c1, c2 = scheme.encrypt(sk, Label.of("t"), m)
    a, b = derive_masks_2s(sk.k, Label.of("t"), params)
    assert c2.a == a
    assert c1.u == m - a
    assert c1.v == a - b
