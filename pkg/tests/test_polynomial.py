import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from unfolder.errors import UnboundVariable
from unfolder.polynomial import (
    BinaryPolynomial,
    BinaryVar,
    dumps,
    evaluate,
    is_close,
    loads,
    monomial,
    prune,
    variable,
)

X = [BinaryVar.onehot(1, k) for k in range(1, 5)] + [BinaryVar.onehot(2, k) for k in range(1, 5)]


def naive_eval(terms, const, assignment):
    total = const
    for mono, c in terms.items():
        prod = 1
        for v in mono:
            prod *= assignment[v]
        total += c * prod
    return total


polys = st.builds(
    lambda items, c: BinaryPolynomial({tuple(X[i] for i in idx): coef for idx, coef in items}, c),
    st.lists(st.tuples(st.lists(st.integers(0, 7), min_size=1, max_size=4),
                       st.integers(-5, 5).map(float)), max_size=8),
    st.integers(-3, 3).map(float),
)
assignments = st.lists(st.integers(0, 1), min_size=8, max_size=8).map(lambda bits: dict(zip(X, bits)))


class TestBinaryVar:
    def test_order_aux_last(self):
        assert sorted([BinaryVar.aux(1), BinaryVar.onehot(2, 1), BinaryVar.onehot(1, 3)]) == [
            BinaryVar.onehot(1, 3), BinaryVar.onehot(2, 1), BinaryVar.aux(1)
        ]

    def test_text_round_trip(self):
        for v in (BinaryVar.onehot(3, 7), BinaryVar.aux(12)):
            assert BinaryVar.parse(str(v)) == v
        assert str(BinaryVar.onehot(3, 7)) == "t3_a7"
        with pytest.raises(ValueError):
            BinaryVar.parse("q1")


class TestPolynomial:
    def test_idempotent_square(self):
        x = variable(X[0])
        assert x * x == x
        assert monomial([X[1], X[0], X[1]]) == (X[0], X[1])

    def test_zero_coefficients_dropped(self):
        p = BinaryPolynomial({(X[0],): 1.0}) - BinaryPolynomial({(X[0],): 1.0})
        assert p.terms == {} and p.num_terms == 0

    def test_num_terms_counts_constant(self):
        assert BinaryPolynomial({(X[0],): 2.0}, 3.0).num_terms == 2
        assert BinaryPolynomial({}, 0.0).num_terms == 0

    def test_degree(self):
        assert BinaryPolynomial({(X[0], X[1], X[5]): 1.0}).degree == 3

    def test_evaluate_empty_and_constant(self):
        assert evaluate(BinaryPolynomial(), {}) == 0
        assert evaluate(BinaryPolynomial({}, 5.0), {X[0]: 1}) == 5

    def test_unbound(self):
        with pytest.raises(UnboundVariable):
            evaluate(BinaryPolynomial({(X[0], X[1]): 1.0}), {X[0]: 1})

    def test_random_against_naive(self):
        rng = random.Random(3)
        terms = {}
        for _ in range(10):
            mono = monomial(rng.sample(X, rng.randint(1, 4)))
            terms[mono] = terms.get(mono, 0.0) + rng.uniform(-5, 5)
        p = BinaryPolynomial(terms, 1.5)
        for bits in itertools.product((0, 1), repeat=8):
            a = dict(zip(X, bits))
            assert evaluate(p, a) == pytest.approx(naive_eval(terms, 1.5, a), abs=1e-12)

    @settings(max_examples=100, deadline=None)
    @given(polys, polys, assignments)
    def test_ring_homomorphism(self, p, q, a):
        assert evaluate(p + q, a) == pytest.approx(evaluate(p, a) + evaluate(q, a))
        assert evaluate(p * q, a) == pytest.approx(evaluate(p, a) * evaluate(q, a))
        assert evaluate(p - q, a) == pytest.approx(evaluate(p, a) - evaluate(q, a))
        assert evaluate(2.5 * p, a) == pytest.approx(2.5 * evaluate(p, a))

    @settings(max_examples=100, deadline=None)
    @given(polys, polys)
    def test_multilinear_and_canonical(self, p, q):
        for mono, c in (p * q).terms.items():
            assert len(set(mono)) == len(mono)
            assert list(mono) == sorted(mono)
            assert c != 0.0


class TestPrune:
    def test_identity(self):
        p = BinaryPolynomial({(X[0],): 1.0, (X[1],): 0.01}, 4.0)
        assert prune(p, 0.0) == p

    def test_rule(self):
        a, b = X[0], X[1]
        assert prune(BinaryPolynomial({(a,): 1.0, (b,): 0.05}), 0.1) == BinaryPolynomial({(a,): 1.0})

    def test_constant_kept_and_excluded_from_max(self):
        p = BinaryPolynomial({(X[0],): 1.0, (X[1],): 0.5}, 100.0)
        out = prune(p, 0.6)
        assert out.constant == 100.0
        assert dict(out.terms) == {(X[0],): 1.0}

    def test_keep(self):
        p = BinaryPolynomial({(X[0],): 1.0, (X[1],): 0.05})
        assert (X[1],) in prune(p, 0.5, keep={(X[1],)}).terms

    @pytest.mark.parametrize("t", [-0.1, 1.0, 1.5])
    def test_bad_threshold(self, t):
        with pytest.raises(ValueError):
            prune(BinaryPolynomial(), t)

    @settings(max_examples=50, deadline=None)
    @given(polys)
    def test_monotone(self, p):
        counts = [prune(p, t / 10).num_terms for t in range(10)]
        assert counts == sorted(counts, reverse=True)


class TestText:
    def test_round_trip(self):
        p = BinaryPolynomial({(X[0], X[5]): -1.25, (X[2],): 0.1, (BinaryVar.aux(3), X[1]): 7.0}, 2.0)
        text = dumps(p)
        assert text.splitlines()[0] == "2.0"
        assert "-1.25 t1_a1 t2_a2" in text
        assert loads(text) == p

    def test_empty(self):
        assert dumps(BinaryPolynomial()) == ""
        assert loads("") == BinaryPolynomial()

    def test_bad_line(self):
        with pytest.raises(ValueError, match="line 2"):
            loads("1.0\n2.0 zz\n")

    def test_is_close(self):
        p = BinaryPolynomial({(X[0],): 1.0})
        assert is_close(p, BinaryPolynomial({(X[0],): 1.0 + 1e-12}))
        assert not is_close(p, BinaryPolynomial({(X[0],): 1.1}))
