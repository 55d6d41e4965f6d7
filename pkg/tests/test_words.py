import random

import pytest
from hypothesis import given, strategies as st

from concc.words import (
    Alphabet,
    CyclicWord,
    Word,
    WordError,
    all_reduced_words,
    commensurability_key,
    commensurable,
    conjugacy_witness,
    cyclic_reduce,
    free_reduce,
    is_conjugate,
    is_cyclically_reduced,
    is_power_of,
    letter_code,
    primitive_root,
    shortlex_words,
)

import oracles

AB = Alphabet(["a", "b"])


def w(text: str) -> Word:
    return AB.parse_word(text)


# letter strategy over a 2-letter alphabet: signed indices 1, 2
letters = st.lists(st.sampled_from([1, -1, 2, -2]), max_size=12)


class TestReduction:
    def test_cancel_adjacent(self):
        assert free_reduce((1, -1)) == ()
        assert free_reduce((1, 2, -2, -1, 1)) == (1,)

    def test_parse_and_str_round_trip(self):
        for text in ("a b^-1 a a", "1", "b^3", "a^-2 b"):
            assert str(w(text)) == str(w(str(w(text))))

    @given(letters)
    def test_reduce_idempotent(self, ls):
        once = free_reduce(tuple(ls))
        assert free_reduce(once) == once

    @given(letters, letters)
    def test_mul_inverse(self, xs, ys):
        u, v = Word(AB, free_reduce(tuple(xs))), Word(AB, free_reduce(tuple(ys)))
        assert (u * v) * v.inverse() == u
        assert (u * u.inverse()).is_identity

    def test_letter_order_codes(self):
        # a < a^-1 < b < b^-1
        assert [letter_code(l) for l in (1, -1, 2, -2)] == [0, 1, 2, 3]


class TestCyclic:
    def test_cyclic_reduce_round_trip_examples(self):
        core, p = cyclic_reduce(w("a b a^-1"))
        assert str(core) == "b" and str(p) == "a"
        core, p = cyclic_reduce(w("a b b a^-1"))
        assert p * core * p.inverse() == w("a b b a^-1")

    @given(letters)
    def test_cyclic_reduce_invariant(self, ls):
        u = Word(AB, free_reduce(tuple(ls)))
        core, p = cyclic_reduce(u)
        assert p * core * p.inverse() == u
        assert is_cyclically_reduced(core)

    @given(letters)
    def test_canonical_rotation_least(self, ls):
        u = Word(AB, free_reduce(tuple(ls)))
        c = CyclicWord.of(u)
        canon = min(
            (tuple(letter_code(l) for l in r.letters) for r in c.rotations()),
            default=(),
        )
        assert tuple(letter_code(l) for l in c.letters) == canon

    def test_unreduced_input_rejected(self):
        with pytest.raises(WordError):
            CyclicWord(w("a b a^-1"))


class TestConjugacy:
    def test_shift_pair(self):
        assert is_conjugate(w("a b"), w("b a"))
        g = conjugacy_witness(w("a b"), w("b a"))
        assert g * w("a b") * g.inverse() == w("b a")
        assert str(g) == "a^-1"

    def test_inverse_not_conjugate(self):
        assert not is_conjugate(w("a"), w("a^-1"))

    @given(letters, letters)
    def test_witness_or_rotations_disagree(self, us, gs):
        u = Word(AB, free_reduce(tuple(us)))
        g = Word(AB, free_reduce(tuple(gs)))
        v = g * u * g.inverse()
        got = conjugacy_witness(u, v)
        assert got is not None
        assert got * u * got.inverse() == v

    @given(letters, letters)
    def test_agrees_with_rotation_oracle(self, us, vs):
        u = Word(AB, free_reduce(tuple(us)))
        v = Word(AB, free_reduce(tuple(vs)))
        assert is_conjugate(u, v) == oracles.rotation_conjugate(u, v)


class TestPrimitiveRoot:
    def test_examples(self):
        root, e = primitive_root(w("a b a b"))
        assert str(root) == "a b" and e == 2
        _, e = primitive_root(w("a b"))
        assert e == 1
        with pytest.raises(WordError):
            primitive_root(w("1"))

    @given(letters, st.integers(min_value=1, max_value=4))
    def test_power_recovers(self, ls, k):
        u = Word(AB, free_reduce(tuple(ls)))
        if u.is_identity:
            return
        root, e = primitive_root(u**k)
        assert root**e == u**k
        assert primitive_root(root)[1] == 1
        assert is_power_of(u**k, root) == e


class TestCommensurability:
    def test_basic_relations(self):
        assert commensurable(w("a b"), w("b a")).related
        assert commensurable(w("a b"), w("a b a b")).related
        assert commensurable(w("a"), w("a^-1")).related  # inverse counts
        assert not commensurable(w("a"), w("b")).related

    def test_witness_verifies(self):
        c = commensurable(w("a b a b"), w("b a"))
        assert c.related and c.verify()

    @given(letters, letters)
    def test_symmetric(self, us, vs):
        u = Word(AB, free_reduce(tuple(us)))
        v = Word(AB, free_reduce(tuple(vs)))
        if u.is_identity or v.is_identity:
            return
        assert commensurable(u, v).related == commensurable(v, u).related

    @given(letters, letters)
    def test_key_invariant(self, us, vs):
        u = Word(AB, free_reduce(tuple(us)))
        v = Word(AB, free_reduce(tuple(vs)))
        if u.is_identity or v.is_identity:
            return
        same_key = commensurability_key(u) == commensurability_key(v)
        assert same_key == commensurable(u, v).related

    def test_brute_sample_agreement(self):
        # the exhaustive version runs in the acceptance suite
        oracle = oracles.BruteCommensurability(AB, conj_radius=4, exp_bound=4)
        rng = random.Random(11)
        words = [u for u in all_reduced_words(AB, 3) if not u.is_identity]
        for _ in range(300):
            u, v = rng.choice(words), rng.choice(words)
            assert commensurable(u, v).related == oracle.related(u, v)


class TestEnumeration:
    def test_shortlex_prefix(self):
        import itertools

        first = [
            str(x)
            for x in itertools.islice(shortlex_words(AB, include_identity=True), 5)
        ]
        assert first == ["1", "a", "a^-1", "b", "b^-1"]

    def test_all_reduced_counts(self):
        n = sum(1 for _ in all_reduced_words(AB, 3))
        assert n == 1 + 4 + 12 + 36
