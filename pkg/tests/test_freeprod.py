"""Free products with pluggable factors, path audits, and the power probe."""

import random

import pytest

from concc import freeprod as fp
from concc import hnn
from concc.words import Alphabet

X = Alphabet(["x1", "x2"])


def make_ctx():
    return fp.FreeProductCtx(
        [fp.FreeAbelianFactor("A", 1), fp.CyclicFactor("B", 5), fp.KleinBottleFactor("K")],
        X,
    )


def rand_elem(ctx, rng, n=5):
    e = ctx.identity()
    factors = [ctx.factor(lab) for lab in ("A", "B", "K")]
    for _ in range(n):
        if rng.random() < 0.4:
            e = ctx.mul(e, ctx.free_word([rng.choice([1, -1, 2, -2])]))
        else:
            f = rng.choice(factors)
            e = ctx.mul(e, ctx.syllable(f.label, f.sample(rng)))
    return e


class TestFactors:
    def test_cyclic_arithmetic(self):
        B = fp.CyclicFactor("B", 5)
        assert B.multiply(3, 4) == 2
        assert B.inverse(2) == 3
        assert B.power(1, 7) == 2
        assert B.is_identity(B.multiply(2, 3))
        assert B.has_finite_order(1)

    def test_free_abelian_arithmetic(self):
        A = fp.FreeAbelianFactor("A", 2)
        assert A.multiply((1, 2), (3, -5)) == (4, -3)
        assert A.inverse((1, -2)) == (-1, 2)
        assert not A.has_finite_order((0, 1))
        assert A.has_finite_order((0, 0))

    def test_klein_multiplication_twists(self):
        K = fp.KleinBottleFactor("K")
        # passing a past the flip generator inverts it
        assert K.multiply((0, 1), (1, 0)) == (-1, 1)
        assert K.multiply((1, 0), (0, 1)) == (1, 1)
        p = (3, 1)
        assert K.is_identity(K.multiply(p, K.inverse(p)))

    def test_klein_agrees_with_britton_engine(self):
        K = fp.KleinBottleFactor("K")
        tower = hnn.klein_bottle_tower()
        rng = random.Random(7)
        A2 = K.word_alphabet
        for _ in range(40):
            letters = []
            for _ in range(rng.randint(0, 6)):
                l = rng.choice([1, -1, 2, -2])
                if letters and l == -letters[-1]:
                    l = -l
                letters.append(l)
            w = A2.word(letters)
            p = K.from_word(w)  # raises internally on any normal-form mismatch
            q = K.sample(rng)
            r = K.multiply(p, q)
            lhs = w * A2.parse_word(K.format(q))
            check = tower.parse(str(lhs)) * tower.parse(K.format(r)).inverse()
            assert hnn.is_trivial(check).is_yes

    def test_klein_conjugacy_matches_brute_scan(self):
        K = fp.KleinBottleFactor("K")
        rng = random.Random(11)

        def brute(p, q):
            for xx in range(-6, 7):
                for yy in range(-3, 4):
                    c = (xx, yy)
                    if K.multiply(K.multiply(c, p), K.inverse(c)) == q:
                        return c
            return None

        for _ in range(120):
            p = (rng.randint(-4, 4), rng.randint(-2, 2))
            q = (rng.randint(-4, 4), rng.randint(-2, 2))
            got = K.conjugating(p, q)
            assert (got is None) == (brute(p, q) is None)
            if got is not None:
                assert K.multiply(K.multiply(got, p), K.inverse(got)) == q

    def test_parse_format_round_trip(self):
        K = fp.KleinBottleFactor("K")
        for p in ((0, 0), (2, 1), (-3, -2), (1, 4)):
            assert K.parse(K.format(p)) == p
        B = fp.CyclicFactor("B", 5)
        assert B.parse(B.format(3)) == 3


class TestContext:
    def test_normal_form_and_group_laws(self):
        ctx = make_ctx()
        rng = random.Random(13)
        for _ in range(60):
            a, b, c = (rand_elem(ctx, rng) for _ in range(3))
            for e in (a, b, c):
                for i, (lab, payload) in enumerate(e):
                    if lab is None:
                        assert payload and fp.free_reduce(tuple(payload)) == tuple(payload)
                    else:
                        assert not ctx.factor(lab).is_identity(payload)
                    if i:
                        assert e[i - 1][0] != lab
            assert ctx.mul(ctx.mul(a, b), c) == ctx.mul(a, ctx.mul(b, c))
            assert ctx.mul(a, ctx.inv(a)) == ()
            assert ctx.pow(a, 3) == ctx.mul(a, ctx.mul(a, a))
            assert ctx.pow(a, -2) == ctx.inv(ctx.mul(a, a))

    def test_cross_factor_merge(self):
        ctx = make_ctx()
        g = ctx.mul(ctx.syllable("A", (2,)), ctx.syllable("A", (-2,)))
        assert g == ()
        h = ctx.mul(ctx.free_word([1]), ctx.free_word([-1, 2]))
        assert h == ctx.free_word([2])

    def test_format_and_parse_path_round_trip(self):
        ctx = make_ctx()
        text = "x1 [A: 2] x2^-1 [K: a t]"
        path = fp.parse_path(ctx, text)
        assert len(path.letters) == 4
        g = path.product()
        assert "[K:" in ctx.format_element(g)
        assert fp.parse_path(ctx, text).product() == g

    def test_parse_path_rejects_garbage(self):
        ctx = make_ctx()
        with pytest.raises(fp.FreeProductError):
            fp.parse_path(ctx, "[A: 2")
        with pytest.raises(fp.FreeProductError):
            fp.parse_path(ctx, "[Z: 2]")
        with pytest.raises(fp.FreeProductError):
            fp.parse_path(ctx, "[A 2]")

    def test_duplicate_labels_rejected(self):
        with pytest.raises(fp.FreeProductError):
            fp.FreeProductCtx(
                [fp.CyclicFactor("A", 2), fp.FreeAbelianFactor("A", 1)], X
            )

    def test_cyclic_syllable_reduce_invariant(self):
        ctx = make_ctx()
        rng = random.Random(17)
        for _ in range(100):
            g = rand_elem(ctx, rng, rng.randint(1, 6))
            if g == ():
                continue
            core, conj = fp._cyclic_syllable_reduce(ctx, g)
            assert ctx.product([conj, core, ctx.inv(conj)]) == g
            if len(core) >= 2:
                assert core[0][0] != core[-1][0]


class TestHyperbolicity:
    def test_mixed_words_are_hyperbolic(self):
        ctx = make_ctx()
        for k1 in (1, 3, 10):
            for k2 in (1, 7):
                g = ctx.product([
                    ctx.syllable("A", (k1,)), ctx.free_word([1]),
                    ctx.syllable("A", (k2,)), ctx.free_word([2]),
                ])
                rep = fp.hyperbolicity_report(g, ctx)
                assert rep.hyperbolic and rep.infinite_order

    def test_conjugated_factor_element_is_parabolic(self):
        ctx = make_ctx()
        g = ctx.mul(ctx.free_word([1]),
                    ctx.mul(ctx.syllable("A", (2,)), ctx.free_word([-1])))
        rep = fp.hyperbolicity_report(g, ctx)
        assert not rep.hyperbolic
        assert rep.infinite_order
        assert rep.factor_label == "A"

    def test_finite_order_parabolic(self):
        ctx = make_ctx()
        rep = fp.hyperbolicity_report(ctx.syllable("B", 2), ctx)
        assert not rep.hyperbolic and not rep.infinite_order

    def test_identity_rejected(self):
        ctx = make_ctx()
        with pytest.raises(fp.FreeProductError):
            fp.hyperbolicity_report((), ctx)


class TestConjugacy:
    def test_witness_always_verifies_and_brute_never_beats_us(self):
        ctx = make_ctx()
        rng = random.Random(19)
        pool = [ctx.free_word([1]), ctx.free_word([2]), ctx.syllable("A", (1,)),
                ctx.syllable("B", 1), ctx.syllable("K", (1, 0)), ctx.syllable("K", (0, 1))]
        pool += [ctx.inv(p) for p in pool]

        def brute(u, v, depth=3):
            seen = {(): None}
            frontier = [()]
            for _ in range(depth):
                new = []
                for g in frontier:
                    for p in pool:
                        h = ctx.mul(g, p)
                        if h not in seen:
                            seen[h] = None
                            new.append(h)
                frontier = new
            return any(ctx.conj(g, u) == v for g in seen)

        for _ in range(50):
            u = rand_elem(ctx, rng, rng.randint(1, 3))
            if rng.random() < 0.5:
                v = ctx.conj(rand_elem(ctx, rng, 2), u)
            else:
                v = rand_elem(ctx, rng, rng.randint(1, 3))
            got = fp.conjugacy_witness_fp(ctx, u, v)
            if got is not None:
                assert ctx.conj(got, u) == v
            elif brute(u, v):
                pytest.fail(f"missed conjugacy: {ctx.format_element(u)}"
                            f" ~ {ctx.format_element(v)}")

    def test_rotation_pair(self):
        ctx = make_ctx()
        u = ctx.mul(ctx.syllable("A", (1,)), ctx.free_word([1]))
        v = ctx.mul(ctx.free_word([1]), ctx.syllable("A", (1,)))
        g = fp.conjugacy_witness_fp(ctx, u, v)
        assert g is not None and ctx.conj(g, u) == v
        assert fp.is_conjugate_fp(ctx, u, v)

    def test_parabolic_delegates_to_factor(self):
        ctx = make_ctx()
        u = ctx.syllable("K", (2, 0))
        v = ctx.syllable("K", (-2, 0))  # conjugate by the flip generator
        g = fp.conjugacy_witness_fp(ctx, u, v)
        assert g is not None and ctx.conj(g, u) == v
        assert fp.conjugacy_witness_fp(ctx, u, ctx.syllable("K", (3, 0))) is None


class TestPaths:
    def test_membership_table(self):
        ctx = make_ctx()
        mk = lambda *ls: fp.SyllablePath(ctx, tuple(ls))
        h = ctx.h_letter
        x = ctx.x_letter
        assert fp.check_W_membership(mk())
        assert fp.check_W_membership(mk(x("x1")))
        assert fp.check_W_membership(mk(h("A", (2,))))
        assert fp.check_W_membership(mk(h("A", (1,)), x("x1"), h("A", (2,))))
        assert fp.check_W_membership(mk(h("A", (1,)), h("B", 2)))
        assert not fp.check_W_membership(mk(h("A", (1,)), h("A", (2,))))
        assert not fp.check_W_membership(mk(x("x1"), x("x2")))
        assert not fp.check_W_membership(mk(h("A", (1,)), h("A", (3,)), h("A", (2,))))

    def test_identity_run_is_ill_formed(self):
        ctx = make_ctx()
        p = fp.SyllablePath(ctx, (ctx.h_letter("A", (1,)), ctx.h_letter("A", (-1,))))
        with pytest.raises(fp.FreeProductError, match="ill-formed"):
            fp.path_components(p)

    def test_components_merge_runs(self):
        ctx = make_ctx()
        p = fp.SyllablePath(ctx, (
            ctx.h_letter("A", (1,)), ctx.h_letter("A", (2,)),
            ctx.x_letter("x1"), ctx.h_letter("B", 1),
        ))
        comps = fp.path_components(p)
        assert [c.factor_label for c in comps] == ["A", "B"]
        assert comps[0].payload == (3,)
        assert (comps[0].start, comps[0].end) == (0, 2)

    def test_connectivity_pairs_mirror_components(self):
        ctx = make_ctx()
        p = fp.SyllablePath(ctx, (
            ctx.h_letter("A", (2,)), ctx.x_letter("x1"),
            ctx.x_letter("x1", -1), ctx.h_letter("A", (-2,)),
        ))
        rep = fp.connectivity(p)
        assert len(rep.components) == 2
        assert rep.isolated_count == 0
        assert len(rep.classes) == 1

    def test_connectivity_requires_cycle(self):
        ctx = make_ctx()
        with pytest.raises(fp.FreeProductError, match="closed path"):
            fp.connectivity(fp.SyllablePath(ctx, (ctx.x_letter("x1"),)))

    def test_trivial_cycles_have_no_isolated_components(self):
        ctx = make_ctx()
        rng = random.Random(23)
        for _ in range(500):
            path = fp.random_trivial_cycle(ctx, rng, size=rng.randint(4, 16))
            assert path.is_cycle()
            assert fp.connectivity(path).isolated_count == 0

    def test_admissible_word_components_lie_in_distinct_cosets(self):
        ctx = make_ctx()
        rng = random.Random(29)
        for _ in range(300):
            q = fp.random_admissible_word(ctx, rng, blocks=rng.randint(1, 6))
            assert fp.check_W_membership(q)
            comps = fp.path_components(q)
            vs = q.vertices()
            keys = [(c.factor_label, fp._coset_key(ctx, vs[c.start], c.factor_label))
                    for c in comps]
            assert len(set(keys)) == len(keys)


class TestRegularity:
    def test_mirrored_instances_are_clean(self):
        ctx = make_ctx()
        rng = random.Random(31)
        for _ in range(150):
            r, q, rp, qp = fp.mirrored_instance(ctx, rng)
            rep = fp.regularity_audit(ctx, r, q, rp, qp)
            assert rep.constant <= 1
            assert rep.bound_ok
            assert rep.irregular_count == 0
            assert rep.pair_violations == 0

    def test_segment_slicing(self):
        ctx = make_ctx()
        rng = random.Random(37)
        r, q, rp, qp = fp.mirrored_instance(ctx, rng)
        rep = fp.regularity_audit(ctx, r, q, rp, qp)
        assert set(rep.segments) == {"r", "q", "r'", "q'"}
        total = sum(b - a for a, b in rep.segments.values())
        assert total == len(r) + len(q) + len(rp) + len(qp)


class TestPowerProbe:
    def abelian_setup(self):
        ctx = fp.FreeProductCtx([fp.FreeAbelianFactor("A", 1)], X)
        t = ctx.free_word([1])
        gamma, beta = (2,), (3,)
        u = ctx.product([ctx.syllable("A", gamma), t, ctx.syllable("A", beta)])
        return ctx, t, u, fp.TwistSpec(gamma=gamma, beta=beta, xi=1, eps=1)

    def klein_setup(self):
        ctx = fp.FreeProductCtx([fp.KleinBottleFactor("K")], X)
        t = ctx.free_word([1])
        gamma = beta = (0, 1)
        u = ctx.product([ctx.syllable("K", gamma), t, ctx.syllable("K", beta)])
        return ctx, t, u, fp.TwistSpec(gamma=gamma, beta=beta, xi=1, eps=-1)

    def test_abelian_straight_twist(self):
        ctx, t, u, tw = self.abelian_setup()
        rep = fp.commensuration_probe(ctx, "A", (1,), t, u, range(1, 9), twist=tw)
        assert rep.all_found and rep.all_verified
        assert all(r.exponents == (1, 1) for r in rep.rows)
        assert all(r.predicted_eta == 1 for r in rep.rows)

    def test_klein_flip_twist(self):
        ctx, t, u, tw = self.klein_setup()
        rep = fp.commensuration_probe(ctx, "K", (1, 0), t, u, range(1, 9), twist=tw)
        assert rep.all_found and rep.all_verified
        assert all(r.predicted_eta == -1 for r in rep.rows)

    def test_inverse_letter_variants(self):
        ctx, t, _, _ = self.abelian_setup()
        gamma, beta = (2,), (3,)
        u = ctx.product([ctx.syllable("A", gamma), ctx.inv(t), ctx.syllable("A", beta)])
        tw = fp.TwistSpec(gamma=gamma, beta=beta, xi=-1, eps=1)
        rep = fp.commensuration_probe(ctx, "A", (1,), t, u, range(1, 6), twist=tw)
        assert rep.all_found and rep.all_verified

        ctxk, tk, _, _ = self.klein_setup()
        gk = (0, 1)
        uk = ctxk.product([ctxk.syllable("K", gk), ctxk.inv(tk), ctxk.syllable("K", gk)])
        twk = fp.TwistSpec(gamma=gk, beta=gk, xi=-1, eps=-1)
        repk = fp.commensuration_probe(ctxk, "K", (1, 0), tk, uk, range(1, 6), twist=twk)
        assert repk.all_found and repk.all_verified

    def test_unrelated_element_reports_nothing(self):
        ctx, t, _, _ = self.abelian_setup()
        u_bad = ctx.product([ctx.syllable("A", (1,)), ctx.free_word([2]),
                             ctx.syllable("A", (1,)), ctx.free_word([1])])
        rep = fp.commensuration_probe(ctx, "A", (1,), t, u_bad, range(1, 4), exp_bound=3)
        assert not any(r.found for r in rep.rows)
        assert not rep.all_found

    def test_dishonest_twist_rejected(self):
        ctx, t, u, _ = self.abelian_setup()
        with pytest.raises(fp.FreeProductError):
            fp.commensuration_probe(ctx, "A", (1,), t, u, [1],
                                    twist=fp.TwistSpec((9,), (3,), 1, 1))

    def test_aligned_runs_are_mirror_monotone(self):
        for setup, lab, a in ((self.abelian_setup, "A", (1,)),
                              (self.klein_setup, "K", (1, 0))):
            ctx, t, u, _ = setup()
            for k, l in ((2, 2), (3, 3)):
                r, q, rp, qp = fp.aligned_power_instance(ctx, lab, a, t, u, k, l)
                rep = fp.regularity_audit(ctx, r, q, rp, qp)
                pairs = rep.matched_pairs
                runs = fp.matched_run_lengths(rep)
                assert len(pairs) >= 2
                assert all(pairs[i + 1][1] < pairs[i][1] for i in range(len(pairs) - 1))
                assert max(runs) >= 2
