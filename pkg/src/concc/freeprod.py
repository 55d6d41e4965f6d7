"""Free products of pluggable factor groups and the path combinatorics over them.

Elements are alternating syllable tuples ``(label, payload)``; ``label`` is
a factor's name or None for a chunk of the free part, and payloads are
whatever the factor oracle works with (ints, vectors, free-group words,
Klein bottle normal forms).  Multiplication is the usual stack merge, so a
tuple IS the normal form and equality is tuple equality.

Paths are sequences of letters, each a free-part generator or a nonidentity
factor element.  The objects of interest are a path's components (maximal
same-factor letter runs), which components of a closed path land in a
common coset of their factor, and which stay isolated.  Coset membership is
read off normal forms exactly, so the audits in this module test the
combinatorial statements rather than assume them.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterable, Sequence

from . import hnn
from .words import Alphabet, Word, WordError, free_reduce

Payload = object
Syllable = tuple  # (label: str | None, payload)
Element = tuple  # tuple of syllables, normal form
Letter = tuple  # ('x', signed index) | ('h', label, payload)


class FreeProductError(ValueError):
    """Malformed elements, letters, paths, or factor lookups."""


class Factor:
    """Interface each peripheral factor implements; label must be unique."""

    label: str

    def identity(self) -> Payload:
        raise NotImplementedError

    def multiply(self, p: Payload, q: Payload) -> Payload:
        raise NotImplementedError

    def inverse(self, p: Payload) -> Payload:
        raise NotImplementedError

    def is_identity(self, p: Payload) -> bool:
        raise NotImplementedError

    def power(self, p: Payload, n: int) -> Payload:
        out = self.identity()
        base = p if n >= 0 else self.inverse(p)
        for _ in range(abs(n)):
            out = self.multiply(out, base)
        return out

    def equal(self, p: Payload, q: Payload) -> bool:
        return self.is_identity(self.multiply(p, self.inverse(q)))

    def has_finite_order(self, p: Payload) -> bool:
        raise NotImplementedError

    def conjugating(self, p: Payload, q: Payload) -> Payload | None:
        """c with c p c^-1 = q inside the factor, or None."""
        raise NotImplementedError

    def format(self, p: Payload) -> str:
        raise NotImplementedError

    def parse(self, text: str) -> Payload:
        raise NotImplementedError

    def sample(self, rng: random.Random) -> Payload:
        raise NotImplementedError


class CyclicFactor(Factor):
    """Z/m written additively; payloads are residues."""

    def __init__(self, label: str, modulus: int):
        if modulus < 2:
            raise FreeProductError("cyclic factor needs modulus >= 2")
        self.label = label
        self.modulus = modulus

    def identity(self):
        return 0

    def multiply(self, p, q):
        return (p + q) % self.modulus

    def inverse(self, p):
        return (-p) % self.modulus

    def is_identity(self, p):
        return p % self.modulus == 0

    def has_finite_order(self, p):
        return True

    def conjugating(self, p, q):
        return 0 if (p - q) % self.modulus == 0 else None

    def format(self, p):
        return str(p % self.modulus)

    def parse(self, text):
        return int(text) % self.modulus

    def sample(self, rng):
        return rng.randrange(1, self.modulus)


class FreeAbelianFactor(Factor):
    """Z^r; payloads are integer tuples of length r."""

    def __init__(self, label: str, rank: int):
        if rank < 1:
            raise FreeProductError("free abelian factor needs rank >= 1")
        self.label = label
        self.rank = rank

    def identity(self):
        return (0,) * self.rank

    def multiply(self, p, q):
        return tuple(a + b for a, b in zip(p, q))

    def inverse(self, p):
        return tuple(-a for a in p)

    def is_identity(self, p):
        return all(a == 0 for a in p)

    def has_finite_order(self, p):
        return self.is_identity(p)

    def conjugating(self, p, q):
        return self.identity() if p == q else None

    def format(self, p):
        return ",".join(str(a) for a in p) if self.rank > 1 else str(p[0])

    def parse(self, text):
        parts = [int(t) for t in text.split(",")]
        if len(parts) != self.rank:
            raise FreeProductError(f"expected {self.rank} coordinates, got {text!r}")
        return tuple(parts)

    def sample(self, rng):
        while True:
            p = tuple(rng.randint(-3, 3) for _ in range(self.rank))
            if not self.is_identity(p):
                return p


class FreeFactor(Factor):
    """Free group on its own alphabet; payloads are reduced Words."""

    def __init__(self, label: str, alphabet: Alphabet):
        self.label = label
        self.alphabet = alphabet

    def identity(self):
        return self.alphabet.identity()

    def multiply(self, p: Word, q: Word):
        return p * q

    def inverse(self, p: Word):
        return p.inverse()

    def is_identity(self, p: Word):
        return p.is_identity

    def has_finite_order(self, p):
        return self.is_identity(p)

    def conjugating(self, p, q):
        from .words import conjugacy_witness

        return conjugacy_witness(p, q)

    def format(self, p: Word):
        return str(p)

    def parse(self, text):
        return self.alphabet.parse_word(text)

    def sample(self, rng):
        letters = []
        for _ in range(rng.randint(1, 2)):
            l = rng.choice(self.alphabet.letters_in_order())
            if letters and l == -letters[-1]:
                l = -l
            letters.append(l)
        return self.alphabet.word(letters)


class KleinBottleFactor(Factor):
    """Fundamental group of the Klein bottle: <a, t | t a t^-1 = a^-1>.

    Torsion-free and non-abelian, with t conjugating a to its inverse;
    payloads are the normal-form pairs (p, q) for a^p t^q.  Every
    conversion from a word is cross-checked against Britton reduction in
    the matching HNN tower, so the closed-form arithmetic never drifts
    from the honest word problem.
    """

    def __init__(self, label: str):
        self.label = label
        self.tower = hnn.klein_bottle_tower()
        self.word_alphabet = Alphabet(["a", "t"])

    def identity(self):
        return (0, 0)

    def multiply(self, p, q):
        (p1, q1), (p2, q2) = p, q
        return (p1 + (p2 if q1 % 2 == 0 else -p2), q1 + q2)

    def inverse(self, p):
        (a, q) = p
        return (-a if q % 2 == 0 else a, -q)

    def is_identity(self, p):
        return p == (0, 0)

    def has_finite_order(self, p):
        # the group is torsion-free
        return self.is_identity(p)

    def conjugating(self, p, q):
        (pa, pq), (qa, qq) = p, q
        if pq != qq:
            return None
        if pq % 2 == 0:
            # conjugates of a^p t^q, q even: exponent flips with the twist
            if qa == pa:
                return (0, 0)
            if qa == -pa:
                return (0, 1)
            return None
        # q odd: conjugation by a^x shifts the a-exponent by 2x, twist negates
        if (qa - pa) % 2 == 0:
            return ((qa - pa) // 2, 0)
        return None

    def format(self, p):
        (a, q) = p
        parts = []
        if a:
            parts.append(f"a^{a}" if a != 1 else "a")
        if q:
            parts.append(f"t^{q}" if q != 1 else "t")
        return " ".join(parts) if parts else "1"

    def parse(self, text):
        return self.from_word(self.word_alphabet.parse_word(text))

    def from_word(self, w: Word) -> Payload:
        """Normal form of a word in a, t; certified against the HNN engine."""
        out = (0, 0)
        gens = {1: (1, 0), -1: (-1, 0), 2: (0, 1), -2: (0, -1)}
        for l in w.letters:
            out = self.multiply(out, gens[l])
        check = (
            self.tower.parse(str(w)) * self.tower.parse(self.format(out)).inverse()
        )
        if not hnn.is_trivial(check).is_yes:
            raise FreeProductError(
                f"normal-form arithmetic for {w} disagrees with Britton reduction"
            )
        return out

    def sample(self, rng):
        while True:
            p = (rng.randint(-2, 2), rng.randint(-2, 2))
            if p != (0, 0):
                return p


class FreeProductCtx:
    """Factors plus an optional free part; owns all element arithmetic."""

    def __init__(self, factors: Sequence[Factor], free_alphabet: Alphabet | None = None):
        labels = [f.label for f in factors]
        if len(set(labels)) != len(labels):
            raise FreeProductError(f"duplicate factor labels in {labels}")
        if not factors and free_alphabet is None:
            raise FreeProductError("need at least one factor or a free part")
        self.factors = tuple(factors)
        self.by_label: dict[str, Factor] = {f.label: f for f in factors}
        self.free_alphabet = free_alphabet

    def factor(self, label: str) -> Factor:
        if label not in self.by_label:
            raise FreeProductError(f"unknown factor {label!r}")
        return self.by_label[label]

    # -- elements ---------------------------------------------------------

    def identity(self) -> Element:
        return ()

    def syllable(self, label: str, payload) -> Element:
        f = self.factor(label)
        if f.is_identity(payload):
            return ()
        return ((label, payload),)

    def free_word(self, letters: Iterable[int] | Word | str) -> Element:
        if self.free_alphabet is None:
            raise FreeProductError("this product has no free part")
        if isinstance(letters, str):
            w = self.free_alphabet.parse_word(letters)
        elif isinstance(letters, Word):
            w = letters
        else:
            w = self.free_alphabet.word(letters)
        return ((None, w.letters),) if w.letters else ()

    def mul(self, a: Element, b: Element) -> Element:
        out = list(a)
        for syl in b:
            if out and out[-1][0] == syl[0]:
                lab = syl[0]
                if lab is None:
                    comb = free_reduce(out[-1][1] + syl[1])
                    out.pop()
                    if comb:
                        out.append((None, comb))
                else:
                    f = self.by_label[lab]
                    comb = f.multiply(out[-1][1], syl[1])
                    out.pop()
                    if not f.is_identity(comb):
                        out.append((lab, comb))
            else:
                out.append(syl)
        return tuple(out)

    def product(self, parts: Iterable[Element]) -> Element:
        out: Element = ()
        for p in parts:
            out = self.mul(out, p)
        return out

    def inv(self, a: Element) -> Element:
        out = []
        for lab, payload in reversed(a):
            if lab is None:
                out.append((None, tuple(-l for l in reversed(payload))))
            else:
                out.append((lab, self.by_label[lab].inverse(payload)))
        return tuple(out)

    def pow(self, a: Element, n: int) -> Element:
        out: Element = ()
        base = a if n >= 0 else self.inv(a)
        for _ in range(abs(n)):
            out = self.mul(out, base)
        return out

    def conj(self, g: Element, a: Element) -> Element:
        """g a g^-1."""
        return self.mul(self.mul(g, a), self.inv(g))

    def format_element(self, a: Element) -> str:
        if not a:
            return "1"
        parts = []
        for lab, payload in a:
            if lab is None:
                parts.append(str(Word(self.free_alphabet, payload)))
            else:
                parts.append(f"[{lab}: {self.by_label[lab].format(payload)}]")
        return " ".join(parts)

    # -- letters and paths ------------------------------------------------

    def x_letter(self, name: str, sign: int = 1) -> Letter:
        if self.free_alphabet is None:
            raise FreeProductError("this product has no free part")
        return ("x", self.free_alphabet.letter(name, sign))

    def h_letter(self, label: str, payload) -> Letter:
        f = self.factor(label)
        if f.is_identity(payload):
            raise FreeProductError(
                f"factor letter in {label!r} carries the identity; not a letter"
            )
        return ("h", label, payload)

    def letter_inverse(self, letter: Letter) -> Letter:
        if letter[0] == "x":
            return ("x", -letter[1])
        _, lab, payload = letter
        return ("h", lab, self.by_label[lab].inverse(payload))

    def letter_element(self, letter: Letter) -> Element:
        if letter[0] == "x":
            return ((None, (letter[1],)),)
        return self.syllable(letter[1], letter[2])

    def format_letter(self, letter: Letter) -> str:
        if letter[0] == "x":
            return self.free_alphabet.letter_str(letter[1])
        _, lab, payload = letter
        return f"[{lab}: {self.by_label[lab].format(payload)}]"


@dataclass(frozen=True)
class SyllablePath:
    """Edge path: a letter sequence read from a base vertex."""

    ctx: FreeProductCtx
    letters: tuple[Letter, ...]
    base: Element = ()

    def vertices(self) -> list[Element]:
        vs = [self.base]
        for letter in self.letters:
            vs.append(self.ctx.mul(vs[-1], self.ctx.letter_element(letter)))
        return vs

    def product(self) -> Element:
        return self.ctx.product(self.ctx.letter_element(l) for l in self.letters)

    def is_cycle(self) -> bool:
        return self.product() == ()

    def __str__(self) -> str:
        return " ".join(self.ctx.format_letter(l) for l in self.letters) or "1"


def parse_path(ctx: FreeProductCtx, text: str, base: Element = ()) -> SyllablePath:
    """Parse ``x1 [A: 2] x2^-1 [K: a t]`` style path labels."""
    letters: list[Letter] = []
    i = 0
    text = text.strip()
    while i < len(text):
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch == "[":
            j = text.find("]", i)
            if j < 0:
                raise FreeProductError(f"unterminated factor letter at {i}")
            inner = text[i + 1 : j]
            lab, sep, payload_text = inner.partition(":")
            if not sep:
                raise FreeProductError(f"factor letter {inner!r} lacks a ':'")
            lab = lab.strip()
            payload = ctx.factor(lab).parse(payload_text.strip())
            letters.append(ctx.h_letter(lab, payload))
            i = j + 1
            continue
        j = i
        while j < len(text) and not text[j].isspace() and text[j] != "[":
            j += 1
        tok = text[i:j]
        name, _, exp_s = tok.partition("^")
        try:
            exp = int(exp_s) if exp_s else 1
        except ValueError:
            raise FreeProductError(f"bad exponent in {tok!r}") from None
        for _ in range(abs(exp)):
            letters.append(ctx.x_letter(name, 1 if exp > 0 else -1))
        i = j
    return SyllablePath(ctx, tuple(letters), base)


@dataclass
class Component:
    """Maximal run of same-factor letters; label is the run's product."""

    factor_label: str
    start: int
    end: int  # exclusive letter index
    payload: Payload
    segment: str = ""
    coset_key: Element | None = None


def path_components(path: SyllablePath, segment: str = "") -> list[Component]:
    """Maximal same-factor runs; identity run products are ill-formed."""
    ctx = path.ctx
    comps: list[Component] = []
    i = 0
    ls = path.letters
    while i < len(ls):
        if ls[i][0] != "h":
            i += 1
            continue
        lab = ls[i][1]
        j = i
        f = ctx.factor(lab)
        payload = f.identity()
        while j < len(ls) and ls[j][0] == "h" and ls[j][1] == lab:
            payload = f.multiply(payload, ls[j][2])
            j += 1
        if f.is_identity(payload):
            raise FreeProductError(
                f"letters {i}..{j - 1} in factor {lab!r} multiply to the identity; "
                "the path is ill-formed"
            )
        comps.append(Component(lab, i, j, payload, segment))
        i = j
    return comps


def _coset_key(ctx: FreeProductCtx, vertex: Element, label: str) -> Element:
    """Canonical representative of vertex * H_label: drop a trailing label syllable."""
    if vertex and vertex[-1][0] == label:
        return vertex[:-1]
    return vertex


@dataclass
class ConnectivityReport:
    components: list[Component]
    classes: list[list[int]]  # index lists into components
    isolated: list[int]
    class_witness: list[str]

    @property
    def isolated_count(self) -> int:
        return len(self.isolated)


def connectivity(path: SyllablePath) -> ConnectivityReport:
    """Partition a closed path's components by the coset their vertices share.

    Two components of factor H are connected exactly when their start
    vertices differ by right multiplication inside H; that is a normal-form
    comparison after stripping a trailing H-syllable, no search involved.
    """
    if not path.is_cycle():
        raise FreeProductError(
            f"connectivity needs a closed path; this one ends at "
            f"{path.ctx.format_element(path.product())}"
        )
    return _connectivity_of(path, path_components(path))


def _connectivity_of(path: SyllablePath, comps: list[Component]) -> ConnectivityReport:
    ctx = path.ctx
    vs = path.vertices()
    groups: dict[tuple, list[int]] = {}
    for idx, c in enumerate(comps):
        key = _coset_key(ctx, vs[c.start], c.factor_label)
        c.coset_key = key
        groups.setdefault((c.factor_label, key), []).append(idx)
    classes = sorted(groups.values(), key=lambda g: g[0])
    isolated = [g[0] for g in classes if len(g) == 1]
    witness = [
        ctx.format_element(comps[g[0]].coset_key) + f" * H_{comps[g[0]].factor_label}"
        for g in classes
    ]
    return ConnectivityReport(comps, classes, isolated, witness)


def check_W_membership(path: SyllablePath, m: int = 0) -> bool:
    """Alternation test for the admissible-word family.

    A member interleaves at most one free-part letter between factor
    letters, never puts two free-part letters side by side, and separates
    equal-factor neighbours by a free-part letter.  The radius parameter m
    controls the forbidden-label ball in the general theory; over a free
    product that ball is just the identity, which letter validity already
    guarantees, so m does not change the outcome here.
    """
    if m < 0:
        raise FreeProductError("radius must be nonnegative")
    ls = path.letters
    for i, letter in enumerate(ls):
        if letter[0] == "h" and path.ctx.factor(letter[1]).is_identity(letter[2]):
            return False
        if i == 0:
            continue
        prev = ls[i - 1]
        if letter[0] == "x" and prev[0] == "x":
            return False
        if letter[0] == "h" and prev[0] == "h" and letter[1] == prev[1]:
            return False
    return True


# -- hyperbolicity ---------------------------------------------------------


def _cyclic_syllable_reduce(ctx: FreeProductCtx, g: Element) -> tuple[Element, Element]:
    """(core, conjugator) with g = conjugator * core * conjugator^-1.

    Rotates boundary syllables of equal kind into each other until the
    first and last syllables cannot merge; a lone free-part syllable is
    additionally cyclically reduced letter-wise.
    """
    core = g
    conj: Element = ()
    while len(core) >= 2 and core[0][0] == core[-1][0]:
        head = (core[0],)
        conj = ctx.mul(conj, head)
        core = ctx.mul(core[1:], head)
    if len(core) == 1 and core[0][0] is None:
        letters = core[0][1]
        i, j = 0, len(letters)
        while j - i >= 2 and letters[i] == -letters[j - 1]:
            i += 1
            j -= 1
        if i:
            conj = ctx.mul(conj, ((None, letters[:i]),))
            core = ((None, letters[i:j]),)
    return core, conj


@dataclass(frozen=True)
class HyperbolicityReport:
    hyperbolic: bool
    infinite_order: bool
    core: Element
    conjugator: Element
    factor_label: str | None = None  # set when parabolic


def hyperbolicity_report(g: Element, ctx: FreeProductCtx) -> HyperbolicityReport:
    if g == ():
        raise FreeProductError("the identity is neither hyperbolic nor parabolic")
    core, conj = _cyclic_syllable_reduce(ctx, g)
    if len(core) == 1 and core[0][0] is not None:
        lab, payload = core[0]
        return HyperbolicityReport(
            hyperbolic=False,
            infinite_order=not ctx.factor(lab).has_finite_order(payload),
            core=core,
            conjugator=conj,
            factor_label=lab,
        )
    return HyperbolicityReport(True, True, core, conj)


def is_hyperbolic(g: Element, ctx: FreeProductCtx) -> bool:
    """True iff no conjugate of g lies inside a single factor."""
    return hyperbolicity_report(g, ctx).hyperbolic


# -- exact conjugacy -------------------------------------------------------


def conjugacy_witness_fp(ctx: FreeProductCtx, u: Element, v: Element) -> Element | None:
    """g with g u g^-1 = v, or None; exact.

    Parabolic cores delegate to the factor oracle (conjugacy between
    factors never crosses them); hyperbolic cores are conjugate exactly
    when their cyclically reduced syllable sequences are rotations of each
    other, letter rotations included for the one-syllable free case.
    """
    if u == () or v == ():
        return () if u == v else None
    cu, pu = _cyclic_syllable_reduce(ctx, u)
    cv, pv = _cyclic_syllable_reduce(ctx, v)
    par_u = len(cu) == 1 and cu[0][0] is not None
    par_v = len(cv) == 1 and cv[0][0] is not None
    if par_u != par_v:
        return None
    if par_u:
        (lu, hu), (lv, hv) = cu[0], cv[0]
        if lu != lv:
            return None
        z = ctx.factor(lu).conjugating(hu, hv)
        if z is None:
            return None
        return ctx.product([pv, ctx.syllable(lu, z), ctx.inv(pu)])
    if len(cu) == 1 and len(cv) == 1:
        # both single free syllables: cyclic letter rotation
        a, b = cu[0][1], cv[0][1]
        if len(a) != len(b):
            return None
        for r in range(len(a)):
            if a[r:] + a[:r] == b:
                sigma = ((None, a[:r]),) if r else ()
                return ctx.product([pv, ctx.inv(sigma), ctx.inv(pu)])
        return None
    if len(cu) != len(cv):
        return None
    for r in range(len(cu)):
        if cu[r:] + cu[:r] == cv:
            sigma = cu[:r]
            return ctx.product([pv, ctx.inv(sigma), ctx.inv(pu)])
    return None


def is_conjugate_fp(ctx: FreeProductCtx, u: Element, v: Element) -> bool:
    return conjugacy_witness_fp(ctx, u, v) is not None


# -- regularity of four-segment cycles -------------------------------------


@dataclass
class RegularityReport:
    """Connectivity of a closed r q r' q' cycle, sliced by segment.

    A middle-segment component is regular when its coset class contains at
    least one other component of the cycle.  ``pair_violations`` counts
    classes where several distinct q-components meet a q'-component (or
    symmetrically), which the pairing statement forbids; ``matched_pairs``
    lists the clean one-to-one q/q' matches.
    """

    segments: dict[str, tuple[int, int]]
    constant: int  # max boundary-segment length
    report: ConnectivityReport
    irregular: list[int]
    bound_ok: bool
    pair_violations: int
    matched_pairs: list[tuple[int, int]]

    @property
    def irregular_count(self) -> int:
        return len(self.irregular)


def regularity_audit(
    ctx: FreeProductCtx,
    r: Sequence[Letter],
    q: Sequence[Letter],
    rp: Sequence[Letter],
    qp: Sequence[Letter],
    m: int = 0,
    require_membership: bool = True,
) -> RegularityReport:
    """Audit which q/q' components of the cycle r q r' q' stay unmatched.

    The middle segments must be admissible words; the audit then asks, for
    each of their components, whether its factor coset recurs elsewhere on
    the cycle.  The count of irregular components is compared against four
    times the longer boundary segment.
    """
    for name, seg in (("q", q), ("q'", qp)):
        if require_membership and not check_W_membership(
            SyllablePath(ctx, tuple(seg)), m
        ):
            raise FreeProductError(f"segment {name} is not an admissible word")
    letters = tuple(r) + tuple(q) + tuple(rp) + tuple(qp)
    path = SyllablePath(ctx, letters)
    if not path.is_cycle():
        end = ctx.format_element(path.product())
        if not r and not rp and not qp:
            raise FreeProductError(
                "a nonempty admissible word alone cannot close up: its label "
                f"{end} is nontrivial in the free product"
            )
        raise FreeProductError(f"cycle does not close; total label {end}")
    bounds = {}
    off = 0
    for name, seg in (("r", r), ("q", q), ("r'", rp), ("q'", qp)):
        bounds[name] = (off, off + len(seg))
        off += len(seg)

    comps: list[Component] = []
    for name in ("r", "q", "r'", "q'"):
        lo, hi = bounds[name]
        sub = SyllablePath(ctx, letters[lo:hi])
        for c in path_components(sub):
            comps.append(
                Component(c.factor_label, c.start + lo, c.end + lo, c.payload, name)
            )
    comps.sort(key=lambda c: c.start)
    rep = _connectivity_of(path, comps)

    irregular = [
        idx
        for cls in rep.classes
        if len(cls) == 1
        for idx in cls
        if comps[idx].segment in ("q", "q'")
    ]
    constant = max(len(r), len(rp))
    violations = 0
    matched: list[tuple[int, int]] = []
    for cls in rep.classes:
        qs = [i for i in cls if comps[i].segment == "q"]
        qps = [i for i in cls if comps[i].segment == "q'"]
        if (len(qs) >= 2 and qps) or (len(qps) >= 2 and qs):
            violations += 1
        elif len(qs) == 1 and len(qps) == 1 and len(cls) == 2:
            matched.append((qs[0], qps[0]))
    return RegularityReport(
        segments=bounds,
        constant=constant,
        report=rep,
        irregular=irregular,
        bound_ok=len(irregular) <= 4 * constant,
        pair_violations=violations,
        matched_pairs=sorted(matched),
    )


def matched_run_lengths(report: RegularityReport) -> list[int]:
    """Lengths of maximal q-ascending, q'-descending chains of matched pairs.

    Matched pairs are mirrors: walking forward through q should walk
    backward through q'.  A chain extends while both sides move by one
    component in their respective directions.
    """
    pairs = report.matched_pairs
    runs: list[int] = []
    i = 0
    while i < len(pairs):
        j = i
        while (
            j + 1 < len(pairs)
            and pairs[j + 1][0] == pairs[j][0] + 1
            and pairs[j + 1][1] == pairs[j][1] - 1
        ):
            j += 1
        runs.append(j - i + 1)
        i = j + 1
    return runs


# -- randomized audit instances -------------------------------------------


def random_trivial_cycle(
    ctx: FreeProductCtx, rng: random.Random, size: int = 12
) -> SyllablePath:
    """Random closed path whose letter product is the identity.

    Built from nested conjugated cancelling pairs and concatenations, then
    scrubbed: any same-factor letter run multiplying to the identity is
    deleted (the product is unchanged) until the path is well formed.
    """

    def rand_letter() -> Letter:
        if ctx.free_alphabet is not None and (not ctx.factors or rng.random() < 0.4):
            name = rng.choice(ctx.free_alphabet.names)
            return ctx.x_letter(name, rng.choice((1, -1)))
        f = rng.choice(ctx.factors)
        return ctx.h_letter(f.label, f.sample(rng))

    def build(budget: int) -> list[Letter]:
        if budget <= 0:
            return []
        if budget >= 2 and rng.random() < 0.55:
            l = rand_letter()
            inner = build(budget - 2)
            return [l] + inner + [ctx.letter_inverse(l)]
        if budget >= 2 and rng.random() < 0.5:
            cut = rng.randint(1, budget - 1)
            return build(cut) + build(budget - cut)
        return []

    for _ in range(200):
        letters = build(size)
        letters = _scrub_identity_runs(ctx, letters)
        if letters:
            return SyllablePath(ctx, tuple(letters))
    raise FreeProductError("could not generate a nonempty trivial cycle")


def _scrub_identity_runs(ctx: FreeProductCtx, letters: list[Letter]) -> list[Letter]:
    changed = True
    while changed:
        changed = False
        i = 0
        while i < len(letters):
            if letters[i][0] != "h":
                i += 1
                continue
            lab = letters[i][1]
            f = ctx.factor(lab)
            j = i
            payload = f.identity()
            while j < len(letters) and letters[j][0] == "h" and letters[j][1] == lab:
                payload = f.multiply(payload, letters[j][2])
                j += 1
            if f.is_identity(payload):
                del letters[i:j]
                changed = True
            else:
                i = j
    return letters


def random_admissible_word(
    ctx: FreeProductCtx,
    rng: random.Random,
    blocks: int = 4,
    x_ends: bool = False,
) -> SyllablePath:
    """Random member of the admissible family: h-letters with x separators.

    Equal-factor neighbours always get a separator; distinct factors get
    one at random.  With x_ends the word starts and ends with a free-part
    letter, which keeps its inverse admissible after wrapping in extra
    boundary letters.
    """
    if ctx.free_alphabet is None:
        raise FreeProductError("admissible-word sampling needs a free part")

    def x() -> Letter:
        return ctx.x_letter(rng.choice(ctx.free_alphabet.names), rng.choice((1, -1)))

    letters: list[Letter] = [x()] if x_ends else []
    prev_label: str | None = None
    for _ in range(blocks):
        f = rng.choice(ctx.factors)
        if letters and letters[-1][0] == "h" and (f.label == prev_label or rng.random() < 0.5):
            letters.append(x())
        elif not letters and rng.random() < 0.3:
            letters.append(x())
        letters.append(ctx.h_letter(f.label, f.sample(rng)))
        prev_label = f.label
    if x_ends:
        letters.append(x())
    return SyllablePath(ctx, tuple(letters))


def mirrored_instance(
    ctx: FreeProductCtx, rng: random.Random, allow_empty_boundary: bool = True
) -> tuple[tuple[Letter, ...], ...]:
    """(r, q, r', q') with single-letter boundaries and a mirrored q'.

    q is sampled admissible with free-part letters at both ends, so
    q' = r'^-1 q^-1 r^-1 is again admissible and the cycle closes by
    construction.  Boundary segments are single factor letters, or empty
    when allowed, keeping the constant at most 1.
    """
    q = random_admissible_word(ctx, rng, blocks=rng.randint(2, 5), x_ends=True)

    def boundary() -> tuple[Letter, ...]:
        if allow_empty_boundary and rng.random() < 0.25:
            return ()
        f = rng.choice(ctx.factors)
        return (ctx.h_letter(f.label, f.sample(rng)),)

    r = boundary()
    rp = boundary()
    q_inv = tuple(ctx.letter_inverse(l) for l in reversed(q.letters))
    qp = (
        tuple(ctx.letter_inverse(l) for l in rp)
        + q_inv
        + tuple(ctx.letter_inverse(l) for l in r)
    )
    return r, q.letters, rp, qp


# -- commensuration probe --------------------------------------------------


@dataclass(frozen=True)
class TwistSpec:
    """u = gamma * t^xi * beta with beta, gamma conjugating a to a^eps."""

    gamma: Payload
    beta: Payload
    xi: int
    eps: int


@dataclass
class ProbeRow:
    k: int
    exponents: tuple[int, int] | None
    witness: str | None
    predicted_eta: int | None = None
    predicted_witness: str | None = None
    prediction_verified: bool | None = None

    @property
    def found(self) -> bool:
        return self.exponents is not None


@dataclass
class ProbeReport:
    label: str
    exp_bound: int
    rows: list[ProbeRow]

    @property
    def all_found(self) -> bool:
        return all(r.found for r in self.rows)

    @property
    def all_verified(self) -> bool:
        return all(r.prediction_verified for r in self.rows)


def commensuration_probe(
    ctx: FreeProductCtx,
    label: str,
    a: Payload,
    t: Element,
    u: Element,
    ks: Iterable[int],
    exp_bound: int = 6,
    twist: TwistSpec | None = None,
) -> ProbeReport:
    """Relate powers of a^k t a^k t^-1 and a^k u a^k u^-1 across a range of k.

    For each k the probe searches exponent pairs (l, l') up to the bound
    for an exact conjugacy between the two powers; the search itself is
    honest (each candidate is settled by the exact conjugacy test), only
    the exponent range is bounded.  When the twist structure of u is
    supplied, the closed-form prediction for the conjugator is also
    verified on normal forms, independent of any search.
    """
    f = ctx.factor(label)
    if f.is_identity(a):
        raise FreeProductError("the probe needs a nonidentity factor element")
    if f.has_finite_order(a):
        raise FreeProductError("the probe needs an infinite-order factor element")
    for name, w in (("t", t), ("u", u)):
        if w == () or (len(w) == 1 and w[0][0] == label):
            raise FreeProductError(f"{name} must lie outside the factor {label!r}")
    if twist is not None:
        expect_u = ctx.product(
            [ctx.syllable(label, twist.gamma), ctx.pow(t, twist.xi), ctx.syllable(label, twist.beta)]
        )
        if expect_u != u:
            raise FreeProductError("twist data does not multiply out to u")
        for payload in (twist.beta, f.inverse(twist.gamma)):
            if not f.equal(
                f.multiply(f.multiply(payload, a), f.inverse(payload)),
                f.power(a, twist.eps),
            ):
                raise FreeProductError(
                    "twist data does not conjugate the probe element as claimed"
                )

    rows: list[ProbeRow] = []
    for k in ks:
        ak = ctx.syllable(label, f.power(a, k))
        g1 = ctx.product([ak, t, ak, ctx.inv(t)])
        g2 = ctx.product([ak, u, ak, ctx.inv(u)])
        found: tuple[int, int] | None = None
        wit: Element | None = None
        pairs = sorted(
            (
                (l, lp)
                for l in range(-exp_bound, exp_bound + 1)
                for lp in range(-exp_bound, exp_bound + 1)
                if l and lp
            ),
            key=lambda p: (abs(p[0]) + abs(p[1]), p[0] <= 0, p[1] <= 0, p),
        )
        for l, lp in pairs:
            w = conjugacy_witness_fp(ctx, ctx.pow(g1, l), ctx.pow(g2, lp))
            if w is not None:
                found, wit = (l, lp), w
                break
        row = ProbeRow(
            k=k,
            exponents=found,
            witness=ctx.format_element(wit) if wit is not None else None,
        )
        if twist is not None:
            gamma_el = ctx.syllable(label, twist.gamma)
            a_mk = ctx.syllable(label, f.power(a, -k))
            if twist.xi == 1:
                pred_w = gamma_el if twist.eps == 1 else ctx.mul(gamma_el, a_mk)
            else:
                tail = ctx.mul(ctx.inv(t), a_mk) if twist.eps == 1 else ctx.inv(t)
                pred_w = ctx.mul(gamma_el, tail)
            eta = twist.eps
            row.predicted_eta = eta
            row.predicted_witness = ctx.format_element(pred_w)
            row.prediction_verified = ctx.conj(pred_w, ctx.pow(g1, eta)) == g2
        rows.append(row)
    return ProbeReport(label=label, exp_bound=exp_bound, rows=rows)


def aligned_power_instance(
    ctx: FreeProductCtx,
    label: str,
    a: Payload,
    t: Element,
    u: Element,
    k: int,
    power: int,
) -> tuple[tuple[Letter, ...], ...]:
    """(r, q, r', q') comparing the probe words' powers along one cycle.

    With g1 = a^k t a^k t^-1 and g2 = a^k u a^k u^-1, the cycle runs
    q = g2^power against q' = g1^-power, the boundaries carrying whatever
    conjugator closes it.  Matched q/q' components of such cycles should
    come in aligned mirror runs; the caller asserts that on the report.
    """
    f = ctx.factor(label)
    ak = ctx.syllable(label, f.power(a, k))
    g1 = ctx.product([ak, t, ak, ctx.inv(t)])
    g2 = ctx.product([ak, u, ak, ctx.inv(u)])
    eta, gamma = 1, conjugacy_witness_fp(ctx, g1, g2)
    if gamma is None:
        eta, gamma = -1, conjugacy_witness_fp(ctx, ctx.inv(g1), g2)
    if gamma is None:
        raise FreeProductError("probe words are not conjugate; no aligned cycle")
    q = element_path(ctx, ctx.pow(g2, power))
    qp = element_path(ctx, ctx.pow(g1, -eta * power))
    r = element_path(ctx, ctx.inv(gamma))
    rp = element_path(ctx, gamma)
    return r, q, rp, qp


def element_path(ctx: FreeProductCtx, g: Element) -> tuple[Letter, ...]:
    """Letter path spelling an element's normal form."""
    letters: list[Letter] = []
    for lab, payload in g:
        if lab is None:
            letters.extend(("x", l) for l in payload)
        else:
            letters.append(("h", lab, payload))
    return tuple(letters)

