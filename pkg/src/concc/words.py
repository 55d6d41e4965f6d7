"""Exact word algebra over finitely generated free groups.

Letters are nonzero machine integers: ``+i`` is the ``i``-th generator
(1-based), ``-i`` its inverse.  All words are kept freely reduced, cyclic
words are kept in a canonical rotation, and every answer that claims a
relation (conjugacy, commensurability) carries an explicit witness that can
be re-multiplied and checked.

The letter order used everywhere is

    g1 < g1^-1 < g2 < g2^-1 < ...

so shortlex enumeration and canonical rotations are stable across runs.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence


class WordError(ValueError):
    """Raised on malformed alphabets, letters, or parse failures."""


def letter_code(letter: int) -> int:
    """Total order on letters: a < a^-1 < b < b^-1 < ...  Smaller is earlier."""
    if letter == 0:
        raise WordError("0 is not a letter")
    return 2 * (abs(letter) - 1) + (0 if letter > 0 else 1)


def free_reduce(letters: Iterable[int]) -> tuple[int, ...]:
    """Cancel adjacent inverse pairs until none remain."""
    out: list[int] = []
    for l in letters:
        if l == 0:
            raise WordError("0 is not a letter")
        if out and out[-1] == -l:
            out.pop()
        else:
            out.append(l)
    return tuple(out)


class Alphabet:
    """Ordered finite set of generator names.

    The order of ``names`` fixes the letter encoding and therefore every
    canonical form downstream; two alphabets are equal only if the name
    sequences match exactly.
    """

    __slots__ = ("names", "_index")

    def __init__(self, names: Sequence[str]):
        names = tuple(names)
        if not names:
            raise WordError("alphabet needs at least one generator")
        for n in names:
            if not n or not isinstance(n, str):
                raise WordError(f"bad generator name {n!r}")
            if any(ch in n for ch in " ^,|<>[]:"):
                raise WordError(f"generator name {n!r} contains reserved characters")
        if len(set(names)) != len(names):
            raise WordError(f"duplicate generator names in {names}")
        self.names = names
        self._index = {n: i + 1 for i, n in enumerate(names)}

    @property
    def size(self) -> int:
        return len(self.names)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Alphabet) and self.names == other.names

    def __hash__(self) -> int:
        return hash(self.names)

    def __repr__(self) -> str:
        return f"Alphabet({', '.join(self.names)})"

    def __contains__(self, name: str) -> bool:
        return name in self._index

    def letter(self, name: str, sign: int = 1) -> int:
        if name not in self._index:
            raise WordError(f"unknown generator {name!r}")
        if sign not in (1, -1):
            raise WordError(f"letter sign must be +1 or -1, got {sign}")
        return sign * self._index[name]

    def letter_str(self, letter: int) -> str:
        idx = abs(letter)
        if not 1 <= idx <= len(self.names):
            raise WordError(f"letter {letter} outside alphabet of size {self.size}")
        name = self.names[idx - 1]
        return name if letter > 0 else name + "^-1"

    def letters_in_order(self) -> tuple[int, ...]:
        """All 2n letters sorted by letter_code."""
        out = []
        for i in range(1, self.size + 1):
            out.append(i)
            out.append(-i)
        return tuple(out)

    def word(self, letters: Iterable[int] = ()) -> "Word":
        return Word(self, free_reduce(self._check(letters)))

    def identity(self) -> "Word":
        return Word(self, ())

    def gen(self, name: str) -> "Word":
        return Word(self, (self.letter(name),))

    def _check(self, letters: Iterable[int]) -> list[int]:
        ls = list(letters)
        for l in ls:
            if not 1 <= abs(l) <= self.size:
                raise WordError(f"letter {l} outside alphabet of size {self.size}")
        return ls

    def parse_word(self, text: str) -> "Word":
        """Parse a whitespace or ``*`` separated product of name^exp tokens.

        ``a b^-1 a^3`` and ``a*b^-1*a^3`` both work; ``1`` or an empty
        string gives the identity.
        """
        text = text.replace("*", " ").strip()
        if text in ("", "1"):
            return self.identity()
        letters: list[int] = []
        for tok in text.split():
            name, _, exp_s = tok.partition("^")
            if name not in self._index:
                raise WordError(f"unknown generator {name!r} in word {text!r}")
            if exp_s == "":
                exp = 1
            else:
                try:
                    exp = int(exp_s)
                except ValueError:
                    raise WordError(f"bad exponent {exp_s!r} in token {tok!r}") from None
            base = self._index[name]
            if exp >= 0:
                letters.extend([base] * exp)
            else:
                letters.extend([-base] * (-exp))
        return self.word(letters)


class Word:
    """Freely reduced word; immutable, hashable, comparable by content."""

    __slots__ = ("alphabet", "letters", "_hash")

    def __init__(self, alphabet: Alphabet, letters: tuple[int, ...]):
        # letters are trusted to be reduced; go through Alphabet.word otherwise
        self.alphabet = alphabet
        self.letters = letters
        self._hash = hash((alphabet.names, letters))

    def __len__(self) -> int:
        return len(self.letters)

    def __bool__(self) -> bool:
        return bool(self.letters)

    @property
    def is_identity(self) -> bool:
        return not self.letters

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Word)
            and self.letters == other.letters
            and self.alphabet == other.alphabet
        )

    def __hash__(self) -> int:
        return self._hash

    def __mul__(self, other: "Word") -> "Word":
        if self.alphabet != other.alphabet:
            raise WordError("cannot multiply words over different alphabets")
        return Word(self.alphabet, free_reduce(self.letters + other.letters))

    def inverse(self) -> "Word":
        return Word(self.alphabet, tuple(-l for l in reversed(self.letters)))

    def __pow__(self, n: int) -> "Word":
        if n == 0:
            return Word(self.alphabet, ())
        base = self if n > 0 else self.inverse()
        out = base
        for _ in range(abs(n) - 1):
            out = out * base
        return out

    def conjugated_by(self, g: "Word") -> "Word":
        """g * self * g^-1."""
        return g * self * g.inverse()

    def __str__(self) -> str:
        if not self.letters:
            return "1"
        return " ".join(self.alphabet.letter_str(l) for l in self.letters)

    def __repr__(self) -> str:
        return f"Word({self})"

    def codes(self) -> tuple[int, ...]:
        return tuple(letter_code(l) for l in self.letters)


def _least_rotation(codes: Sequence[int]) -> int:
    """Index of the lexicographically least rotation (Booth's algorithm)."""
    s = list(codes) + list(codes)
    f = [-1] * len(s)
    k = 0
    for j in range(1, len(s)):
        sj = s[j]
        i = f[j - k - 1]
        while i != -1 and sj != s[k + i + 1]:
            if sj < s[k + i + 1]:
                k = j - i - 1
            i = f[i]
        if sj != s[k + i + 1]:
            if sj < s[k]:
                k = j
            f[j - k] = -1
        else:
            f[j - k] = i + 1
    return k


def cyclic_reduce(w: Word) -> tuple[Word, Word]:
    """Split w = conjugator * core * conjugator^-1 with core cyclically reduced.

    The conjugator is the maximal prefix cancelled against the mirrored
    suffix, so the decomposition is unique and ``len(core)`` is minimal in
    the conjugacy class.
    """
    ls = w.letters
    i, j = 0, len(ls)
    while j - i >= 2 and ls[i] == -ls[j - 1]:
        i += 1
        j -= 1
    return Word(w.alphabet, ls[i:j]), Word(w.alphabet, ls[:i])


def is_cyclically_reduced(w: Word) -> bool:
    ls = w.letters
    return len(ls) < 2 or ls[0] != -ls[-1]


class CyclicWord:
    """Conjugacy-class canonical form: least rotation of a cyclically reduced word."""

    __slots__ = ("alphabet", "letters", "_hash")

    def __init__(self, word: Word):
        if not is_cyclically_reduced(word):
            raise WordError(f"{word} is not cyclically reduced")
        ls = word.letters
        if ls:
            k = _least_rotation([letter_code(l) for l in ls])
            ls = ls[k:] + ls[:k]
        self.alphabet = word.alphabet
        self.letters = ls
        self._hash = hash((word.alphabet.names, ls))

    @classmethod
    def of(cls, w: Word) -> "CyclicWord":
        core, _ = cyclic_reduce(w)
        return cls(core)

    def __len__(self) -> int:
        return len(self.letters)

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, CyclicWord)
            and self.letters == other.letters
            and self.alphabet == other.alphabet
        )

    def __hash__(self) -> int:
        return self._hash

    def word(self) -> Word:
        return Word(self.alphabet, self.letters)

    def rotations(self) -> Iterator[Word]:
        ls = self.letters
        for k in range(len(ls)):
            yield Word(self.alphabet, ls[k:] + ls[:k])

    def inverse(self) -> "CyclicWord":
        return CyclicWord(Word(self.alphabet, tuple(-l for l in reversed(self.letters))))

    def __str__(self) -> str:
        return "(" + str(self.word()) + ")"

    def __repr__(self) -> str:
        return f"CyclicWord{self}"


def is_conjugate(u: Word, v: Word) -> bool:
    """True iff u and v are conjugate in the free group."""
    if u.alphabet != v.alphabet:
        raise WordError("words over different alphabets")
    return CyclicWord.of(u) == CyclicWord.of(v)


def conjugacy_witness(u: Word, v: Word) -> Word | None:
    """A word g with g u g^-1 = v, or None if u, v are not conjugate."""
    if u.alphabet != v.alphabet:
        raise WordError("words over different alphabets")
    cu, p = cyclic_reduce(u)
    cv, q = cyclic_reduce(v)
    if len(cu) != len(cv):
        return None
    if len(cu) == 0:
        return u.alphabet.identity()
    ls, target = cu.letters, cv.letters
    for r in range(len(ls)):
        if ls[r:] + ls[:r] == target:
            # rotation by r equals conjugation by the inverse of the prefix
            s = Word(u.alphabet, ls[:r])
            return q * s.inverse() * p.inverse()
    return None


def primitive_root(w: Word) -> tuple[Word, int]:
    """Unique (root, e) with w = root^e, e >= 1 maximal, root not a proper power.

    Works through the cyclically reduced core: the least period of the core
    as a linear string divides its length exactly when the core is a proper
    power of the corresponding prefix.
    """
    if w.is_identity:
        raise WordError("identity has no primitive root")
    core, p = cyclic_reduce(w)
    ls = core.letters
    n = len(ls)
    for d in range(1, n + 1):
        if n % d:
            continue
        if ls == ls[:d] * (n // d):
            root = Word(w.alphabet, p.letters + ls[:d] + p.inverse().letters)
            return root, n // d
    raise AssertionError("unreachable: every word is a power of itself")


def commensurability_key(w: Word) -> tuple[int, ...]:
    """Hashable key equal for u, v iff some powers of u and v are conjugate.

    Built from the canonical cyclic form of the primitive root, symmetrised
    under inversion, so w, w^-1, conjugates and proper powers all collide.
    """
    root, _ = primitive_root(w)
    c = CyclicWord.of(root)
    ci = c.inverse()
    a, b = c.letters, ci.letters
    pick = a if [letter_code(l) for l in a] <= [letter_code(l) for l in b] else b
    return pick


@dataclass(frozen=True)
class Commensuration:
    """Witnessed answer to: are nontrivial powers of u and v conjugate?

    When ``related``, the identity  conjugator * u^k * conjugator^-1 = v^l
    holds with k, l nonzero; ``verify()`` re-multiplies it.
    """

    related: bool
    u: Word
    v: Word
    k: int = 0
    l: int = 0
    conjugator: Word | None = None

    def verify(self) -> bool:
        if not self.related:
            return True
        g = self.conjugator
        assert g is not None
        return (self.u ** self.k).conjugated_by(g) == self.v ** self.l


def commensurable(u: Word, v: Word) -> Commensuration:
    """Exact commensurability via primitive roots.

    u^k ~ v^l for some nonzero k, l iff the primitive roots of u and v are
    conjugate up to inversion; the witness exponents are the root
    multiplicities (smallest possible in absolute value).
    """
    if u.is_identity or v.is_identity:
        raise WordError("commensurability is about nontrivial elements")
    ru, eu = primitive_root(u)
    rv, ev = primitive_root(v)
    g = conjugacy_witness(ru, rv)
    if g is not None:
        return Commensuration(True, u, v, k=ev, l=eu, conjugator=g)
    g = conjugacy_witness(ru, rv.inverse())
    if g is not None:
        return Commensuration(True, u, v, k=ev, l=-eu, conjugator=g)
    return Commensuration(False, u, v)


def is_power_of(w: Word, c: Word) -> int | None:
    """m with w = c^m, or None.  w identity gives 0; c must be nontrivial."""
    if c.is_identity:
        raise WordError("powers of the identity are degenerate")
    if w.is_identity:
        return 0
    rw, ew = primitive_root(w)
    rc, ec = primitive_root(c)
    if rw == rc:
        m, rem = divmod(ew, ec)
        return m if rem == 0 and c ** m == w else None
    if rw == rc.inverse():
        m, rem = divmod(ew, ec)
        return -m if rem == 0 and c ** (-m) == w else None
    return None


def shortlex_words(
    alphabet: Alphabet, max_length: int | None = None, include_identity: bool = False
) -> Iterator[Word]:
    """Enumerate freely reduced words in shortlex order (letter_code within length).

    Infinite when max_length is None; pair with itertools.islice.
    """
    if include_identity:
        yield alphabet.identity()
    order = alphabet.letters_in_order()
    current: list[tuple[int, ...]] = [(l,) for l in order]
    length = 1
    while max_length is None or length <= max_length:
        for t in current:
            yield Word(alphabet, t)
        nxt = [t + (l,) for t in current for l in order if l != -t[-1]]
        if not nxt:
            return
        current = nxt
        length += 1


def all_reduced_words(alphabet: Alphabet, max_length: int) -> Iterator[Word]:
    """All freely reduced words of length <= max_length, identity included."""
    return itertools.chain(
        [alphabet.identity()], shortlex_words(alphabet, max_length=max_length)
    )
