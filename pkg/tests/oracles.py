"""Independent oracles used to cross-check the library's exact algorithms.

Everything here is deliberately naive: enumerate, rotate, insert, compare.
No code is shared with the implementations under test beyond basic word
reduction, so an agreement between an oracle and the library is evidence,
not a tautology.
"""

from __future__ import annotations

from fractions import Fraction

from concc.words import Alphabet, Word, all_reduced_words, free_reduce


def reduce_inverse(letters: tuple[int, ...]) -> tuple[int, ...]:
    return tuple(-l for l in reversed(letters))


def letters_pow(letters: tuple[int, ...], k: int) -> tuple[int, ...]:
    base = letters if k >= 0 else reduce_inverse(letters)
    return free_reduce(base * abs(k))


def cyclic_core(letters: tuple[int, ...]) -> tuple[int, ...]:
    i, j = 0, len(letters)
    while j - i >= 2 and letters[i] == -letters[j - 1]:
        i += 1
        j -= 1
    return letters[i:j]


def rotation_conjugate(u: Word, v: Word) -> bool:
    """Conjugacy by enumerating all rotations of the cyclic cores."""
    a, b = cyclic_core(u.letters), cyclic_core(v.letters)
    if len(a) != len(b):
        return False
    if not a:
        return True
    return any(a[r:] + a[:r] == b for r in range(len(a)))


class BruteCommensurability:
    """Related iff some g u^k g^-1 equals v^l within explicit bounds.

    Precomputes, for each u in the universe, the set of all bounded
    conjugates of its bounded powers; queries are then set lookups of v's
    powers.  Sound within the bounds and complete for the word lengths the
    acceptance suite feeds it (conjugating witnesses for length-4 inputs
    fit well inside radius 6).
    """

    def __init__(self, alphabet: Alphabet, conj_radius: int = 6, exp_bound: int = 6):
        self.alphabet = alphabet
        self.exp_bound = exp_bound
        self.conjugators = [
            (w.letters, reduce_inverse(w.letters))
            for w in all_reduced_words(alphabet, conj_radius)
        ]
        self._cache: dict[tuple[int, ...], set[tuple[int, ...]]] = {}

    def _orbit(self, u: tuple[int, ...]) -> set[tuple[int, ...]]:
        if u not in self._cache:
            s = set()
            for k in range(1, self.exp_bound + 1):
                for sign in (1, -1):
                    uk = letters_pow(u, sign * k)
                    for g, ginv in self.conjugators:
                        s.add(free_reduce(g + uk + ginv))
            self._cache[u] = s
        return self._cache[u]

    def related(self, u: Word, v: Word) -> bool:
        orbit = self._orbit(u.letters)
        return any(
            letters_pow(v.letters, sign * l) in orbit
            for l in range(1, self.exp_bound + 1)
            for sign in (1, -1)
        )


def brute_max_piece(members: list[tuple[int, ...]]) -> int:
    """Longest common prefix-of-member substring seen at two distinct spots.

    A piece is a word that occurs as a prefix of two closure members which
    are not the same member at the same offset; since the closure is
    rotation-closed, prefixes cover all substrings.  Quadratic in the
    closure, usable up to a few thousand members.
    """
    best = 0
    n = len(members)
    for i in range(n):
        for j in range(i, n):
            a, b = members[i], members[j]
            lcp = 0
            for x, y in zip(a, b):
                if x != y:
                    break
                lcp += 1
            if i == j:
                continue
            best = max(best, lcp)
    return best


def brute_piece_ratios(members: list[tuple[int, ...]]) -> dict[tuple[int, ...], Fraction]:
    """Per-member worst piece ratio, same quadratic enumeration."""
    out: dict[tuple[int, ...], int] = {m: 0 for m in members}
    n = len(members)
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            a, b = members[i], members[j]
            lcp = 0
            for x, y in zip(a, b):
                if x != y:
                    break
                lcp += 1
            out[a] = max(out[a], lcp)
    return {m: Fraction(p, len(m)) for m, p in out.items()}


def bfs_trivial_set(
    members: list[tuple[int, ...]], ceiling: int
) -> set[tuple[int, ...]]:
    """All words of length <= ceiling reachable from 1 by relator insertion.

    Breadth-first closure: insert any closure member at any position and
    freely reduce, keeping results under the ceiling, until nothing new
    appears.  Steps that shorten a word are inverses of steps that grow
    one, so this reaches every word with a monotone reduction path inside
    the ceiling; Greendlinger's lemma makes every trivial word such a word
    once the ceiling exceeds the inputs by a relator's slack.
    """
    seen: set[tuple[int, ...]] = {()}
    frontier: list[tuple[int, ...]] = [()]
    while frontier:
        new = []
        for w in frontier:
            for m in members:
                for pos in range(len(w) + 1):
                    cand = free_reduce(w[:pos] + m + w[pos:])
                    if len(cand) <= ceiling and cand not in seen:
                        seen.add(cand)
                        new.append(cand)
        frontier = new
    return seen


# -- faithful models of the two worked HNN groups --------------------------


def klein_pair(letters: tuple[int, ...]) -> tuple[int, int]:
    """(p, q) normal form of a word over a=1, t=2 in <a,t | t a t^-1 = a^-1>."""
    p = q = 0
    for l in letters:
        if abs(l) == 1:
            p += (1 if l > 0 else -1) * (1 if q % 2 == 0 else -1)
        else:
            q += 1 if l > 0 else -1
    return p, q


def bs12_affine(letters: tuple[int, ...]) -> tuple[Fraction, Fraction]:
    """(scale, shift) of the affine map for a word over a=1, t=2 in BS(1,2).

    a acts as x + 1 and t as 2x; the representation x -> s x + m with
    s a power of two and m dyadic is faithful, so (1, 0) certifies
    triviality independently of any Britton reduction.
    """
    s, m = Fraction(1), Fraction(0)
    for l in letters:
        if abs(l) == 1:
            gs, gm = Fraction(1), Fraction(1 if l > 0 else -1)
        elif l > 0:
            gs, gm = Fraction(2), Fraction(0)
        else:
            gs, gm = Fraction(1, 2), Fraction(0)
        s, m = s * gs, s * gm + m
    return s, m


def flatten_one_level(tw) -> tuple[int, ...]:
    """Letters over {base gen a=1, stable t=2} of a one-level tower word."""
    if tw.tower.height != 1:
        raise ValueError("flattening expects exactly one stable letter")
    out: list[int] = []
    for item in tw.items:
        if isinstance(item, tuple):
            idx, eps = item
            out.append(2 if eps > 0 else -2)
        else:
            out.extend(item.letters)
    return free_reduce(tuple(out))
