"""Suffix structures used by the small-cancellation metrics.

Everything here works on plain integer sequences, no group theory.  The
suffix array uses prefix doubling on numpy lexsorts: O(n log n) rounds, and
the n ~ 2.5e5 inputs coming from the relator families sort in well under a
second.  LCPs come from Kasai's scan.  The suffix automaton is the usual
online construction, kept per string, with the earliest end position of
each state retained so matches can be located, not just measured.
"""

from __future__ import annotations

import numpy as np


def suffix_array(seq) -> np.ndarray:
    """Indices of suffixes of seq in increasing lexicographic order."""
    n = len(seq)
    if n == 0:
        return np.empty(0, dtype=np.int64)
    arr = np.asarray(seq, dtype=np.int64)
    # dense ranks keep the sort keys small
    rank = np.unique(arr, return_inverse=True)[1].astype(np.int64)
    idx = np.arange(n, dtype=np.int64)
    k = 1
    while True:
        second = np.full(n, -1, dtype=np.int64)
        second[: n - k] = rank[k:]
        order = np.lexsort((second, rank))
        new_rank = np.empty(n, dtype=np.int64)
        prev = (rank[order][1:] != rank[order][:-1]) | (second[order][1:] != second[order][:-1])
        new_rank[order] = np.concatenate(([0], np.cumsum(prev)))
        rank = new_rank
        if rank[order[-1]] == n - 1:
            return order
        k *= 2
        if k >= n:
            return np.lexsort((idx, rank))


def lcp_array(seq, sa: np.ndarray) -> np.ndarray:
    """lcp[i] = longest common prefix of suffixes sa[i] and sa[i+1] (Kasai)."""
    n = len(sa)
    lcp = np.zeros(max(n - 1, 0), dtype=np.int64)
    if n < 2:
        return lcp
    rank = np.empty(n, dtype=np.int64)
    rank[sa] = np.arange(n)
    h = 0
    for i in range(n):
        r = rank[i]
        if r == n - 1:
            h = 0
            continue
        j = int(sa[r + 1])
        while i + h < n and j + h < n and seq[i + h] == seq[j + h]:
            h += 1
        lcp[r] = h
        if h:
            h -= 1
    return lcp


class SuffixAutomaton:
    """Recognizes every substring of one sequence; linear size.

    ``first_end[s]`` is the smallest end index (exclusive) at which the
    longest string of state ``s`` occurs, which is enough to report where a
    match sits in the indexed word.
    """

    __slots__ = ("next", "link", "length", "first_end", "last")

    def __init__(self, seq):
        self.next: list[dict[int, int]] = [{}]
        self.link: list[int] = [-1]
        self.length: list[int] = [0]
        self.first_end: list[int] = [0]
        self.last = 0
        for pos, ch in enumerate(seq):
            self._extend(int(ch), pos + 1)

    def _extend(self, ch: int, end: int) -> None:
        nxt, link, length, first = self.next, self.link, self.length, self.first_end
        cur = len(nxt)
        nxt.append({})
        length.append(length[self.last] + 1)
        link.append(-1)
        first.append(end)
        p = self.last
        while p != -1 and ch not in nxt[p]:
            nxt[p][ch] = cur
            p = link[p]
        if p == -1:
            link[cur] = 0
        else:
            q = nxt[p][ch]
            if length[p] + 1 == length[q]:
                link[cur] = q
            else:
                clone = len(nxt)
                nxt.append(dict(nxt[q]))
                length.append(length[p] + 1)
                link.append(link[q])
                first.append(first[q])
                while p != -1 and nxt[p].get(ch) == q:
                    nxt[p][ch] = clone
                    p = link[p]
                link[q] = clone
                link[cur] = clone
        self.last = cur

    def matching_statistics(self, query):
        """Yield (end_index, length, state) per position of query.

        length = longest suffix of query[:end_index] occurring in the
        indexed sequence; standard walk along suffix links.
        """
        v, l = 0, 0
        for i, ch in enumerate(query):
            ch = int(ch)
            while v != 0 and ch not in self.next[v]:
                v = self.link[v]
                l = self.length[v]
            if ch in self.next[v]:
                v = self.next[v][ch]
                l += 1
            else:
                v, l = 0, 0
            yield i + 1, l, v

    def occurrence_end(self, state: int) -> int:
        return self.first_end[state]
