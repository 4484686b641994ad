"""Exact brute-force ground truth for small instances.

Nothing here calls into :mod:`factormatch.matching` or
:mod:`factormatch.spectral`; the algorithms are chosen to differ from the
ones they certify.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Any, Callable, Optional, Sequence, Union

import numpy as np

from .graph import Graph, GroupTable, bipartition_of


class OracleLimitError(ValueError):
    """Instance is larger than the exhaustive solver allows."""


@dataclass(frozen=True)
class OracleResult:
    value: Union[int, Fraction]
    witness: Any
    method: str


def _mates(m) -> Sequence[Optional[int]]:
    return m.mate if hasattr(m, "mate") else m


# ---------------------------------------------------------------------------
# Matchings


def _bipartite_max_matching(g: Graph, side: Sequence[int]) -> list[Optional[int]]:
    # one BFS per free left vertex; the augmenting tree is rebuilt each time
    mate: list[Optional[int]] = [None] * g.n
    for root in range(g.n):
        if side[root] != 0 or mate[root] is not None:
            continue
        parent = {root: -1}
        queue = deque([root])
        end = None
        while queue and end is None:
            x = queue.popleft()
            for y in g.adj[x]:
                if y in parent:
                    continue
                parent[y] = x
                if mate[y] is None:
                    end = y
                    break
                parent[mate[y]] = y
                queue.append(mate[y])
        while end is not None:
            x = parent[end]
            nxt = mate[x]
            mate[x], mate[end] = end, x
            end = nxt
    return mate


def _general_max_matching(g: Graph, limit: int) -> list[tuple[int, int]]:
    if g.n > limit:
        raise OracleLimitError(f"exhaustive matching limited to n <= {limit}, got {g.n}")
    best: list[tuple[int, int]] = []
    used = [False] * g.n
    chosen: list[tuple[int, int]] = []

    def go(v: int, free_left: int) -> None:
        nonlocal best
        if len(chosen) + free_left // 2 <= len(best):
            return
        while v < g.n and used[v]:
            v += 1
        if v >= g.n:
            best = list(chosen)
            return
        used[v] = True
        for w in g.adj[v]:
            if not used[w]:
                used[w] = True
                chosen.append((v, w))
                go(v + 1, free_left - 2)
                chosen.pop()
                used[w] = False
        go(v + 1, free_left - 1)
        used[v] = False

    go(0, g.n)
    return best


def max_matching(g: Graph, general_limit: int = 20) -> OracleResult:
    side = bipartition_of(g)
    if side is not None:
        mate = _bipartite_max_matching(g, side.side)
        pairs = tuple((v, w) for v, w in enumerate(mate) if w is not None and v < w)
        return OracleResult(len(pairs), pairs, "bfs-augmentation")
    pairs = tuple(_general_max_matching(g, general_limit))
    return OracleResult(len(pairs), pairs, "branch-and-bound")


def is_matching_of(g: Graph, pairs: Sequence[tuple[int, int]]) -> bool:
    seen: set[int] = set()
    for u, v in pairs:
        if u in seen or v in seen or not g.has_edge(u, v):
            return False
        seen.update((u, v))
    return True


def has_augmenting_chain(g: Graph, m, max_length: Optional[int] = None) -> bool:
    length = shortest_augmenting_chain(g, m, max_length)
    return length is not None


def shortest_augmenting_chain(g: Graph, m, max_length: Optional[int] = None) -> Optional[int]:
    """Length of a shortest augmenting chain, if one of length <= ``max_length`` exists."""
    mate = _mates(m)
    cap = g.n if max_length is None else max_length
    side = bipartition_of(g)
    if side is not None:
        return _layered_search(g, mate, side.side, cap)
    return _simple_path_search(g, mate, cap)


def _layered_search(g: Graph, mate, side, cap: int) -> Optional[int]:
    # side 0 -> side 1 along unmatched edges, back along matched ones
    dist = {v: 0 for v in range(g.n) if side[v] == 0 and mate[v] is None}
    queue = deque(sorted(dist))
    while queue:
        x = queue.popleft()
        if dist[x] + 1 > cap:
            break
        for y in g.adj[x]:
            if y in dist or mate[x] == y:
                continue
            dist[y] = dist[x] + 1
            if mate[y] is None:
                return dist[y]
            z = mate[y]
            if z not in dist:
                dist[z] = dist[y] + 1
                queue.append(z)
    return None


def _simple_path_search(g: Graph, mate, cap: int) -> Optional[int]:
    # breadth-first over explicit simple alternating paths; exponential
    frontier = [(v,) for v in range(g.n) if mate[v] is None]
    length = 0
    while frontier and length < cap:
        length += 1
        nxt = []
        for p in frontier:
            x = p[-1]
            if length % 2 == 1:
                for y in g.adj[x]:
                    if y in p or mate[x] == y:
                        continue
                    if mate[y] is None:
                        return length
                    nxt.append(p + (y,))
            else:
                y = mate[x]
                if y is not None and y not in p:
                    nxt.append(p + (y,))
        frontier = nxt
    return None


# ---------------------------------------------------------------------------
# Independent sets


def max_independent_set(g: Graph, limit: int = 40) -> OracleResult:
    if g.n > limit:
        raise OracleLimitError(f"exhaustive independent set limited to n <= {limit}, got {g.n}")
    closed = [(1 << v) | sum(1 << u for u in g.adj[v]) for v in range(g.n)]

    @lru_cache(maxsize=None)
    def solve(mask: int) -> int:
        if not mask:
            return 0
        low_v = high_v = -1
        low_d, high_d = math.inf, -1
        rest = mask
        while rest:
            v = (rest & -rest).bit_length() - 1
            rest &= rest - 1
            dv = (closed[v] & mask).bit_count() - 1
            if dv < low_d:
                low_v, low_d = v, dv
            if dv > high_d:
                high_v, high_d = v, dv
        if low_d <= 1:
            return (1 << low_v) | solve(mask & ~closed[low_v])
        take = (1 << high_v) | solve(mask & ~closed[high_v])
        skip = solve(mask & ~(1 << high_v))
        return take if take.bit_count() >= skip.bit_count() else skip

    best = solve((1 << g.n) - 1)
    witness = tuple(v for v in range(g.n) if best >> v & 1)
    return OracleResult(len(witness), witness, "branch-and-bound")


def is_independent(g: Graph, B) -> bool:
    s = set(B)
    return not any(u in s and v in s for u, v in g.edges)


# ---------------------------------------------------------------------------
# Expansion


def brute_cheeger(g: Graph, limit: int = 24, chunk: int = 1 << 20) -> OracleResult:
    """Exact expansion constant: min over nonempty proper B of
    ``|dB| * n / (d * |B| * |B^c|)``.  The last vertex is pinned outside B."""
    if g.n > limit:
        raise OracleLimitError(f"exhaustive expansion constant limited to n <= {limit}, got {g.n}")
    if g.degree is None or g.degree == 0 or g.n < 2:
        raise ValueError("expansion constant needs a regular graph with d >= 1 and n >= 2")
    n, d = g.n, g.degree
    eu = np.array([u for u, _ in g.edges], dtype=np.uint32)
    ev = np.array([v for _, v in g.edges], dtype=np.uint32)
    total = 1 << (n - 1)
    best_ratio, best_mask = math.inf, 0
    for start in range(1, total, chunk):
        masks = np.arange(start, min(start + chunk, total), dtype=np.uint32)
        cut = np.zeros(len(masks), dtype=np.int64)
        for a, b in zip(eu, ev):
            cut += ((masks >> a) ^ (masks >> b)) & 1
        k = np.bitwise_count(masks).astype(np.int64)
        ratio = cut / (k * (n - k))
        i = int(np.argmin(ratio))
        if ratio[i] < best_ratio:
            best_ratio, best_mask = float(ratio[i]), int(masks[i])
    witness = tuple(v for v in range(n) if best_mask >> v & 1)
    k = len(witness)
    cut = sum(1 for u, v in g.edges if (best_mask >> u & 1) != (best_mask >> v & 1))
    return OracleResult(Fraction(cut * n, d * k * (n - k)), witness, "exhaustive-subsets")


# ---------------------------------------------------------------------------
# Mass transport


@dataclass(frozen=True)
class MassTransportResult:
    sent: float
    received: float

    @property
    def equal(self) -> bool:
        return self.sent == self.received


def mass_transport_check(table: GroupTable, kernel: Union[Callable[[int], float], Sequence[float]]
                         ) -> MassTransportResult:
    """With ``F(x, y) = kernel(x^-1 y)``, compare mass sent by the identity,
    sum_x F(id, x), with mass it receives, sum_x F(x, id)."""
    k = kernel if callable(kernel) else (lambda z, _k=kernel: _k[z])
    e = table.identity
    mul, inv = table.mul, table.inv

    def F(x: int, y: int) -> float:
        val = k(int(mul[inv[x], y]))
        if val < 0:
            raise ValueError("mass-transport kernel must be nonnegative")
        return val

    sent = math.fsum(F(e, x) for x in range(table.order))
    received = math.fsum(F(x, e) for x in range(table.order))
    return MassTransportResult(sent, received)
