"""Stage-wise randomized chain flipping that builds a perfect matching of a
regular bipartite graph from per-vertex IID uniforms.

Stage ``n`` repeats steps with chain-length cap ``2n - 1``.  In a step every
augmenting chain of length at most the cap gets the composition of the
current uniforms on its vertices, and every chain whose value beats all
chains sharing a vertex with it is flipped.  The uniforms of all vertices
that lay on a candidate chain are then discarded.
"""

from __future__ import annotations

import hashlib
import math
import struct
import warnings
from collections import Counter, deque
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional, Sequence

import numpy as np

from .graph import Graph, bipartition_of

_MASK64 = (1 << 64) - 1
_INF = math.inf


class MatchingError(ValueError):
    pass


class ChainError(MatchingError):
    """A path is not an augmenting chain for the given matching."""


class NotBipartiteError(MatchingError):
    pass


class NonRegularWarning(UserWarning):
    pass


class Matching:
    """Partial matching stored as a symmetric mate map (``None`` = unmatched)."""

    __slots__ = ("mate",)

    def __init__(self, mate: Sequence[Optional[int]]):
        self.mate: tuple[Optional[int], ...] = tuple(mate)
        for v, w in enumerate(self.mate):
            if w is not None and self.mate[w] != v:
                raise MatchingError(f"mate map not symmetric at {v} -> {w}")

    @classmethod
    def empty(cls, n: int) -> "Matching":
        return cls([None] * n)

    @classmethod
    def from_pairs(cls, n: int, pairs: Iterable[Sequence[int]]) -> "Matching":
        mate: list[Optional[int]] = [None] * n
        for u, v in pairs:
            if mate[u] is not None or mate[v] is not None:
                raise MatchingError(f"vertex matched twice in pair ({u}, {v})")
            mate[u], mate[v] = v, u
        return cls(mate)

    def __len__(self) -> int:
        return len(self.mate)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Matching) and self.mate == other.mate

    def __hash__(self) -> int:
        return hash(self.mate)

    def __repr__(self) -> str:
        return f"Matching(size={self.size}, n={len(self.mate)})"

    @property
    def size(self) -> int:
        return sum(1 for w in self.mate if w is not None) // 2

    def pairs(self) -> list[tuple[int, int]]:
        return [(v, w) for v, w in enumerate(self.mate) if w is not None and v < w]

    def unmatched(self) -> list[int]:
        return [v for v, w in enumerate(self.mate) if w is None]

    def matched_set(self) -> frozenset[int]:
        return frozenset(v for v, w in enumerate(self.mate) if w is not None)

    def is_perfect(self) -> bool:
        return all(w is not None for w in self.mate)

    def is_valid_for(self, g: Graph) -> bool:
        return len(self.mate) == g.n and all(
            w is None or g.has_edge(v, w) for v, w in enumerate(self.mate))


@dataclass(frozen=True)
class Chain:
    """Alternating path ``v_0 .. v_{2k+1}`` listed from its smaller endpoint."""

    vertices: tuple[int, ...]

    @property
    def length(self) -> int:
        return len(self.vertices) - 1

    def edges(self) -> list[tuple[int, int]]:
        vs = self.vertices
        return [(min(a, b), max(a, b)) for a, b in zip(vs, vs[1:])]

    def canonical(self) -> "Chain":
        vs = self.vertices
        return self if vs[0] <= vs[-1] else Chain(vs[::-1])

    def is_augmenting(self, g: Graph, m: Matching) -> bool:
        vs, mate = self.vertices, m.mate
        if len(vs) < 2 or len(vs) % 2 or len(set(vs)) != len(vs):
            return False
        if mate[vs[0]] is not None or mate[vs[-1]] is not None:
            return False
        for i, (a, b) in enumerate(zip(vs, vs[1:])):
            if not g.has_edge(a, b):
                return False
            if (mate[a] == b) != (i % 2 == 1):
                return False
        return True


class RandomTape:
    """Per-vertex streams of uniforms from a keyed hash of (seed, vertex, counter).

    ``value(v)`` is the current uniform at ``v``; ``advance(v)`` throws it
    away.  ``draw`` does both.
    """

    def __init__(self, seed: int):
        self.seed = int(seed) & _MASK64
        self._key = self.seed.to_bytes(8, "little")
        self.counters: Counter[int] = Counter()
        self._cache: dict[int, float] = {}

    def _uniform(self, v: int, counter: int) -> float:
        h = hashlib.blake2b(struct.pack("<QQ", v, counter), digest_size=8,
                            key=self._key, person=b"tape")
        return (int.from_bytes(h.digest(), "little") >> 11) * 2.0 ** -53

    def value(self, v: int) -> float:
        u = self._cache.get(v)
        if u is None:
            u = self._cache[v] = self._uniform(v, self.counters[v])
        return u

    def advance(self, v: int) -> None:
        self.counters[v] += 1
        self._cache.pop(v, None)

    def draw(self, v: int) -> float:
        u = self.value(v)
        self.advance(v)
        return u


def composition(values: Sequence[float]) -> float:
    """Order-sensitive keyed hash of an ordered list of uniforms into [0, 1)."""
    if len(values) == 0:
        raise ValueError("composition of an empty list")
    data = struct.pack(f"<Q{len(values)}d", len(values), *values)
    h = hashlib.blake2b(data, digest_size=8, person=b"compose")
    return (int.from_bytes(h.digest(), "little") >> 11) * 2.0 ** -53


def _distance_to_free(g: Graph, mate: Sequence[Optional[int]]) -> tuple[list[float], list[float]]:
    # out_odd[x]: fewest edges to finish a chain from x, having entered x on an
    # unmatched edge; out_even[y]: same, next edge must be unmatched.  These
    # ignore simplicity, so they only ever under-estimate.
    n = g.n
    out_odd = [_INF] * n
    out_even = [_INF] * n
    queue: deque[tuple[int, bool]] = deque()
    for v in range(n):
        if mate[v] is None:
            out_odd[v] = 0
            queue.append((v, True))
    while queue:
        x, odd = queue.popleft()
        if odd:
            t = out_odd[x] + 1
            for y in g.adj[x]:
                if mate[y] != x and out_even[y] > t:
                    out_even[y] = t
                    queue.append((y, False))
        else:
            w = mate[x]
            if w is not None and out_odd[w] > out_even[x] + 1:
                out_odd[w] = out_even[x] + 1
                queue.append((w, True))
    return out_odd, out_even


def enumerate_chains(g: Graph, m: Matching, max_length: int) -> list[Chain]:
    """All augmenting chains of length at most ``max_length``, each once,
    sorted by vertex sequence from the smaller endpoint."""
    if max_length < 1 or max_length % 2 == 0:
        raise ValueError(f"max_length must be odd and >= 1, got {max_length}")
    mate = m.mate
    out_odd, out_even = _distance_to_free(g, mate)
    adj = g.adj
    found: list[Chain] = []
    for u in range(g.n):
        if mate[u] is not None or out_even[u] > max_length:
            continue
        path = [u]
        on_path = {u}
        stack = [iter(adj[u])]
        while stack:
            y = path[-1]
            t = len(path)  # edges in path after stepping to the next vertex
            for z in stack[-1]:
                if z in on_path or mate[y] == z or t + out_odd[z] > max_length:
                    continue
                w = mate[z]
                if w is None:
                    if z > u:
                        found.append(Chain(tuple(path) + (z,)))
                    continue
                path += (z, w)
                on_path.add(z)
                on_path.add(w)
                stack.append(iter(adj[w]))
                break
            else:
                stack.pop()
                if len(path) > 1:
                    on_path.discard(path.pop())
                    on_path.discard(path.pop())
    found.sort(key=lambda c: c.vertices)
    return found


def _apply_flips(mate: list[Optional[int]], chains: Iterable[Chain]) -> None:
    for c in chains:
        vs = c.vertices
        for i in range(0, len(vs), 2):
            a, b = vs[i], vs[i + 1]
            mate[a], mate[b] = b, a


def flip(g: Graph, m: Matching, c: Chain) -> Matching:
    """Swap matched and unmatched edges along ``c``; the matching grows by one."""
    if not c.is_augmenting(g, m):
        raise ChainError(f"{c.vertices} is not an augmenting chain for this matching")
    mate = list(m.mate)
    _apply_flips(mate, [c])
    return Matching(mate)


def step(g: Graph, m: Matching, max_length: int, tape: RandomTape) -> tuple[Matching, list[Chain]]:
    """One round of simultaneous flips of locally dominant chains."""
    chains = enumerate_chains(g, m, max_length)
    if not chains:
        return m, []
    # ties in the hashed value fall back to the vertex sequence
    keys = [(composition([tape.value(v) for v in c.vertices]), c.vertices) for c in chains]
    best_at: dict[int, int] = {}
    for i, c in enumerate(chains):
        for v in c.vertices:
            j = best_at.get(v)
            if j is None or keys[i] > keys[j]:
                best_at[v] = i
    flipped = [c for i, c in enumerate(chains) if all(best_at[v] == i for v in c.vertices)]
    touched = [v for c in flipped for v in c.vertices]
    if len(touched) != len(set(touched)):
        raise AssertionError("flipped chains are not vertex-disjoint")
    mate = list(m.mate)
    _apply_flips(mate, flipped)
    for v in sorted(best_at):
        tape.advance(v)
    return Matching(mate), flipped


@dataclass
class StageStats:
    n: int
    steps: int = 0
    flips: int = 0
    unmatched_fraction: float = 1.0
    chains_flipped: list[Chain] = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        return {"n": self.n, "steps": self.steps, "flips": self.flips,
                "unmatched_fraction": self.unmatched_fraction}


@dataclass
class RunStats:
    seed: int
    n_vertices: int
    stages: list[StageStats] = field(default_factory=list)
    edge_changes: Counter = field(default_factory=Counter)
    perfect: bool = False
    monotone: bool = True

    @property
    def total_flips(self) -> int:
        return sum(s.flips for s in self.stages)

    @property
    def total_steps(self) -> int:
        return sum(s.steps for s in self.stages)

    @property
    def edge_status_changes_total(self) -> int:
        return sum(self.edge_changes.values())

    def flipped_chains(self) -> list[Chain]:
        return [c for s in self.stages for c in s.chains_flipped]

    def to_dict(self) -> dict:
        return {
            "stages": [s.to_dict() for s in self.stages],
            "edge_status_changes_total": self.edge_status_changes_total,
            "perfect": self.perfect,
            "seed": self.seed,
        }


def run_stage(g: Graph, m: Matching, n: int, tape: RandomTape,
              stats: Optional[RunStats] = None) -> tuple[Matching, StageStats]:
    """Step with cap ``2n - 1`` until no chain of that length is left."""
    cap = 2 * n - 1
    st = StageStats(n=n)
    while True:
        before = m
        m, flipped = step(g, m, cap, tape)
        if not flipped:
            break
        st.steps += 1
        st.flips += len(flipped)
        st.chains_flipped.extend(flipped)
        if stats is not None:
            for c in flipped:
                stats.edge_changes.update(c.edges())
            if any(m.mate[v] is None for v in before.matched_set()):
                stats.monotone = False
    st.unmatched_fraction = len(m.unmatched()) / g.n if g.n else 0.0
    return m, st


def run(g: Graph, seed: int,
        observer: Optional[Callable[[int, Matching], None]] = None) -> tuple[Matching, RunStats]:
    """Run stages 1, 2, ... until the matching is perfect or the chain cap
    passes the vertex count.  ``observer(n, m)`` sees every stage output."""
    if bipartition_of(g) is None:
        raise NotBipartiteError(f"graph {g.name or '<unnamed>'} is not bipartite")
    if not g.is_regular:
        warnings.warn("graph is not regular; the result is a maximum matching, "
                      "not necessarily perfect", NonRegularWarning, stacklevel=2)
    tape = RandomTape(seed)
    m = Matching.empty(g.n)
    stats = RunStats(seed=seed, n_vertices=g.n)
    n = 1
    while not m.is_perfect() and 2 * n - 1 <= g.n:
        m, st = run_stage(g, m, n, tape, stats)
        stats.stages.append(st)
        if observer is not None:
            observer(n, m)
        n += 1
    stats.perfect = m.is_perfect()
    return m, stats


# ---------------------------------------------------------------------------
# Proof diagnostics


def alternating_sets(g: Graph, m: Matching, depth: int) -> list[frozenset[int]]:
    """``A_0`` = unmatched vertices; even k -> neighbors, odd k -> partners."""
    sets = [frozenset(m.unmatched())]
    mate = m.mate
    for k in range(depth):
        cur = sets[-1]
        if k % 2 == 0:
            nxt = {y for x in cur for y in g.adj[x]}
        else:
            nxt = {mate[x] for x in cur if mate[x] is not None}
        sets.append(frozenset(nxt))
    return sets


@dataclass(frozen=True)
class AlternatingReport:
    stage: int
    sets: tuple[frozenset[int], ...]
    independent: bool
    bijection: bool
    no_unmatched: bool

    @property
    def passed(self) -> bool:
        return self.independent and self.bijection and self.no_unmatched


def check_alternating_sets(g: Graph, m: Matching, stage: int) -> AlternatingReport:
    """Checks that must hold when ``m`` has no chain of length <= 2*stage - 1:
    even ``A_k`` (k < stage) independent, ``|A_{k+1}| = |A_k|`` for odd
    k < stage, and no unmatched vertex in ``A_k`` for 1 <= k <= 2*stage - 1."""
    cap = 2 * stage - 1
    sets = alternating_sets(g, m, max(cap, stage))
    independent = all(
        not any(y in sets[k] for x in sets[k] for y in g.adj[x])
        for k in range(0, stage, 2))
    bijection = all(len(sets[k + 1]) == len(sets[k]) for k in range(1, stage, 2))
    no_unmatched = all(m.mate[x] is not None for k in range(1, cap + 1) for x in sets[k])
    return AlternatingReport(stage, tuple(sets), independent, bijection, no_unmatched)


def decay_constant(rho: float) -> float:
    return 2.0 / (1.0 + rho * rho)


def decay_bound(n: int, rho: float) -> float:
    """``c ** -floor((n + 1) / 2)`` with ``c = 2 / (1 + rho^2)``."""
    return decay_constant(rho) ** -((n + 1) // 2)


@dataclass(frozen=True)
class DecayRow:
    n: int
    observed: float
    bound: float
    threshold: float

    @property
    def ok(self) -> bool:
        return self.observed <= self.threshold


@dataclass(frozen=True)
class DecayReport:
    rho: float
    c: float
    rows: tuple[DecayRow, ...]
    mass_bound: float
    observed_mass: float
    runs: int

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.rows)


def decay_report(stats: RunStats | Sequence[RunStats], rho: float,
                 margin: Optional[Callable[[float, int], float]] = None) -> DecayReport:
    """Compare the unmatched fraction after each stage with ``a_n``.

    Several runs are averaged stage by stage; a run that finished early
    contributes 0 to later stages.  ``margin(a_n, n_vertices)`` defaults to
    ``3 * sqrt(a_n / n_vertices) + 0.02``.  Advisory only.
    """
    runs = [stats] if isinstance(stats, RunStats) else list(stats)
    if not runs:
        raise ValueError("no runs to report on")
    if margin is None:
        margin = lambda a, nv: 3.0 * math.sqrt(a / nv) + 0.02  # noqa: E731
    n_stages = max(len(r.stages) for r in runs)
    nv = runs[0].n_vertices
    rows = []
    for i in range(n_stages):
        obs = float(np.mean([r.stages[i].unmatched_fraction if i < len(r.stages) else 0.0
                             for r in runs]))
        a = decay_bound(i + 1, rho)
        rows.append(DecayRow(i + 1, obs, a, a + margin(a, nv)))
    mass_bound = sum(2 * k * decay_bound(k - 1, rho) for k in range(1, n_stages + 1))
    # each endpoint of a flipped chain sends 1 to every vertex of the chain
    sent = [sum(2 * len(c.vertices) for c in r.flipped_chains()) / r.n_vertices for r in runs]
    return DecayReport(rho, decay_constant(rho), tuple(rows), mass_bound,
                       float(np.mean(sent)), len(runs))


def edge_to_vertex_uniforms(g: Graph, edge_values) -> np.ndarray:
    """Vertex value = sum of incident edge values mod 1.

    ``edge_values`` is aligned with ``g.edges`` (last axis) or a mapping
    from edge to value; extra leading axes are treated as samples.
    """
    if isinstance(edge_values, dict):
        missing = [e for e in g.edges if e not in edge_values]
        if missing:
            raise ValueError(f"missing edge values for {missing[:5]}")
        edge_values = [edge_values[e] for e in g.edges]
    w = np.asarray(edge_values, dtype=float)
    if w.shape[-1] != g.m:
        raise ValueError(f"expected {g.m} edge values, got {w.shape[-1]}")
    inc = np.zeros((g.m, g.n))
    for i, (u, v) in enumerate(g.edges):
        inc[i, u] = inc[i, v] = 1.0
    return np.mod(w @ inc, 1.0)
