"""Finite simple graphs, finite groups given by multiplication tables, and
the generators used throughout the package.

Vertices are always the dense integers ``0..n-1``.
"""

from __future__ import annotations

import itertools
import math
import os
import warnings
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence, Union

import numpy as np


class GraphError(ValueError):
    """Base class for graph construction failures."""


class GraphParseError(GraphError):
    """Malformed graph or group-table file."""


class GraphValidationError(GraphError):
    """Self-loop, duplicate edge, or out-of-range vertex."""


class GenerationError(GraphError):
    """Random generation gave up after the retry limit."""


@dataclass(frozen=True)
class Graph:
    """Immutable simple undirected graph.

    ``edges`` holds pairs ``(u, v)`` with ``u < v`` in sorted order and
    ``adj[v]`` is the sorted neighbor tuple of ``v``.  ``degree`` is the
    common degree when the graph is regular and ``None`` otherwise.
    """

    n: int
    edges: tuple[tuple[int, int], ...]
    adj: tuple[tuple[int, ...], ...] = field(repr=False)
    degree: Optional[int]
    name: str = ""

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence[int]], name: str = "") -> "Graph":
        if n < 0:
            raise GraphValidationError(f"negative vertex count {n}")
        seen: set[tuple[int, int]] = set()
        for e in edges:
            u, v = int(e[0]), int(e[1])
            if not (0 <= u < n and 0 <= v < n):
                raise GraphValidationError(f"edge ({u}, {v}) out of range for n={n}")
            if u == v:
                raise GraphValidationError(f"self-loop at vertex {u}")
            key = (u, v) if u < v else (v, u)
            if key in seen:
                raise GraphValidationError(f"duplicate edge {key}")
            seen.add(key)
        ordered = tuple(sorted(seen))
        nbrs: list[list[int]] = [[] for _ in range(n)]
        for u, v in ordered:
            nbrs[u].append(v)
            nbrs[v].append(u)
        adj = tuple(tuple(sorted(a)) for a in nbrs)
        degs = {len(a) for a in adj}
        degree = degs.pop() if len(degs) == 1 else None
        g = cls(n=n, edges=ordered, adj=adj, degree=degree, name=name)
        g.validate()
        return g

    @property
    def m(self) -> int:
        return len(self.edges)

    @property
    def is_regular(self) -> bool:
        return self.degree is not None

    def validate(self) -> None:
        """Re-check simplicity, symmetry, and the recorded degree."""
        for v, nb in enumerate(self.adj):
            if v in nb:
                raise GraphValidationError(f"self-loop at vertex {v}")
            if len(set(nb)) != len(nb):
                raise GraphValidationError(f"repeated neighbor at vertex {v}")
            for u in nb:
                if v not in self.adj[u]:
                    raise GraphValidationError(f"asymmetric adjacency {v}->{u}")
            if self.degree is not None and len(nb) != self.degree:
                raise GraphValidationError(f"vertex {v} has degree {len(nb)} != {self.degree}")

    def has_edge(self, u: int, v: int) -> bool:
        return v in self.adj[u]

    def adjacency_matrix(self) -> np.ndarray:
        a = np.zeros((self.n, self.n))
        if self.edges:
            e = np.asarray(self.edges)
            a[e[:, 0], e[:, 1]] = 1.0
            a[e[:, 1], e[:, 0]] = 1.0
        return a

    def is_connected(self) -> bool:
        if self.n == 0:
            return True
        return len(_component(self, 0)) == self.n

    def relabeled(self, name: str) -> "Graph":
        return Graph(n=self.n, edges=self.edges, adj=self.adj, degree=self.degree, name=name)


@dataclass(frozen=True)
class Bipartition:
    side: tuple[int, ...]

    def part(self, s: int) -> list[int]:
        return [v for v, t in enumerate(self.side) if t == s]

    def is_valid_for(self, g: Graph) -> bool:
        return len(self.side) == g.n and all(self.side[u] != self.side[v] for u, v in g.edges)


def _component(g: Graph, root: int) -> set[int]:
    seen = {root}
    queue = deque([root])
    while queue:
        x = queue.popleft()
        for y in g.adj[x]:
            if y not in seen:
                seen.add(y)
                queue.append(y)
    return seen


# ---------------------------------------------------------------------------
# Named graphs and file formats


def petersen() -> Graph:
    outer = [(i, (i + 1) % 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    spokes = [(i, i + 5) for i in range(5)]
    return Graph.from_edges(10, outer + inner + spokes, name="petersen")


def complete(k: int) -> Graph:
    return Graph.from_edges(k, itertools.combinations(range(k), 2), name=f"complete:{k}")


def complete_bipartite(a: int, b: int) -> Graph:
    edges = [(i, a + j) for i in range(a) for j in range(b)]
    return Graph.from_edges(a + b, edges, name=f"complete-bipartite:{a},{b}")


def cycle(k: int) -> Graph:
    if k < 3:
        raise GraphValidationError("a simple cycle needs at least 3 vertices")
    return Graph.from_edges(k, [(i, (i + 1) % k) for i in range(k)], name=f"cycle:{k}")


def path(k: int) -> Graph:
    return Graph.from_edges(k, [(i, i + 1) for i in range(k - 1)], name=f"path:{k}")


def hypercube(k: int) -> Graph:
    n = 1 << k
    edges = [(x, x ^ (1 << i)) for x in range(n) for i in range(k) if x < x ^ (1 << i)]
    return Graph.from_edges(n, edges, name=f"hypercube:{k}")


def _int_args(arg: str, count: int, ident: str) -> list[int]:
    try:
        vals = [int(t) for t in arg.split(",")]
    except ValueError:
        raise GraphParseError(f"bad parameters in {ident!r}") from None
    if len(vals) != count:
        raise GraphParseError(f"{ident!r} expects {count} parameter(s)")
    return vals


def named_graph(ident: str) -> Graph:
    """Build one of the catalog graphs, e.g. ``"petersen"`` or ``"cycle:6"``."""
    kind, _, arg = ident.strip().partition(":")
    if kind == "petersen" and not arg:
        return petersen()
    builders = {
        "complete": (complete, 1),
        "cycle": (cycle, 1),
        "hypercube": (hypercube, 1),
        "path": (path, 1),
        "complete-bipartite": (complete_bipartite, 2),
    }
    if kind not in builders or not arg:
        raise GraphParseError(f"unknown graph identifier {ident!r}")
    fn, count = builders[kind]
    return fn(*_int_args(arg, count, ident))


def _content_lines(text: str) -> list[str]:
    return [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]


def parse_graph(text: str, name: str = "") -> Graph:
    lines = _content_lines(text)
    if not lines:
        raise GraphParseError("empty graph file")
    try:
        header = [int(t) for t in lines[0].split()]
        rows = [[int(t) for t in ln.split()] for ln in lines[1:]]
    except ValueError as exc:
        raise GraphParseError(f"non-integer token: {exc}") from None
    if len(header) != 2:
        raise GraphParseError("header must be 'n m'")
    n, m = header
    if len(rows) != m:
        raise GraphParseError(f"header declares {m} edges, found {len(rows)}")
    for r in rows:
        if len(r) != 2:
            raise GraphParseError(f"edge line must have two vertices, got {r}")
    return Graph.from_edges(n, rows, name=name)


def format_graph(g: Graph) -> str:
    out = []
    if g.name:
        out.append(f"# {g.name}")
    out.append(f"{g.n} {g.m}")
    out.extend(f"{u} {v}" for u, v in g.edges)
    return "\n".join(out) + "\n"


GraphSource = Union[str, os.PathLike, Sequence[Sequence[int]], Graph]


def load_graph(source: GraphSource, n: Optional[int] = None) -> Graph:
    """Load a graph from a file path, a catalog identifier, or an edge list.

    For an explicit edge list the vertex count defaults to one more than the
    largest endpoint.
    """
    if isinstance(source, Graph):
        source.validate()
        return source
    if isinstance(source, (str, os.PathLike)):
        p = os.fspath(source)
        if os.path.isfile(p):
            with open(p, encoding="utf-8") as fh:
                return parse_graph(fh.read(), name=os.path.basename(p))
        return named_graph(str(p))
    edges = [tuple(e) for e in source]
    if n is None:
        n = 1 + max((max(e) for e in edges), default=-1)
    return Graph.from_edges(n, edges, name="edge-list")


# ---------------------------------------------------------------------------
# Finite groups


@dataclass(frozen=True)
class GroupTable:
    """Multiplication table ``mul[x][y] = x*y`` of a finite group."""

    mul: np.ndarray = field(repr=False)
    identity: int
    name: str = ""

    def __post_init__(self) -> None:
        t = np.asarray(self.mul, dtype=np.int64)
        if t.ndim != 2 or t.shape[0] != t.shape[1]:
            raise GraphValidationError("multiplication table must be square")
        t.setflags(write=False)
        object.__setattr__(self, "mul", t)
        self._check()
        object.__setattr__(self, "inv", self._inverses())

    @property
    def order(self) -> int:
        return self.mul.shape[0]

    def _check(self) -> None:
        t, e, k = self.mul, self.identity, self.order
        if not 0 <= e < k:
            raise GraphValidationError("identity index out of range")
        if t.min() < 0 or t.max() >= k:
            raise GraphValidationError("table entry out of range")
        ar = np.arange(k)
        if not (np.array_equal(t[e], ar) and np.array_equal(t[:, e], ar)):
            raise GraphValidationError("identity laws fail")
        if k <= 64:
            lhs = t[t[:, :, None], ar[None, None, :]]  # (xy)z
            rhs = t[ar[:, None, None], t[None, :, :]]  # x(yz)
            ok = np.array_equal(lhs, rhs)
        else:
            rng = np.random.default_rng(0)
            x, y, z = rng.integers(0, k, size=(3, 20000))
            ok = np.array_equal(t[t[x, y], z], t[x, t[y, z]])
        if not ok:
            raise GraphValidationError("multiplication is not associative")

    def _inverses(self) -> tuple[int, ...]:
        inv = []
        for x in range(self.order):
            hits = np.flatnonzero(self.mul[x] == self.identity)
            if len(hits) != 1 or self.mul[hits[0], x] != self.identity:
                raise GraphValidationError(f"element {x} has no two-sided inverse")
            inv.append(int(hits[0]))
        return tuple(inv)

    def op(self, x: int, y: int) -> int:
        return int(self.mul[x, y])

    def generated_by(self, gens: Iterable[int]) -> set[int]:
        gens = list(gens)
        seen = {self.identity}
        queue = deque([self.identity])
        while queue:
            x = queue.popleft()
            for s in gens:
                y = int(self.mul[x, s])
                if y not in seen:
                    seen.add(y)
                    queue.append(y)
        return seen


def cyclic_group(k: int) -> GroupTable:
    ar = np.arange(k)
    return GroupTable((ar[:, None] + ar[None, :]) % k, 0, name=f"cyclic:{k}")


def direct_product(*groups: GroupTable) -> GroupTable:
    mul = groups[0].mul
    ident = groups[0].identity
    for h in groups[1:]:
        a, b = mul.shape[0], h.order
        # element (x, y) has index x*b + y
        xs = np.repeat(np.arange(a), b)
        ys = np.tile(np.arange(b), a)
        mul = mul[xs[:, None], xs[None, :]] * b + h.mul[ys[:, None], ys[None, :]]
        ident = ident * b + h.identity
    return GroupTable(mul, ident, name="product:" + ",".join(g.name for g in groups))


def dihedral_group(k: int) -> GroupTable:
    """Order-2k dihedral group; index ``i`` is r^i, index ``k+i`` is s r^i."""
    mul = np.zeros((2 * k, 2 * k), dtype=np.int64)
    for a in range(2 * k):
        fa, ra = divmod(a, k)
        for b in range(2 * k):
            fb, rb = divmod(b, k)
            # s^fa r^ra s^fb r^rb = s^(fa+fb) r^((-1)^fb ra + rb)
            r = ((-ra if fb else ra) + rb) % k
            mul[a, b] = ((fa + fb) % 2) * k + r
    return GroupTable(mul, 0, name=f"dihedral:{k}")


def symmetric_group(k: int) -> GroupTable:
    """S_k with elements ordered lexicographically; ``mul[x][y] = x o y``."""
    if not 1 <= k <= 5:
        raise GraphValidationError("symmetric groups are provided up to S_5")
    perms = list(itertools.permutations(range(k)))
    index = {p: i for i, p in enumerate(perms)}
    mul = np.array([[index[tuple(p[q[i]] for i in range(k))] for q in perms] for p in perms])
    return GroupTable(mul, index[tuple(range(k))], name=f"symmetric:{k}")


def transpositions(k: int) -> list[int]:
    """Indices of all transpositions in :func:`symmetric_group` ``(k)``."""
    perms = list(itertools.permutations(range(k)))
    return [i for i, p in enumerate(perms) if sum(1 for j in range(k) if p[j] != j) == 2]


def parse_group_table(text: str, name: str = "") -> GroupTable:
    lines = _content_lines(text)
    if not lines:
        raise GraphParseError("empty group table file")
    try:
        order, ident = (int(t) for t in lines[0].split())
        rows = [[int(t) for t in ln.split()] for ln in lines[1:]]
    except ValueError:
        raise GraphParseError("group table header must be 'order identity'") from None
    if len(rows) != order or any(len(r) != order for r in rows):
        raise GraphParseError(f"group table must have {order} rows of {order} entries")
    return GroupTable(np.array(rows, dtype=np.int64), ident, name=name)


def format_group_table(t: GroupTable) -> str:
    rows = [f"{t.order} {t.identity}"] + [" ".join(map(str, r)) for r in t.mul.tolist()]
    return "\n".join(rows) + "\n"


def named_group(ident: str) -> GroupTable:
    """``cyclic:6``, ``dihedral:5``, ``symmetric:3``, or ``product:2,2,2``."""
    kind, _, arg = ident.partition(":")
    if kind == "product":
        return direct_product(*(cyclic_group(k) for k in _int_args(arg, len(arg.split(",")), ident)))
    builders = {"cyclic": cyclic_group, "dihedral": dihedral_group, "symmetric": symmetric_group}
    if kind not in builders:
        raise GraphParseError(f"unknown group identifier {ident!r}")
    return builders[kind](*_int_args(arg, 1, ident))


def load_group(source: str) -> GroupTable:
    if os.path.isfile(source):
        with open(source, encoding="utf-8") as fh:
            return parse_group_table(fh.read(), name=os.path.basename(source))
    return named_group(source)


class GeneratorWarning(UserWarning):
    pass


def cayley_graph(table: GroupTable, gens: Iterable[int], name: str = "") -> Graph:
    """Right Cayley graph: ``x`` is joined to ``x*s`` for every generator ``s``."""
    S = sorted(set(int(s) for s in gens))
    if table.identity in S:
        raise GraphValidationError("generator set contains the identity")
    for s in S:
        if not 0 <= s < table.order:
            raise GraphValidationError(f"generator {s} is not a group element")
        if table.inv[s] not in S:
            raise GraphValidationError(f"generator set is not closed under inversion ({s})")
    if len(table.generated_by(S)) != table.order:
        warnings.warn("generators do not generate the group; Cayley graph is disconnected",
                      GeneratorWarning, stacklevel=2)
    edges = {tuple(sorted((x, int(table.mul[x, s])))) for x in range(table.order) for s in S}
    label = name or f"cayley({table.name};{','.join(map(str, S))})"
    return Graph.from_edges(table.order, edges, name=label)


# ---------------------------------------------------------------------------
# Random instances and structure


def random_regular_bipartite(side_size: int, d: int, seed: int,
                             max_tries: int = 10_000) -> tuple[Graph, Bipartition]:
    """Superimpose ``d`` uniform random perfect matchings between the two sides.

    Vertex ``i < side_size`` is joined to ``side_size + sigma_j(i)``.  A whole
    draw is rejected if two matchings share an edge.
    """
    if not 1 <= d <= side_size:
        raise GraphValidationError(f"need 1 <= d <= side_size, got d={d}, side={side_size}")
    rng = np.random.default_rng(seed)
    rows = np.arange(side_size)
    for _ in range(max_tries):
        perms = np.stack([rng.permutation(side_size) for _ in range(d)])
        if d > 1:
            srt = np.sort(perms, axis=0)
            if np.any(srt[1:] == srt[:-1]):
                continue
        edges = [(int(i), side_size + int(p[i])) for p in perms for i in rows]
        g = Graph.from_edges(2 * side_size, edges,
                             name=f"random-bipartite:{side_size},{d},seed={seed}")
        side = Bipartition(tuple([0] * side_size + [1] * side_size))
        return g, side
    raise GenerationError(
        f"no simple graph after {max_tries} tries (side_size={side_size}, d={d}, seed={seed})")


def girth(g: Graph) -> float:
    """Shortest cycle length, ``math.inf`` for forests."""
    best = math.inf
    for root in range(g.n):
        dist = {root: 0}
        parent = {root: -1}
        queue = deque([root])
        while queue:
            x = queue.popleft()
            # any cycle closed from here has length >= 2*dist[x]
            if 2 * dist[x] >= best:
                break
            for y in g.adj[x]:
                if y not in dist:
                    dist[y] = dist[x] + 1
                    parent[y] = x
                    queue.append(y)
                elif parent[x] != y:
                    best = min(best, dist[x] + dist[y] + 1)
    return best


def bipartition_of(g: Graph) -> Optional[Bipartition]:
    side = [-1] * g.n
    for root in range(g.n):
        if side[root] != -1:
            continue
        side[root] = 0
        queue = deque([root])
        while queue:
            x = queue.popleft()
            for y in g.adj[x]:
                if side[y] == -1:
                    side[y] = 1 - side[x]
                    queue.append(y)
                elif side[y] == side[x]:
                    return None
    return Bipartition(tuple(side))


def edge_boundary(g: Graph, B: Iterable[int]) -> int:
    inside = set(B)
    return sum(1 for u, v in g.edges if (u in inside) != (v in inside))


def neighbor_set(g: Graph, B: Iterable[int]) -> set[int]:
    out: set[int] = set()
    for x in B:
        out.update(g.adj[x])
    return out
