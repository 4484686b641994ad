"""Transition-operator spectra of regular graphs and the independence,
expansion, mixing, and variance inequalities that follow from them.

Inner products use the uniform probability measure on the vertices:
``(f, g) = mean(f * g)``, so a vertex set ``B`` has density ``b = |B| / n``
and the centered indicator ``f_B = 1_B - b`` has ``(f_B, f_B) = b (1 - b)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Optional, Sequence, Union

import numpy as np
from scipy.linalg import eigh_tridiagonal

from . import oracles
from .graph import Graph, bipartition_of, edge_boundary, neighbor_set

EIG_TOL = 1e-9
SLACK = 1e-7
IDENTITY_TOL = 1e-9
EXACT_LIMIT = 24


class SpectralError(ValueError):
    pass


@dataclass(frozen=True)
class Check:
    """One evaluated inequality or identity.

    ``relation`` is ``"le"`` (lhs <= rhs), ``"ge"``, or ``"eq"``.
    """

    name: str
    lhs: float
    rhs: float
    relation: str = "le"
    tol: float = SLACK

    @property
    def passed(self) -> bool:
        if self.relation == "le":
            return self.lhs <= self.rhs + self.tol
        if self.relation == "ge":
            return self.lhs + self.tol >= self.rhs
        return abs(self.lhs - self.rhs) <= self.tol

    def to_dict(self) -> dict:
        return {"name": self.name, "lhs": self.lhs, "rhs": self.rhs, "pass": self.passed}


@lru_cache(maxsize=64)
def transition_matrix(g: Graph) -> np.ndarray:
    if g.degree is None or g.degree < 1:
        raise SpectralError(f"graph {g.name or '<unnamed>'} is not regular of degree >= 1")
    p = g.adjacency_matrix() / g.degree
    p.setflags(write=False)
    return p


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues of ``P = A / d`` in descending order.

    ``rho_plus`` is the second eigenvalue with its sign, ``rho_minus`` is
    minus the smallest, and ``rho = max(|lambda_2|, |lambda_n|)``.
    """

    eigenvalues: tuple[float, ...]
    d: int

    @property
    def rho_plus(self) -> float:
        return self.eigenvalues[1]

    @property
    def rho_minus(self) -> float:
        return -self.eigenvalues[-1]

    @property
    def rho(self) -> float:
        return max(abs(self.eigenvalues[1]), abs(self.eigenvalues[-1]))

    @property
    def connected(self) -> bool:
        return self.eigenvalues[1] < 1 - EIG_TOL

    @property
    def bipartite_connected(self) -> bool:
        return self.connected and abs(self.eigenvalues[-1] + 1) <= EIG_TOL

    def to_dict(self) -> dict:
        return {"d": self.d, "eigenvalues": list(self.eigenvalues), "rho_plus": self.rho_plus,
                "rho_minus": self.rho_minus, "rho": self.rho}


def transition_spectrum(g: Graph) -> Spectrum:
    if g.n < 2:
        raise SpectralError("need at least two vertices")
    w = np.linalg.eigvalsh(transition_matrix(g))[::-1]
    return Spectrum(tuple(float(x) for x in w), g.degree)


def _rho_minus(x: Union[Spectrum, float]) -> float:
    return x.rho_minus if isinstance(x, Spectrum) else float(x)


# ---------------------------------------------------------------------------
# Independence-ratio bounds


def hoffman_bound(spec: Union[Spectrum, float]) -> float:
    """``rho_minus / (1 + rho_minus)``; also accepts ``rho_minus`` directly."""
    r = _rho_minus(spec)
    return r / (1 + r)


def improved_bound_1(d: int, rho_minus: float) -> float:
    """``(d - 1) / ((1 + rho_minus) (d (2 - rho_minus) - 1))``.

    Valid for every regular graph; sharper than :func:`hoffman_bound` only
    when ``rho_minus > 1 - 1/d``.
    """
    if d < 2:
        raise SpectralError("improved_bound_1 needs d >= 2")
    return (d - 1) / ((1 + rho_minus) * (d * (2 - rho_minus) - 1))


def improved_bound_2(d: int, rho_minus: float) -> Optional[float]:
    """Integrality bound from the conditional variance of neighbor counts.

    With ``k = floor(d * rho_minus)`` returns
    ``max(k / (d + k), (k^2 + k) / (k^2 + (1 + 2d) k + d - d^2 rho_minus))``,
    or ``None`` when ``d * rho_minus`` is an integer.
    """
    if d < 2:
        raise SpectralError("improved_bound_2 needs d >= 2")
    x = d * rho_minus
    if abs(x - round(x)) < EIG_TOL or not 0 < rho_minus < 1:
        return None
    k = math.floor(x)
    return max(k / (d + k), (k * k + k) / (k * k + (1 + 2 * d) * k + d - d * d * rho_minus))


@dataclass(frozen=True)
class BoundSummary:
    hoffman: float
    improved1: Optional[float]
    improved2: Optional[float]
    best: float
    winner: str

    def to_dict(self) -> dict:
        return {"hoffman": self.hoffman, "improved1": self.improved1,
                "improved2": self.improved2, "best": self.best, "winner": self.winner}


def best_independence_bound(spec: Spectrum) -> BoundSummary:
    d, r = spec.d, spec.rho_minus
    hoff = hoffman_bound(r)
    imp1 = improved_bound_1(d, r) if d >= 2 else None
    imp2 = improved_bound_2(d, r) if d >= 2 else None
    best, winner = hoff, "hoffman"
    # improvement 1 is only counted past its threshold; ties keep the earlier winner
    if imp1 is not None and r >= 1 - 1 / d - EIG_TOL and imp1 < best - 1e-12:
        best, winner = imp1, "improved1"
    if imp2 is not None and imp2 < best - 1e-12:
        best, winner = imp2, "improved2"
    return BoundSummary(hoff, imp1, imp2, best, winner)


@dataclass(frozen=True)
class SubsetStats:
    B: frozenset[int]
    n: int
    independent: bool
    maximal_independent: bool

    @property
    def b(self) -> float:
        return len(self.B) / self.n

    def indicator(self) -> np.ndarray:
        x = np.zeros(self.n)
        x[list(self.B)] = 1.0
        return x

    @property
    def f_B(self) -> np.ndarray:
        return self.indicator() - self.b


def subset_stats(g: Graph, B: Iterable[int]) -> SubsetStats:
    s = frozenset(B)
    if any(not 0 <= v < g.n for v in s):
        raise ValueError("subset contains a vertex outside the graph")
    indep = oracles.is_independent(g, s)
    maximal = indep and all(v in s or any(u in s for u in g.adj[v]) for v in range(g.n))
    return SubsetStats(s, g.n, indep, maximal)


class NotIndependentError(ValueError):
    pass


def hoffman_equality_check(g: Graph, B: Iterable[int], spec: Optional[Spectrum] = None,
                           tol: float = 1e-7) -> bool:
    """True iff ``P f_B = -rho_minus f_B`` entrywise within ``tol``."""
    st = subset_stats(g, B)
    if not st.independent:
        raise NotIndependentError("B is not an independent set")
    spec = spec or transition_spectrum(g)
    f = st.f_B
    return bool(np.all(np.abs(transition_matrix(g) @ f + spec.rho_minus * f) <= tol))


# ---------------------------------------------------------------------------
# Expansion


@dataclass(frozen=True)
class ExpansionResult:
    value: float
    witness: tuple[int, ...]
    exact: bool

    @property
    def mode(self) -> str:
        return "exact" if self.exact else "sampled-upper-bound"


def subset_expansion(g: Graph, B: Iterable[int]) -> float:
    s = set(B)
    k = len(s)
    return edge_boundary(g, s) * g.n / (g.degree * k * (g.n - k))


def expansion_constant(g: Graph, exact_limit: int = EXACT_LIMIT, seed: int = 0,
                       restarts: int = 32) -> ExpansionResult:
    """Exact by exhaustive search up to ``exact_limit`` vertices; beyond that,
    the best of a Fiedler sweep and seeded local search (an upper bound)."""
    if g.degree is None:
        raise SpectralError("expansion constant needs a regular graph")
    if not g.is_connected():
        return ExpansionResult(0.0, tuple(sorted(next(iter(_components(g))))), exact=True)
    if g.n <= exact_limit:
        r = oracles.brute_cheeger(g, limit=exact_limit)
        return ExpansionResult(float(r.value), r.witness, exact=True)
    return _sampled_expansion(g, seed, restarts)


def _components(g: Graph) -> list[set[int]]:
    left = set(range(g.n))
    out = []
    while left:
        root = min(left)
        comp = {root} | neighbor_set(g, [root])
        frontier = set(comp)
        while frontier:
            frontier = neighbor_set(g, frontier) - comp
            comp |= frontier
        out.append(comp)
        left -= comp
    return out


def _sampled_expansion(g: Graph, seed: int, restarts: int) -> ExpansionResult:
    n = g.n
    _, vecs = np.linalg.eigh(transition_matrix(g))
    order = np.argsort(vecs[:, -2], kind="stable")
    best_val, best_set = math.inf, ()
    for k in range(1, n):
        s = tuple(sorted(int(v) for v in order[:k]))
        val = subset_expansion(g, s)
        if val < best_val:
            best_val, best_set = val, s
    rng = np.random.default_rng(seed)
    for _ in range(restarts):
        cur = set(int(v) for v in np.flatnonzero(rng.random(n) < 0.5))
        if not 0 < len(cur) < n:
            continue
        val = subset_expansion(g, cur)
        improved = True
        while improved:
            improved = False
            for v in rng.permutation(n):
                trial = cur ^ {int(v)}
                if 0 < len(trial) < n:
                    tv = subset_expansion(g, trial)
                    if tv < val - 1e-15:
                        cur, val, improved = trial, tv, True
        if val < best_val:
            best_val, best_set = val, tuple(sorted(cur))
    return ExpansionResult(best_val, best_set, exact=False)


@dataclass(frozen=True)
class CheegerReport:
    phi: float
    quarter_square: float
    sqrt_term: float
    gap_plus: float
    gap_abs: float
    checks: tuple[Check, ...]
    diagnostics: tuple[Check, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def rho_variant_holds(self) -> bool:
        return all(c.passed for c in self.diagnostics)


def verify_cheeger_chain(g: Graph, phi: Optional[float] = None,
                         spec: Optional[Spectrum] = None) -> CheegerReport:
    """``phi^2/8 <= 1 - sqrt(1 - (phi/2)^2) <= 1 - rho_plus <= phi``.

    The same middle term against ``1 - rho`` is evaluated as a diagnostic
    and never counted as a failure.
    """
    if g.degree is None or not g.is_connected():
        raise SpectralError("Cheeger chain needs a connected regular graph")
    if phi is None:
        if g.n > EXACT_LIMIT:
            raise SpectralError(f"exact expansion constant needs n <= {EXACT_LIMIT}")
        phi = float(oracles.brute_cheeger(g).value)
    spec = spec or transition_spectrum(g)
    t1 = phi * phi / 8
    t2 = 1 - math.sqrt(max(0.0, 1 - (phi / 2) ** 2))
    t3 = 1 - spec.rho_plus
    t4 = phi
    checks = (
        Check("cheeger:square<=sqrt", t1, t2),
        Check("cheeger:sqrt<=gap_plus", t2, t3),
        Check("cheeger:gap_plus<=phi", t3, t4),
    )
    diag = (Check("cheeger:sqrt<=gap_rho", t2, 1 - spec.rho),)
    return CheegerReport(phi, t1, t2, t3, 1 - spec.rho, checks, diag)


def _ordered_variation(g: Graph, f: np.ndarray) -> float:
    e = np.asarray(g.edges)
    if len(e) == 0:
        return 0.0
    return 2.0 * float(np.sum(np.abs(f[e[:, 0]] - f[e[:, 1]])))


def verify_level_sets(g: Graph, f: Sequence[float], phi: Optional[float] = None) -> Check:
    """``2 * P[f = 0] * phi * mean(f) <= (1/(n d)) * sum_{x~y ordered} |f(x) - f(y)|``."""
    f = np.asarray(f, dtype=float)
    if f.shape != (g.n,):
        raise ValueError(f"expected {g.n} values")
    if np.any(f < 0):
        raise ValueError("level-set inequality needs f >= 0")
    if phi is None:
        phi = expansion_constant(g).value
    lhs = 2 * float(np.mean(f == 0)) * phi * float(np.mean(f))
    rhs = _ordered_variation(g, f) / (g.n * g.degree)
    return Check("level_sets", lhs, rhs)


# ---------------------------------------------------------------------------
# Subset inequalities


@dataclass(frozen=True)
class SubsetReport:
    B: frozenset[int]
    b: float
    independent: bool
    checks: tuple[Check, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str) -> Check:
        return next(c for c in self.checks if c.name == name)


def verify_subset_bounds(g: Graph, B: Iterable[int], spec: Optional[Spectrum] = None) -> SubsetReport:
    """Neighbor expansion and variance bounds for any ``B``; for independent
    ``B`` also ``(P f_B, f_B) = -b^2``, ``E[q/d | B^c] = b/(1-b)`` and
    ``Var(q/d | B^c) <= b (rho_minus - m)(rho_plus + m)`` with ``m = b/(1-b)``,
    where ``q(x)`` counts neighbors of ``x`` in ``B``."""
    st = subset_stats(g, B)
    if not 0 < len(st.B) < g.n:
        raise ValueError("B must be nonempty and proper")
    spec = spec or transition_spectrum(g)
    P = transition_matrix(g)
    n, b, rho = g.n, st.b, spec.rho
    ind = st.indicator()
    p_ind = P @ ind  # |N(x) & B| / d

    nb = len(neighbor_set(g, st.B)) / n
    checks = [
        Check("neighbor_expansion", nb, b / (rho * rho * (1 - b) + b), "ge"),
        Check("variance", float(np.mean((p_ind - b) ** 2)), rho * rho * b * (1 - b)),
    ]
    if st.independent:
        f = ind - b
        m = b / (1 - b)
        q = p_ind[ind == 0]
        checks += [
            Check("inner_product_identity", float(np.mean((P @ f) * f)), -b * b, "eq", IDENTITY_TOL),
            Check("conditional_mean", float(np.mean(q)), m, "eq", IDENTITY_TOL),
            Check("conditional_variance", float(np.var(q)),
                  b * (spec.rho_minus - m) * (spec.rho_plus + m)),
        ]
    return SubsetReport(st.B, b, st.independent, tuple(checks))


def verify_mixing(g: Graph, B1: Iterable[int], B2: Iterable[int],
                  spec: Optional[Spectrum] = None) -> Check:
    """``|mean(1_{B1} * P 1_{B2}) - b1 b2| <= rho sqrt(b1 b2 (1-b1)(1-b2))``."""
    spec = spec or transition_spectrum(g)
    s1, s2 = subset_stats(g, B1), subset_stats(g, B2)
    lhs = abs(float(np.mean(s1.indicator() * (transition_matrix(g) @ s2.indicator())))
              - s1.b * s2.b)
    rhs = spec.rho * math.sqrt(s1.b * s2.b * (1 - s1.b) * (1 - s2.b))
    return Check("mixing", lhs, rhs)


def mixing_sweep(g: Graph, spec: Optional[Spectrum] = None) -> tuple[float, tuple[int, int]]:
    """Largest ``lhs - rhs`` of the mixing inequality over all subset pairs,
    with the bitmasks attaining it.  Exhaustive; keep ``n`` small."""
    spec = spec or transition_spectrum(g)
    n = g.n
    masks = np.arange(1 << n)
    X = ((masks[:, None] >> np.arange(n)[None, :]) & 1).astype(float)
    b = X.mean(axis=1)
    lhs = np.abs(X @ transition_matrix(g) @ X.T / n - np.outer(b, b))
    s = np.sqrt(b * (1 - b))
    gap = lhs - spec.rho * np.outer(s, s)
    i, j = np.unravel_index(int(np.argmax(gap)), gap.shape)
    return float(gap[i, j]), (int(i), int(j))


# ---------------------------------------------------------------------------
# Regular tree


def estimate_tree_rho(d: int, radius: int = 256) -> float:
    """Top eigenvalue of ``A/d`` on the radius-``radius`` ball of the
    ``d``-regular tree with zero boundary; increases to ``2 sqrt(d-1) / d``.

    The Perron vector is radial, so the ball collapses to a weighted path
    on the levels ``0..radius``.
    """
    if d < 2 or radius < 1:
        raise ValueError("need d >= 2 and radius >= 1")
    diag = np.zeros(radius + 1)
    off = np.full(radius, math.sqrt(d - 1))
    off[0] = math.sqrt(d)
    top = eigh_tridiagonal(diag, off, eigvals_only=True, select="i",
                           select_range=(radius, radius))
    return float(top[0]) / d


# ---------------------------------------------------------------------------
# JSON-ready report


def spectral_report(g: Graph, oracle: bool = False) -> dict:
    spec = transition_spectrum(g)
    bounds = best_independence_bound(spec)
    checks: list[Check] = []
    ev = spec.eigenvalues
    checks.append(Check("spectrum:top_eigenvalue", ev[0], 1.0, "eq", EIG_TOL))
    checks.append(Check("spectrum:range", max(abs(x) for x in ev), 1.0, "le", EIG_TOL))
    checks.append(Check("spectrum:bipartite_iff_bottom",
                        float(spec.bipartite_connected),
                        float(g.is_connected() and bipartition_of(g) is not None), "eq", 0.0))
    if oracle:
        alpha = oracles.max_independent_set(g)
        ratio = alpha.value / g.n
        checks.append(Check("independence:hoffman", ratio, bounds.hoffman, "le", EIG_TOL))
        if bounds.improved1 is not None:
            checks.append(Check("independence:improved1", ratio, bounds.improved1, "le", EIG_TOL))
        if bounds.improved2 is not None:
            checks.append(Check("independence:improved2", ratio, bounds.improved2, "le", EIG_TOL))
        checks.append(Check("independence:best", ratio, bounds.best, "le", EIG_TOL))
    return {
        "graph_id": g.name,
        "n": g.n,
        "d": g.degree,
        "eigenvalues": list(ev),
        "rho_plus": spec.rho_plus,
        "rho_minus": spec.rho_minus,
        "rho": spec.rho,
        "bounds": bounds.to_dict(),
        "checks": [c.to_dict() for c in checks],
    }
