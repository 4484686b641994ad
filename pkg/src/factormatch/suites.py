"""Built-in corpus and the verification suites behind ``factormatch verify``."""

from __future__ import annotations

import itertools
import math
import zlib
from collections import defaultdict
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import stats as sps

from . import oracles
from . import spectral as sp
from .graph import (
    Graph,
    bipartition_of,
    cayley_graph,
    cyclic_group,
    dihedral_group,
    direct_product,
    girth,
    named_graph,
    random_regular_bipartite,
    symmetric_group,
    transpositions,
)
from .matching import (
    check_alternating_sets,
    decay_report,
    edge_to_vertex_uniforms,
    run,
)
from .report import VerificationReport

SUITES = ("spectral", "cheeger", "subsets", "matching", "decay")
LIMITS = {"cheeger": 24, "subsets": 16, "mixing": 12, "level_sets": 24, "independence": 40}
CHI2_ALPHA = 1e-3


def _adjacent_transpositions(k: int) -> list[int]:
    # (j j+1) for j < k-1, indexed as in symmetric_group(k)
    perms = list(itertools.permutations(range(k)))
    out = []
    for j in range(k - 1):
        p = list(range(k))
        p[j], p[j + 1] = p[j + 1], p[j]
        out.append(perms.index(tuple(p)))
    return out


def _cayley_corpus() -> list[Graph]:
    s3 = symmetric_group(3)
    d4 = dihedral_group(4)
    return [
        cayley_graph(s3, transpositions(3), name="cayley:symmetric:3/transpositions"),
        cayley_graph(d4, [1, 3, 4], name="cayley:dihedral:4/r,r^-1,s"),
        cayley_graph(direct_product(*[cyclic_group(2)] * 3), [1, 2, 4],
                     name="cayley:product:2,2,2/basis"),
        cayley_graph(cyclic_group(10), [1, 5, 9], name="cayley:cyclic:10/1,5,9"),
        cayley_graph(cyclic_group(9), [1, 3, 6, 8], name="cayley:cyclic:9/1,3,6,8"),
        cayley_graph(symmetric_group(4), _adjacent_transpositions(4),
                     name="cayley:symmetric:4/adjacent"),
    ]


def default_corpus() -> list[Graph]:
    named = ["petersen", "complete:4", "complete:5", "complete-bipartite:3,3",
             "complete-bipartite:4,4", "cycle:5", "cycle:6", "cycle:7", "cycle:8",
             "hypercube:3", "hypercube:4", "hypercube:5"]
    graphs = [named_graph(x) for x in named] + _cayley_corpus()
    for side, d, seed in [(6, 3, 1), (10, 3, 2), (16, 4, 3), (20, 3, 4)]:
        graphs.append(random_regular_bipartite(side, d, seed)[0])
    return graphs


def default_matching_graphs(seed: int = 0) -> list[Graph]:
    return [
        named_graph("cycle:6"),
        named_graph("complete-bipartite:3,3"),
        named_graph("hypercube:3"),
        random_regular_bipartite(50, 3, seed)[0],
        random_regular_bipartite(100, 3, seed + 1)[0],
    ]


@dataclass
class SuiteConfig:
    """Sizes, seeds, and limits for a suite run.

    ``nmax`` overrides the exhaustive size limit of the cheeger (default 10)
    and subsets (default 12) suites.  ``corpus=None`` selects the built-in
    corpus; pass ``[]`` (see :meth:`empty`) for none at all.
    """

    seed: int = 0
    seeds: int = 200
    nmax: Optional[int] = None
    corpus: Optional[Sequence[Graph]] = None
    matching_graphs: Optional[Sequence[Graph]] = None
    level_samples: int = 200
    edge_samples: int = 100_000
    decay_side: int = 500
    decay_seeds: int = 50
    tree_radius: int = 256
    mass_transport_seeds: int = 50
    spot_checks: bool = True

    @classmethod
    def empty(cls) -> "SuiteConfig":
        return cls(corpus=[], matching_graphs=[], decay_seeds=0, edge_samples=0,
                   mass_transport_seeds=0, spot_checks=False)

    def graphs(self) -> list[Graph]:
        return default_corpus() if self.corpus is None else list(self.corpus)

    def limit(self, suite: str, default: int) -> int:
        value = default if self.nmax is None else self.nmax
        cap = LIMITS[suite]
        if value > cap:
            raise ValueError(f"{suite} suite limited to n <= {cap}, got nmax={value}")
        return value


def _rng(cfg: SuiteConfig, *labels: str) -> np.random.Generator:
    return np.random.default_rng([cfg.seed] + [zlib.crc32(s.encode()) for s in labels])


# ---------------------------------------------------------------------------


def spectral_suite(cfg: SuiteConfig) -> VerificationReport:
    rep = VerificationReport("spectral", seeds={"seed": cfg.seed})
    for g in cfg.graphs():
        if g.degree is None or g.degree < 1:
            continue
        gid = g.name
        spec = sp.transition_spectrum(g)
        ev = spec.eigenvalues
        rep.add("spectrum:top_eigenvalue", gid, ev[0], 1.0, abs(ev[0] - 1) <= sp.EIG_TOL)
        rep.add("spectrum:range", gid, max(abs(x) for x in ev), 1.0,
                max(abs(x) for x in ev) <= 1 + sp.EIG_TOL)
        conn = g.is_connected()
        rep.add("spectrum:connected_iff_gap", gid, float(spec.connected), float(conn),
                spec.connected == conn)
        bip = conn and bipartition_of(g) is not None
        rep.add("spectrum:bipartite_iff_bottom", gid, float(spec.bipartite_connected), float(bip),
                spec.bipartite_connected == bip)

        bounds = sp.best_independence_bound(spec)
        d, r = spec.d, spec.rho_minus
        if bounds.improved1 is not None and r >= 1 - 1 / d:
            rep.add("independence:improved1<=hoffman", gid, bounds.improved1, bounds.hoffman,
                    bounds.improved1 <= bounds.hoffman + sp.EIG_TOL, rho_minus=r)
        if g.n > LIMITS["independence"]:
            continue
        alpha = oracles.max_independent_set(g)
        ratio = alpha.value / g.n
        for name in ("hoffman", "improved1", "improved2", "best"):
            val = getattr(bounds, name)
            if val is not None:
                rep.add(f"independence:{name}", gid, ratio, val, ratio <= val + sp.EIG_TOL,
                        winner=bounds.winner if name == "best" else None)
        tight = abs(ratio - bounds.hoffman) <= sp.EIG_TOL
        eq = sp.hoffman_equality_check(g, alpha.witness, spec)
        rep.add("independence:equality_iff_eigenvector", gid, float(eq), float(tight),
                eq == tight, witness=list(alpha.witness))

    if not cfg.spot_checks:
        return rep
    # spot values at the 3-regular tree's rho_minus
    rm = 0.942809
    for name, fn, expect in (("improved1", sp.improved_bound_1, 0.474051),
                             ("improved2", sp.improved_bound_2, 0.479436)):
        val = fn(3, rm)
        rep.add(f"independence:{name}_spot", "tree:3", val, expect, abs(val - expect) <= 1e-5,
                d=3, rho_minus=rm)
    return rep


def cheeger_suite(cfg: SuiteConfig) -> VerificationReport:
    rep = VerificationReport("cheeger", seeds={"seed": cfg.seed, "level_samples": cfg.level_samples})
    chain_limit = cfg.limit("cheeger", 10)
    level_limit = max(chain_limit, LIMITS["level_sets"]) if cfg.nmax is None else chain_limit
    for g in cfg.graphs():
        if g.degree is None or g.degree < 1 or not g.is_connected() or g.n > level_limit:
            continue
        gid = g.name
        phi_res = oracles.brute_cheeger(g)
        phi = float(phi_res.value)
        if g.n <= chain_limit:
            crep = sp.verify_cheeger_chain(g, phi)
            for c in crep.checks:
                rep.add(c.name, gid, c.lhs, c.rhs, c.passed, phi=phi)
            for c in crep.diagnostics:
                rep.add(c.name, gid, c.lhs, c.rhs, c.passed, advisory=True, phi=phi)

        c = sp.verify_level_sets(g, np.ones(g.n), phi)
        rep.add("level_sets:constant", gid, c.lhs, c.rhs, c.passed)
        ind = np.zeros(g.n)
        ind[list(phi_res.witness)] = 1.0
        c = sp.verify_level_sets(g, ind, phi)
        rep.add("level_sets:minimizer_indicator", gid, c.lhs, c.rhs, c.passed,
                witness=list(phi_res.witness))
        rng = _rng(cfg, "level_sets", gid)
        worst, fails = -math.inf, 0
        for _ in range(cfg.level_samples):
            f = rng.random(g.n) * (rng.random(g.n) < rng.random())
            c = sp.verify_level_sets(g, f, phi)
            worst = max(worst, c.lhs - c.rhs)
            fails += not c.passed
        if cfg.level_samples:
            rep.add("level_sets:random", gid, worst, sp.SLACK, fails == 0,
                    samples=cfg.level_samples, failures=fails)
    return rep


def subsets_suite(cfg: SuiteConfig) -> VerificationReport:
    rep = VerificationReport("subsets", seeds={"seed": cfg.seed})
    limit = cfg.limit("subsets", 12)
    mix_limit = min(limit, 10 if cfg.nmax is None else LIMITS["mixing"])
    for g in cfg.graphs():
        if g.degree is None or g.degree < 1 or g.n > limit:
            continue
        gid = g.name
        spec = sp.transition_spectrum(g)
        worst: dict[str, float] = defaultdict(lambda: -math.inf)
        count: dict[str, int] = defaultdict(int)
        first_fail: dict[str, list[int]] = {}
        for mask in range(1, (1 << g.n) - 1):
            B = [v for v in range(g.n) if mask >> v & 1]
            for c in sp.verify_subset_bounds(g, B, spec).checks:
                count[c.name] += 1
                if c.relation == "le":
                    margin = c.lhs - c.rhs
                elif c.relation == "ge":
                    margin = c.rhs - c.lhs
                else:
                    margin = abs(c.lhs - c.rhs)
                worst[c.name] = max(worst[c.name], margin)
                if not c.passed and c.name not in first_fail:
                    first_fail[c.name] = B
        for name in sorted(count):
            tol = sp.IDENTITY_TOL if name in ("inner_product_identity", "conditional_mean") else sp.SLACK
            rep.add(f"subsets:{name}", gid, worst[name], tol, name not in first_fail,
                    witness=first_fail.get(name), subsets=count[name])
        if g.n <= mix_limit:
            gap, (i, j) = sp.mixing_sweep(g, spec)
            rep.add("subsets:mixing", gid, gap, sp.SLACK, gap <= sp.SLACK,
                    pairs=(1 << g.n) ** 2, worst_pair=[i, j])
    return rep


def _chi2_uniform(x: np.ndarray, bins: int = 20) -> float:
    counts = np.bincount(np.minimum((x * bins).astype(int), bins - 1), minlength=bins)
    return float(sps.chisquare(counts).pvalue)


def _chi2_pair(x: np.ndarray, y: np.ndarray, bins: int = 5) -> float:
    ix = np.minimum((x * bins).astype(int), bins - 1)
    iy = np.minimum((y * bins).astype(int), bins - 1)
    table = np.zeros((bins, bins))
    np.add.at(table, (ix, iy), 1)
    return float(sps.chi2_contingency(table).pvalue)


def edge_factor_checks(rep: VerificationReport, g: Graph, samples: int,
                       rng: np.random.Generator) -> None:
    """Chi-square checks that the vertex sums of IID edge uniforms look IID."""
    xi = edge_to_vertex_uniforms(g, rng.random((samples, g.m)))
    pmin = min(_chi2_uniform(xi[:, v]) for v in range(g.n))
    rep.add("edgefactor:uniform", g.name, pmin, CHI2_ALPHA, pmin >= CHI2_ALPHA, advisory=True,
            samples=samples)
    u, v = g.edges[0]
    far = next(w for w in range(g.n) if w != u and not g.has_edge(u, w))
    for label, (a, b) in (("adjacent", (u, v)), ("nonadjacent", (u, far))):
        p = _chi2_pair(xi[:, a], xi[:, b])
        rep.add(f"edgefactor:independent_{label}", g.name, p, CHI2_ALPHA, p >= CHI2_ALPHA,
                advisory=True, samples=samples, pair=[a, b])


def mass_transport_checks(rep: VerificationReport, seeds: int) -> None:
    cases = [
        (cyclic_group(6), [1, 5], "cayley:cyclic:6/1,5"),
        (direct_product(*[cyclic_group(2)] * 3), [1, 2, 4], "cayley:product:2,2,2/basis"),
        (symmetric_group(3), transpositions(3), "cayley:symmetric:3/transpositions"),
    ]
    for table, gens, gid in cases:
        g = cayley_graph(table, gens, name=gid)
        mass = np.zeros((g.n, g.n))
        for s in range(seeds):
            _, st = run(g, s)
            for c in st.flipped_chains():
                for x in (c.vertices[0], c.vertices[-1]):
                    for y in c.vertices:
                        mass[x, y] += 1
        mass /= max(seeds, 1)
        # diagonally invariant average of the run's transport
        kernel = [float(np.mean([mass[x, table.op(x, z)] for x in range(g.n)]))
                  for z in range(table.order)]
        res = oracles.mass_transport_check(table, kernel)
        rep.add("mass_transport:flip_mass", gid, res.sent, res.received, res.equal, seeds=seeds)


def matching_suite(cfg: SuiteConfig) -> VerificationReport:
    rep = VerificationReport("matching", seeds={"seed": cfg.seed, "runs": cfg.seeds})
    graphs = default_matching_graphs(cfg.seed) if cfg.matching_graphs is None else cfg.matching_graphs
    for g in graphs:
        gid = g.name
        best = oracles.max_matching(g).value
        if g.degree is not None and bipartition_of(g) is not None:
            rep.add("oracle:konig", gid, best, g.n / 2, 2 * best == g.n)
        perfect = oracle_ok = monotone = 0
        max_flips = 0
        post_viol = alt_viol = stages_seen = 0
        for s in range(cfg.seeds):
            stage_errors = [0, 0, 0]

            def observe(n: int, m, _g=g, _e=stage_errors) -> None:
                _e[2] += 1
                if oracles.has_augmenting_chain(_g, m, 2 * n - 1):
                    _e[0] += 1
                if not check_alternating_sets(_g, m, n).passed:
                    _e[1] += 1

            m, st = run(g, s, observer=observe)
            perfect += m.is_perfect()
            oracle_ok += m.size == best and oracles.is_matching_of(g, m.pairs())
            monotone += st.monotone
            max_flips = max(max_flips, st.total_flips)
            post_viol += stage_errors[0]
            alt_viol += stage_errors[1]
            stages_seen += stage_errors[2]
        n_runs = cfg.seeds
        rep.add("matching:perfect", gid, perfect, n_runs, perfect == n_runs, runs=n_runs)
        rep.add("matching:oracle_size", gid, oracle_ok, n_runs, oracle_ok == n_runs, oracle=best)
        rep.add("matching:flips<=n/2", gid, max_flips, g.n / 2, max_flips <= g.n / 2)
        rep.add("matching:monotone", gid, monotone, n_runs, monotone == n_runs)
        rep.add("matching:stage_postcondition", gid, post_viol, 0, post_viol == 0,
                stages=stages_seen)
        rep.add("matching:alternating_sets", gid, alt_viol, 0, alt_viol == 0, stages=stages_seen)
        if n_runs:
            a = run(g, 0)[1].to_dict()
            b = run(g, 0)[1].to_dict()
            rep.add("matching:deterministic", gid, float(a == b), 1.0, a == b)
    if cfg.edge_samples:
        for name in ("cycle:6", "hypercube:3"):
            edge_factor_checks(rep, named_graph(name), cfg.edge_samples, _rng(cfg, "edgefactor", name))
    if cfg.mass_transport_seeds:
        mass_transport_checks(rep, cfg.mass_transport_seeds)
    return rep


def decay_suite(cfg: SuiteConfig) -> VerificationReport:
    rep = VerificationReport("decay", seeds={"seed": cfg.seed, "runs": cfg.decay_seeds})
    oracle = {3: 2 * math.sqrt(2) / 3, 4: math.sqrt(3) / 2}
    rhos = {}
    for d, exact in oracle.items() if cfg.spot_checks else ():
        est = sp.estimate_tree_rho(d, cfg.tree_radius)
        rhos[d] = est
        rep.add(f"tree_rho:d={d}", f"tree:{d}", est, exact, abs(est - exact) <= 1e-3 and est <= exact,
                radius=cfg.tree_radius)
    if not cfg.decay_seeds:
        return rep
    if 3 not in rhos:
        rhos[3] = sp.estimate_tree_rho(3, cfg.tree_radius)
    gid = f"random-bipartite:{cfg.decay_side},3"
    runs = []
    girths = []
    for s in range(cfg.decay_seeds):
        g, _ = random_regular_bipartite(cfg.decay_side, 3, cfg.seed + s)
        girths.append(girth(g))
        m, st = run(g, s)
        runs.append(st)
    perfect = sum(st.perfect for st in runs)
    rep.add("decay:perfect", gid, perfect, len(runs), perfect == len(runs),
            min_girth=min(girths))
    dr = decay_report(runs, rhos[3])
    for row in dr.rows:
        rep.add("decay:unmatched<=a_n", gid, row.observed, row.threshold, row.ok, advisory=True,
                stage=row.n, a_n=row.bound)
    rep.add("decay:status_change_mass", gid, dr.observed_mass, dr.mass_bound,
            dr.observed_mass <= dr.mass_bound, advisory=True, c=dr.c)
    return rep


SUITE_FUNCS: dict[str, Callable[[SuiteConfig], VerificationReport]] = {
    "spectral": spectral_suite,
    "cheeger": cheeger_suite,
    "subsets": subsets_suite,
    "matching": matching_suite,
    "decay": decay_suite,
}


def run_suite(suite: str, cfg: Optional[SuiteConfig] = None) -> VerificationReport:
    cfg = cfg or SuiteConfig()
    if suite == "all":
        rep = VerificationReport("all", seeds={"seed": cfg.seed})
        for name in SUITES:
            rep.extend(SUITE_FUNCS[name](cfg))
        return rep
    if suite not in SUITE_FUNCS:
        raise ValueError(f"unknown suite {suite!r}; choose from {SUITES + ('all',)}")
    return SUITE_FUNCS[suite](cfg)
