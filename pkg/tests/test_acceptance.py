"""End-to-end acceptance suite.

Each test carries a ``criterion`` marker; the conftest hook prints one
PASS/FAIL line per criterion at the end of the run.
"""

import math
import subprocess
import sys
import time

import numpy as np
import pytest

from factormatch import oracles
from factormatch import spectral as sp
from factormatch.graph import named_graph, random_regular_bipartite
from factormatch.matching import check_alternating_sets, edge_to_vertex_uniforms, run
from factormatch.suites import (
    CHI2_ALPHA,
    SuiteConfig,
    _chi2_pair,
    _chi2_uniform,
    default_corpus,
    run_suite,
)

RUNS = 200
SLACK = 1e-7
TIGHT = 1e-9
CORPUS = default_corpus()


def matching_instances():
    fixed = [named_graph("cycle:6"), named_graph("complete-bipartite:3,3"), named_graph("hypercube:3")]
    for g in fixed:
        yield g.name, [(g, s) for s in range(RUNS)]
    for side in (50, 100):
        yield (f"random-bipartite:{side},3",
               [(random_regular_bipartite(side, 3, s)[0], s) for s in range(RUNS)])


@pytest.fixture(scope="module")
def matching_runs():
    """Every run of the perfect-matching experiment with its per-stage outputs."""
    t0 = time.perf_counter()
    out = {}
    for gid, cases in matching_instances():
        rows = []
        for g, s in cases:
            stages = []
            m, stats = run(g, s, observer=lambda n, mm, acc=stages: acc.append((n, mm)))
            rows.append((g, s, m, stats, stages))
        out[gid] = rows
    return out, time.perf_counter() - t0


@pytest.mark.criterion(1, "perfect matching on every run, flips <= n/2, monotone, < 60 s")
def test_perfect_matching_runs(matching_runs):
    data, elapsed = matching_runs
    bad = []
    for gid, rows in data.items():
        oracle_size = None
        for g, s, m, stats, _ in rows:
            best = oracles.max_matching(g)
            if oracle_size is None:
                oracle_size = best.value
            ok = (m.is_perfect() and m.size == best.value == g.n // 2
                  and oracles.is_matching_of(g, m.pairs())
                  and stats.total_flips <= g.n / 2 and stats.monotone)
            if not ok:
                bad.append((gid, s))
    print(f"criterion 1: {sum(len(r) for r in data.values())} runs, {len(bad)} failures, "
          f"{elapsed:.1f}s")
    assert not bad
    assert elapsed < 60


@pytest.mark.criterion(2, "no augmenting chain of length <= 2n-1 after stage n")
def test_stage_postcondition(matching_runs):
    data, _ = matching_runs
    seen = violations = 0
    for rows in data.values():
        for g, _, _, _, stages in rows:
            for n, mm in stages:
                seen += 1
                violations += oracles.has_augmenting_chain(g, mm, 2 * n - 1)
    print(f"criterion 2: {seen} stages, {violations} violations")
    assert seen > 0 and violations == 0


@pytest.mark.criterion(3, "alternating-set invariants on every stage output")
def test_alternating_sets(matching_runs):
    data, _ = matching_runs
    seen, failed = 0, []
    for gid, rows in data.items():
        for g, s, _, _, stages in rows:
            for n, mm in stages:
                seen += 1
                rep = check_alternating_sets(g, mm, n)
                if not rep.passed:
                    failed.append((gid, s, n))
    print(f"criterion 3: {seen} stages checked, {len(failed)} failures")
    assert seen > 0 and not failed


@pytest.mark.criterion(4, "Hoffman bound on corpus, equality cases and eigenvector test")
def test_hoffman():
    for g in CORPUS:
        if g.n > 40:
            continue
        res = oracles.max_independent_set(g)
        ratio = res.value / g.n
        spec = sp.transition_spectrum(g)
        h = sp.hoffman_bound(spec)
        assert ratio <= h + TIGHT, g.name
        tight = abs(ratio - h) <= TIGHT
        assert sp.hoffman_equality_check(g, res.witness, spec) == tight, g.name
    for name, value in [("petersen", 0.4), ("complete-bipartite:3,3", 0.5), ("cycle:6", 0.5),
                        ("complete:4", 0.25)]:
        g = named_graph(name)
        ratio = oracles.max_independent_set(g).value / g.n
        h = sp.hoffman_bound(sp.transition_spectrum(g))
        assert abs(ratio - value) <= TIGHT and abs(h - value) <= TIGHT, name
    print("criterion 4: Hoffman bound and equality cases verified")


@pytest.mark.criterion(5, "sharpened independence bounds and spot values")
def test_improved_bounds():
    for g in CORPUS:
        if g.n > 40:
            continue
        ratio = oracles.max_independent_set(g).value / g.n
        s = sp.transition_spectrum(g)
        d, r = s.d, s.rho_minus
        b1 = sp.improved_bound_1(d, r)
        assert ratio <= b1 + TIGHT, g.name
        b2 = sp.improved_bound_2(d, r)
        if b2 is not None:
            assert ratio <= b2 + TIGHT, g.name
        if r >= 1 - 1 / d:
            assert b1 <= sp.hoffman_bound(r) + TIGHT, g.name
    v1, v2 = sp.improved_bound_1(3, 0.942809), sp.improved_bound_2(3, 0.942809)
    print(f"criterion 5: spot values {v1:.6f}, {v2:.6f}")
    assert abs(v1 - 0.474051) <= 1e-5
    assert abs(v2 - 0.479436) <= 1e-5


@pytest.fixture(scope="module")
def cheeger_report():
    return run_suite("cheeger", SuiteConfig())


@pytest.mark.criterion(6, "Cheeger chain with 1 - rho_plus, equalities, C_6 diagnostic")
def test_cheeger(cheeger_report):
    checked = 0
    for g in CORPUS:
        if g.n > 10 or not g.is_connected():
            continue
        phi = float(oracles.brute_cheeger(g).value)
        rep = sp.verify_cheeger_chain(g, phi)
        assert all(c.passed for c in rep.checks), g.name
        assert rep.quarter_square <= rep.sqrt_term + SLACK
        assert rep.sqrt_term <= rep.gap_plus + SLACK
        assert rep.gap_plus <= phi + SLACK
        checked += 1
    for name, value in [("complete:4", 4 / 3), ("complete-bipartite:3,3", 1.0)]:
        rep = sp.verify_cheeger_chain(named_graph(name))
        assert abs(rep.phi - value) <= SLACK and abs(rep.gap_plus - value) <= SLACK
    diag = [r for r in cheeger_report.records
            if r.check_id == "cheeger:sqrt<=gap_rho" and r.graph_id == "cycle:6"]
    assert len(diag) == 1 and diag[0].advisory and not diag[0].passed
    assert abs(diag[0].lhs - 0.0572) < 1e-4 and abs(diag[0].rhs) < 1e-9
    assert cheeger_report.ok
    print(f"criterion 6: {checked} graphs, C_6 diagnostic {diag[0].lhs:.4f} vs {diag[0].rhs:.1f}")


@pytest.mark.criterion(7, "exhaustive subset inequalities and mixing bound, < 5 min")
def test_subsets():
    t0 = time.perf_counter()
    rep = run_suite("subsets", SuiteConfig())
    elapsed = time.perf_counter() - t0
    graphs = {g.name for g in CORPUS if g.n <= 12}
    covered = {r.graph_id for r in rep.records}
    assert graphs == covered
    mixed = {r.graph_id for r in rep.records if r.check_id == "subsets:mixing"}
    assert mixed == {g.name for g in CORPUS if g.n <= 10}
    need = {"subsets:neighbor_expansion", "subsets:variance", "subsets:inner_product_identity",
            "subsets:conditional_mean", "subsets:conditional_variance"}
    assert need <= {r.check_id for r in rep.records}
    for r in rep.records:
        if r.check_id.endswith(("inner_product_identity", "conditional_mean")):
            assert r.lhs <= TIGHT
    print(f"criterion 7: {len(rep.records)} aggregated checks over {len(graphs)} graphs, "
          f"{rep.summary['hard_failed']} failures, {elapsed:.1f}s")
    assert rep.ok and elapsed < 300


@pytest.mark.criterion(8, "level-sets inequality: constant, C_6 arc, 200 random f per graph")
def test_level_sets(cheeger_report):
    arc = sp.verify_level_sets(named_graph("cycle:6"), [1, 1, 1, 0, 0, 0], 2 / 3)
    assert abs(arc.lhs - 1 / 3) <= TIGHT and abs(arc.rhs - 1 / 3) <= TIGHT and arc.passed
    graphs = {g.name for g in CORPUS if g.n <= 24 and g.is_connected()}
    for check_id in ("level_sets:constant", "level_sets:random"):
        recs = [r for r in cheeger_report.records if r.check_id == check_id]
        assert {r.graph_id for r in recs} == graphs
        assert all(r.passed for r in recs)
    assert all(r.params["samples"] == 200 for r in cheeger_report.records
               if r.check_id == "level_sets:random")
    print(f"criterion 8: level sets hold on {len(graphs)} graphs")


@pytest.mark.criterion(9, "edge-to-vertex factor: uniformity and independence chi-square")
def test_edge_factor():
    lines = []
    for i, name in enumerate(("cycle:6", "hypercube:3")):
        g = named_graph(name)
        rng = np.random.default_rng([2024, i])
        xi = edge_to_vertex_uniforms(g, rng.random((100_000, g.m)))
        p_uni = min(_chi2_uniform(xi[:, v]) for v in range(g.n))
        u, v = g.edges[0]
        w = next(x for x in range(g.n) if x != u and not g.has_edge(u, x))
        p_adj, p_far = _chi2_pair(xi[:, u], xi[:, v]), _chi2_pair(xi[:, u], xi[:, w])
        lines.append(f"{name} p=({p_uni:.3g}, {p_adj:.3g}, {p_far:.3g})")
        assert min(p_uni, p_adj, p_far) >= CHI2_ALPHA, name
    print("criterion 9: " + "; ".join(lines))


@pytest.mark.criterion(10, "decay advisory on random(500,3) over 50 seeds; tree rho estimate")
def test_decay_advisory():
    rho = sp.estimate_tree_rho(3)
    assert abs(rho - 2 * math.sqrt(2) / 3) <= 1e-3
    rep = run_suite("decay", SuiteConfig())
    stage_rows = [r for r in rep.records if r.check_id == "decay:unmatched<=a_n"]
    assert stage_rows and all(r.advisory for r in stage_rows)
    assert rep.ok  # only hard checks count; advisory misses cannot fail this
    below = sum(r.passed for r in stage_rows)
    print(f"criterion 10: rho={rho:.6f}; {below}/{len(stage_rows)} stages below a_n + eps "
          "(advisory)")


def _cli(*args):
    return subprocess.run([sys.executable, "-m", "factormatch", *args], capture_output=True,
                          check=False)


@pytest.mark.criterion(11, "repeated seeded commands give byte-identical output")
def test_determinism(tmp_path):
    g = tmp_path / "g.txt"
    commands = [
        ["gen", "--type", "random-bipartite", "--side", "30", "--degree", "3", "--seed", "5"],
        ["spectrum", "--graph", "petersen"],
        ["bounds", "--graph", "hypercube:3", "--oracle"],
        ["verify", "--suite", "cheeger", "--nmax", "8"],
        ["verify", "--suite", "spectral", "--format", "csv"],
    ]
    assert _cli("gen", "--type", "random-bipartite", "--side", "40", "--degree", "3",
                "--seed", "11", "--out", str(g)).returncode == 0
    commands.append(["match", "--graph", str(g), "--seed", "3"])
    for cmd in commands:
        a, b = _cli(*cmd), _cli(*cmd)
        assert a.returncode == b.returncode == 0, cmd
        assert a.stdout == b.stdout and a.stderr == b.stderr and a.stdout, cmd
    traces = []
    for k in range(2):
        t = tmp_path / f"trace{k}.csv"
        _cli("match", "--graph", str(g), "--seed", "3", "--trace", str(t))
        traces.append(t.read_bytes())
    assert traces[0] == traces[1]
    print(f"criterion 11: {len(commands) + 1} commands reproduced byte-for-byte")
