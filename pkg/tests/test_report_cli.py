import csv
import io
import json
import subprocess
import sys

import pytest

from factormatch.cli import main
from factormatch.graph import named_graph, parse_graph
from factormatch.report import VerificationReport, dumps_json, emit_report, render
from factormatch.suites import SuiteConfig, run_suite


def failing_report(n_fail=12):
    rep = VerificationReport("demo", seeds={"seed": 1})
    rep.add("ok", "g", 0.1, 0.2, True)
    for i in range(n_fail):
        rep.add("bad", f"g{i}", 1.0 / 3, 0.0, False, k=i)
    rep.add("soft", "g", 1.0, 0.0, False, advisory=True)
    return rep


class TestReport:
    def test_summary_tally(self):
        s = failing_report().summary
        assert s == {"total": 14, "hard": 13, "hard_passed": 1, "hard_failed": 12,
                     "advisory": 1, "advisory_passed": 0, "advisory_failed": 1}

    def test_json_stable(self):
        a, b = render(failing_report(), "json"), render(failing_report(), "json")
        assert a == b
        data = json.loads(a)
        assert data["records"][1]["lhs"] == 0.333333333333
        assert list(data) == sorted(data)

    def test_json_csv_counts(self):
        rep = failing_report()
        rows = list(csv.DictReader(io.StringIO(render(rep, "csv"))))
        assert len(rows) == len(json.loads(render(rep, "json"))["records"])
        assert sum(r["pass"] == "0" and r["advisory"] == "0" for r in rows) == rep.summary["hard_failed"]

    def test_text_summary(self):
        text = render(failing_report(), "text-summary")
        assert "FAIL (exit 1)" in text
        assert text.count("  bad [") == 10

    def test_advisory_does_not_fail(self):
        rep = VerificationReport("x")
        rep.add("soft", "g", 1, 0, False, advisory=True)
        assert rep.ok and rep.exit_code == 0

    def test_nonfinite(self):
        assert json.loads(dumps_json({"x": float("inf")})) == {"x": "inf"}

    def test_emit_unwritable(self, tmp_path):
        with pytest.raises(OSError):
            emit_report(failing_report(), "json", str(tmp_path / "missing" / "r.json"))

    def test_unknown_format(self):
        with pytest.raises(ValueError):
            render(failing_report(), "xml")


class TestSuites:
    def test_empty_corpus(self):
        rep = run_suite("all", SuiteConfig.empty())
        assert rep.ok and rep.records == [] and rep.summary["total"] == 0

    def test_limits(self):
        with pytest.raises(ValueError):
            run_suite("subsets", SuiteConfig(nmax=30))

    def test_unknown_suite(self):
        with pytest.raises(ValueError):
            run_suite("nope")

    def test_small_matching_suite(self):
        cfg = SuiteConfig(seeds=10, matching_graphs=[named_graph("cycle:6")], edge_samples=2000,
                          mass_transport_seeds=3)
        rep = run_suite("matching", cfg)
        assert rep.ok
        ids = {r.check_id for r in rep.records}
        assert {"matching:perfect", "matching:stage_postcondition", "matching:alternating_sets",
                "mass_transport:flip_mass", "edgefactor:uniform"} <= ids
        assert all(r.advisory for r in rep.records if r.check_id.startswith("edgefactor"))

    def test_deterministic(self):
        cfg = SuiteConfig(seeds=5, matching_graphs=[named_graph("hypercube:3")], edge_samples=1000,
                          mass_transport_seeds=2)
        assert render(run_suite("matching", cfg)) == render(run_suite("matching", cfg))


class TestCLI:
    def test_gen_named(self, tmp_path, capsys):
        out = tmp_path / "g.txt"
        assert main(["gen", "--type", "named", "--name", "petersen", "--out", str(out)]) == 0
        assert parse_graph(out.read_text()).m == 15

    def test_gen_random_reproducible(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        for p in (a, b):
            main(["gen", "--type", "random-bipartite", "--side", "20", "--degree", "3",
                  "--seed", "9", "--out", str(p)])
        assert a.read_bytes() == b.read_bytes()

    def test_gen_cayley(self, tmp_path):
        out = tmp_path / "c.txt"
        main(["gen", "--type", "cayley", "--group", "cyclic:6", "--gens", "1,5", "--out", str(out)])
        assert parse_graph(out.read_text()).edges == named_graph("cycle:6").edges

    def test_spectrum(self, capsys):
        assert main(["spectrum", "--graph", "complete:4"]) == 0
        data = json.loads(capsys.readouterr().out)
        assert data["rho_plus"] == pytest.approx(-1 / 3) and data["d"] == 3

    def test_bounds_oracle(self, capsys):
        assert main(["bounds", "--graph", "petersen", "--oracle"]) == 0
        data = json.loads(capsys.readouterr().out)
        assert data["bounds"]["winner"] == "hoffman" and data["bounds"]["improved2"] is None

    def test_match(self, tmp_path, capsys):
        trace, stats = tmp_path / "t.csv", tmp_path / "s.json"
        assert main(["match", "--graph", "hypercube:3", "--seed", "4", "--trace", str(trace),
                     "--stats", str(stats)]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert len(lines) == 4 and all(len(x.split()) == 2 for x in lines)
        assert json.loads(stats.read_text())["perfect"] is True
        assert trace.read_text().startswith("n,steps,flips,unmatched_fraction\n")

    def test_match_non_bipartite(self, capsys):
        assert main(["match", "--graph", "petersen"]) == 2
        assert "bipartite" in capsys.readouterr().err

    def test_verify_exit_code(self, tmp_path):
        out = tmp_path / "r.json"
        assert main(["verify", "--suite", "spectral", "--out", str(out)]) == 0
        assert json.loads(out.read_text())["summary"]["hard_failed"] == 0

    def test_verify_over_limit(self, capsys):
        assert main(["verify", "--suite", "cheeger", "--nmax", "99"]) == 2

    def test_module_entry_point(self):
        r = subprocess.run([sys.executable, "-m", "factormatch", "spectrum", "--graph", "cycle:6",
                            "--format", "text"], capture_output=True, text=True, check=True)
        assert "rho_minus: 1.0" in r.stdout
