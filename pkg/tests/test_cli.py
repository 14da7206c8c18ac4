import csv
import io

from mtmkit.cli import main
from conftest import GOLDEN


def run(*argv):
    out = io.StringIO()
    return main(list(map(str, argv)), out), out.getvalue()


def test_check_reports_witness(tmp_path):
    code, out = run("check", GOLDEN / "sb_alias_forbidden.elt")
    assert code == 0
    assert "sc_per_loc" in out and "->" in out and "met" in out


def test_check_parse_error_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.elt"
    bad.write_text("elt t\nthread 0\n  X0: frob x\n")
    code, _ = run("check", bad)
    assert code == 2
    assert "bad.elt:3:7" in capsys.readouterr().err


def test_usage_errors_exit_2():
    assert run("synth", "--axiom", "remap_order")[0] == 2
    assert run("nope")[0] == 2


def test_synth_writes_suite_stats_and_marker(tmp_path):
    out = tmp_path / "s"
    code, _ = run("synth", "--axiom", "remap_order", "--bound", 4, "--out", out)
    assert code == 0
    assert [f.name for f in sorted(out.glob("*.elt"))] == ["remap_order_4_000.elt"]
    rows = list(csv.reader(open(out / "stats.csv")))
    assert rows[0][:4] == ["axiom", "bound", "count", "runtime_seconds"]
    assert rows[1][:3] == ["remap_order", "4", "1"] and rows[1][4] == "COMPLETE"
    assert (out / "COMPLETE").exists() and not (out / "PARTIAL").exists()
    code, text = run("check", out / "remap_order_4_000.elt")
    assert code == 0 and "expectation forbidden sc_per_loc remap_order: met" in text


def test_synth_timeout_is_partial_and_strict_exits_3(tmp_path):
    out = tmp_path / "p"
    code, _ = run("synth", "--axiom", "sc_per_loc", "--bound", 7, "--timeout", 0,
                  "--strict", "--out", out)
    assert code == 3
    assert (out / "PARTIAL").exists()
    assert list(csv.reader(open(out / "stats.csv")))[1][4] == "PARTIAL"


def test_synth_output_is_deterministic(tmp_path):
    for d in ("a", "b"):
        run("synth", "--axiom", "tlb_causality", "--bound", "3-5", "--out", tmp_path / d)
    names = sorted(f.name for f in (tmp_path / "a").glob("*.elt"))
    assert names == sorted(f.name for f in (tmp_path / "b").glob("*.elt"))
    for n in names:
        assert (tmp_path / "a" / n).read_text() == (tmp_path / "b" / n).read_text()


def test_compare_suite_against_itself_and_dedup(tmp_path):
    s = tmp_path / "s"
    run("synth", "--axiom", "sc_per_loc", "--bound", "4-5", "--out", s)
    code, _ = run("compare", "--suite", s, "--tests", s, "--out", tmp_path / "r.csv")
    assert code == 0
    rows = list(csv.DictReader(open(tmp_path / "r.csv")))
    assert rows and all(r["category"] == "verbatim" for r in rows)
    code, text = run("dedup", s, "--out", tmp_path / "d")
    assert code == 0
    assert len(list((tmp_path / "d").glob("*.elt"))) == 10


def test_compare_reports_reduction(tmp_path):
    s, t = tmp_path / "s", tmp_path / "t"
    run("synth", "--axiom", "remap_order", "--bound", 4, "--out", s)
    t.mkdir()
    (t / "dirtybit3.elt").write_text((GOLDEN / "dirtybit3.elt").read_text())
    run("compare", "--suite", s, "--tests", t, "--out", tmp_path / "r.csv")
    (row,) = csv.DictReader(open(tmp_path / "r.csv"))
    assert row["category"] == "reducible"
    assert row["removed"] == "{W3 + db3 + ptw3}"


def test_oracle_counts():
    code, out = run("oracle", GOLDEN / "ptwalk2.elt")
    assert code == 0
    assert "2 executions, 1 permitted, 1 forbidden" in out
    assert "remap_order: 1" in out
