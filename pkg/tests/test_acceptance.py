"""Acceptance criteria, one test each.

Every test prints a single ``[PASS]``/``[FAIL]`` line (also collected into the
terminal summary) before asserting.  Suite counts that differ from the
reference counts fail here on purpose; they are not tuned to match.
"""

import random
import time
from functools import lru_cache
from pathlib import Path

import pytest

from mtmkit import kernel as K
from mtmkit.canon import NotCovered, ReducibleTo, Verbatim, canonical_form, compare, dedup, random_isomorph
from mtmkit.eltio import EltSyntaxError, parse, print_doc, to_text
from mtmkit.model import check
from mtmkit.oracle import enumerate_executions
from mtmkit.relgraph import Kind, derive
from mtmkit.synth import SynthConfig, is_minimal, synthesize
from conftest import ACCEPTANCE, GOLDEN, golden

MALFORMED = Path(__file__).parent / "fixtures" / "malformed"


def report(n, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {n}: {detail}"
    print(line)
    ACCEPTANCE.append(line)
    assert ok, line


@lru_cache(maxsize=None)
def suite(axiom, bound):
    return synthesize(SynthConfig(axiom, bound))


def test_1_golden_verdicts():
    want = {
        "sb_permitted": [],
        "sb_alias_forbidden": ["sc_per_loc"],
        "pa_edges": [],
        "remap_ambiguity": [],
        "ptwalk2": ["sc_per_loc", "remap_order"],
        "stale_remote_mapping": ["remap_order"],
    }
    start = time.perf_counter()
    got = {}
    for name in want:
        doc = golden(name)
        got[name] = check(doc.execution)
    elapsed = time.perf_counter() - start
    bad = [n for n in want if sorted(got[n].violated_axioms) != sorted(want[n])]
    # the remote-mapping witness runs over remap, program order and fr_va edges
    g = golden("stale_remote_mapping").execution
    d = derive(g)
    cyc = dict(got["stale_remote_mapping"].violated)["remap_order"]
    edges = list(zip(cyc, cyc[1:]))
    kinds = {"remap" if e in g.program.remap else "fr_va" if e in d.fr_va
             else "po" if e in d.gpo_plus else "?" for e in edges}
    ok = not bad and kinds == {"remap", "po", "fr_va"} and elapsed < 1.0
    report(1, ok, f"{len(want) - len(bad)}/{len(want)} verdicts exact, witness edges {sorted(kinds)}, "
                  f"{elapsed:.3f}s (< 1s)")


def test_2_minimum_bounds():
    want = {("remap_order", 4): 1, ("sc_per_loc", 4): 5, ("tlb_causality", 4): 4,
            ("causality", 5): 2, ("rmw_atomicity", 7): 1,
            ("remap_order", 3): 0, ("sc_per_loc", 3): 0, ("tlb_causality", 3): 0,
            ("causality", 4): 0, ("rmw_atomicity", 6): 0}
    got = {k: len(suite(*k)) for k in want}
    iso = canonical_form(suite("remap_order", 4).programs[0]) == canonical_form(golden("ptwalk2").program)
    bad = {k: (got[k], v) for k, v in want.items() if got[k] != v}
    report(2, not bad and iso,
           f"{len(want) - len(bad)}/{len(want)} counts exact, remap_order@4 matches the stale-walk test: {iso}"
           + (f"; mismatches (got, want) {bad}" if bad else ""))


def test_3_growth_curve():
    want = {("sc_per_loc", 5): 11, ("sc_per_loc", 6): 15, ("sc_per_loc", 7): 27,
            ("remap_order", 5): 3, ("remap_order", 6): 4, ("remap_order", 7): 4,
            ("tlb_causality", 5): 6, ("tlb_causality", 6): 9, ("tlb_causality", 7): 16,
            ("causality", 6): 5, ("causality", 7): 8,
            ("rmw_atomicity", 8): 2, ("rmw_atomicity", 9): 4}
    got = {k: len(suite(*k)) for k in want}
    bad = {f"{a}@{b}": (got[(a, b)], v) for (a, b), v in want.items() if got[(a, b)] != v}
    report(3, not bad, f"{len(want) - len(bad)}/{len(want)} points exact"
                       + (f"; mismatches (got, want) {bad}" if bad else ""))


def _has_write(g):
    return any(e.kind in (Kind.W, Kind.WPTE) for e in g.program.events)


def test_4_oracle_soundness():
    checked = failures = pte_only = 0
    notes = []
    for axiom in K.AXIOMS:
        for bound in range(1, 7):
            for e in suite(axiom, bound).entries:
                checked += 1
                execs = list(enumerate_executions(e.program))
                forbidden = [g for g in execs if axiom in check(g, validate=False).violated_axioms]
                ok = (bool(forbidden) and e.witness in execs and _has_write(e.witness)
                      and is_minimal(e.witness))
                if not any(ev.kind is Kind.W for ev in e.program.events):
                    pte_only += 1
                if not ok:
                    failures += 1
                    notes.append(e.program.name)
    report(4, failures == 0,
           f"{checked - failures}/{checked} suite entries confirmed by the oracle "
           f"({pte_only} write only through a PTE write)" + (f"; failed {notes}" if notes else ""))


def test_5_non_minimal_construction_excluded():
    g = golden("mp_unrelated_write").execution
    forbidden = "causality" in check(g).violated_axioms
    rejected = not is_minimal(g)
    form = canonical_form(g.program)
    present = [f"{a}@{b}" for (a, b) in [(x, y) for x in K.AXIOMS for y in range(3, 8)]
               if form in {canonical_form(p) for p in suite(a, b).programs}]
    report(5, forbidden and rejected and not present,
           f"violates causality: {forbidden}, rejected by is_minimal: {rejected}, "
           f"present in suites: {present or 'none'}")


def test_6_canonicalization():
    rng = random.Random(20261017)
    programs = total = bad = 0
    dedup_ok = True
    for axiom in K.AXIOMS:
        for bound in range(3, 8):
            ps = suite(axiom, bound).programs
            permuted = []
            for p in ps:
                programs += 1
                f = canonical_form(p)
                for _ in range(100):
                    q = random_isomorph(p, rng)
                    total += 1
                    bad += canonical_form(q) != f
                permuted.append(q)
            dedup_ok &= dedup(ps + permuted) == ps
    report(6, bad == 0 and dedup_ok,
           f"{total - bad}/{total} isomorphs over {programs} programs keep their form, "
           f"dedup(suite + permuted) == suite: {dedup_ok}")


def test_7_compare_categories():
    s = suite("remap_order", 4).programs
    member = isinstance(compare(s[0], s), Verbatim)
    r = compare(golden("dirtybit3").program, s)
    reduced = isinstance(r, ReducibleTo) and r.labels == ("{W3 + db3 + ptw3}",)
    reads = parse("elt reads\ninit x -> a\nthread 0\n  R0: R x\n  ptw0: ghost ptw R0\n"
                  "thread 1\n  R1: R x\n  ptw1: ghost ptw R1\n").program
    nw = compare(reads, s)
    screened = isinstance(nw, NotCovered) and nw.reason == "no write"
    report(7, member and reduced and screened,
           f"member verbatim: {member}, dirty-bit test reducible by "
           f"{getattr(r, 'labels', None)}: {reduced}, write-free program screened: {screened}")


def test_8_performance():
    t = time.perf_counter()
    n7 = len(synthesize(SynthConfig("sc_per_loc", 7)))
    sc7 = time.perf_counter() - t
    t = time.perf_counter()
    n4 = len(synthesize(SynthConfig("remap_order", 4)))
    r4 = time.perf_counter() - t
    report(8, sc7 < 1800 and r4 < 60,
           f"sc_per_loc@7 ({n7} ELTs) in {sc7:.2f}s (< 1800s), remap_order@4 ({n4}) in {r4:.3f}s (< 60s)")


def test_9_round_trip_and_errors():
    files = n_ok = 0
    for path in sorted(GOLDEN.glob("*.elt")):
        files += 1
        doc = parse(path.read_text())
        again = parse(print_doc(doc))
        n_ok += (again.program, again.execution, again.expect) == (doc.program, doc.execution, doc.expect)
    for axiom in K.AXIOMS:
        for bound in range(3, 8):
            for e in suite(axiom, bound).entries:
                files += 1
                text = to_text(e.program, e.witness, e.program.name, ("forbidden", e.violated))
                doc = parse(text)
                n_ok += (doc.program == e.program and doc.execution == e.witness
                         and print_doc(doc) == text)
    errs = ok_errs = 0
    for path in sorted(MALFORMED.glob("*.elt")):
        errs += 1
        text = path.read_text()
        want = text.splitlines()[0].split()[-1]
        try:
            parse(text, path.name)
        except EltSyntaxError as ex:
            ok_errs += f"{ex.line}:{ex.col}" == want and str(ex).startswith(f"{path.name}:{want}:")
    report(9, n_ok == files and ok_errs == errs,
           f"{n_ok}/{files} files round-trip, {ok_errs}/{errs} malformed fixtures give positioned errors")
