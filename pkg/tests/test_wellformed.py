import pytest

from mtmkit.eltio import parse
from mtmkit.relgraph import Semantics
from mtmkit.wellformed import (
    WellFormednessError,
    ensure_wellformed,
    useless_invlpgs,
    validate,
    validate_program,
)
from conftest import golden

BASE = """elt t
init x -> a
thread 0
  PTE0: Wpte x -> b
  INV1: invlpg x
  R2: R x
  ptw2: ghost ptw R2
thread 1
  R3: R x
  ptw3: ghost ptw R3
  R4: R x
"""


def rules(text, sem=Semantics()):
    doc = parse(text, check=False)
    out = {v.rule for v in validate_program(doc.program)}
    if doc.execution is not None:
        out |= {v.rule for v in validate(doc.execution, sem)}
    return out


@pytest.mark.parametrize("name", ["sb_permitted", "sb_alias_forbidden", "pa_edges", "remap_ambiguity",
                                  "ptwalk2", "dirtybit3", "stale_remote_mapping",
                                  "mp_unrelated_write"])
def test_goldens_are_wellformed(name):
    g = golden(name).execution
    assert validate(g) == []
    ensure_wellformed(g)


def test_write_without_dirty_bit_is_rejected():
    assert "WF4" in rules("elt t\nthread 0\n  W0: W x\n")


def test_remap_needs_an_invlpg_per_thread_touching_the_va():
    assert "WF8" in rules(BASE)


def test_remote_invlpg_satisfies_remap():
    text = BASE.replace("thread 1\n", "thread 1\n  INV5: invlpg x\n")
    assert rules(text) == set()


def test_rmw_must_be_adjacent_same_va():
    text = ("elt t\nthread 0\n  R0: R x\n  ptw0: ghost ptw R0\n  W1: W y\n"
            "  db1: ghost db W1\n  ptw1: ghost ptw W1\n  rmw R0 W1\n")
    assert "WF10" in rules(text)


def test_read_with_two_sources_rejected():
    text = ("elt t\nthread 0\n  W0: W x\n  db0: ghost db W0\n  ptw0: ghost ptw W0\n"
            "  W1: W x\n  db1: ghost db W1\n  ptw1: ghost ptw W1\nthread 1\n  R2: R x\n  ptw2: ghost ptw R2\n"
            "exec\n  rf W0 R2\n  rf W1 R2\n")
    assert "WF3" in rules(text)


def test_event_must_use_its_own_walk():
    text = ("elt t\nthread 0\n  R0: R x\n  ptw0: ghost ptw R0\n  R1: R x\n  ptw1: ghost ptw R1\n"
            "exec\n  rf_ptw ptw0 R1\n")
    assert "WF5" in rules(text)


def test_walk_sharing_direction_follows_semantics():
    text = ("elt t\nthread 0\n  R0: R x\n  R1: R x\n  ptw1: ghost ptw R1\n"
            "exec\n  rf_ptw ptw1 R0\n")
    assert rules(text, Semantics(walk_sharing="any")) == set()
    assert "WF5" in rules(text, Semantics(walk_sharing="forward"))


def test_invlpg_between_breaks_sharing():
    text = ("elt t\nthread 0\n  R0: R x\n  ptw0: ghost ptw R0\n  INV1: invlpg x\n  R2: R x\n"
            "exec\n  rf_ptw ptw0 R2\n")
    assert "WF5" in rules(text)


def test_spurious_invlpg_usefulness():
    useful = golden("ptwalk2").program
    assert useless_invlpgs(useful) == []
    doc = parse("elt t\nthread 0\n  INV0: invlpg x\n  W1: W y\n  db1: ghost db W1\n"
                "  ptw1: ghost ptw W1\n", check=False)
    assert useless_invlpgs(doc.program) != []


def test_ensure_raises_with_rule_ids():
    doc = parse("elt t\nthread 0\n  W0: W x\n", check=False)
    with pytest.raises(WellFormednessError) as ei:
        ensure_wellformed(doc.execution or _graph(doc.program))
    assert any(v.rule == "WF4" for v in ei.value.violations)


def _graph(p):
    from mtmkit.relgraph import ExecutionGraph
    return ExecutionGraph(p, frozenset(), frozenset())
