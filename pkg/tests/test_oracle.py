import pytest

from mtmkit import kernel as K
from mtmkit.eltio import parse
from mtmkit.oracle import OracleBoundError, classify, enumerate_executions
from mtmkit.synth import SynthConfig, synthesize, to_layout
from mtmkit.wellformed import validate
from conftest import golden


def test_write_with_walk_has_two_executions():
    # the walk reads either the initial PTE or the write's own dirty-bit update
    p = parse("elt t\nthread 0\n  W0: W x\n  db0: ghost db W0\n  ptw0: ghost ptw W0\n").program
    assert len(list(enumerate_executions(p))) == 2


def test_executions_are_wellformed_and_distinct():
    p = golden("sb_alias_forbidden").program
    gs = list(enumerate_executions(p))
    assert all(validate(g) == [] for g in gs)
    assert len(set(gs)) == len(gs)


def test_classify_golden_programs():
    c = classify(golden("ptwalk2").program)
    assert (c.permitted, c.forbidden) == (1, 1)
    assert c.per_axiom["remap_order"] == 1
    c = classify(golden("sb_permitted").program)
    assert c.forbidden == 0 and c.permitted > 0


def test_bound_is_enforced():
    with pytest.raises(OracleBoundError):
        list(enumerate_executions(golden("mp_unrelated_write").program, bound=5))


def test_agrees_with_engine_execution_counts():
    for e in synthesize(SynthConfig("sc_per_loc", 5)).entries:
        p = e.program
        n_pa = 1
        by_pa = {}
        for ev in p.events:
            if ev.pa:
                by_pa[ev.pa] = by_pa.get(ev.pa, 0) + 1
        for k in by_pa.values():
            for i in range(2, k + 1):
                n_pa *= i
        engine = len(list(K.Skeleton(to_layout(p)).executions()))
        assert len(list(enumerate_executions(p))) == engine * n_pa
