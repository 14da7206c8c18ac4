import pytest
from hypothesis import given, settings, strategies as st

from mtmkit import kernel as K
from mtmkit.canon import canonical_form
from mtmkit.model import check, x86_tso
from mtmkit.synth import (
    SynthConfig,
    SynthTimeout,
    from_layout,
    is_minimal,
    relaxation_units,
    screen,
    synthesize,
    to_layout,
)
from conftest import golden


@pytest.mark.parametrize("axiom,bound,count", [
    ("remap_order", 3, 0), ("remap_order", 4, 1), ("sc_per_loc", 4, 5),
    ("tlb_causality", 4, 4), ("causality", 4, 0), ("causality", 5, 2),
    ("rmw_atomicity", 6, 0),
])
def test_small_suite_sizes(axiom, bound, count):
    assert len(synthesize(SynthConfig(axiom, bound))) == count


def test_remap_order_minimum_is_the_stale_walk_test():
    (entry,) = synthesize(SynthConfig("remap_order", 4)).entries
    assert canonical_form(entry.program) == canonical_form(golden("ptwalk2").program)
    assert set(entry.violated) == {"sc_per_loc", "remap_order"}


@pytest.mark.parametrize("axiom", K.AXIOMS)
def test_entries_are_forbidden_minimal_and_screened(axiom):
    for e in synthesize(SynthConfig(axiom, 6, enable_rmw=True)).entries:
        assert axiom in check(e.witness).violated_axioms
        assert is_minimal(e.witness)
        assert screen(e.program) is None


def test_oracle_backend_matches_engine_below_six():
    for axiom in K.AXIOMS:
        for b in (4, 5):
            a = synthesize(SynthConfig(axiom, b, enable_rmw=True))
            o = synthesize(SynthConfig(axiom, b, enable_rmw=True, backend="oracle"))
            assert [canonical_form(p) for p in a.programs] == [canonical_form(p) for p in o.programs]


def test_other_models_use_the_oracle():
    cfg = SynthConfig("causality", 5, model=x86_tso())
    assert cfg.engine == "oracle"
    assert len(synthesize(cfg)) == 2


def test_deterministic():
    a = synthesize(SynthConfig("tlb_causality", 5))
    b = synthesize(SynthConfig("tlb_causality", 5))
    assert [(e.program, e.witness) for e in a.entries] == [(e.program, e.witness) for e in b.entries]


def test_timeout_carries_partial_suite():
    with pytest.raises(SynthTimeout) as ei:
        synthesize(SynthConfig("sc_per_loc", 7, timeout=0.0))
    assert not ei.value.partial.complete


def test_config_validation():
    with pytest.raises(ValueError):
        SynthConfig("nope", 4)
    with pytest.raises(ValueError):
        SynthConfig("causality", 0)


def test_unrelated_write_is_not_minimal():
    g = golden("mp_unrelated_write").execution
    assert not check(g).consistent
    assert not is_minimal(g)


def test_minimality_needs_a_forbidden_execution():
    with pytest.raises(ValueError):
        is_minimal(golden("sb_permitted").execution)


def test_relaxation_units_couple_ghosts_and_remaps():
    p = golden("dirtybit3").program
    desc = [u.describe(p) for u in relaxation_units(p)]
    assert desc == ["{PTE0 + INV1}", "{R2 + ptw2}", "{W3 + db3 + ptw3}"]


def test_screen_reasons():
    assert screen(golden("ptwalk2").program) is None
    reads = from_layout(((( K.OP_R, 0, 1, 0),),))
    assert screen(reads) == "no write"


layouts = st.sampled_from(list(K.generate(6, K.Vocabulary(fences=True, rmw=True))))


@settings(max_examples=60, deadline=None)
@given(layouts)
def test_layout_program_round_trip(layout):
    p = from_layout(layout)
    assert to_layout(p) == layout
    assert from_layout(to_layout(p)) == p
