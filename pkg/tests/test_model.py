import pytest

from mtmkit.model import (
    Base,
    Compose,
    UnresolvedRelation,
    check,
    eval_expr,
    get_model,
    x86_tso,
    x86t_elt,
)
from mtmkit.relgraph import derive
from conftest import golden

VERDICTS = {
    "sb_permitted": [],
    "sb_alias_forbidden": ["sc_per_loc"],
    "pa_edges": [],
    "remap_ambiguity": [],
    "ptwalk2": ["sc_per_loc", "remap_order"],
    "dirtybit3": [],
    "stale_remote_mapping": ["remap_order"],
    "mp_unrelated_write": ["causality"],
}


@pytest.mark.parametrize("name,want", VERDICTS.items())
def test_golden_verdicts(name, want):
    doc = golden(name)
    v = check(doc.execution)
    assert v.violated_axioms == want
    assert v.consistent == (not want)
    assert doc.expect[0] == ("permitted" if not want else "forbidden")


def test_witness_cycle_is_closed_and_in_relation():
    g = golden("stale_remote_mapping").execution
    v = check(g)
    (name, cyc), = v.violated
    assert name == "remap_order"
    labels = [g.program.event(i).label for i in cyc]
    assert labels == ["PTE0", "INV2", "R3", "PTE0"]
    assert "remap_order" in v.describe(g)


def test_tso_ignores_translation_axioms():
    g = golden("stale_remote_mapping").execution
    assert check(g, x86_tso()).consistent
    assert not check(g, x86t_elt()).consistent


def test_model_without_and_lookup():
    m = x86t_elt().without("remap_order")
    assert "remap_order" not in m.axiom_names
    assert get_model("x86t_elt").axiom_names == [
        "sc_per_loc", "rmw_atomicity", "causality", "remap_order", "tlb_causality"]
    with pytest.raises(KeyError):
        get_model("arm")


def test_first_stops_early():
    g = golden("ptwalk2").execution
    assert len(check(g, first=True).violated) == 1
    assert len(check(g).violated) == 2


def test_expressions_evaluate_and_unknown_names_fail():
    g = golden("sb_alias_forbidden").execution
    d = derive(g)
    assert eval_expr(g, d, Base("fr")) == d.fr
    assert eval_expr(g, d, Compose(Base("rf"), Base("fr"))) <= g.co
    with pytest.raises(UnresolvedRelation):
        eval_expr(g, d, Base("nope"))
