from hypothesis import given, strategies as st

from mtmkit import relgraph as rg
from mtmkit.relgraph import INIT, Kind, derive
from conftest import golden

nodes = st.integers(0, 6)
relations = st.frozensets(st.tuples(nodes, nodes), max_size=14)


@given(relations)
def test_closure_is_idempotent_and_transitive(r):
    t = rg.transitive_closure(r)
    assert r <= t
    assert rg.transitive_closure(t) == t
    assert rg.compose(t, t) <= t


@given(relations)
def test_acyclic_iff_closure_irreflexive(r):
    t = rg.transitive_closure(r)
    assert rg.is_acyclic(r) == all(a != b for a, b in t)
    assert rg.is_acyclic(r) == rg.is_acyclic(t)


@given(relations)
def test_witness_cycle_uses_edges_of_the_relation(r):
    c = rg.find_cycle(r)
    if c is None:
        assert rg.is_acyclic(r)
        return
    assert c[0] == c[-1]
    assert all((a, b) in r for a, b in zip(c, c[1:]))


@given(relations, relations)
def test_inverse_distributes_over_composition(r, s):
    assert rg.inverse(rg.compose(r, s)) == rg.compose(rg.inverse(s), rg.inverse(r))
    assert rg.inverse(rg.inverse(r)) == r


def test_total_order_and_restrict():
    o = rg.total_order([3, 1, 2])
    assert o == {(3, 1), (3, 2), (1, 2)}
    assert rg.restrict(o, {1, 2}) == {(1, 2)}


def test_kind_predicates():
    assert Kind.PTW.is_ghost and Kind.DB.is_ghost and not Kind.R.is_ghost
    assert Kind.WPTE.on_pte and Kind.DB.on_pte and not Kind.W.on_pte
    assert Kind.W.is_data and Kind.R.is_data and not Kind.WPTE.is_data
    assert Kind("Wpte") is Kind.WPTE


def test_ghosts_follow_invoker_in_gpo():
    g = golden("dirtybit3").execution
    p = g.program
    lab = {e.label: e.id for e in p.events}
    d = derive(g)
    assert (lab["W3"], lab["db3"]) in d.gpo_plus
    assert (lab["R2"], lab["ptw3"]) in d.gpo_plus
    # nothing is ordered after a ghost
    assert not any(a == lab["db3"] for a, _ in d.gpo_plus)


def test_remap_makes_later_accesses_use_new_pa():
    g = golden("dirtybit3").execution
    lab = {e.label: e.id for e in g.program.events}
    d = derive(g)
    assert d.effective_pa[lab["R2"]] == "b"
    assert d.effective_pa[lab["W3"]] == "b"


def test_fr_from_init_read():
    g = golden("sb_alias_forbidden").execution
    d = derive(g)
    assert d.fr
    for r, w in d.fr:
        assert g.program.event(w).kind.is_write


def test_restricted_graph_drops_orphan_fr():
    g = golden("mp_unrelated_write").execution
    p = g.program
    src = {b: a for a, b in g.rf if a != INIT}
    r, w = next(iter(src.items()))
    gone = {w, *p.ghosts(w)}
    h = g.restricted([e for e in p.ids if e not in gone])
    d = derive(h, check=False)
    assert not any(a == r for a, _ in d.fr)
