"""The bitmask engine against the public relational checker."""

import pytest

from mtmkit import kernel as K
from mtmkit.model import check
from mtmkit.synth import from_layout, graph_from_engine, relax, relaxation_units
from mtmkit.wellformed import validate

LAYOUTS = list(K.generate(5, K.Vocabulary(fences=True, rmw=True)))


def test_generation_is_canonical_and_unique():
    assert len(LAYOUTS) == len(set(LAYOUTS))
    assert all(K.canonical(lay) == lay for lay in LAYOUTS)


@pytest.mark.parametrize("layout", LAYOUTS[::7], ids=str)
def test_engine_verdicts_match_checker(layout):
    p = from_layout(layout)
    sk = K.Skeleton(layout)
    for ex in sk.executions():
        g = graph_from_engine(p, ex)
        assert validate(g) == []
        want = check(g, validate=False).violated_axioms
        mask = sk.violated(ex)
        assert [a for i, a in enumerate(K.AXIOMS) if mask >> i & 1] == want
        if want:
            public = all(check(relax(g, u), validate=False, first=True).consistent
                         for u in relaxation_units(g))
            assert sk.minimal(ex) == public


def test_needs_match_axioms():
    assert K.needs_for(K.AXIOMS.index("rmw_atomicity")).rmw
    assert K.needs_for(K.AXIOMS.index("remap_order")).pte
