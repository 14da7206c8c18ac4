"""Brute-force execution enumeration over the public graph types.

This is deliberately the slow road: every candidate is assembled as an
:class:`ExecutionGraph` and kept only if :func:`wellformed.validate` accepts it,
and verdicts come from :func:`model.check`.  It shares no code with the
bitmask engine the synthesizer runs on, which makes it a useful referee.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import permutations, product

from .model import Model, check, x86t_elt
from .relgraph import (
    DEFAULT_SEMANTICS,
    INIT,
    ExecutionGraph,
    Kind,
    Program,
    Semantics,
    loaded_mapping,
    total_order,
)
from .wellformed import WellFormednessError, validate, validate_program

DEFAULT_BOUND = 16


class OracleBoundError(ValueError):
    pass


def _orders(items):
    """Every strict total order over ``items`` as a relation."""
    return [total_order(p) for p in permutations(items)]


def enumerate_executions(p: Program, sem: Semantics = DEFAULT_SEMANTICS,
                         bound: int = DEFAULT_BOUND):
    """Yield every well-formed execution of ``p`` exactly once.

    Walk sources, PTE-location coherence, TLB sourcing, PA coherence order and
    data-location choices are enumerated; the mapping each walk or access
    uses follows from those, and everything is then filtered by ``validate``.
    """
    if len(p.events) > bound:
        raise OracleBoundError(f"{len(p.events)} events exceeds the oracle bound {bound}")
    bad = validate_program(p)
    if bad:
        raise WellFormednessError(bad)

    vas = sorted({e.va for e in p.events if e.kind.on_pte})
    pte_choices = []
    for v in vas:
        ws = [e.id for e in p.events if e.kind in (Kind.WPTE, Kind.DB) and e.va == v]
        rs = [e.id for e in p.events if e.kind is Kind.PTW and e.va == v]
        pte_choices.append([
            (co, frozenset((s, r) for s, r in zip(src, rs) if s != INIT))
            for co in _orders(ws)
            for src in product([INIT] + ws, repeat=len(rs))
        ])

    data = [e for e in p.events if e.kind.is_data]
    tlb_choices = []
    for e in data:
        own = p.walk_of(e.id)
        if own is not None:
            tlb_choices.append([own])
        else:
            tlb_choices.append([w.id for w in p.events
                                if w.kind is Kind.PTW and w.thread == e.thread and w.va == e.va])

    by_pa = {}
    for w in p.of_kind(Kind.WPTE):
        by_pa.setdefault(p.event(w).pa, []).append(w)
    co_pa_choices = [_orders(ws) for _, ws in sorted(by_pa.items())]

    for pte_pick in product(*pte_choices):
        co_pte = frozenset().union(*(c for c, _ in pte_pick))
        rf_pte = frozenset().union(*(r for _, r in pte_pick))
        probe = ExecutionGraph(p, rf_pte, co_pte)
        walk_map = {w: loaded_mapping(probe, w) for w in p.of_kind(Kind.PTW)}
        for tlb_pick in product(*tlb_choices):
            rf_ptw = frozenset(zip(tlb_pick, (e.id for e in data)))
            rf_pa = {(walk_map[w], w) for w in walk_map}
            rf_pa |= {(walk_map[w], e.id) for w, e in zip(tlb_pick, data)}
            rf_pa = frozenset(rf_pa)
            groups = {}
            init = p.init_map
            for w, e in zip(tlb_pick, data):
                s = walk_map[w]
                pa = init[e.va] if s == INIT else p.event(s).pa
                groups.setdefault(pa, ([], []))[0 if e.kind is Kind.W else 1].append(e.id)
            data_choices = []
            for pa in sorted(groups):
                ws, rs = groups[pa]
                data_choices.append([
                    (co, frozenset((s, r) for s, r in zip(src, rs) if s != INIT))
                    for co in _orders(ws)
                    for src in product([INIT] + ws, repeat=len(rs))
                ])
            for co_pa_pick in product(*co_pa_choices):
                co_pa = frozenset().union(*co_pa_pick)
                for data_pick in product(*data_choices):
                    co = co_pte.union(*(c for c, _ in data_pick))
                    rf = rf_pte.union(*(r for _, r in data_pick))
                    g = ExecutionGraph(p, rf, co, rf_ptw, rf_pa, co_pa)
                    if not validate(g, sem):
                        yield g


@dataclass
class Classification:
    permitted: int = 0
    forbidden: int = 0
    per_axiom: dict[str, int] = field(default_factory=dict)
    examples: dict[str, tuple] = field(default_factory=dict)  # axiom -> (graph, witness)

    @property
    def total(self) -> int:
        return self.permitted + self.forbidden


def classify(p: Program, m: Model | None = None, sem: Semantics = DEFAULT_SEMANTICS,
             bound: int = DEFAULT_BOUND) -> Classification:
    m = m or x86t_elt()
    out = Classification(per_axiom={a: 0 for a in m.axiom_names})
    for g in enumerate_executions(p, sem, bound):
        v = check(g, m, sem, validate=False)
        if v.consistent:
            out.permitted += 1
            continue
        out.forbidden += 1
        for name, w in v.violated:
            out.per_axiom[name] += 1
            out.examples.setdefault(name, (g, w))
    return out
