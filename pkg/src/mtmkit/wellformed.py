"""Legality rules for ELT programs and candidate executions.

Rules are numbered WF1 to WF13.  ``validate`` checks an execution graph,
``validate_program`` the structural subset a bare program must satisfy, and
``useless_invlpgs`` implements the synthesis-time filter WF9.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

from .relgraph import (
    DEFAULT_SEMANTICS,
    INIT,
    ExecutionGraph,
    Kind,
    Program,
    Semantics,
    loaded_mapping,
    mapping_pa,
    written_mapping,
)


@dataclass(frozen=True)
class WfViolation:
    rule: str
    events: tuple[int, ...]
    message: str

    def __str__(self) -> str:
        ids = ",".join(map(str, self.events))
        return f"{self.rule} [{ids}]: {self.message}"


class WellFormednessError(ValueError):
    def __init__(self, violations: list[WfViolation]):
        self.violations = violations
        super().__init__("; ".join(str(v) for v in violations))


def _is_strict_total(rel, items) -> bool:
    items = list(items)
    for a in items:
        if (a, a) in rel:
            return False
    for a, b in combinations(items, 2):
        if ((a, b) in rel) == ((b, a) in rel):
            return False
    for a, b in rel:
        for c in items:
            if (b, c) in rel and (a, c) not in rel:
                return False
    return True


# relation name -> (allowed source kinds, allowed target kinds)
_SIGNATURES = {
    "po": (None, None),
    "ghost": ({Kind.R, Kind.W}, {Kind.PTW, Kind.DB}),
    "remap": ({Kind.WPTE}, {Kind.INVLPG}),
    "rmw": ({Kind.R}, {Kind.W}),
    "rf": ({Kind.W, Kind.WPTE, Kind.DB}, {Kind.R, Kind.PTW}),
    "co": ({Kind.W, Kind.WPTE, Kind.DB}, {Kind.W, Kind.WPTE, Kind.DB}),
    "rf_ptw": ({Kind.PTW}, {Kind.R, Kind.W}),
    "rf_pa": ({Kind.WPTE}, {Kind.R, Kind.W, Kind.PTW}),
    "co_pa": ({Kind.WPTE}, {Kind.WPTE}),
}


def _signature(name, r, p: Program, out):
    src_ok, dst_ok = _SIGNATURES[name]
    for a, b in sorted(r):
        if a == INIT and name == "rf_pa":
            if b not in p or p.event(b).kind not in dst_ok:
                out.append(WfViolation("WF13", (b,), f"{name} target has the wrong kind"))
            continue
        if a not in p or b not in p:
            out.append(WfViolation("WF13", (a, b), f"{name} names an unknown event"))
            continue
        ka, kb = p.event(a).kind, p.event(b).kind
        if name == "po":
            if ka.is_ghost or kb.is_ghost:
                out.append(WfViolation("WF1", (a, b), "po relates a ghost event"))
            continue
        if ka not in src_ok or kb not in dst_ok:
            out.append(WfViolation("WF13", (a, b), f"{name} cannot relate {ka.value} to {kb.value}"))


def validate_program(p: Program) -> list[WfViolation]:
    """Structural rules: WF1, WF2, WF4, WF8, WF10, WF12, WF13."""
    out: list[WfViolation] = []
    ids = p.ids
    if len(set(ids)) != len(ids):
        out.append(WfViolation("WF13", (), "duplicate event ids"))
    for name in ("po", "ghost", "remap", "rmw"):
        _signature(name, getattr(p, name), p, out)

    # WF1
    for a, b in sorted(p.po):
        if a in p and b in p and p.event(a).thread != p.event(b).thread:
            out.append(WfViolation("WF1", (a, b), "po relates events on different threads"))
    for t in p.thread_ids:
        evs = [e.id for e in p.events if e.thread == t and not e.kind.is_ghost]
        if not _is_strict_total(p.po, evs):
            out.append(WfViolation("WF1", tuple(evs), f"po is not a strict total order on thread {t}"))

    # WF2
    for e in p.events:
        if e.kind is Kind.MFENCE:
            if e.va is not None:
                out.append(WfViolation("WF2", (e.id,), "mfence has no location"))
        elif e.va is None:
            out.append(WfViolation("WF2", (e.id,), "memory event without a location"))
        if (e.kind is Kind.WPTE) != (e.pa is not None):
            out.append(WfViolation("WF2", (e.id,), "only PTE writes carry a target PA"))

    # WF4
    for e in p.events:
        inv = [a for a, b in p.ghost if b == e.id]
        gs = p.ghosts(e.id)
        if e.kind.is_ghost:
            if len(inv) != 1:
                out.append(WfViolation("WF4", (e.id,), "ghost event needs exactly one invoker"))
            elif p.event(inv[0]).thread != e.thread:
                out.append(WfViolation("WF4", (e.id,), "ghost runs on its invoker's thread"))
            elif p.event(inv[0]).va != e.va:
                out.append(WfViolation("WF4", (e.id,), "ghost accesses its invoker's PTE"))
        kinds = [p.event(g).kind for g in gs]
        if e.kind is Kind.W and kinds.count(Kind.DB) != 1:
            out.append(WfViolation("WF4", (e.id,), "user write invokes exactly one dirty-bit write"))
        if e.kind is Kind.R and Kind.DB in kinds:
            out.append(WfViolation("WF4", (e.id,), "user read cannot invoke a dirty-bit write"))
        if kinds.count(Kind.PTW) > 1:
            out.append(WfViolation("WF4", (e.id,), "at most one walk per user event"))
        if gs and not e.kind.is_data:
            out.append(WfViolation("WF4", (e.id,), f"{e.kind.value} invokes nothing"))

    # WF8
    threads = p.thread_ids
    for w in p.of_kind(Kind.WPTE):
        ev = p.event(w)
        invs = sorted(b for a, b in p.remap if a == w)
        per = {}
        for i in invs:
            per.setdefault(p.event(i).thread, []).append(i)
            if p.event(i).va != ev.va:
                out.append(WfViolation("WF8", (w, i), "remap invlpg must target the remapped VA"))
        for t in threads:
            if len(per.get(t, ())) != 1:
                out.append(WfViolation("WF8", (w,), f"needs exactly one remap invlpg on thread {t}"))
        order = p.thread(ev.thread)
        k = order.index(w)
        local = per.get(ev.thread, [])
        if local and (k + 1 >= len(order) or order[k + 1] != local[0]):
            out.append(WfViolation("WF8", (w, local[0]), "local invlpg must immediately follow its PTE write"))
    for i in p.of_kind(Kind.INVLPG):
        if sum(1 for a, b in p.remap if b == i) > 1:
            out.append(WfViolation("WF8", (i,), "invlpg has more than one remap predecessor"))

    # WF10
    for r, w in sorted(p.rmw):
        if r not in p or w not in p:
            continue
        er, ew = p.event(r), p.event(w)
        order = p.thread(er.thread)
        if er.thread != ew.thread or er.va != ew.va or order.index(r) + 1 >= len(order) \
                or order[order.index(r) + 1] != w:
            out.append(WfViolation("WF10", (r, w), "rmw needs a read immediately followed by a same-VA write"))

    # WF12
    init = p.init_map
    if len(init) != len(p.init):
        out.append(WfViolation("WF12", (), "a VA has two initial mappings"))
    if len(set(init.values())) != len(init):
        out.append(WfViolation("WF12", (), "initial mappings must be injective"))
    for e in p.events:
        if e.va is not None and e.va not in init:
            out.append(WfViolation("WF12", (e.id,), f"VA {e.va} has no initial mapping"))
    return out


def _between(order, a, b):
    lo, hi = sorted((order.index(a), order.index(b)))
    return order[lo + 1:hi]


def validate(g: ExecutionGraph, sem: Semantics = DEFAULT_SEMANTICS) -> list[WfViolation]:
    """Every violated rule; an empty list means ``g`` is well formed."""
    p = g.program
    out = validate_program(p)
    if out:
        return out
    for name in ("rf", "co", "rf_ptw", "rf_pa", "co_pa"):
        _signature(name, getattr(g, name), p, out)
    if out:
        return out

    # WF6 first half: mapping sources, needed before effective locations exist
    for e in p.events:
        if not (e.kind.is_data or e.kind is Kind.PTW):
            continue
        srcs = [a for a, b in g.rf_pa if b == e.id]
        if len(srcs) != 1:
            out.append(WfViolation("WF6", (e.id,), "needs exactly one mapping source"))
        elif srcs[0] != INIT and p.event(srcs[0]).va != e.va:
            out.append(WfViolation("WF6", (e.id, srcs[0]), "mapping source writes another VA's PTE"))
    if out:
        return out

    # WF3
    loc = {}
    for e in p.events:
        if e.kind.is_data:
            loc[e.id] = ("pa", mapping_pa(g, e.id))
        elif e.kind.on_pte:
            loc[e.id] = ("pte", e.va)
    for e in p.events:
        if e.kind.is_read:
            srcs = [a for a, b in g.rf if b == e.id]
            if len(srcs) > 1:
                out.append(WfViolation("WF3", (e.id, *srcs), "read has more than one rf source"))
    for a, b in sorted(g.rf):
        if loc[a] != loc[b]:
            out.append(WfViolation("WF3", (a, b), "rf relates different locations"))
    groups = {}
    for e in p.events:
        if e.kind.is_write:
            groups.setdefault(loc[e.id], []).append(e.id)
    for a, b in sorted(g.co):
        if loc[a] != loc[b]:
            out.append(WfViolation("WF3", (a, b), "co relates different locations"))
    for key, ws in sorted(groups.items()):
        if not _is_strict_total(g.co, ws):
            out.append(WfViolation("WF3", tuple(ws), f"co is not a strict total order at {key[0]}:{key[1]}"))
    if out:
        return out
    for w in p.of_kind(Kind.PTW):
        if g.mapping_source(w) != loaded_mapping(g, w):
            out.append(WfViolation("WF3", (w,), "walk's mapping differs from the value it reads"))

    # WF5
    for e in p.events:
        if not e.kind.is_data:
            continue
        walks = [a for a, b in g.rf_ptw if b == e.id]
        if len(walks) != 1:
            out.append(WfViolation("WF5", (e.id,), "needs exactly one TLB source walk"))
            continue
        w = walks[0]
        inv = p.invoker(w)
        own = p.walk_of(e.id)
        if own is not None and own != w:
            out.append(WfViolation("WF5", (e.id, w), "event with its own walk must use it"))
            continue
        if inv is None or p.event(inv).thread != e.thread or p.event(w).va != e.va:
            out.append(WfViolation("WF5", (e.id, w), "walk must come from the same thread and VA"))
            continue
        order = p.thread(e.thread)
        if inv != e.id:
            if sem.walk_sharing == "forward" and order.index(inv) > order.index(e.id):
                out.append(WfViolation("WF5", (e.id, w), "walk's invoker must precede the event"))
            elif any(p.event(x).kind is Kind.INVLPG and p.event(x).va == e.va
                     for x in _between(order, inv, e.id)):
                out.append(WfViolation("WF5", (e.id, w), "an invlpg evicts the entry in between"))
        if g.mapping_source(e.id) != g.mapping_source(w):
            out.append(WfViolation("WF5", (e.id, w), "event's mapping differs from its walk's"))

    # WF6 second half: dirty-bit writes
    for d in p.of_kind(Kind.DB):
        inv = p.invoker(d)
        if written_mapping(g, d) != g.mapping_source(inv):
            out.append(WfViolation("WF6", (d, inv), "dirty-bit write must keep its invoker's mapping"))

    # WF7
    by_pa = {}
    for w in p.of_kind(Kind.WPTE):
        by_pa.setdefault(p.event(w).pa, []).append(w)
    for a, b in sorted(g.co_pa):
        if p.event(a).pa != p.event(b).pa:
            out.append(WfViolation("WF7", (a, b), "co_pa relates writes of different PAs"))
    for pa, ws in sorted(by_pa.items()):
        if not _is_strict_total(g.co_pa, ws):
            out.append(WfViolation("WF7", tuple(ws), f"co_pa is not a strict total order at {pa}"))

    for r in g.orphans:
        out.append(WfViolation("WF3", (r,), "read lost its source in a relaxation"))
    return out


def ensure_wellformed(g: ExecutionGraph, sem: Semantics = DEFAULT_SEMANTICS) -> None:
    bad = validate(g, sem)
    if bad:
        raise WellFormednessError(bad)


def useless_invlpgs(p: Program) -> list[int]:
    """Spurious invlpgs with no later same-VA access on their thread (WF9)."""
    remapped = {b for _, b in p.remap}
    out = []
    for t in p.thread_ids:
        order = p.thread(t)
        for k, i in enumerate(order):
            ev = p.event(i)
            if ev.kind is not Kind.INVLPG or i in remapped:
                continue
            if not any(p.event(x).kind.is_data and p.event(x).va == ev.va for x in order[k + 1:]):
                out.append(i)
    return out


def effective_mapping(g: ExecutionGraph, e: int) -> tuple[str, str]:
    """``(va, pa)`` through which a data event or walk accesses memory."""
    if e not in g.program:
        raise KeyError(f"no event {e}")
    ev = g.event(e)
    if not (ev.kind.is_data or ev.kind is Kind.PTW):
        raise ValueError(f"event {e} ({ev.kind.value}) does not translate an address")
    s = g.mapping_source(e)
    if s != INIT and s in g.program:
        return ev.va, g.event(s).pa
    return ev.va, g.program.init_map[ev.va]
