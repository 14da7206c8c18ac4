"""Events, programs, execution graphs and the relation algebra over them.

A relation is a ``frozenset`` of ``(source, target)`` event-id pairs.  Programs
carry the structural relations (``po``, ``ghost``, ``remap``, ``rmw``) and the
initial VA-to-PA mapping; an :class:`ExecutionGraph` adds the communication
choices.  :func:`derive` computes everything the axioms consume.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, NamedTuple

Relation = frozenset  # of (int, int) pairs

INIT = -1
"""Source token for reads of the initial value or the initial mapping."""


class Kind(Enum):
    R = "R"
    W = "W"
    WPTE = "Wpte"
    INVLPG = "invlpg"
    MFENCE = "mfence"
    PTW = "ptw"
    DB = "db"

    @property
    def is_ghost(self) -> bool:
        return self in (Kind.PTW, Kind.DB)

    @property
    def is_memory(self) -> bool:
        return self not in (Kind.INVLPG, Kind.MFENCE)

    @property
    def is_read(self) -> bool:
        return self in (Kind.R, Kind.PTW)

    @property
    def is_write(self) -> bool:
        return self in (Kind.W, Kind.WPTE, Kind.DB)

    @property
    def is_data(self) -> bool:
        """User-facing data access (translated through a TLB entry)."""
        return self in (Kind.R, Kind.W)

    @property
    def on_pte(self) -> bool:
        return self in (Kind.WPTE, Kind.PTW, Kind.DB)


class Loc(NamedTuple):
    """A location: ``("va", x)``, ``("pte", x)`` or ``("pa", a)``."""

    space: str
    name: str

    def __str__(self) -> str:
        return f"{self.space}:{self.name}"


def data_va(va: str) -> Loc:
    return Loc("va", va)


def pte_loc(va: str) -> Loc:
    return Loc("pte", va)


def phys(pa: str) -> Loc:
    return Loc("pa", pa)


@dataclass(frozen=True)
class Event:
    id: int
    kind: Kind
    thread: int
    va: str | None = None
    pa: str | None = None  # mapping target, PTE writes only
    label: str = ""

    @property
    def location(self) -> Loc | None:
        """The operand location: DataVA for user events, PteLoc for translation events."""
        if self.va is None:
            return None
        return pte_loc(self.va) if self.kind.on_pte else data_va(self.va)

    def __str__(self) -> str:
        return self.label or f"{self.kind.value}{self.id}"


@dataclass(frozen=True)
class Semantics:
    """Choices the axioms leave open.

    ghost_order
        ``"sink"``: a ghost comes after its invoker and everything before it,
        and nothing comes after it.  ``"lifted"``: ghosts sit right after their
        invoker in a total order (dirty-bit write, then walk).  ``"unordered"``:
        the same slot as lifted, with the two ghosts of one invoker unordered.
    walk_sharing
        ``"any"``: a TLB entry may serve any same-thread, same-VA event as long
        as no invlpg of that VA separates the two.  ``"forward"``: only the
        invoker and po-later events may use it.
    ppo_scope
        Event kinds taking part in ppo and fence: ``"user"`` (R, W),
        ``"nonghost"`` (R, W, Wpte) or ``"memory"`` (all memory events).
    orphans
        What a relaxation does to a read whose source write was removed.
        ``"drop"``: it keeps a value that nothing left can produce, so it gets
        no from-read edges.  ``"init"``: it reads the initial value.  An event
        whose mapping source was removed always falls back to the initial
        mapping.
    """

    ghost_order: str = "sink"
    walk_sharing: str = "any"
    ppo_scope: str = "user"
    orphans: str = "drop"

    def __post_init__(self):
        checks = (
            ("ghost_order", ("sink", "lifted", "unordered")),
            ("walk_sharing", ("any", "forward")),
            ("ppo_scope", ("user", "nonghost", "memory")),
            ("orphans", ("drop", "init")),
        )
        for name, allowed in checks:
            if getattr(self, name) not in allowed:
                raise ValueError(f"{name} must be one of {allowed}")


DEFAULT_SEMANTICS = Semantics()

_PPO_KINDS = {
    "user": frozenset((Kind.R, Kind.W)),
    "nonghost": frozenset((Kind.R, Kind.W, Kind.WPTE)),
    "memory": frozenset((Kind.R, Kind.W, Kind.WPTE, Kind.PTW, Kind.DB)),
}


# -- relation algebra ---------------------------------------------------------

def rel(pairs: Iterable[tuple[int, int]] = ()) -> Relation:
    return frozenset(pairs)


def union(*rs: Relation) -> Relation:
    out = set()
    for r in rs:
        out |= r
    return frozenset(out)


def intersect(r1: Relation, r2: Relation) -> Relation:
    return frozenset(r1 & r2)


def inverse(r: Relation) -> Relation:
    return frozenset((b, a) for a, b in r)


def compose(r1: Relation, r2: Relation) -> Relation:
    succ = _successors(r2)
    return frozenset((a, c) for a, b in r1 for c in succ.get(b, ()))


def restrict(r: Relation, keep) -> Relation:
    keep = set(keep)
    return frozenset((a, b) for a, b in r if a in keep and b in keep)


def transitive_closure(r: Relation) -> Relation:
    succ = _successors(r)
    out = set()
    for a in succ:
        seen = set()
        todo = list(succ[a])
        while todo:
            b = todo.pop()
            if b in seen:
                continue
            seen.add(b)
            todo.extend(succ.get(b, ()))
        out.update((a, b) for b in seen)
    return frozenset(out)


def _successors(r) -> dict[int, list[int]]:
    succ: dict[int, list[int]] = {}
    for a, b in sorted(r):
        succ.setdefault(a, []).append(b)
    return succ


def find_cycle(r: Relation) -> list[int] | None:
    """A shortest cycle of ``r``, or None.

    Among the shortest cycles the one whose rotation starting at its smallest
    node is lexicographically least is returned, closed by repeating the first
    node (``[1, 2, 1]``).
    """
    succ = _successors(r)
    best = None
    for start in sorted(succ):
        # shortest path back to start, visiting only nodes >= start so the
        # cycle found is rooted at its smallest member
        prev = {start: None}
        queue = deque([start])
        found = None
        while queue and found is None:
            a = queue.popleft()
            for b in succ.get(a, ()):
                if b == start:
                    found = a
                    break
                if b > start and b not in prev:
                    prev[b] = a
                    queue.append(b)
        if found is None:
            continue
        path = [found]
        while prev[path[-1]] is not None:
            path.append(prev[path[-1]])
        cyc = path[::-1] + [start]
        if best is None or (len(cyc), cyc) < (len(best), best):
            best = cyc
    return best


def is_acyclic(r: Relation) -> bool:
    return find_cycle(r) is None


def total_order(seq: Iterable[int]) -> Relation:
    seq = list(seq)
    return frozenset((a, b) for i, a in enumerate(seq) for b in seq[i + 1:])


# -- programs and executions --------------------------------------------------

@dataclass(frozen=True)
class Program:
    """The structural part of an ELT: events and the relations fixed by the code."""

    events: tuple[Event, ...]
    po: Relation = frozenset()
    ghost: Relation = frozenset()  # invoker -> ghost
    remap: Relation = frozenset()  # PTE write -> invlpg
    rmw: Relation = frozenset()  # read -> write
    init: tuple[tuple[str, str], ...] = ()  # sorted (va, pa)
    name: str = field(default="", compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_by_id", {e.id: e for e in self.events})

    def event(self, eid: int) -> Event:
        return self._by_id[eid]

    def __contains__(self, eid: int) -> bool:
        return eid in self._by_id

    @property
    def ids(self) -> list[int]:
        return [e.id for e in self.events]

    @property
    def init_map(self) -> dict[str, str]:
        return dict(self.init)

    @property
    def vas(self) -> list[str]:
        seen = []
        for e in self.events:
            if e.va is not None and e.va not in seen:
                seen.append(e.va)
        return seen

    @property
    def thread_ids(self) -> list[int]:
        return sorted({e.thread for e in self.events})

    def thread(self, t: int) -> list[int]:
        """Non-ghost events of thread ``t`` in program order."""
        evs = [e.id for e in self.events if e.thread == t and not e.kind.is_ghost]
        before = {b: sum(1 for a in evs if (a, b) in self.po) for b in evs}
        return sorted(evs, key=lambda b: (before[b], b))

    def invoker(self, g: int) -> int | None:
        for a, b in self.ghost:
            if b == g:
                return a
        return None

    def ghosts(self, e: int) -> list[int]:
        return sorted(b for a, b in self.ghost if a == e)

    def walk_of(self, e: int) -> int | None:
        for g in self.ghosts(e):
            if self.event(g).kind is Kind.PTW:
                return g
        return None

    def db_of(self, e: int) -> int | None:
        for g in self.ghosts(e):
            if self.event(g).kind is Kind.DB:
                return g
        return None

    def of_kind(self, *kinds: Kind) -> list[int]:
        return [e.id for e in self.events if e.kind in kinds]

    def restricted(self, keep, drop_rmw: Iterable[tuple[int, int]] = ()) -> "Program":
        keep = set(keep)
        drop_rmw = set(drop_rmw)
        return Program(
            tuple(e for e in self.events if e.id in keep),
            restrict(self.po, keep),
            restrict(self.ghost, keep),
            restrict(self.remap, keep),
            frozenset(p for p in restrict(self.rmw, keep) if p not in drop_rmw),
            self.init,
            self.name,
        )


@dataclass(frozen=True)
class ExecutionGraph:
    """A program plus one choice of every communication relation.

    ``rf`` relates writes to the reads (user reads and walks) they source; a
    read with no ``rf`` edge reads the initial value.  ``rf_pa`` pairs use
    :data:`INIT` as the source for the initial mapping.  ``orphans`` lists
    reads whose source was removed by a relaxation.
    """

    program: Program
    rf: Relation = frozenset()
    co: Relation = frozenset()
    rf_ptw: Relation = frozenset()  # walk -> data event
    rf_pa: Relation = frozenset()  # PTE write or INIT -> data event / walk
    co_pa: Relation = frozenset()
    orphans: frozenset = frozenset()

    @property
    def events(self) -> tuple[Event, ...]:
        return self.program.events

    def event(self, eid: int) -> Event:
        return self.program.event(eid)

    def rf_source(self, r: int) -> int:
        for a, b in self.rf:
            if b == r:
                return a
        return INIT

    def mapping_source(self, e: int) -> int:
        for a, b in self.rf_pa:
            if b == e:
                return a
        return INIT

    def walk_for(self, e: int) -> int | None:
        for a, b in self.rf_ptw:
            if b == e:
                return a
        return None

    def restricted(self, keep, drop_rmw=(), orphans: str = "drop") -> "ExecutionGraph":
        """Restrict every relation to ``keep``; see :class:`Semantics` for orphans."""
        keep = set(keep)
        lost = set(self.orphans & keep)
        if orphans == "drop":
            lost |= {b for a, b in self.rf if b in keep and a not in keep}
        rf_pa = frozenset((a, b) for a, b in self.rf_pa if b in keep and (a == INIT or a in keep))
        return ExecutionGraph(
            self.program.restricted(keep, drop_rmw),
            restrict(self.rf, keep),
            restrict(self.co, keep),
            restrict(self.rf_ptw, keep),
            rf_pa,
            restrict(self.co_pa, keep),
            frozenset(lost),
        )


def written_mapping(g: ExecutionGraph, w: int) -> int:
    """Mapping source stored by a PTE-location write.

    A PTE write stores its own mapping; a dirty-bit write keeps whatever its
    coherence predecessor on the PTE location stored.
    """
    ev = g.event(w)
    if ev.kind is Kind.WPTE:
        return w
    preds = [a for a, b in g.co if b == w]
    if not preds:
        return INIT
    # immediate predecessor: the one that every other predecessor precedes
    last = max(preds, key=lambda a: sum(1 for p in preds if (p, a) in g.co))
    return written_mapping(g, last)


def loaded_mapping(g: ExecutionGraph, walk: int) -> int:
    """Mapping source a walk brings into the TLB, from its rf source."""
    s = g.rf_source(walk)
    return INIT if s == INIT or s not in g.program else written_mapping(g, s)


def mapping_pa(g: ExecutionGraph, e: int) -> str:
    """Effective PA of a data event (initial mapping when sourced from init)."""
    s = g.mapping_source(e)
    if s != INIT and s in g.program:
        return g.event(s).pa
    return g.program.init_map[g.event(e).va]


# -- derived relations --------------------------------------------------------

@dataclass(frozen=True)
class DerivedRelations:
    gpo: Relation
    gpo_plus: Relation
    fr: Relation
    fr_pa: Relation
    fr_va: Relation
    po_loc: Relation
    ppo: Relation
    fence: Relation
    rfe: Relation
    com: Relation
    ptw_source: Relation
    effective_pa: Mapping[int, str]
    location: Mapping[int, Loc]


def ghost_po(p: Program, mode: str = "sink") -> Relation:
    """Program order extended to ghost events."""
    pairs = set()
    for t in p.thread_ids:
        order = p.thread(t)
        if mode == "sink":
            for i, a in enumerate(order):
                for b in order[i:]:
                    if b != a:
                        pairs.add((a, b))
                    pairs.update((a, g) for g in p.ghosts(b))
        else:
            listing = []
            for e in order:
                listing.append(e)
                gs = p.ghosts(e)
                # dirty-bit write before walk
                gs.sort(key=lambda g: p.event(g).kind is Kind.PTW)
                listing.extend(gs)
            inv = {g: e for e in order for g in p.ghosts(e)}
            for i, a in enumerate(listing):
                for b in listing[i + 1:]:
                    if mode == "unordered" and a in inv and inv.get(b) == inv[a]:
                        continue
                    pairs.add((a, b))
    return frozenset(pairs)


def derive(g: ExecutionGraph, sem: Semantics = DEFAULT_SEMANTICS,
           check: bool = True) -> DerivedRelations:
    """Derived relations of ``g``.

    With ``check`` set the graph is validated first and a
    :class:`~mtmkit.wellformed.WellFormednessError` is raised on failure.
    """
    if check:
        from .wellformed import ensure_wellformed

        ensure_wellformed(g, sem)
    p = g.program
    gpo = ghost_po(p, sem.ghost_order)
    gpo_plus = transitive_closure(gpo)

    eff = {}
    loc = {}
    for e in p.events:
        if e.kind.is_data:
            eff[e.id] = mapping_pa(g, e.id)
            loc[e.id] = phys(eff[e.id])
        elif e.kind.on_pte:
            loc[e.id] = pte_loc(e.va)

    po_loc = frozenset((a, b) for a, b in gpo_plus if a in loc and loc.get(b) == loc[a])

    writes_at: dict[Loc, list[int]] = {}
    for e in p.events:
        if e.kind.is_write:
            writes_at.setdefault(loc[e.id], []).append(e.id)
    co_succ = _successors(g.co)
    fr = set()
    for e in p.events:
        if not e.kind.is_read or e.id in g.orphans:
            continue
        s = g.rf_source(e.id)
        if s == INIT:
            fr.update((e.id, w) for w in writes_at.get(loc[e.id], ()))
        else:
            fr.update((e.id, w) for w in co_succ.get(s, ()))
    fr = frozenset(fr)

    pte_writes = p.of_kind(Kind.WPTE)
    co_pa_succ = _successors(g.co_pa)
    fr_pa = set()
    fr_va = set()
    for e in p.events:
        if not (e.kind.is_data or e.kind is Kind.PTW):
            continue
        s = g.mapping_source(e.id)
        if s != INIT and s not in p:
            s = INIT
        if s == INIT:
            pa = p.init_map[e.va]
            fr_pa.update((e.id, w) for w in pte_writes if p.event(w).pa == pa)
        else:
            fr_pa.update((e.id, w) for w in co_pa_succ.get(s, ()))
        if e.kind.is_data:
            for w in pte_writes:
                if p.event(w).va == e.va and (s == INIT or (s, w) in g.co):
                    fr_va.add((e.id, w))

    scope = _PPO_KINDS[sem.ppo_scope]
    fences = p.of_kind(Kind.MFENCE)
    ppo = set()
    fence = set()
    for a, b in gpo_plus:
        ka, kb = p.event(a).kind, p.event(b).kind
        if ka not in scope or kb not in scope:
            continue
        if not (ka.is_write and kb.is_read):
            ppo.add((a, b))
        if any((a, f) in gpo_plus and (f, b) in gpo_plus for f in fences):
            fence.add((a, b))

    rfe = frozenset((a, b) for a, b in g.rf if p.event(a).thread != p.event(b).thread)
    com = union(g.rf, g.co, fr)
    ptw_source = set()
    for w, e1 in g.rf_ptw:
        e0 = p.invoker(w)
        if e0 is not None and e0 != e1:
            ptw_source.add((e0, e1))

    return DerivedRelations(
        gpo=gpo,
        gpo_plus=gpo_plus,
        fr=fr,
        fr_pa=frozenset(fr_pa),
        fr_va=frozenset(fr_va),
        po_loc=po_loc,
        ppo=frozenset(ppo),
        fence=frozenset(fence),
        rfe=rfe,
        com=com,
        ptw_source=frozenset(ptw_source),
        effective_pa=eff,
        location=loc,
    )
