"""Bounded synthesis of minimal, interesting ELTs.

The pipeline enumerates program layouts up to the event bound (ghosts count),
looks for an execution that violates the target axiom, and keeps the program
when that execution is minimal: removing any single relaxation unit makes it
satisfy the whole model.  Programs are produced once per isomorphism class.

For ``x86t_elt`` the bitmask engine in :mod:`mtmkit.kernel` does the work.  Any
other model falls back to the oracle and the generic checker.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from itertools import count

from . import kernel as K
from .model import Model, check, x86t_elt
from .relgraph import (
    DEFAULT_SEMANTICS,
    INIT,
    Event,
    ExecutionGraph,
    Kind,
    Program,
    Semantics,
    total_order,
)

# -- layouts ------------------------------------------------------------------

_VA_NAMES = ("x", "y", "z", "w", "u", "v", "s", "t")


def va_name(i: int) -> str:
    return _VA_NAMES[i] if i < len(_VA_NAMES) else f"x{i}"


def pa_name(i: int) -> str:
    return chr(ord("a") + i) if i < 26 else f"p{i}"


def to_layout(p: Program) -> tuple:
    """Compact engine encoding of a program.

    Initial mappings of VAs that no event touches and no PTE write targets
    are not part of the encoding.
    """
    init = p.init_map
    pa_owner = {pa: va for va, pa in init.items()}
    vm: dict[str, int] = {}
    fm: dict[str, int] = {}
    labels = {}
    for t in p.thread_ids:
        for e in p.thread(t):
            if p.event(e).kind is Kind.WPTE:
                labels[e] = len(labels)
    owner = {b: a for a, b in p.remap}
    rmw_reads = {r for r, _ in p.rmw}
    out = []
    for t in p.thread_ids:
        th = []
        for e in p.thread(t):
            ev = p.event(e)
            k = ev.kind
            if k is Kind.MFENCE:
                th.append((K.OP_F,))
                continue
            v = vm.setdefault(ev.va, len(vm))
            walk = int(p.walk_of(e) is not None)
            if k is Kind.R:
                th.append((K.OP_R, v, walk, int(e in rmw_reads)))
            elif k is Kind.W:
                th.append((K.OP_W, v, walk))
            elif k is Kind.WPTE:
                if ev.pa in pa_owner:
                    tgt = (0, vm.setdefault(pa_owner[ev.pa], len(vm)))
                else:
                    tgt = (1, fm.setdefault(ev.pa, len(fm)))
                th.append((K.OP_P, v, tgt[0], tgt[1], labels[e]))
            else:
                th.append((K.OP_I, v, labels[owner[e]] if e in owner else -1))
        out.append(tuple(th))
    return tuple(out)


def from_layout(layout, name: str = "") -> Program:
    """Program for an engine layout, with conventional labels and symbols."""
    vas = set()
    for th in layout:
        for ins in th:
            if ins[0] != K.OP_F:
                vas.add(ins[1])
            if ins[0] == K.OP_P and ins[2] == 0:
                vas.add(ins[3])
    nva = max(vas) + 1 if vas else 0
    events: list[Event] = []
    po, ghost, rmw = set(), set(), set()
    pte_by_label, pending = {}, []
    n = count()
    for t, th in enumerate(layout):
        order = []
        rmw_open = None
        for ins in th:
            op = ins[0]
            num = next(n)
            eid = len(events)
            if op == K.OP_R:
                events.append(Event(eid, Kind.R, t, va_name(ins[1]), label=f"R{num}"))
                if ins[2]:
                    events.append(Event(eid + 1, Kind.PTW, t, va_name(ins[1]), label=f"ptw{num}"))
                    ghost.add((eid, eid + 1))
                order.append(eid)
                rmw_open = eid if ins[3] else None
                continue
            if op == K.OP_W:
                va = va_name(ins[1])
                events.append(Event(eid, Kind.W, t, va, label=f"W{num}"))
                events.append(Event(eid + 1, Kind.DB, t, va, label=f"db{num}"))
                ghost.add((eid, eid + 1))
                if ins[2]:
                    events.append(Event(eid + 2, Kind.PTW, t, va, label=f"ptw{num}"))
                    ghost.add((eid, eid + 2))
                if rmw_open is not None:
                    rmw.add((rmw_open, eid))
            elif op == K.OP_P:
                tgt = pa_name(ins[3]) if ins[2] == 0 else pa_name(nva + ins[3])
                events.append(Event(eid, Kind.WPTE, t, va_name(ins[1]), tgt, f"PTE{num}"))
                pte_by_label[ins[4]] = eid
            elif op == K.OP_I:
                events.append(Event(eid, Kind.INVLPG, t, va_name(ins[1]), label=f"INV{num}"))
                if ins[2] >= 0:
                    pending.append((ins[2], eid))
            else:
                events.append(Event(eid, Kind.MFENCE, t, label=f"F{num}"))
            rmw_open = None
            order.append(eid)
        po |= total_order(order)
    remap = {(pte_by_label[lab], i) for lab, i in pending}
    init = tuple((va_name(i), pa_name(i)) for i in range(nva))
    return Program(tuple(events), frozenset(po), frozenset(ghost), frozenset(remap),
                   frozenset(rmw), tuple(sorted(init)), name)


def graph_from_engine(p: Program, ex: K.Execution) -> ExecutionGraph:
    """Execution graph for an engine execution of ``from_layout(layout)``."""
    rf = frozenset((s, r) for r, s in ex.rf.items() if s >= 0)
    co = frozenset().union(*(total_order(o) for o in ex.co)) if ex.co else frozenset()
    rf_ptw = frozenset((w, e) for e, w in ex.rf_ptw.items())
    rf_pa = frozenset((INIT if s < 0 else s, e) for e, s in ex.rf_pa.items())
    by_pa = {}
    for w in p.of_kind(Kind.WPTE):
        by_pa.setdefault(p.event(w).pa, []).append(w)
    co_pa = frozenset().union(*(total_order(ws) for ws in by_pa.values())) if by_pa else frozenset()
    return ExecutionGraph(p, rf, co, rf_ptw, rf_pa, co_pa)


# -- relaxations --------------------------------------------------------------

@dataclass(frozen=True)
class RelaxationUnit:
    """One coupled removal.

    ``kind`` is ``"event"`` (a user-facing event with its ghosts, or a PTE
    write with its remap invlpgs), ``"invlpg"`` (a spurious invlpg),
    ``"fence"`` or ``"rmw"`` (drops the dependency, keeps both events).
    """

    kind: str
    events: frozenset = frozenset()
    pair: tuple[int, int] | None = None

    def labels(self, p: Program) -> list[str]:
        ids = sorted(self.events) if self.pair is None else list(self.pair)
        return [str(p.event(i)) for i in ids]

    def describe(self, p: Program) -> str:
        body = " + ".join(self.labels(p))
        return f"rmw({body})" if self.kind == "rmw" else "{" + body + "}"


def relaxation_units(x: Program | ExecutionGraph) -> list[RelaxationUnit]:
    p = x.program if isinstance(x, ExecutionGraph) else x
    remapped = {b for _, b in p.remap}
    units = []
    for e in p.events:
        k = e.kind
        if k.is_data:
            units.append(RelaxationUnit("event", frozenset([e.id, *p.ghosts(e.id)])))
        elif k is Kind.WPTE:
            units.append(RelaxationUnit("event", frozenset([e.id, *(b for a, b in p.remap if a == e.id)])))
        elif k is Kind.INVLPG and e.id not in remapped:
            units.append(RelaxationUnit("invlpg", frozenset([e.id])))
        elif k is Kind.MFENCE:
            units.append(RelaxationUnit("fence", frozenset([e.id])))
    for pair in sorted(p.rmw):
        units.append(RelaxationUnit("rmw", pair=pair))
    return units


def relax(g: ExecutionGraph, units, sem: Semantics = DEFAULT_SEMANTICS) -> ExecutionGraph:
    """``g`` with every unit in ``units`` removed."""
    if isinstance(units, RelaxationUnit):
        units = [units]
    gone = set()
    pairs = []
    for u in units:
        gone |= u.events
        if u.pair is not None:
            pairs.append(u.pair)
    keep = [e for e in g.program.ids if e not in gone]
    return g.restricted(keep, pairs, sem.orphans)


def relax_program(p: Program, units) -> Program:
    gone = set()
    pairs = []
    for u in units:
        gone |= u.events
        if u.pair is not None:
            pairs.append(u.pair)
    return p.restricted([e for e in p.ids if e not in gone], pairs)


def is_minimal(g: ExecutionGraph, m: Model | None = None,
               sem: Semantics = DEFAULT_SEMANTICS) -> bool:
    """True iff every single relaxation of the forbidden execution ``g`` is legal."""
    m = m or x86t_elt()
    if check(g, m, sem, validate=False, first=True).consistent:
        raise ValueError("minimality is defined for forbidden executions only")
    return all(
        check(relax(g, u, sem), m, sem, validate=False, first=True).consistent
        for u in relaxation_units(g)
    )


def screen(p: Program) -> str | None:
    """Why ``p`` falls outside the spanning set, or None when it is eligible.

    An eligible program writes something (a user write or a PTE write) and
    has a user-facing access whose outcome the test observes.
    """
    kinds = {e.kind for e in p.events}
    if not kinds & {Kind.W, Kind.WPTE}:
        return "no write"
    if not kinds & {Kind.R, Kind.W}:
        return "no user-facing data access"
    return None


# -- synthesis ----------------------------------------------------------------

@dataclass(frozen=True)
class SynthConfig:
    target_axiom: str
    bound: int
    model: Model = field(default_factory=x86t_elt)
    timeout: float | None = None
    enable_fences: bool = False
    enable_rmw: bool | None = None  # default: only for the rmw_atomicity target
    max_threads: int | None = None
    max_vas: int | None = None
    semantics: Semantics = DEFAULT_SEMANTICS
    backend: str = "auto"  # "kernel", "oracle" or "auto"

    def __post_init__(self):
        if self.bound < 1:
            raise ValueError("bound must be at least 1")
        if self.target_axiom not in self.model.axiom_names:
            raise ValueError(f"{self.target_axiom!r} is not an axiom of {self.model.name}")
        if self.backend not in ("auto", "kernel", "oracle"):
            raise ValueError("backend must be auto, kernel or oracle")

    @property
    def rmw(self) -> bool:
        return self.target_axiom == "rmw_atomicity" if self.enable_rmw is None else self.enable_rmw

    @property
    def engine(self) -> str:
        if self.backend != "auto":
            return self.backend
        return "kernel" if self.model.axioms == x86t_elt().axioms else "oracle"


@dataclass(frozen=True)
class SuiteEntry:
    program: Program
    witness: ExecutionGraph
    violated: tuple[str, ...]


@dataclass
class SynthResult:
    config: SynthConfig
    entries: list[SuiteEntry]
    complete: bool
    runtime: float
    layouts: int

    @property
    def programs(self) -> list[Program]:
        return [e.program for e in self.entries]

    def __len__(self) -> int:
        return len(self.entries)


class SynthTimeout(RuntimeError):
    """Raised when the time budget runs out; ``partial`` holds what was found."""

    def __init__(self, partial: SynthResult):
        self.partial = partial
        super().__init__(f"timed out after {partial.runtime:.1f}s with "
                         f"{len(partial.entries)} programs (partial suite)")


def _oracle_witness(p: Program, cfg: SynthConfig):
    from .oracle import enumerate_executions

    for g in enumerate_executions(p, cfg.semantics, bound=max(cfg.bound, len(p.events))):
        v = check(g, cfg.model, cfg.semantics, validate=False)
        if cfg.target_axiom in v.violated_axioms and is_minimal(g, cfg.model, cfg.semantics):
            return g, tuple(v.violated_axioms)
    return None


def synthesize(cfg: SynthConfig, progress=None) -> SynthResult:
    """The complete suite for ``cfg`` (up to isomorphism).

    Raises :class:`SynthTimeout` carrying the partial suite when
    ``cfg.timeout`` seconds pass first.  ``progress``, if given, is called with
    each new entry.
    """
    start = time.monotonic()
    vocab = K.Vocabulary(fences=cfg.enable_fences, rmw=cfg.rmw,
                         max_threads=cfg.max_threads, max_vas=cfg.max_vas)
    engine = cfg.engine
    if engine == "kernel":
        target = K.AXIOMS.index(cfg.target_axiom)
        needs = K.needs_for(target)
    else:
        target, needs = None, K.Needs()
    entries = []
    seen = 0

    def result(complete):
        return SynthResult(cfg, entries, complete, time.monotonic() - start, seen)

    for layout in K.generate(cfg.bound, vocab, cfg.semantics.walk_sharing, needs):
        seen += 1
        if cfg.timeout is not None and time.monotonic() - start > cfg.timeout:
            raise SynthTimeout(result(False))
        prog = from_layout(layout, f"{cfg.target_axiom}_{cfg.bound}_{len(entries):03d}")
        if engine == "kernel":
            sk = K.Skeleton(layout, cfg.semantics)
            ex = sk.witness(target)
            if ex is None:
                continue
            mask = sk.violated(ex)
            found = (graph_from_engine(prog, ex),
                     tuple(a for i, a in enumerate(K.AXIOMS) if mask >> i & 1))
        else:
            found = _oracle_witness(prog, cfg)
            if found is None:
                continue
        entry = SuiteEntry(prog, found[0], found[1])
        entries.append(entry)
        if progress is not None:
            progress(entry)
    return result(True)
