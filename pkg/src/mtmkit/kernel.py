"""Bitmask execution engine used by the synthesizer.

Programs are handled here in a compact *layout* form: a tuple of threads, each
a tuple of integer-coded instructions.  Ghost events are implied by flags on
their invoker, and remap Invlpgs point at their PteWrite through a label.

    (OP_R, va, walk, rmw)            user read; rmw=1 links it to the next write
    (OP_W, va, walk)                 user write (always invokes a dirty-bit write)
    (OP_P, va, tkind, tid, label)    PTE write; target is init-PA of VA tid
                                     (tkind 0) or fresh PA tid (tkind 1)
    (OP_I, va, label)                invlpg; label -1 means spurious
    (OP_F,)                          mfence

Relations over at most a few dozen events are stored as lists of successor
bitmasks, which keeps the per-execution axiom checks cheap.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations, product

from .relgraph import DEFAULT_SEMANTICS, Semantics

OP_R, OP_W, OP_P, OP_I, OP_F = range(5)

# event kinds inside the engine
READ, WRITE, PTE, INV, FENCE, WALK, DB = range(7)
KIND_NAMES = ("R", "W", "Wpte", "invlpg", "mfence", "ptw", "db")

AXIOMS = ("sc_per_loc", "rmw_atomicity", "causality", "remap_order", "tlb_causality")
SC, RMW, CAUS, REMAP, TLB = range(5)

_MEMORY = frozenset((READ, WRITE, PTE, WALK, DB))
_READS = frozenset((READ, WALK))
_WRITES = frozenset((WRITE, PTE, DB))
_PTE_BASE = 1 << 20  # location keys of PTE locations start here


_PPO_KINDS = {
    "memory": _MEMORY,
    "nonghost": frozenset((READ, WRITE, PTE)),
    "user": frozenset((READ, WRITE)),
}


def bits(m: int):
    while m:
        b = m & -m
        yield b.bit_length() - 1
        m ^= b


def acyclic(adj: list[int], nodes: int) -> bool:
    """True iff the subgraph of ``adj`` induced by ``nodes`` has no cycle."""
    rem = nodes
    while rem:
        keep = rem
        for i in bits(rem):
            if not adj[i] & rem:
                keep &= ~(1 << i)
        if keep == rem:
            return False
        rem = keep
    return True


class Execution:
    __slots__ = ("rf_ptw", "rf", "co", "rf_pa")

    def __init__(self, rf_ptw, rf, co, rf_pa):
        self.rf_ptw = rf_ptw  # data event -> walk id
        self.rf = rf  # read/walk -> source write id, -1 for init
        self.co = co  # list of coherence orders (lists of write ids)
        self.rf_pa = rf_pa  # data event or walk -> PteWrite id, -1 for init


class Skeleton:
    """A program expanded to events, with its static relations precomputed."""

    def __init__(self, layout, sem: Semantics = DEFAULT_SEMANTICS):
        self.layout = layout
        self.sem = sem
        kind, thread, va, pa, invoker, owner = [], [], [], [], [], []
        walk_of, db_of, seq, rmw = {}, {}, [], []
        label_ev = {}
        vas = set()
        for ins in (i for th in layout for i in th):
            vas.add(ins[1]) if len(ins) > 1 else None
            if ins[0] == OP_P and ins[2] == 0:
                vas.add(ins[3])
        nva = max(vas) + 1 if vas else 0
        self.nva = nva

        def add(k, t, v, p=-1, inv=-1, own=-1):
            kind.append(k)
            thread.append(t)
            va.append(v)
            pa.append(p)
            invoker.append(inv)
            owner.append(own)
            return len(kind) - 1

        pending_inv = []
        for t, th in enumerate(layout):
            order = []
            open_rmw = -1
            for ins in th:
                op = ins[0]
                if op == OP_R:
                    e = add(READ, t, ins[1])
                    if ins[2]:
                        walk_of[e] = add(WALK, t, ins[1], inv=e)
                    open_rmw = e if ins[3] else -1
                    order.append(e)
                    continue
                elif op == OP_W:
                    e = add(WRITE, t, ins[1])
                    db_of[e] = add(DB, t, ins[1], inv=e)
                    if ins[2]:
                        walk_of[e] = add(WALK, t, ins[1], inv=e)
                    if open_rmw >= 0:
                        rmw.append((open_rmw, e))
                elif op == OP_P:
                    tgt = ins[3] if ins[2] == 0 else nva + ins[3]
                    e = add(PTE, t, ins[1], p=tgt)
                    label_ev[ins[4]] = e
                elif op == OP_I:
                    e = add(INV, t, ins[1])
                    if ins[2] >= 0:
                        pending_inv.append((e, ins[2]))
                else:
                    e = add(FENCE, t, -1)
                open_rmw = -1
                order.append(e)
            seq.append(order)
        for e, lab in pending_inv:
            owner[e] = label_ev[lab]
        self.rmw = rmw
        self.n = n = len(kind)
        self.kind, self.thread, self.va, self.pa = kind, thread, va, pa
        self.invoker, self.owner = invoker, owner
        self.walk_of, self.db_of, self.seq = walk_of, db_of, seq
        self.full = (1 << n) - 1
        self.data = [e for e in range(n) if kind[e] in (READ, WRITE)]
        self.walks = [e for e in range(n) if kind[e] == WALK]
        self.ptes = [e for e in range(n) if kind[e] == PTE]
        self.user_writes = [e for e in range(n) if kind[e] == WRITE]
        self._static()
        self._units()

    # -- static relations ---------------------------------------------------
    def _static(self):
        n, kind, inv = self.n, self.kind, self.invoker
        mode = self.sem.ghost_order
        pos = [0] * n
        for order in self.seq:
            for i, e in enumerate(order):
                pos[e] = i
        ghosts_of = {}
        for g in range(n):
            if inv[g] >= 0:
                ghosts_of.setdefault(inv[g], []).append(g)
        gpo = [0] * n
        for order in self.seq:
            if mode in ("lifted", "unordered"):
                listing = []
                for e in order:
                    listing.append(e)
                    listing.extend(ghosts_of.get(e, ()))  # db precedes walk by id
                for i, a in enumerate(listing):
                    for b in listing[i + 1:]:
                        if mode == "unordered" and inv[a] >= 0 and inv[a] == inv[b]:
                            continue
                        gpo[a] |= 1 << b
            else:
                for i, a in enumerate(order):
                    for b in order[i:]:
                        if b != a:
                            gpo[a] |= 1 << b
                        for g in ghosts_of.get(b, ()):
                            gpo[a] |= 1 << g
        self.gpo = gpo
        scope = _PPO_KINDS[self.sem.ppo_scope]
        ppo = [0] * n
        fence = [0] * n
        fences = [e for e in range(n) if kind[e] == FENCE]
        for a in range(n):
            if kind[a] not in scope:
                continue
            for b in bits(gpo[a]):
                if kind[b] not in scope:
                    continue
                if not (kind[a] in _WRITES and kind[b] in _READS):
                    ppo[a] |= 1 << b
                if any(gpo[a] >> f & 1 and gpo[f] >> b & 1 for f in fences):
                    fence[a] |= 1 << b
        self.ppo, self.fence = ppo, fence
        remap = [0] * n
        for e in range(n):
            if self.owner[e] >= 0:
                remap[self.owner[e]] |= 1 << e
        self.remap = remap
        self.pos = pos

        # eligible TLB sources for every data event without its own walk
        cands = {}
        for e in self.data:
            if e in self.walk_of:
                continue
            t, v = self.thread[e], self.va[e]
            order = self.seq[t]
            here = order.index(e)
            opts = []
            for w, i in self.walk_of.items():
                if self.thread[w] != t or self.va[w] != v or w == e:
                    continue
                there = order.index(w)
                if there > here and self.sem.walk_sharing == "forward":
                    continue
                lo, hi = sorted((here, there))
                if any(kind[x] == INV and self.va[x] == v for x in order[lo + 1:hi]):
                    continue
                opts.append(i)
            cands[e] = sorted(opts)
        self.tlb_cands = cands

    def _units(self):
        units = []
        for e in range(self.n):
            k = self.kind[e]
            if k in (READ, WRITE):
                m = 1 << e
                for g in (self.walk_of.get(e), self.db_of.get(e)):
                    if g is not None:
                        m |= 1 << g
                units.append((m, -1))
            elif k == PTE:
                units.append(((1 << e) | self.remap[e], -1))
            elif (k == INV and self.owner[e] < 0) or k == FENCE:
                units.append((1 << e, -1))
        for i in range(len(self.rmw)):
            units.append((0, i))
        self.units = units

    def well_sourced(self) -> bool:
        return all(self.tlb_cands[e] for e in self.tlb_cands)

    # -- execution enumeration -----------------------------------------------
    def executions(self):
        kind, va = self.kind, self.va
        free = sorted(self.tlb_cands)
        base_ptw = {e: w for w, e in ((w, self.invoker[w]) for w in self.walks)}
        ptes_by_va = {}
        for e in range(self.n):
            if kind[e] in (PTE, DB):
                ptes_by_va.setdefault(va[e], []).append(e)
        walks_by_va = {}
        for w in self.walks:
            walks_by_va.setdefault(va[w], []).append(w)
        locs = sorted(set(ptes_by_va) | set(walks_by_va))
        loc_opts = []
        for v in locs:
            ws = ptes_by_va.get(v, [])
            rs = walks_by_va.get(v, [])
            loc_opts.append([
                (co, src)
                for co in permutations(ws)
                for src in product([-1] + ws, repeat=len(rs))
            ])
        for pick in product(*(self.tlb_cands[e] for e in free)):
            rf_ptw = dict(base_ptw)
            rf_ptw.update(zip(free, pick))
            for assign in product(*loc_opts):
                rf = {}
                rf_pa = {}
                db_val = {}
                cos = []
                for v, (co, src) in zip(locs, assign):
                    cos.append(list(co))
                    val = {}
                    prev = -1
                    for w in co:
                        val[w] = w if kind[w] == PTE else prev
                        prev = val[w]
                    for r, s in zip(walks_by_va.get(v, []), src):
                        rf[r] = s
                        rf_pa[r] = -1 if s < 0 else val[s]
                    db_val.update((w, val[w]) for w in co if kind[w] == DB)
                for e in self.data:
                    rf_pa[e] = rf_pa[rf_ptw[e]]
                # a dirty-bit write keeps the mapping it updates, which must be
                # the one its invoker translated through
                if any(db_val[d] != rf_pa[e] for e, d in self.db_of.items()):
                    continue
                yield from self._data_choices(rf_ptw, rf, cos, rf_pa)

    def _data_choices(self, rf_ptw, rf, cos, rf_pa):
        kind, va, pa = self.kind, self.va, self.pa
        groups = {}
        for e in self.data:
            s = rf_pa[e]
            p = va[e] if s < 0 else pa[s]
            groups.setdefault(p, ([], []))[0 if kind[e] == WRITE else 1].append(e)
        opts = []
        keys = sorted(groups)
        for p in keys:
            ws, rs = groups[p]
            opts.append([
                (co, src)
                for co in permutations(ws)
                for src in product([-1] + ws, repeat=len(rs))
            ])
        for assign in product(*opts):
            rf2 = dict(rf)
            cos2 = list(cos)
            for p, (co, src) in zip(keys, assign):
                if co:
                    cos2.append(list(co))
                rf2.update(zip(groups[p][1], src))
            yield Execution(rf_ptw, rf2, cos2, rf_pa)

    # -- axioms -------------------------------------------------------------
    def relations(self, ex: Execution, alive: int):
        """Derived relations of ``ex`` restricted to the ``alive`` events."""
        n, kind, va, pa = self.n, self.kind, self.va, self.pa
        drop = self.sem.orphans == "drop"
        loc = [-1] * n
        locmask = {}
        for e in bits(alive):
            k = kind[e]
            if k in (READ, WRITE):
                s = ex.rf_pa[e]
                loc[e] = pa[s] if s >= 0 and alive >> s & 1 else va[e]
            elif k in (PTE, WALK, DB):
                loc[e] = _PTE_BASE + va[e]
            else:
                continue
            locmask[loc[e]] = locmask.get(loc[e], 0) | (1 << e)
        co = [0] * n
        for order in ex.co:
            live = [w for w in order if alive >> w & 1]
            acc = 0
            for w in reversed(live):
                co[w] = acc
                acc |= 1 << w
        rf = [0] * n
        fr = [0] * n
        data_w = 0
        pte_w = 0
        for e in bits(alive):
            if kind[e] == WRITE:
                data_w |= 1 << e
            elif kind[e] in (PTE, DB):
                pte_w |= 1 << e
        for r, s in ex.rf.items():
            if not alive >> r & 1:
                continue
            if s >= 0 and alive >> s & 1:
                rf[s] |= 1 << r
                fr[r] = co[s]
            elif s >= 0 and drop:
                continue
            else:
                fr[r] = locmask.get(loc[r], 0) & (data_w if kind[r] == READ else pte_w)
        return loc, locmask, co, rf, fr

    def violated(self, ex: Execution, alive: int = -1, rmw_off: int = -1,
                 only: int | None = None, first: bool = False) -> int:
        """Bitmask of violated axioms (indices into ``AXIOMS``)."""
        if alive < 0:
            alive = self.full
        n, kind, thread = self.n, self.kind, self.thread
        loc, locmask, co, rf, fr = self.relations(ex, alive)
        out = 0
        want = range(5) if only is None else (only,)
        for ax in want:
            bad = False
            if ax == SC:
                adj = [0] * n
                for e in bits(alive):
                    same = locmask.get(loc[e], 0) if loc[e] >= 0 else 0
                    adj[e] = rf[e] | co[e] | fr[e] | (self.gpo[e] & same)
                bad = not acyclic(adj, alive)
            elif ax == RMW:
                for i, (r, w) in enumerate(self.rmw):
                    if i == rmw_off or not (alive >> r & 1 and alive >> w & 1):
                        continue
                    if any(co[x] >> w & 1 for x in bits(fr[r] & alive)):
                        bad = True
                        break
            elif ax == CAUS:
                adj = [0] * n
                for e in bits(alive):
                    rfe = 0
                    for r in bits(rf[e]):
                        if thread[r] != thread[e]:
                            rfe |= 1 << r
                    adj[e] = rfe | co[e] | fr[e] | ((self.ppo[e] | self.fence[e]) & alive)
                bad = not acyclic(adj, alive)
            elif ax == REMAP:
                if not self.ptes:
                    continue
                adj = [(self.gpo[e] | self.remap[e]) & alive for e in range(n)]
                live_ptes = [p for p in self.ptes if alive >> p & 1]
                for e in self.data:
                    if not alive >> e & 1:
                        continue
                    s = ex.rf_pa[e]
                    if s >= 0 and not alive >> s & 1:
                        s = -1
                    for p in live_ptes:
                        if self.va[p] == self.va[e] and (s < 0 or co[s] >> p & 1):
                            adj[e] |= 1 << p
                bad = not acyclic(adj, alive)
            else:
                adj = [rf[e] | co[e] | fr[e] for e in range(n)]
                for e in self.data:
                    w = ex.rf_ptw[e]
                    if not (alive >> e & 1 and alive >> w & 1):
                        continue
                    src = self.invoker[w]
                    if src != e and alive >> src & 1:
                        adj[src] |= 1 << e
                bad = not acyclic(adj, alive)
            if bad:
                out |= 1 << ax
                if first:
                    return out
        return out

    def consistent(self, ex: Execution, alive: int = -1, rmw_off: int = -1) -> bool:
        return not self.violated(ex, alive, rmw_off, first=True)

    def minimal(self, ex: Execution) -> bool:
        for mask, rmw_idx in self.units:
            if not self.consistent(ex, self.full & ~mask, rmw_idx):
                return False
        return True

    def witness(self, target: int):
        """First execution violating ``target`` whose relaxations are all legal."""
        for ex in self.executions():
            if self.violated(ex, only=target) and self.minimal(ex):
                return ex
        return None


# -- program layouts ----------------------------------------------------------

def _encode_thread(th, vm, fm, lm):
    out = []
    for ins in th:
        op = ins[0]
        if op == OP_F:
            out.append(ins)
            continue
        v = vm.setdefault(ins[1], len(vm))
        if op == OP_R:
            out.append((op, v, ins[2], ins[3]))
        elif op == OP_W:
            out.append((op, v, ins[2]))
        elif op == OP_P:
            if ins[2] == 0:
                tgt = vm.setdefault(ins[3], len(vm))
            else:
                tgt = fm.setdefault(ins[3], len(fm))
            out.append((op, v, ins[2], tgt, lm.setdefault(ins[4], len(lm))))
        else:
            lab = -1 if ins[2] < 0 else lm.setdefault(ins[2], len(lm))
            out.append((op, v, lab))
    return tuple(out)


def canonical(layout) -> tuple:
    """Smallest relabeling of a layout over thread orders.

    Fixing the thread order fixes every event position, so naming VAs, fresh
    PAs and PTE-write labels by first appearance leaves no freedom; the minimum
    over thread orders is therefore a complete isomorphism invariant.  Threads
    are placed one at a time and only the prefixes that are smallest so far
    are extended, which finds the same minimum without trying every order.
    """
    n = len(layout)
    states = [((), frozenset(), {}, {}, {})]
    for _ in range(n):
        best = None
        nxt = []
        for prefix, used, vm, fm, lm in states:
            for t in range(n):
                if t in used:
                    continue
                vm2, fm2, lm2 = dict(vm), dict(fm), dict(lm)
                enc = _encode_thread(layout[t], vm2, fm2, lm2)
                if best is None or enc < best:
                    best = enc
                    nxt = []
                if enc == best:
                    nxt.append((prefix + (enc,), used | {t}, vm2, fm2, lm2))
        states = nxt
    return states[0][0] if states else ()


def layout_cost(layout) -> int:
    c = 0
    for th in layout:
        for ins in th:
            op = ins[0]
            if op == OP_R:
                c += 1 + ins[2]
            elif op == OP_W:
                c += 2 + ins[2]
            else:
                c += 1
    return c


@dataclass(frozen=True)
class Vocabulary:
    """What the layout generator may emit."""

    fences: bool = False
    rmw: bool = False
    max_threads: int | None = None
    max_vas: int | None = None
    # "change": a PTE write never targets its own VA's initial PA;
    # "any": every PA symbol in scope is allowed
    pa_policy: str = "change"


@dataclass(frozen=True)
class Needs:
    """Necessary structure, used to skip layouts that cannot qualify."""

    rmw: bool = False  # at least one rmw pair
    pte: bool = False  # at least one PTE write
    shared_walk: bool = False  # some data event without its own walk


def needs_for(target: int) -> Needs:
    return Needs(rmw=target == RMW, pte=target == REMAP, shared_walk=target == TLB)


def _chunks(nv: int, vocab: Vocabulary, max_vas: int, label: int):
    """Instruction groups that can be appended to a thread core."""
    vs = range(min(nv + 1, max_vas))
    for v in vs:
        for w in (0, 1):
            yield ((OP_R, v, w, 0),), 1 + w
        for w in (0, 1):
            yield ((OP_W, v, w),), 2 + w
        yield ((OP_P, v, -1, -1, label), (OP_I, v, label)), 2
        yield ((OP_I, v, -1),), 1
        if vocab.rmw:
            for w1 in (0, 1):
                for w2 in (0, 1):
                    yield ((OP_R, v, w1, 1), (OP_W, v, w2)), 3 + w1 + w2
    if vocab.fences:
        yield ((OP_F,),), 1


def _has_source(th, i, sharing):
    """Whether the data access at ``th[i]`` has a walk it may translate through."""
    v = th[i][1]
    for j in range(i - 1, -1, -1):
        x = th[j]
        if x[0] == OP_I and x[1] == v:
            break
        if x[0] in (OP_R, OP_W) and x[1] == v and x[2]:
            return True
    if sharing == "any":
        for x in th[i + 1:]:
            if x[0] == OP_I and x[1] == v:
                break
            if x[0] in (OP_R, OP_W) and x[1] == v and x[2]:
                return True
    return False


def _core_ok(th, sharing: str) -> bool:
    """Walk sourcing and useful spurious invlpgs, ignoring remote invlpgs."""
    for i, ins in enumerate(th):
        op = ins[0]
        if op == OP_I and ins[2] < 0:
            if not any(x[0] in (OP_R, OP_W) and x[1] == ins[1] for x in th[i + 1:]):
                return False
        if op in (OP_R, OP_W) and not ins[2] and not _has_source(th, i, sharing):
            return False
    return True


def _owed(th, sharing: str) -> int:
    """Lower bound on the cost still needed before ``th`` can pass ``_core_ok``."""
    unsourced = set()
    waiting = set()
    for i, ins in enumerate(th):
        op = ins[0]
        if op == OP_I:
            if ins[2] < 0:
                waiting.add(ins[1])
        elif op in (OP_R, OP_W):
            waiting.discard(ins[1])
            if not ins[2] and not _has_source(th, i, sharing):
                unsourced.add(ins[1])
    if sharing != "any" and unsourced:
        return 1 << 30
    # a walk-owning access costs 2 and also serves a waiting invlpg
    return 2 * len(unsourced) + len(waiting - unsourced)


def _shape(th) -> tuple:
    """A thread core with its VAs renamed locally and PTE targets ignored."""
    vm = {}
    out = []
    for ins in th:
        if ins[0] == OP_F:
            out.append((OP_F,))
            continue
        v = vm.setdefault(ins[1], len(vm))
        if ins[0] == OP_P:
            out.append((OP_P, v))
        elif ins[0] == OP_I:
            out.append((OP_I, v, int(ins[2] >= 0)))
        else:
            out.append((ins[0], v) + tuple(ins[2:]))
    return tuple(out)


def _cores(T, budget, vocab, max_vas, sharing):
    """Per-thread cores, VAs named by first appearance, PTE labels in order.

    Threads are emitted in nondecreasing shape order.  Any program can be
    brought into that order by permuting threads, and naming VAs by first
    appearance afterwards gives a core this enumeration produces, so no
    isomorphism class is lost.
    """
    remote = T - 1
    cache = {}

    chunk_cache = {}

    def chunks(nv, label):
        key = (nv, label)
        if key not in chunk_cache:
            opts = []
            for chunk, cost in _chunks(nv, vocab, max_vas, label):
                if chunk[0][0] == OP_P:
                    cost += remote
                v = chunk[0][1] if chunk[0][0] != OP_F else -1
                opts.append((cost, chunk, max(nv, v + 1), label + (chunk[0][0] == OP_P)))
            opts.sort(key=lambda o: o[0])
            chunk_cache[key] = opts
        return chunk_cache[key]

    def grow(prefix, nv, label, left, out):
        if prefix:
            if _owed(prefix, sharing) > left:
                return
            out.append((tuple(prefix), nv, label, left))
        for cost, chunk, nv2, lab2 in chunks(nv, label):
            if cost > left:
                break
            grow(prefix + list(chunk), nv2, lab2, left - cost, out)

    def threads(nv, label, room):
        key = (nv, label, room)
        if key not in cache:
            raw = []
            grow([], nv, label, room, raw)
            cache[key] = [(th, nv2, lab2, room - left, _shape(th))
                          for th, nv2, lab2, left in raw if _core_ok(th, sharing)]
        return cache[key]

    def rec(done, last, nv, label, left):
        if len(done) == T:
            yield tuple(done), nv, label
            return
        reserve = T - len(done) - 1
        for th, nv2, lab2, used, sh in threads(nv, label, left - reserve):
            if last is not None and sh < last:
                continue
            yield from rec(done + [th], sh, nv2, lab2, left - used)

    yield from rec([], None, 0, 0, budget)


def _targets(cores, nv, nlabels, policy):
    """All PA target assignments for the PTE writes, fresh PAs numbered in order."""
    owners = {}
    for th in cores:
        for ins in th:
            if ins[0] == OP_P:
                owners[ins[4]] = ins[1]

    def rec(lab, fresh, acc):
        if lab == nlabels:
            yield dict(acc)
            return
        v = owners[lab]
        for u in range(nv):
            if policy == "change" and u == v:
                continue
            acc[lab] = (0, u)
            yield from rec(lab + 1, fresh, acc)
        for k in range(fresh + 1):
            acc[lab] = (1, k)
            yield from rec(lab + 1, max(fresh, k + 1), acc)
        del acc[lab]

    yield from rec(0, 0, {})


def _slots(th):
    """Positions where a remote invlpg may be inserted into ``th``."""
    out = []
    for i in range(len(th) + 1):
        if i > 0:
            prev = th[i - 1]
            if (prev[0] == OP_R and prev[3]) or prev[0] == OP_P:
                continue
        out.append(i)
    return out


def _place(threads, pending):
    if not pending:
        yield tuple(threads)
        return
    (t, ins), rest = pending[0], pending[1:]
    th = threads[t]
    for i in _slots(th):
        new = list(threads)
        new[t] = th[:i] + (ins,) + th[i:]
        yield from _place(new, rest)


def layout_ok(layout, sharing: str = "any") -> bool:
    for th in layout:
        for i, ins in enumerate(th):
            if ins[0] in (OP_R, OP_W) and not ins[2] and not _has_source(th, i, sharing):
                return False
    return True


def _meets(cores, needs: Needs) -> bool:
    ops = [i for th in cores for i in th]
    # spanning set: a write, and a user access whose outcome can be observed
    if not any(i[0] in (OP_W, OP_P) for i in ops):
        return False
    if not any(i[0] in (OP_R, OP_W) for i in ops):
        return False
    if needs.rmw and not any(i[0] == OP_R and i[3] for i in ops):
        return False
    if needs.pte and not any(i[0] == OP_P for i in ops):
        return False
    if needs.shared_walk and not any(i[0] in (OP_R, OP_W) and not i[2] for i in ops):
        return False
    return True


def generate(bound: int, vocab: Vocabulary = Vocabulary(), sharing: str = "any",
             needs: Needs = Needs()):
    """Yield canonical layouts of at most ``bound`` events, each once."""
    seen = set()
    max_threads = vocab.max_threads or bound
    max_vas = vocab.max_vas or bound
    for T in range(1, max_threads + 1):
        for cores, nv, nlab in _cores(T, bound, vocab, max_vas, sharing):
            if not _meets(cores, needs):
                continue
            for tg in _targets(cores, nv, nlab, vocab.pa_policy):
                threads = []
                pending = []
                for t, th in enumerate(cores):
                    row = []
                    for ins in th:
                        if ins[0] == OP_P:
                            lab = ins[4]
                            ins = (OP_P, ins[1], tg[lab][0], tg[lab][1], lab)
                            pending.extend((u, (OP_I, ins[1], lab)) for u in range(T) if u != t)
                        row.append(ins)
                    threads.append(tuple(row))
                for layout in _place(threads, pending):
                    if not layout_ok(layout, sharing):
                        continue
                    c = canonical(layout)
                    if c not in seen:
                        seen.add(c)
                        yield c
