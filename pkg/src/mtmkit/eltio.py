"""Text format for ELTs.

::

    elt <name>
    init <va> -> <pa>
    thread <tid>
      <L>: W <va>
      <L>: R <va>
      <L>: Wpte <va> -> <pa>
      <L>: invlpg <va>
      <L>: mfence
      <L>: ghost db <parentL>
      <L>: ghost ptw <parentL>
      rmw <readL> <writeL>
    exec
      rf <wL> <rL>
      co <wL> <wL>
      co_pa <pteL> <pteL>
      rf_pa (init|<pteL>) <L>
      rf_ptw <ptwL> <L>
      remap <pteL> <invlpgL>
    expect (permitted|forbidden) [<axiom> ...]

``#`` starts a comment.  An ``exec`` block holding nothing but ``remap`` lines
describes a program only.  When no ``remap`` line names a PTE write, its
invlpgs are inferred: the one right after it on its own thread and the first
unclaimed same-VA invlpg on every other thread.  Missing ``rf_ptw`` lines
default to the event's own walk, missing ``rf_pa`` lines to the mapping the
walk loads, and ``co``/``co_pa`` pairs are closed transitively.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .relgraph import (
    DEFAULT_SEMANTICS,
    INIT,
    Event,
    ExecutionGraph,
    Kind,
    Program,
    Semantics,
    loaded_mapping,
    total_order,
    transitive_closure,
)
from .wellformed import validate, validate_program

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_.']*$")
_USER_KINDS = {"W": Kind.W, "R": Kind.R, "Wpte": Kind.WPTE, "invlpg": Kind.INVLPG, "mfence": Kind.MFENCE}


class EltError(ValueError):
    pass


class EltSyntaxError(EltError):
    def __init__(self, line: int, col: int, msg: str, source: str = "<elt>"):
        self.line, self.col, self.msg, self.source = line, col, msg, source
        super().__init__(f"{source}:{line}:{col}: {msg}")


class EltValidationError(EltError):
    def __init__(self, violations, source: str = "<elt>"):
        self.violations = violations
        super().__init__(f"{source}: " + "; ".join(str(v) for v in violations))


@dataclass(frozen=True)
class EltDocument:
    name: str
    program: Program
    execution: ExecutionGraph | None = None
    expect: tuple[str, tuple[str, ...]] | None = None  # (permitted|forbidden, axioms)


def _tokens(line: str):
    """(column, token) pairs, columns 1-based; ``->`` and ``:`` kept as tokens."""
    out = []
    for m in re.finditer(r"->|:|[^\s:]+", line):
        tok = m.group()
        if tok.startswith("#"):
            break
        out.append((m.start() + 1, tok))
    return out


def parse(text: str, source: str = "<elt>", check: bool = True,
          sem: Semantics = DEFAULT_SEMANTICS) -> EltDocument:
    """Parse one ELT; raises :class:`EltSyntaxError` or :class:`EltValidationError`."""
    name = None
    init: dict[str, str] = {}
    events: list[dict] = []
    labels: dict[str, int] = {}
    rmw = []
    rels: dict[str, list] = {k: [] for k in ("rf", "co", "co_pa", "rf_pa", "rf_ptw", "remap")}
    expect = None
    section = "head"
    thread = None
    seen_threads = set()
    exec_lines = 0

    def err(ln, col, msg):
        raise EltSyntaxError(ln, col, msg, source)

    def need(toks, n, ln, what):
        if len(toks) != n:
            col = toks[min(len(toks), n) - 1][0] if toks else 1
            err(ln, col, f"expected {what}")

    def ident(tok, ln):
        col, t = tok
        if not _IDENT.match(t):
            err(ln, col, f"bad name {t!r}")
        return t

    for ln, raw in enumerate(text.splitlines(), 1):
        toks = _tokens(raw)
        if not toks:
            continue
        col, head = toks[0]
        if head == "elt":
            if name is not None:
                err(ln, col, "duplicate elt header")
            need(toks, 2, ln, "elt <name>")
            name = ident(toks[1], ln)
            continue
        if name is None:
            err(ln, col, "file must start with 'elt <name>'")
        if head == "init":
            if section != "head":
                err(ln, col, "init lines must precede the first thread")
            need(toks, 4, ln, "init <va> -> <pa>")
            if toks[2][1] != "->":
                err(ln, toks[2][0], "expected '->'")
            va = ident(toks[1], ln)
            if va in init:
                err(ln, toks[1][0], f"second initial mapping for {va}")
            init[va] = ident(toks[3], ln)
        elif head == "thread":
            if section not in ("head", "thread"):
                err(ln, col, "threads must precede exec and expect")
            need(toks, 2, ln, "thread <tid>")
            try:
                thread = int(toks[1][1])
            except ValueError:
                err(ln, toks[1][0], "thread id must be an integer")
            if thread in seen_threads:
                err(ln, toks[1][0], f"thread {thread} declared twice")
            seen_threads.add(thread)
            section = "thread"
        elif head == "rmw":
            if section != "thread":
                err(ln, col, "rmw lines belong to a thread block")
            need(toks, 3, ln, "rmw <readL> <writeL>")
            rmw.append((ln, toks[1], toks[2]))
        elif head == "exec":
            if section == "expect":
                err(ln, col, "exec must precede expect")
            need(toks, 1, ln, "exec")
            section = "exec"
        elif head in rels:
            if section != "exec":
                err(ln, col, f"{head} lines belong to the exec block")
            need(toks, 3, ln, f"{head} <label> <label>")
            rels[head].append((ln, toks[1], toks[2]))
            if head != "remap":
                exec_lines += 1
        elif head == "expect":
            if len(toks) < 2 or toks[1][1] not in ("permitted", "forbidden"):
                err(ln, toks[1][0] if len(toks) > 1 else col, "expected 'permitted' or 'forbidden'")
            expect = (toks[1][1], tuple(ident(t, ln) for t in toks[2:]))
            section = "expect"
        elif len(toks) >= 3 and toks[1][1] == ":":
            if section != "thread":
                err(ln, col, "instructions belong to a thread block")
            lab = ident(toks[0], ln)
            if lab in labels:
                err(ln, col, f"label {lab} defined twice")
            kcol, kw = toks[2]
            rest = toks[3:]
            ev = {"label": lab, "thread": thread, "line": ln}
            if kw == "ghost":
                if len(rest) != 2 or rest[0][1] not in ("db", "ptw"):
                    err(ln, kcol, "expected 'ghost (db|ptw) <parentL>'")
                parent = rest[1][1]
                if parent not in labels:
                    err(ln, rest[1][0], f"undefined label {parent}")
                pid = labels[parent]
                # ghosts sit right after their parent or the parent's other ghost
                last = events[-1]
                if not (pid == len(events) - 1 or last.get("parent") == pid):
                    err(ln, col, f"ghost must follow its parent {parent}")
                pev = events[pid]
                ev.update(kind=Kind.DB if rest[0][1] == "db" else Kind.PTW,
                          parent=pid, va=pev["va"], thread=pev["thread"])
            elif kw in _USER_KINDS:
                kind = _USER_KINDS[kw]
                ev["kind"] = kind
                if kind is Kind.MFENCE:
                    if rest:
                        err(ln, rest[0][0], "mfence takes no operand")
                elif kind is Kind.WPTE:
                    if len(rest) != 3 or rest[1][1] != "->":
                        err(ln, kcol, "expected 'Wpte <va> -> <pa>'")
                    ev["va"] = ident(rest[0], ln)
                    ev["pa"] = ident(rest[2], ln)
                else:
                    if len(rest) != 1:
                        err(ln, kcol, f"expected '{kw} <va>'")
                    ev["va"] = ident(rest[0], ln)
            else:
                err(ln, kcol, f"unknown instruction {kw!r}")
            labels[lab] = len(events)
            events.append(ev)
        else:
            err(ln, col, f"unexpected {head!r}")
    if name is None:
        raise EltSyntaxError(1, 1, "empty document", source)

    def ref(tok, ln, allow_init=False):
        col, t = tok
        if allow_init and t == "init":
            return INIT
        if t not in labels:
            err(ln, col, f"undefined label {t}")
        return labels[t]

    # initial mappings: fresh PAs for VAs the header leaves out
    used_pas = set(init.values()) | {e.get("pa") for e in events}
    for e in events:
        va = e.get("va")
        if va is not None and va not in init:
            pa = f"pa_{va}"
            while pa in used_pas:
                pa += "_"
            init[va] = pa
            used_pas.add(pa)

    evs = tuple(
        Event(i, e["kind"], e["thread"], e.get("va"), e.get("pa"), e["label"])
        for i, e in enumerate(events)
    )
    po = set()
    for t in sorted(seen_threads):
        order = [i for i, e in enumerate(events) if e["thread"] == t and "parent" not in e]
        po |= total_order(order)
    ghost = {(e["parent"], i) for i, e in enumerate(events) if "parent" in e}
    rmw_rel = {(ref(a, ln), ref(b, ln)) for ln, a, b in rmw}

    remap = {(ref(a, ln), ref(b, ln)) for ln, a, b in rels["remap"]}
    named = {a for a, _ in remap}
    claimed = {b for _, b in remap}
    for i, e in enumerate(events):
        if e["kind"] is not Kind.WPTE or i in named:
            continue
        for t in sorted(seen_threads):
            order = [j for j, x in enumerate(events) if x["thread"] == t and "parent" not in x]
            if t == e["thread"]:
                k = order.index(i)
                cands = order[k + 1:k + 2]
            else:
                cands = order
            for j in cands:
                x = events[j]
                if x["kind"] is Kind.INVLPG and x["va"] == e["va"] and j not in claimed:
                    remap.add((i, j))
                    claimed.add(j)
                    break

    program = Program(evs, frozenset(po), frozenset(ghost), frozenset(remap),
                      frozenset(rmw_rel), tuple(sorted(init.items())), name)
    if check:
        bad = validate_program(program)
        if bad:
            raise EltValidationError(bad, source)

    execution = None
    if exec_lines:
        rf = {(ref(a, ln), ref(b, ln)) for ln, a, b in rels["rf"]}
        co = transitive_closure(frozenset((ref(a, ln), ref(b, ln)) for ln, a, b in rels["co"]))
        co_pa = transitive_closure(frozenset((ref(a, ln), ref(b, ln)) for ln, a, b in rels["co_pa"]))
        rf_ptw = {(ref(a, ln), ref(b, ln)) for ln, a, b in rels["rf_ptw"]}
        given = {ref(b, ln) for ln, _, b in rels["rf_ptw"]}
        for e in evs:
            if e.kind.is_data and e.id not in given:
                w = program.walk_of(e.id)
                if w is not None:
                    rf_ptw.add((w, e.id))
        rf_pa = {(ref(a, ln, True), ref(b, ln)) for ln, a, b in rels["rf_pa"]}
        g = ExecutionGraph(program, frozenset(rf), co, frozenset(rf_ptw), frozenset(rf_pa), co_pa)
        have = {b for _, b in rf_pa}
        for e in evs:
            if e.kind is Kind.PTW and e.id not in have:
                rf_pa.add((loaded_mapping(g, e.id), e.id))
        walk_map = {b: a for a, b in rf_pa}
        for w, e in rf_ptw:
            if e not in have and w in walk_map:
                rf_pa.add((walk_map[w], e))
        execution = ExecutionGraph(program, frozenset(rf), co, frozenset(rf_ptw),
                                   frozenset(rf_pa), co_pa)
        if check:
            bad = validate(execution, sem)
            if bad:
                raise EltValidationError(bad, source)
    return EltDocument(name, program, execution, expect)


def parse_file(path, check: bool = True, sem: Semantics = DEFAULT_SEMANTICS) -> EltDocument:
    with open(path, encoding="utf-8") as f:
        return parse(f.read(), str(path), check, sem)


# -- printing -----------------------------------------------------------------

_PREFIX = {Kind.R: "R", Kind.W: "W", Kind.WPTE: "PTE", Kind.INVLPG: "INV", Kind.MFENCE: "F"}


def standard_labels(p: Program) -> dict[int, str]:
    """Conventional labels: user events numbered in listing order, ghosts after their parent."""
    out = {}
    n = 0
    for t in p.thread_ids:
        for e in p.thread(t):
            out[e] = f"{_PREFIX[p.event(e).kind]}{n}"
            for g in p.ghosts(e):
                out[g] = f"{p.event(g).kind.value}{n}"
            n += 1
    return out


def _labels(p: Program) -> dict[int, str]:
    labs = {e.id: e.label for e in p.events}
    vals = list(labs.values())
    ok = all(v and _IDENT.match(v) and v != "init" for v in vals) and len(set(vals)) == len(vals)
    return labs if ok else standard_labels(p)


def _covering(r) -> list:
    return sorted((a, b) for a, b in r if not any((a, c) in r and (c, b) in r for c, _ in r))


def to_text(p: Program, g: ExecutionGraph | None = None, name: str | None = None,
            expect: tuple[str, tuple[str, ...]] | None = None) -> str:
    """Deterministic text for a program and, optionally, one execution of it."""
    lab = _labels(p)
    lines = [f"elt {name or p.name or 'unnamed'}"]
    for va, pa in p.init:
        lines.append(f"init {va} -> {pa}")
    for t in p.thread_ids:
        lines.append(f"thread {t}")
        for e in p.thread(t):
            ev = p.event(e)
            if ev.kind is Kind.MFENCE:
                lines.append(f"  {lab[e]}: mfence")
            elif ev.kind is Kind.WPTE:
                lines.append(f"  {lab[e]}: Wpte {ev.va} -> {ev.pa}")
            else:
                lines.append(f"  {lab[e]}: {ev.kind.value} {ev.va}")
            for gh in p.ghosts(e):
                lines.append(f"  {lab[gh]}: ghost {p.event(gh).kind.value} {lab[e]}")
        for r, w in sorted(p.rmw):
            if p.event(r).thread == t:
                lines.append(f"  rmw {lab[r]} {lab[w]}")
    body = []
    for a, b in sorted(p.remap):
        body.append(f"  remap {lab[a]} {lab[b]}")
    if g is not None:
        for a, b in sorted(g.rf):
            body.append(f"  rf {lab[a]} {lab[b]}")
        for a, b in _covering(g.co):
            body.append(f"  co {lab[a]} {lab[b]}")
        for a, b in _covering(g.co_pa):
            body.append(f"  co_pa {lab[a]} {lab[b]}")
        for a, b in sorted(g.rf_ptw, key=lambda x: (x[1], x[0])):
            body.append(f"  rf_ptw {lab[a]} {lab[b]}")
        for a, b in sorted(g.rf_pa, key=lambda x: (x[1], x[0])):
            src = "init" if a == INIT else lab[a]
            body.append(f"  rf_pa {src} {lab[b]}")
    if body:
        lines.append("exec")
        lines.extend(body)
    if expect is not None:
        lines.append(" ".join(("expect", expect[0]) + tuple(expect[1])))
    return "\n".join(lines) + "\n"


def print_doc(doc: EltDocument) -> str:
    return to_text(doc.program, doc.execution, doc.name, doc.expect)
