"""Canonical forms, deduplication and suite comparison for ELT programs.

Two programs are isomorphic when they differ only by thread order, VA names,
PA names and event numbering.  The canonical form is the printed text of the
least layout over all thread orders, with VAs, PAs and PTE labels renamed in
order of first appearance.  Initial mappings of VAs that no event touches and
no PTE write targets do not take part.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, replace
from itertools import combinations
from typing import NewType

from . import kernel as K
from .eltio import to_text
from .relgraph import Program
from .synth import RelaxationUnit, from_layout, relax_program, relaxation_units, screen, to_layout

CanonicalForm = NewType("CanonicalForm", str)

DEFAULT_CAP = 12


def canonical_program(p: Program) -> Program:
    """The canonical representative of ``p``'s isomorphism class."""
    return from_layout(K.canonical(to_layout(p)), "canonical")


def canonical_form(p: Program) -> CanonicalForm:
    return CanonicalForm(to_text(canonical_program(p)))


def isomorphic(a: Program, b: Program) -> bool:
    return canonical_form(a) == canonical_form(b)


def random_isomorph(p: Program, rng: random.Random | None = None) -> Program:
    """``p`` with threads, VAs, PAs and event ids randomly permuted."""
    rng = rng or random.Random()
    tids = p.thread_ids
    tmap = dict(zip(tids, rng.sample(range(len(tids) * 2), len(tids))))
    vas = sorted({va for va, _ in p.init} | {e.va for e in p.events if e.va})
    vmap = dict(zip(vas, (f"v{i}" for i in rng.sample(range(len(vas) * 3), len(vas)))))
    pas = sorted({pa for _, pa in p.init} | {e.pa for e in p.events if e.pa})
    pmap = dict(zip(pas, (f"p{i}" for i in rng.sample(range(len(pas) * 3), len(pas)))))
    ids = p.ids
    imap = dict(zip(ids, rng.sample(range(len(ids) * 2), len(ids))))

    def rel(r):
        return frozenset((imap[a], imap[b]) for a, b in r)

    events = [replace(e, id=imap[e.id], thread=tmap[e.thread],
                      va=vmap.get(e.va), pa=pmap.get(e.pa), label="")
              for e in p.events]
    rng.shuffle(events)
    init = tuple(sorted((vmap[v], pmap[a]) for v, a in p.init))
    return Program(tuple(events), rel(p.po), rel(p.ghost), rel(p.remap), rel(p.rmw), init, p.name)


def dedup(suite) -> list[Program]:
    """One program per canonical form, keeping the first one seen."""
    seen = set()
    out = []
    for p in suite:
        f = canonical_form(p)
        if f not in seen:
            seen.add(f)
            out.append(p)
    return out


@dataclass(frozen=True)
class Verbatim:
    match: Program
    category = "verbatim"


@dataclass(frozen=True)
class ReducibleTo:
    match: Program
    removed: tuple[RelaxationUnit, ...]
    labels: tuple[str, ...]  # one "{A + B}" string per removed unit
    category = "reducible"


@dataclass(frozen=True)
class NotCovered:
    reason: str | None = None
    category = "not-covered"


Comparison = Verbatim | ReducibleTo | NotCovered


def index(suite) -> dict[CanonicalForm, Program]:
    out = {}
    for p in suite:
        out.setdefault(canonical_form(p), p)
    return out


def compare(t: Program, suite, cap: int = DEFAULT_CAP, max_removed: int = 3) -> Comparison:
    """Classify ``t`` against ``suite``.

    Subsets of ``t``'s relaxation units are tried smallest first, and within a
    size in unit order, so the reported reduction is deterministic.  With more
    than ``cap`` units only subsets of up to ``max_removed`` units are tried.
    ``suite`` may be a list of programs or a prebuilt :func:`index`.
    """
    reason = screen(t)
    if reason is not None:
        return NotCovered(reason)
    forms = suite if isinstance(suite, dict) else index(suite)
    hit = forms.get(canonical_form(t))
    if hit is not None:
        return Verbatim(hit)
    units = relaxation_units(t)
    limit = len(units) if len(units) <= cap else min(max_removed, len(units))
    for k in range(1, limit + 1):
        for sub in combinations(units, k):
            q = relax_program(t, sub)
            if not q.events or screen(q) is not None:
                continue
            hit = forms.get(canonical_form(q))
            if hit is not None:
                return ReducibleTo(hit, sub, tuple(u.describe(t) for u in sub))
    return NotCovered()


def describe(c: Comparison) -> str:
    if isinstance(c, Verbatim):
        return f"verbatim ({c.match.name})" if c.match.name else "verbatim"
    if isinstance(c, ReducibleTo):
        return f"reducible to {c.match.name or 'suite member'} by removing {' '.join(c.labels)}"
    return "not covered" + (f" ({c.reason})" if c.reason else "")
