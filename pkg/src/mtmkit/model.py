"""Axioms as relational assertions, the x86t_elt model, and the checker."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union as _U

from . import relgraph as rg
from .relgraph import DEFAULT_SEMANTICS, ExecutionGraph, INIT, Relation, Semantics


# -- expressions --------------------------------------------------------------

@dataclass(frozen=True)
class Base:
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Union:
    parts: tuple

    def __str__(self):
        return " + ".join(map(str, self.parts))


@dataclass(frozen=True)
class Compose:
    left: "RelExpr"
    right: "RelExpr"

    def __str__(self):
        return f"({self.left}).({self.right})"


@dataclass(frozen=True)
class Closure:
    inner: "RelExpr"

    def __str__(self):
        return f"^({self.inner})"


@dataclass(frozen=True)
class Inverse:
    inner: "RelExpr"

    def __str__(self):
        return f"~({self.inner})"


RelExpr = _U[Base, Union, Compose, Closure, Inverse]


def union_of(*names_or_exprs) -> Union:
    return Union(tuple(Base(x) if isinstance(x, str) else x for x in names_or_exprs))


class UnresolvedRelation(KeyError):
    pass


BASE_NAMES = ("po", "ghost", "remap", "rmw", "rf", "co", "rf_ptw", "rf_pa", "co_pa")
DERIVED_NAMES = ("gpo", "gpo_plus", "fr", "fr_pa", "fr_va", "po_loc", "ppo", "fence",
                 "rfe", "com", "ptw_source")


def _lookup(g: ExecutionGraph, d: rg.DerivedRelations, name: str) -> Relation:
    if name in ("po", "ghost", "remap", "rmw"):
        return getattr(g.program, name)
    if name == "rf_pa":
        return frozenset(p for p in g.rf_pa if p[0] != INIT)
    if name in BASE_NAMES:
        return getattr(g, name)
    if name in DERIVED_NAMES:
        return getattr(d, name)
    raise UnresolvedRelation(name)


def eval_expr(g: ExecutionGraph, d: rg.DerivedRelations, e: RelExpr) -> Relation:
    if isinstance(e, Base):
        return _lookup(g, d, e.name)
    if isinstance(e, Union):
        return rg.union(*(eval_expr(g, d, x) for x in e.parts))
    if isinstance(e, Compose):
        return rg.compose(eval_expr(g, d, e.left), eval_expr(g, d, e.right))
    if isinstance(e, Closure):
        return rg.transitive_closure(eval_expr(g, d, e.inner))
    if isinstance(e, Inverse):
        return rg.inverse(eval_expr(g, d, e.inner))
    raise TypeError(f"not a relation expression: {e!r}")


# -- axioms and models --------------------------------------------------------

@dataclass(frozen=True)
class Acyclic:
    expr: RelExpr

    def __str__(self):
        return f"acyclic({self.expr})"


@dataclass(frozen=True)
class EmptyIntersect:
    left: RelExpr
    right: RelExpr

    def __str__(self):
        return f"no ({self.left}) & ({self.right})"


@dataclass(frozen=True)
class Axiom:
    name: str
    assertion: Acyclic | EmptyIntersect

    def witness(self, g: ExecutionGraph, d: rg.DerivedRelations):
        """None when the axiom holds, else a cycle (id list) or offending pair."""
        a = self.assertion
        if isinstance(a, Acyclic):
            return rg.find_cycle(eval_expr(g, d, a.expr))
        bad = rg.intersect(eval_expr(g, d, a.left), eval_expr(g, d, a.right))
        return min(bad) if bad else None


@dataclass(frozen=True)
class Model:
    name: str
    axioms: tuple[Axiom, ...]

    def __post_init__(self):
        if not self.axioms:
            raise ValueError("a model needs at least one axiom")
        names = [a.name for a in self.axioms]
        if len(set(names)) != len(names):
            raise ValueError("axiom names must be unique")

    @property
    def axiom_names(self) -> list[str]:
        return [a.name for a in self.axioms]

    def axiom(self, name: str) -> Axiom:
        for a in self.axioms:
            if a.name == name:
                return a
        raise KeyError(name)

    def without(self, *names: str) -> "Model":
        return Model(self.name + "-" + "-".join(names),
                     tuple(a for a in self.axioms if a.name not in names))


SC_PER_LOC = Axiom("sc_per_loc", Acyclic(union_of("rf", "co", "fr", "po_loc")))
RMW_ATOMICITY = Axiom("rmw_atomicity", EmptyIntersect(Compose(Base("fr"), Base("co")), Base("rmw")))
CAUSALITY = Axiom("causality", Acyclic(union_of("rfe", "co", "fr", "ppo", "fence")))
REMAP_ORDER = Axiom("remap_order", Acyclic(union_of("fr_va", "gpo_plus", "remap")))
TLB_CAUSALITY = Axiom("tlb_causality", Acyclic(union_of("ptw_source", "com")))


def x86t_elt() -> Model:
    """The estimated x86 transistency model: x86-TSO plus two VM axioms."""
    return Model("x86t_elt", (SC_PER_LOC, RMW_ATOMICITY, CAUSALITY, REMAP_ORDER, TLB_CAUSALITY))


def x86_tso() -> Model:
    return Model("x86_tso", (SC_PER_LOC, RMW_ATOMICITY, CAUSALITY))


MODELS = {"x86t_elt": x86t_elt, "x86_tso": x86_tso}


def get_model(name: str) -> Model:
    try:
        return MODELS[name]()
    except KeyError:
        raise KeyError(f"unknown model {name!r}; known: {', '.join(sorted(MODELS))}") from None


# -- checking -----------------------------------------------------------------

@dataclass(frozen=True)
class Verdict:
    consistent: bool
    violated: tuple[tuple[str, object], ...]  # (axiom name, cycle or pair)

    @property
    def violated_axioms(self) -> list[str]:
        return [n for n, _ in self.violated]

    def describe(self, g: ExecutionGraph | None = None) -> str:
        if self.consistent:
            return "consistent"
        lines = ["inconsistent"]
        for name, w in self.violated:
            if g is not None and isinstance(w, list):
                w = " -> ".join(str(g.event(i)) for i in w)
            elif g is not None and isinstance(w, tuple):
                w = f"({g.event(w[0])}, {g.event(w[1])})"
            lines.append(f"  {name}: {w}")
        return "\n".join(lines)


def check(g: ExecutionGraph, m: Model | None = None, sem: Semantics = DEFAULT_SEMANTICS,
          validate: bool = True, first: bool = False) -> Verdict:
    """Evaluate every axiom of ``m`` (default x86t_elt) against ``g``.

    ``validate`` runs the well-formedness rules first and raises on failure;
    relaxed graphs produced during minimality checks skip it.  ``first`` stops
    at the first violated axiom.
    """
    m = m or x86t_elt()
    d = rg.derive(g, sem, check=validate)
    bad = []
    for ax in m.axioms:
        w = ax.witness(g, d)
        if w is not None:
            bad.append((ax.name, w))
            if first:
                break
    return Verdict(not bad, tuple(bad))
