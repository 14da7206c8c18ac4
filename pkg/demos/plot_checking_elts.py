"""
Checking an enhanced litmus test
================================

An ELT is a small program plus one candidate execution.  Here a single
thread remaps ``x`` to a new page, flushes its TLB entry, and then reads
``x`` through a page-table walk that still returns the old mapping.
"""

from mtmkit import check, parse
from mtmkit.oracle import classify

text = """
elt stale_walk
init x -> a
thread 0
  PTE0: Wpte x -> b
  INV1: invlpg x
  R2: R x
  ptw2: ghost ptw R2
exec
  rf_ptw ptw2 R2
  rf_pa init ptw2
"""

doc = parse(text)
verdict = check(doc.execution)
print(verdict.describe(doc.execution))

###############################################################################
# Two axioms catch it.  The walk happens after the invlpg yet reads the PTE
# value from before the remap (remap_order), and the read also hits the old
# physical page after the write that replaced it (sc_per_loc).
#
# The oracle enumerates every well-formed execution of the same program.
# Only the stale one is forbidden.

c = classify(doc.program)
print(f"{c.total} executions: {c.permitted} permitted, {c.forbidden} forbidden")
for axiom, n in c.per_axiom.items():
    print(f"  {axiom:14s} {n}")
