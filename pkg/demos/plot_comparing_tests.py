"""
Deduplicating and comparing suites
==================================

Per-axiom suites overlap, since one program can violate several axioms.  The
canonical form identifies programs that differ only by thread order and
renaming, so the union collapses to unique programs.
"""

from mtmkit import SynthConfig, canonical_form, compare, dedup, parse, synthesize
from mtmkit.canon import describe

suites = {a: synthesize(SynthConfig(a, 6)).programs
          for a in ["sc_per_loc", "causality", "remap_order", "tlb_causality"]}
union = [p for ps in suites.values() for p in ps]
unique = dedup(union)
print(f"{len(union)} programs across suites, {len(unique)} unique")

###############################################################################
# A hand-written test can be classified against a suite.  This one adds a
# user write after the stale walk.  It is not minimal.  Against the bound-4
# suite the only way in is to drop the write together with its dirty-bit
# update and walk.  The bound-6 suite also holds the stale write on its own,
# so there dropping the read is the first one-unit reduction found.

handwritten = parse("""
elt dirty_bit_after_remap
init x -> a
thread 0
  PTE0: Wpte x -> b
  INV1: invlpg x
  R2: R x
  ptw2: ghost ptw R2
  W3: W x
  db3: ghost db W3
  ptw3: ghost ptw W3
""").program

smallest = synthesize(SynthConfig("remap_order", 4)).programs
print(describe(compare(handwritten, smallest)))
print(describe(compare(handwritten, suites["remap_order"])))
print(describe(compare(suites["remap_order"][0], suites["remap_order"])))

###############################################################################
# The form itself is plain ELT text.

print(canonical_form(handwritten))
