"""
Synthesizing per-axiom suites
=============================

For each axiom of x86t_elt, enumerate every program up to an event bound
(ghost events count) whose forbidden execution violates that axiom and turns
legal under every single relaxation.  The suites below grow with the bound.
"""

import time

from mtmkit import SynthConfig, synthesize, to_text

axioms = ["sc_per_loc", "causality", "remap_order", "tlb_causality"]
bounds = range(3, 8)

print("axiom".ljust(15) + "".join(f"{b:>6}" for b in bounds))
for axiom in axioms:
    row = []
    for b in bounds:
        row.append(len(synthesize(SynthConfig(axiom, b))))
    print(axiom.ljust(15) + "".join(f"{n:>6}" for n in row))

###############################################################################
# rmw_atomicity needs an atomic read-modify-write, which takes at least seven
# events once ghosts are included.

start = time.perf_counter()
res = synthesize(SynthConfig("rmw_atomicity", 7))
print(f"\nrmw_atomicity@7: {len(res)} program(s) in {time.perf_counter() - start:.2f}s")

###############################################################################
# Every entry carries its forbidden witness.  The smallest remap_order test is
# the stale walk from the checking demo.

(entry,) = synthesize(SynthConfig("remap_order", 4)).entries
print()
print(to_text(entry.program, entry.witness, "remap_order_min", ("forbidden", entry.violated)))
