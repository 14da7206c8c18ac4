"""Command-line entry point: ``mtmkit {check,synth,dedup,compare,oracle}``.

Exit codes: 0 on success (a verdict of "forbidden" is still a success),
2 on usage, parse or well-formedness errors, 3 when ``--strict`` is given and
synthesis stopped at its time limit.
"""

from __future__ import annotations

import argparse
import csv
import sys
import time
from pathlib import Path

from . import canon
from .eltio import EltError, parse_file, print_doc, to_text
from .model import check, get_model
from .oracle import DEFAULT_BOUND, OracleBoundError, classify
from .synth import SynthConfig, SynthTimeout, synthesize
from .wellformed import WellFormednessError

EXIT_OK, EXIT_USAGE, EXIT_PARTIAL = 0, 2, 3
STATS_HEADER = ["axiom", "bound", "count", "runtime_seconds", "status"]


class UsageError(Exception):
    pass


def _bounds(text: str) -> list[int]:
    try:
        if "-" in text:
            lo, hi = (int(x) for x in text.split("-", 1))
            return list(range(lo, hi + 1))
        return [int(text)]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad bound {text!r}; use N or LO-HI") from None


def _elt_files(d) -> list[Path]:
    d = Path(d)
    if not d.is_dir():
        raise UsageError(f"{d}: not a directory")
    return sorted(d.glob("*.elt"))


def _load_programs(d):
    return [parse_file(f).program for f in _elt_files(d)]


# -- subcommands --------------------------------------------------------------

def cmd_check(args, out) -> int:
    doc = parse_file(args.file)
    if doc.execution is None:
        raise UsageError(f"{args.file}: no exec block, nothing to check (try `oracle`)")
    m = get_model(args.model)
    v = check(doc.execution, m)
    print(f"{doc.name}: {v.describe(doc.execution)}", file=out)
    if doc.expect is not None:
        want, axioms = doc.expect
        met = (want == "permitted") == v.consistent and (
            not axioms or set(axioms) == set(v.violated_axioms))
        print(f"expectation {' '.join((want,) + tuple(axioms))}: {'met' if met else 'NOT met'}",
              file=out)
    return EXIT_OK


def cmd_oracle(args, out) -> int:
    doc = parse_file(args.file)
    m = get_model(args.model)
    c = classify(doc.program, m, bound=args.bound)
    print(f"{doc.name}: {c.total} executions, {c.permitted} permitted, {c.forbidden} forbidden",
          file=out)
    for name, n in c.per_axiom.items():
        print(f"  {name}: {n}", file=out)
    return EXIT_OK


def _append_stats(path: Path, rows):
    new = not path.exists()
    with open(path, "a", newline="", encoding="utf-8") as f:
        w = csv.writer(f, lineterminator="\n")
        if new:
            w.writerow(STATS_HEADER)
        w.writerows(rows)


def cmd_synth(args, out) -> int:
    model = get_model(args.model)
    if args.axiom not in model.axiom_names:
        raise UsageError(f"{args.axiom!r} is not an axiom of {model.name}")
    dest = Path(args.out)
    dest.mkdir(parents=True, exist_ok=True)
    start = time.monotonic()
    complete = True
    for bound in args.bound:
        left = None
        if args.timeout is not None:
            left = max(0.0, args.timeout - (time.monotonic() - start))
        cfg = SynthConfig(args.axiom, bound, model, timeout=left,
                          enable_fences=args.fences, enable_rmw=True if args.rmw else None,
                          max_threads=args.max_threads, max_vas=args.max_vas)
        try:
            res = synthesize(cfg)
        except SynthTimeout as e:
            res = e.partial
        for entry in res.entries:
            name = entry.program.name
            text = to_text(entry.program, entry.witness, name, ("forbidden", entry.violated))
            (dest / f"{name}.elt").write_text(text, encoding="utf-8")
        status = "COMPLETE" if res.complete else "PARTIAL"
        _append_stats(dest / "stats.csv",
                      [[args.axiom, bound, len(res.entries), f"{res.runtime:.3f}", status]])
        print(f"{args.axiom} bound {bound}: {len(res.entries)} ELTs in {res.runtime:.2f}s"
              f"{'' if res.complete else ' (PARTIAL, timed out)'}", file=out)
        if not res.complete:
            complete = False
            break
    for marker in ("COMPLETE", "PARTIAL"):
        (dest / marker).unlink(missing_ok=True)
    (dest / ("COMPLETE" if complete else "PARTIAL")).write_text("", encoding="utf-8")
    _write_index(dest)
    return EXIT_PARTIAL if (args.strict and not complete) else EXIT_OK


def _write_index(d: Path):
    rows = []
    for f in _elt_files(d):
        doc = parse_file(f, check=False)
        rows.append([f.name, " ".join(doc.expect[1]) if doc.expect else ""])
    with open(d / "index.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["file", "violated"])
        w.writerows(rows)


def cmd_dedup(args, out) -> int:
    dest = Path(args.out)
    files = [f for d in args.dirs for f in _elt_files(d)]
    docs = [(f, parse_file(f)) for f in files]
    keep = canon.dedup(doc.program for _, doc in docs)
    kept = {id(p) for p in keep}
    dest.mkdir(parents=True, exist_ok=True)
    n = 0
    for f, doc in docs:
        if id(doc.program) in kept:
            target = dest / f.name
            if target.exists() and target.read_text(encoding="utf-8") != print_doc(doc):
                target = dest / f"{f.parent.name}_{f.name}"
            target.write_text(print_doc(doc), encoding="utf-8")
            n += 1
    print(f"{len(files)} files, {n} unique programs -> {dest}", file=out)
    return EXIT_OK


def cmd_compare(args, out) -> int:
    suite = canon.index(_load_programs(args.suite))
    rows = []
    for f in _elt_files(args.tests):
        doc = parse_file(f)
        c = canon.compare(doc.program, suite, cap=args.cap)
        match = getattr(c, "match", None)
        removed = " ".join(c.labels) if isinstance(c, canon.ReducibleTo) else ""
        reason = c.reason or "" if isinstance(c, canon.NotCovered) else ""
        rows.append([f.name, c.category, match.name if match is not None else "", removed, reason])
        print(f"{f.name}: {canon.describe(c)}", file=out)
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["test", "category", "match", "removed", "reason"])
        w.writerows(rows)
    return EXIT_OK


# -- wiring -------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mtmkit", description="Check and synthesize enhanced litmus tests.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="evaluate an ELT execution against a model")
    p.add_argument("file")
    p.add_argument("--model", default="x86t_elt")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("synth", help="synthesize a per-axiom suite")
    p.add_argument("--model", default="x86t_elt")
    p.add_argument("--axiom", required=True)
    p.add_argument("--bound", required=True, type=_bounds, help="N or LO-HI")
    p.add_argument("--timeout", type=float, help="seconds for the whole run")
    p.add_argument("--fences", action="store_true", help="allow mfence")
    p.add_argument("--rmw", action="store_true", help="allow rmw pairs for any target")
    p.add_argument("--max-threads", type=int)
    p.add_argument("--max-vas", type=int)
    p.add_argument("--strict", action="store_true", help="exit 3 on a partial suite")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("dedup", help="keep one file per program isomorphism class")
    p.add_argument("dirs", nargs="+")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_dedup)

    p = sub.add_parser("compare", help="classify tests against a synthesized suite")
    p.add_argument("--suite", required=True)
    p.add_argument("--tests", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--cap", type=int, default=canon.DEFAULT_CAP)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("oracle", help="enumerate and classify every execution of a program")
    p.add_argument("file")
    p.add_argument("--model", default="x86t_elt")
    p.add_argument("--bound", type=int, default=DEFAULT_BOUND)
    p.set_defaults(func=cmd_oracle)
    return ap


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE
    try:
        return args.func(args, out)
    except (EltError, WellFormednessError, OracleBoundError, UsageError, KeyError,
            ValueError, OSError) as e:
        msg = e.args[0] if isinstance(e, KeyError) and e.args else e
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
