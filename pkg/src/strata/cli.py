"""``strata`` command line.

    strata compute --space S2 --theory ih --perversity zero --ring Z
    strata check cone|products|r-invariance|mv|duality|example38 [--ring R ...]
    strata corpus list | describe ID

Reports are printed as JSON.  The exit code is 0 iff every check passes,
1 if some expectation fails and 2 on bad input.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Sequence

from . import corpus, harness
from .chains import UnstableError
from .complex import ComplexError, PerversityError, SchemaError, load_json, pseudomanifold_check, validate
from .linalg import CoefficientRing

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _scan(text: str | None) -> tuple[int, int] | None:
    if text is None:
        return None
    try:
        lo, hi = text.split("..")
        return int(lo), int(hi)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a..b, got {text!r}") from None


def _ring(text: str) -> str:
    try:
        return str(CoefficientRing.parse(text))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _vertices(text: str) -> tuple[str, ...]:
    return tuple(v for v in text.split(",") if v)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="strata", description="Intersection homology and blown-up cohomology "
                                                            "of filtered simplicial complexes.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--indent", type=int, default=2, help="JSON indentation (0 for one line)")
    sub = ap.add_subparsers(dest="command", required=True)

    c = sub.add_parser("compute", parents=[common], help="groups of one theory on one space")
    src = c.add_mutually_exclusive_group(required=True)
    src.add_argument("--space", help="corpus id (see 'strata corpus list')")
    src.add_argument("--file", help="filtered complex in JSON")
    c.add_argument("--theory", choices=harness.THEORIES, required=True)
    c.add_argument("--perversity", default="zero",
                   help="zero, top, N, gm:a,b,.., dual:SPEC or STRATUM=N,...")
    c.add_argument("--ring", type=_ring, default="Z")
    c.add_argument("--remove", type=_vertices, default=(), metavar="V1,V2",
                   help="vertex set removed (Borel-Moore and open models)")

    k = sub.add_parser("check", parents=[common], help="formula checks with expected values")
    k.add_argument("name", choices=sorted(harness.CHECKS))
    k.add_argument("--ring", type=_ring, action="append", dest="rings",
                   help="coefficient ring (repeatable; defaults depend on the check)")
    k.add_argument("--scan-perversity", type=_scan, metavar="a..b", help="range of apex values")
    k.add_argument("--space", action="append", dest="spaces", help="restrict to corpus ids (repeatable)")
    k.add_argument("--perversity", action="append", dest="perversities", help="perversity specs (repeatable)")
    k.add_argument("--cover", nargs=2, type=_vertices, metavar=("A", "B"),
                   help="mv: the two removed vertex sets")
    k.add_argument("--jobs", type=int, default=1, help="worker processes")
    k.add_argument("--summary", action="store_true", help="print failures only, not every row")

    g = sub.add_parser("corpus", help="the built-in spaces")
    gs = g.add_subparsers(dest="action", required=True)
    gs.add_parser("list", parents=[common])
    d = gs.add_parser("describe", parents=[common])
    d.add_argument("id")
    return ap


def _run_check(args) -> harness.CheckReport:
    name = args.name
    rings = args.rings
    if name == "cone":
        kw = {"scan": args.scan_perversity, "jobs": args.jobs}
        if args.spaces:
            kw["links"] = args.spaces
        if rings:
            kw["rings"] = rings
        return harness.check_cone(**kw)
    if name == "products":
        kw = {"scan": args.scan_perversity, "jobs": args.jobs}
        if rings:
            kw["rings"] = rings
        if args.perversities:
            kw["perversities"] = args.perversities
        return harness.check_products(**kw)
    if name == "r-invariance":
        kw = {"spaces": args.spaces, "jobs": args.jobs}
        if rings:
            kw["rings"] = rings
        if args.perversities:
            kw["perversities"] = args.perversities
        return harness.check_r_invariance(**kw)
    if name == "mv":
        perversity = (args.perversities or ["zero"])[0]
        if args.cover:
            if not args.spaces or len(args.spaces) != 1:
                raise ValueError("--cover needs exactly one --space")
            parts = [harness.check_mv(args.spaces[0], args.cover, perversity, r) for r in (rings or ["Q"])]
            return harness._merge("mv", {"space": args.spaces[0]}, parts)
        kw = {"spaces": args.spaces, "perversity": perversity, "jobs": args.jobs}
        if rings:
            kw["rings"] = rings
        return harness.check_mv_corpus(**kw)
    if name == "duality":
        kw = {"jobs": args.jobs, "perversities": args.perversities}
        if args.spaces:
            kw["spaces"] = args.spaces
        if rings:
            kw["rings"] = rings
        return harness.check_duality(**kw)
    return harness.check_example38()


def _describe(name: str) -> dict:
    ent = corpus.ENTRIES[name]
    fc = corpus.get(name)
    report = validate(fc)
    pm = pseudomanifold_check(fc)
    return {
        "id": name,
        "description": ent.description,
        "recipe": ent.recipe,
        "dim": fc.dim,
        "f_vector": fc.f_vector(),
        "strata": [{"id": s.id, "level": s.level, "codim": s.codim, "vertices": len(s.vertices)} for s in fc.strata],
        "perversities": {k: str(v) for k, v in ent.perversities.items()},
        "removed": list(ent.removed),
        "valid": report.ok,
        "pseudomanifold": pm.ok,
        "expected": [{"theory": e.theory, "perversity": e.perversity, "ring": e.ring, "groups": list(e.groups),
                      "provenance": e.provenance} for e in corpus.expected(name)],
    }


def main(argv: Sequence[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    indent = args.indent or None

    def emit(obj):
        print(json.dumps(obj, indent=indent, default=str))

    try:
        if args.command == "corpus":
            if args.action == "list":
                emit([{"id": n, "description": corpus.ENTRIES[n].description} for n in corpus.names()])
            else:
                if args.id not in corpus.ENTRIES:
                    raise KeyError(f"unknown corpus entry {args.id!r}")
                emit(_describe(args.id))
            return EXIT_OK
        if args.command == "compute":
            if args.file:
                fc, named, _ = load_json(args.file)
                spec = named.get(args.perversity) or harness.PerversitySpec.parse(args.perversity)
                rep = harness.CheckReport("compute", {"file": args.file, "theory": args.theory,
                                                      "perversity": str(spec), "ring": args.ring,
                                                      "removed": list(args.remove)})
                with harness._Timer(rep):
                    for k, g in enumerate(harness.groups(fc, args.theory, spec, args.ring, args.remove)):
                        rep.add(k, g.format(args.ring))
            else:
                rep = harness.compute(args.space, args.theory, args.perversity, args.ring, args.remove)
            emit(rep.as_json())
            return EXIT_OK
        rep = _run_check(args)
        out = rep.as_json()
        if args.summary:
            out["degrees"] = rep.failures()
        emit(out)
        return EXIT_OK if rep.passed else EXIT_FAIL
    except UnstableError as exc:
        print(f"strata: Borel-Moore groups did not stabilise: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (KeyError, ValueError, ComplexError, PerversityError, SchemaError, OSError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"strata: {msg}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
