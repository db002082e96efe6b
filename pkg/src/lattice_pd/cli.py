"""Command-line interface: ``lattice-pd <command> ...``.

Every command reads JSON documents (paths, or ``-`` for stdin) and writes JSON
to stdout.  Failures print ``{"error": ..., "message": ...}`` to stderr and
exit with status 1; argument errors exit with status 2.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence

from . import io
from .birthdeath import bd, check_monotone
from .classical import check_classical_equivalence, classical_pd_signed
from .distances import (
    bottleneck,
    critical_points,
    edit_bounds,
    interpolate,
    matching_from_dict,
    matching_norm,
    matching_to_dict,
    path_length,
    validate_path,
)
from .errors import LatticePDError, MalformedInput
from .filtration import filtration_to_dict, kan_extend
from .lattice import FiniteMetricLattice, distortion, lift_map
from .mobius import mobius_invert, persistence_diagram


num = io.jsonable


def _src(path: str):
    if path == "-":
        return json.load(sys.stdin)
    return path


def _emit(obj) -> None:
    sys.stdout.write(io.dumps(obj) + "\n")


class CheckFailed(LatticePDError):
    """A morphism or equivalence check reported violations."""


def _report(report, what: str) -> int:
    _emit(report.to_dict())
    if not report:
        raise CheckFailed(f"{what}: {len(report.violations)} violation(s)")
    return 0


# ---------------------------------------------------------------------------
# commands


def cmd_validate(args) -> int:
    src = _src(args.file)
    kind = args.kind
    if kind == "lattice":
        P = io.read_lattice(src)
        summary = {"elements": len(P), "intervals": len(P.intervals), "chain": P.is_chain}
    elif kind == "complex":
        K = io.read_complex(src)
        summary = {"simplices": len(K), "dim": K.dim}
    elif kind == "filtration":
        F = io.read_filtration(src)
        summary = {"elements": len(F.index), "simplices": len(F.complex)}
    elif kind == "function":
        f = io.read_function(src)
        summary = {"intervals": len(f.lattice), "total": f.total(), "monotone": check_monotone(f).ok}
    elif kind == "morphism":
        m = io.read_morphism(src, args.category)
        summary = {"category": args.category, "distortion": num(distortion(m.map))}
    else:
        path = io.read_path(src)
        lengths = validate_path(path)
        summary = {"category": path.category, "steps": len(lengths)}
    _emit({"valid": True, "kind": kind, **summary})
    return 0


def cmd_intervals(args) -> int:
    P = io.read_lattice(_src(args.lattice))
    L = P.intervals
    _emit({"count": len(L), "intervals": [[str(I.lo), str(I.hi)] for I in L.elements]})
    return 0


def cmd_distortion(args) -> int:
    alpha = io.read_lattice_map(_src(args.morphism))
    _emit({"distortion": num(distortion(alpha)), "lifted": num(distortion(lift_map(alpha)))})
    return 0


def cmd_bd(args) -> int:
    F = io.read_filtration(_src(args.filtration))
    _emit(bd(F, args.dim, args.field).to_dict(full=args.full))
    return 0


def cmd_mobius(args) -> int:
    f = io.read_function(_src(args.function))
    _emit(mobius_invert(f).to_dict(full=args.full))
    return 0


def cmd_pd(args) -> int:
    F = io.read_filtration(_src(args.filtration))
    _emit(persistence_diagram(F, args.dim, args.field).to_dict(full=args.full))
    return 0


def cmd_check(args) -> int:
    m = io.read_morphism(_src(args.morphism), args.category, strict=False)
    return _report(m.check(), f"not a {args.category} morphism")


def cmd_kan(args) -> int:
    F = io.read_filtration(_src(args.filtration))
    doc = io.Doc.load(_src(args.map))
    Q = io.read_lattice(doc.field("target"))
    alpha = io.read_map(doc.get("map"), F.index, Q)
    _emit(filtration_to_dict(kan_extend(F, alpha)))
    return 0


def cmd_path_length(args) -> int:
    path = io.read_path(_src(args.path))
    lengths = validate_path(path)
    _emit({"length": num(path_length(path)), "steps": [num(x) for x in lengths]})
    return 0


def cmd_bottleneck(args) -> int:
    f, g = io.read_function(_src(args.fn1)), io.read_function(_src(args.fn2))
    value, gamma = bottleneck(f, g)
    _emit({"bottleneck": num(value), "matching": matching_to_dict(gamma)})
    return 0


def cmd_interpolate(args) -> int:
    f, g = io.read_function(_src(args.fn1)), io.read_function(_src(args.fn2))
    doc = io.Doc.load(_src(args.matching))
    gamma = matching_from_dict(doc.data, f, g)
    out = {
        "norm": num(matching_norm(gamma)),
        "critical_points": [num(t) for t in critical_points(gamma)],
    }
    if args.t is not None:
        out["function"] = interpolate(gamma, args.t).to_dict(full=args.full)
    _emit(out)
    return 0


def cmd_witness(args) -> int:
    f, g = io.read_function(_src(args.fn1)), io.read_function(_src(args.fn2))
    eb = edit_bounds(f, g)
    path = io.path_to_dict(eb.path, full=args.full)
    out = {
        "bounds": [num(eb.lower), num(eb.upper)],
        "top_gap": num(eb.top_gap),
        "steps": len(eb.path),
        "matching": matching_to_dict(eb.matching),
    }
    if args.out:
        Path(args.out).write_text(io.dumps(path) + "\n")
        out["path_file"] = args.out
    else:
        out["path"] = path
    _emit(out)
    return 0


def cmd_classical_pd(args) -> int:
    F = io.read_filtration(_src(args.filtration))
    sigma = classical_pd_signed(F, args.dim, args.field)
    out = sigma.to_dict(full=args.full)
    out["matches_mobius"] = check_classical_equivalence(F, args.dim, args.field).ok
    _emit(out)
    return 0


def render_dot(P: FiniteMetricLattice, labels: dict | None = None) -> str:
    lines = ["digraph lattice {", "  rankdir=BT;"]
    for k, e in enumerate(P.elements):
        label = str(e) if labels is None else f"{e}\\n{labels[e]}"
        lines.append(f'  n{k} [label="{label}"];')
    index = {e: k for k, e in enumerate(P.elements)}
    for a, b in P.covers:
        lines.append(f"  n{index[a]} -> n{index[b]};")
    lines.append("}")
    return "\n".join(lines)


def render_barcode(f) -> str:
    """One text bar per nonzero interval, columns in chain order."""
    P = f.base
    order = [P.elements[k] for k in P.linear_extension]
    pos = {e: k for k, e in enumerate(order)}
    cell = max(len(str(e)) for e in order) + 1
    labels = {I: f"[{I.lo},{I.hi}]" for I in f.support()}
    label_w = max([len(x) for x in labels.values()] + [1])
    rows = [" " * (label_w + 6) + "".join(f"{str(e):<{cell}}" for e in order).rstrip()]
    for I, v in sorted(f.support().items(), key=lambda kv: (pos[kv[0].lo], pos[kv[0].hi])):
        a, b = pos[I.lo] * cell, pos[I.hi] * cell
        bar = " " * a + ("|" if a == b else "|" + "=" * (b - a - 1) + "|")
        rows.append(f"{labels[I]:<{label_w}} {v:+4d} {bar}")
    return "\n".join(rows)


def cmd_render(args) -> int:
    doc = io.Doc.load(_src(args.file))
    if "values" in doc and "lattice" in doc:
        f = io.read_function(doc)
        if args.format == "barcode" and f.base.is_chain:
            print(render_barcode(f))
        else:
            print(render_dot(f.lattice, dict(f.items())))
    else:
        P = io.read_lattice(doc)
        print(render_dot(P))
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lattice-pd", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        p = sub.add_parser(name, help=help_)
        p.set_defaults(fn=fn)
        return p

    def algebra(p):
        p.add_argument("--dim", type=int, required=True, help="homological degree")
        p.add_argument("--field", type=int, default=2, help="prime characteristic (default 2)")

    def full(p):
        p.add_argument("--full", action="store_true", help="write zero values too")

    p = add("validate", cmd_validate, "validate a document")
    p.add_argument("kind", choices=["lattice", "complex", "filtration", "function", "morphism", "path"])
    p.add_argument("file")
    p.add_argument("--category", choices=["fil", "mon", "fnc"], default="fil")

    p = add("intervals", cmd_intervals, "list the intervals of a lattice")
    p.add_argument("lattice")

    p = add("distortion", cmd_distortion, "distortion of a lattice map and of its lift")
    p.add_argument("morphism")

    for name, fn, what in (("bd", cmd_bd, "birth-death function"), ("pd", cmd_pd, "persistence diagram")):
        p = add(name, fn, what + " of a filtration")
        p.add_argument("filtration")
        algebra(p)
        full(p)

    p = add("mobius", cmd_mobius, "Möbius inversion of an interval function")
    p.add_argument("function")
    full(p)

    p = add("check", cmd_check, "check a morphism triple")
    p.add_argument("category", choices=["fil", "mon", "fnc"])
    p.add_argument("morphism")

    p = add("kan", cmd_kan, "push a filtration forward along a lattice map")
    p.add_argument("filtration")
    p.add_argument("map")

    p = add("path-length", cmd_path_length, "validate a path and sum its distortions")
    p.add_argument("path")

    p = add("bottleneck", cmd_bottleneck, "bottleneck distance and an optimal matching")
    p.add_argument("fn1")
    p.add_argument("fn2")

    p = add("interpolate", cmd_interpolate, "critical points and interpolated function of a matching")
    p.add_argument("fn1")
    p.add_argument("fn2")
    p.add_argument("--matching", required=True)
    p.add_argument("--t", type=float)
    full(p)

    p = add("witness", cmd_witness, "edit-distance bounds and a witness path")
    p.add_argument("fn1")
    p.add_argument("fn2")
    p.add_argument("--out", help="write the path document here")
    full(p)

    p = add("classical-pd", cmd_classical_pd, "signed-sum diagram of a one-parameter filtration")
    p.add_argument("filtration")
    algebra(p)
    full(p)

    p = add("render", cmd_render, "DOT or text-barcode rendering")
    p.add_argument("file")
    p.add_argument("--format", choices=["dot", "barcode"], default="dot")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except LatticePDError as exc:
        sys.stderr.write(json.dumps(exc.to_dict()) + "\n")
        return 1
    except RecursionError:
        sys.stderr.write(json.dumps(MalformedInput("documents reference each other cyclically").to_dict()) + "\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
