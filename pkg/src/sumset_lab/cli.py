"""Command-line interface: ``sumset-lab <command> ...``.

Every command prints a JSON run report.  Reports contain no timestamps or
timings unless ``--timing`` is given, so identical inputs and seed give
byte-identical output.  Exit codes: 0 success, 2 input error, 3 internal
invariant violation.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from fractions import Fraction
from pathlib import Path

from . import setfile
from ._rational import as_fraction, format_fraction
from .constructions import (
    coset_counterexample,
    level_set_family,
    optimality_densities,
    optimality_example,
    tribes,
)
from .correlation import ace_correlation, avoidance_coupling, is_rho_one, rho
from .counting import THREADS_ENV, count_tuples_into, default_threads, tuple_space_size
from .errors import InvariantViolation, SumsetLabError
from .groups import GroupSubset, is_in_strict_coset, parse_group
from .regularity import RegularityParams, decompose
from .structure import StructureParams, extract_structure, verify_certificate
from .tensor_sets import CombinerTable, _check_group_family, avoids, density, generic_avoids

EXIT_INPUT = 2
EXIT_INVARIANT = 3


def fmt_float(x: float) -> str:
    return f"{x:.12g}"


def parse_elements(text: str) -> list[int]:
    text = text.strip()
    if not text:
        return []
    return [int(t) for t in text.replace(";", ",").split(",") if t.strip()]


def parse_z0(g, text: str) -> GroupSubset:
    if text.strip() == "all":
        return GroupSubset.full(g)
    return GroupSubset.from_elements(g, parse_elements(text))


def _load_sets(paths):
    return [setfile.read_set_file(p) for p in paths]


def _coset_banner(g, Z0) -> str | None:
    verdict = is_in_strict_coset(g, Z0)
    if verdict:
        return (f"WARNING: Z0 = {list(Z0.members)} lies in the strict coset H + {{{verdict.shift}}} "
                f"with H = {list(verdict.subgroup.members)}; the hypothesis that Z0 is "
                f"not contained in any strict coset fails, so no structure is guaranteed.")
    return None


def _trace_json(dec) -> list[dict]:
    return [
        {
            "step": st.step,
            "I": list(st.coords),
            "energies": [format_fraction(e) for e in st.energies],
            "bad_fractions": [format_fraction(f) for f in st.bad_fractions],
            "trigger": st.trigger,
            "added": list(st.added),
            "forced": st.forced,
        }
        for st in dec.trace
    ]


def cmd_decompose(args) -> dict:
    sets = _load_sets(args.sets)
    params = RegularityParams(args.r, args.beta, args.alpha)
    dec = decompose(sets, params)
    notes = [f"set {j} is empty (density 0); structure extraction takes the sparse branch for it"
             for j, E in enumerate(sets) if E.is_empty()]
    if args.trace_csv:
        with open(args.trace_csv, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["step", "set", "I_size", "energy", "bad_fraction", "trigger"])
            for st in dec.trace:
                for j, (e, f) in enumerate(zip(st.energies, st.bad_fractions)):
                    w.writerow([st.step, j, len(st.coords), format_fraction(e), format_fraction(f),
                                "" if st.trigger is None else st.trigger])
    return {
        "parameters": {"r": params.r, "beta": format_fraction(params.beta), "alpha": format_fraction(params.alpha),
                       "sets": list(args.sets)},
        "outputs": {
            "I": list(dec.coords),
            "iterations": dec.iterations,
            "exhausted": dec.exhausted,
            "fiber_report": [format_fraction(f) for f in dec.fiber_report],
            "trace": _trace_json(dec),
            "notes": notes,
        },
    }


def cmd_extract(args) -> dict:
    g = parse_group(args.group)
    Z0 = parse_z0(g, args.z0)
    sets = _load_sets(args.sets)
    _check_group_family(g, sets)
    banner = _coset_banner(g, Z0)
    if banner:
        print(banner, file=sys.stderr)
    params = StructureParams(args.eps, args.r, args.beta, args.alpha)
    cert = extract_structure(g, Z0, sets, params)
    outputs = {"certificate": cert.to_json()}
    if args.out:
        Path(args.out).write_text(cert.dumps())
        outputs["certificate_path"] = args.out
    if args.verify:
        report = verify_certificate(g, Z0, sets, cert, params.eps)
        outputs["verification"] = report.lines()
        outputs["verdict"] = "PASS" if report.passed else "FAIL"
    if banner:
        outputs["warning"] = banner
    return {
        "parameters": {"group": list(g.orders), "Z0": list(Z0.members), **params.to_json(), "sets": list(args.sets)},
        "outputs": outputs,
    }


def cmd_rho(args) -> dict:
    g = parse_group(args.group)
    Z0 = parse_z0(g, args.z0)
    P = avoidance_coupling(g, Z0, args.d)
    w = rho(P)
    verdict = is_in_strict_coset(g, Z0)
    outputs = {
        "rho": fmt_float(w.value),
        "achieving_index": w.index + 1,
        "in_strict_coset": verdict.in_strict_coset,
    }
    if args.d == 2:
        exact = is_rho_one(P)
        outputs["rho_one_exact"] = exact.rho_one
        outputs["rho_ace"] = fmt_float(ace_correlation(P, seed=args.seed))
    if verdict:
        outputs["coset_witness"] = {"H": list(verdict.subgroup.members), "x": verdict.shift}
    return {"parameters": {"group": list(g.orders), "Z0": list(Z0.members), "d": args.d}, "outputs": outputs}


def _write_sets(out_dir, names, sets, fmt) -> list[str]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, E in zip(names, sets):
        p = out / f"{name}.set"
        setfile.write_set_file(p, E, fmt)
        paths.append(str(p))
    return paths


def cmd_construct(args) -> dict:
    name = args.name
    params: dict = {}
    outputs: dict = {}
    if name == "tribes":
        a, b = as_fraction(args.a), as_fraction(args.b)
        x_size = args.x_size or a.denominator
        y_size = args.y_size or b.denominator
        na, nb = a * x_size, b * y_size
        if na.denominator != 1 or nb.denominator != 1:
            raise SumsetLabError("a*|X| and b*|Y| must be integers")
        # A and B are the top symbols so that f = min never reaches the bottom of the alphabet
        A = list(range(x_size - int(na), x_size))
        B = list(range(y_size - int(nb), y_size))
        f = z0 = None
        if args.combiner == "min":
            if x_size != y_size:
                raise SumsetLabError("the min combiner needs |X| = |Y|")
            f = CombinerTable.minimum(x_size)
            z0 = parse_elements(args.z0) if args.z0 else list(range(min(A[0], B[0])))
        E, F = tribes(A, B, args.r, args.s, x_size, y_size, f, z0)
        params = {"a": format_fraction(a), "b": format_fraction(b), "r": args.r, "s": args.s,
                  "X": x_size, "Y": y_size, "A": A, "B": B, "combiner": args.combiner, "Z0": z0}
        outputs["closed_form_densities"] = [format_fraction(E.density), format_fraction(F.density)]
        if x_size ** E.n <= args.max_points and y_size ** F.n <= args.max_points:
            Em, Fm = E.materialize(), F.materialize()
            outputs["materialized_densities"] = [format_fraction(density(Em)), format_fraction(density(Fm))]
            if f is not None:
                outputs["generic_avoids"] = generic_avoids(f, Em, Fm, z0)
            if args.out_dir:
                outputs["files"] = _write_sets(args.out_dir, ["E", "F"], [Em, Fm], args.format)
        else:
            outputs["note"] = "too large to materialise; closed-form densities only"
    elif name == "optimality":
        E, F, Z0 = optimality_example(args.p, args.k, args.n)
        dE, dF = optimality_densities(args.p, args.k)
        params = {"p": args.p, "k": args.k, "n": args.n, "Z0": list(Z0.members)}
        outputs["closed_form_densities"] = [format_fraction(dE), format_fraction(dF)]
        outputs["materialized_densities"] = [format_fraction(density(E)), format_fraction(density(F))]
        outputs["avoids"] = True
        if args.out_dir:
            outputs["files"] = _write_sets(args.out_dir, ["E", "F"], [E, F], args.format)
    elif name in ("level-set", "coset"):
        g = parse_group(args.group)
        H = GroupSubset.from_elements(g, parse_elements(args.subgroup))
        params = {"group": list(g.orders), "H": list(H.members), "x": args.x}
        if name == "level-set":
            levels = parse_elements(args.levels)
            fam = level_set_family(g, H, args.x, levels, args.n)
            sets = [s.materialize() for s in fam]
            Z0 = H.translate(args.x)
            params.update({"levels": levels, "n": args.n, "Z0": list(Z0.members)})
            outputs["closed_form_densities"] = [format_fraction(s.density) for s in fam]
            outputs["materialized_densities"] = [format_fraction(density(s)) for s in sets]
            outputs["avoids"] = avoids(g, sets, Z0)
            names = [f"E{j + 1}" for j in range(len(sets))]
        else:
            E_K, F_K = setfile.read_set_file(args.ek), setfile.read_set_file(args.fk)
            Z0 = parse_z0(g, args.z0) if args.z0 else None
            E, F = coset_counterexample(g, H, args.x, E_K, F_K, Z0)
            sets = [E, F]
            params.update({"E_K": args.ek, "F_K": args.fk})
            outputs["materialized_densities"] = [format_fraction(density(E)), format_fraction(density(F))]
            outputs["avoids"] = True
            names = ["E", "F"]
        if args.out_dir:
            outputs["files"] = _write_sets(args.out_dir, names, sets, args.format)
    else:  # pragma: no cover - argparse restricts choices
        raise SumsetLabError(f"unknown construction {name!r}")
    return {"parameters": {"name": name, **params}, "outputs": outputs}


def cmd_count(args) -> dict:
    g = parse_group(args.group)
    Z0 = parse_z0(g, args.z0)
    sets = _load_sets(args.sets)
    n = _check_group_family(g, sets)
    count = count_tuples_into(g, sets, Z0, method=args.method, threads=args.threads)
    space = tuple_space_size(g, Z0, n, len(sets))
    return {
        "parameters": {"group": list(g.orders), "Z0": list(Z0.members), "sets": list(args.sets),
                       "method": args.method},
        "outputs": {"count": count, "space_size": space, "ratio": format_fraction(Fraction(count, space)),
                    "avoids": count == 0},
    }


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sumset-lab", description=__doc__.splitlines()[0])
    parser.add_argument("--seed", type=int, default=0, help="seed for every random choice (echoed in the report)")
    parser.add_argument("--threads", type=int, default=None,
                        help=f"worker threads for counting kernels (default: ${THREADS_ENV} or 1)")
    parser.add_argument("--timing", action="store_true", help="include wall-clock timing in the report")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decompose", help="simultaneous regularity decomposition")
    p.add_argument("sets", nargs="+")
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--beta", type=as_fraction, required=True)
    p.add_argument("--alpha", type=as_fraction, required=True)
    p.add_argument("--trace-csv", default=None, help="also write the energy trace as CSV")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("extract", help="structure certificate for sumset-avoiding sets")
    p.add_argument("sets", nargs="+")
    p.add_argument("--group", required=True)
    p.add_argument("--z0", required=True)
    p.add_argument("--eps", type=as_fraction, required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--beta", type=as_fraction, required=True)
    p.add_argument("--alpha", type=as_fraction, default=None)
    p.add_argument("--out", default=None, help="write the certificate JSON here")
    p.add_argument("--verify", action="store_true")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("rho", help="correlation of the avoidance coupling")
    p.add_argument("--group", required=True)
    p.add_argument("--z0", required=True)
    p.add_argument("--d", type=int, default=2)
    p.set_defaults(func=cmd_rho)

    p = sub.add_parser("construct", help="materialise an example family")
    p.add_argument("name", choices=["tribes", "optimality", "level-set", "coset"])
    p.add_argument("--a")
    p.add_argument("--b")
    p.add_argument("--r", type=int)
    p.add_argument("--s", type=int)
    p.add_argument("--x-size", type=int, default=None)
    p.add_argument("--y-size", type=int, default=None)
    p.add_argument("--combiner", choices=["min"], default=None)
    p.add_argument("--z0", default=None)
    p.add_argument("--p", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--group")
    p.add_argument("--subgroup")
    p.add_argument("--x", type=int, default=0)
    p.add_argument("--levels")
    p.add_argument("--ek")
    p.add_argument("--fk")
    p.add_argument("--out-dir", default=None)
    p.add_argument("--format", choices=setfile.FORMATS, default="indices")
    p.add_argument("--max-points", type=int, default=1 << 20)
    p.set_defaults(func=cmd_construct)

    p = sub.add_parser("count", help="exact count of tuples summing into Z0^n")
    p.add_argument("sets", nargs="+")
    p.add_argument("--group", required=True)
    p.add_argument("--z0", required=True)
    p.add_argument("--method", choices=["auto", "transform", "direct"], default="auto")
    p.set_defaults(func=cmd_count)
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads is None:
        args.threads = default_threads()
    start = time.perf_counter()
    try:
        body = args.func(args)
    except InvariantViolation as exc:
        print(f"internal invariant violated: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (SumsetLabError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    report = {"command": ["sumset-lab", *argv], "seed": args.seed, **body}
    if args.timing:
        report["timing_seconds"] = round(time.perf_counter() - start, 6)
    sys.stdout.write(json.dumps(report, indent=2) + "\n")
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
