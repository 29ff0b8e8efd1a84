"""Command-line front end: ``equideform {smooth,node,global,sweep}``."""

from __future__ import annotations

import argparse
import json
import os
import random
import sys

from .errors import EquideformError, ExistenceFails, HypothesisError, NotLiftable, PrecisionError, SpecError
from .smooth_local import INF

EXIT_OK, EXIT_INTERNAL, EXIT_HYPOTHESIS = 0, 1, 2
DEFAULT_SEED = 20240101
WITNESS_TERMS = 8


def _jsonable(v):
    if v is INF:
        return "inf"
    if isinstance(v, (list, tuple)):
        return [_jsonable(u) for u in v]
    return v


def _conductor_arg(text: str):
    if text == "inf":
        return INF
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"conductor must be an integer or 'inf', got {text!r}") from None


def _p_list(text: str) -> list[int]:
    items = [t for t in text.split(",") if t.strip()]
    try:
        return [int(t) for t in items]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated primes, got {text!r}") from None


def _precision(args) -> int | None:
    if args.precision is not None:
        return args.precision
    env = os.environ.get("EQUIDEFORM_PRECISION")
    if env:
        try:
            value = int(env)
        except ValueError:
            raise HypothesisError(f"EQUIDEFORM_PRECISION must be an integer, got {env!r}") from None
        if value < 3:
            raise HypothesisError("EQUIDEFORM_PRECISION must be at least 3")
        return value
    return None


def _conductor_value(m, p: int) -> int:
    if m is INF:
        raise HypothesisError("conductor inf describes a trivial branch; not allowed here")
    if m <= 0:
        raise HypothesisError(f"invalid conductor {m}: must be a positive integer")
    if m % p == 0:
        raise HypothesisError(f"p | m (p={p}, m={m})")
    return m


def _series_preview(f) -> str:
    terms = []
    for i, c in enumerate(f.coeffs[:WITNESS_TERMS]):
        if c:
            terms.append(f"{c}" if i == 0 else f"{c}*x^{i}" if i > 1 else f"{c}*x")
    more = " + ..." if f.precision > WITNESS_TERMS else ""
    return (" + ".join(terms) or "0") + more + f"  (mod x^{f.precision})"


# -- commands ---------------------------------------------------------

def cmd_smooth(args) -> dict:
    from .series import check_prime
    from .smooth_local import (
        ext1_dimension_smooth,
        ramification_profile,
        standard_action,
        trace_zero_basis_construct,
        trace_zero_basis_exists,
    )
    from .towers import tower_action

    p = args.p
    check_prime(p)
    ms = [_conductor_value(m, p) for m in args.m]
    prec = _precision(args)
    if len(ms) == 1:
        a = standard_action(p, ms[0], prec, n=args.n)
    elif len(ms) == 2:
        if args.n not in (None, 2):
            raise HypothesisError("two jumps describe a faithful Z/p^2 action; use --n 2 or omit it")
        a = tower_action(p, ms[0], ms[1], prec)
    else:
        raise HypothesisError("give one jump (order p) or two jumps (order p^2)")
    prof = ramification_profile(a)
    out = {
        "p": p,
        "n": a.n,
        "precision": a.precision,
        "jumps": list(prof.jumps),
        "conductor": _jsonable(prof.conductor),
        "different": prof.different,
        "ext1_dimension": ext1_dimension_smooth(prof, a.n) if a.is_faithful else None,
        "trace_zero_basis_exists": trace_zero_basis_exists(a),
        "witness": None,
    }
    if out["trace_zero_basis_exists"]:
        out["witness"] = [int(c) for c in trace_zero_basis_construct(a).f.coeffs]
    return out


def _format_smooth(r: dict) -> str:
    from .series import TruncatedSeries

    lines = [
        f"p = {r['p']}, group Z/{r['p']}^{r['n']}, precision {r['precision']}",
        f"lower jumps: {r['jumps']}",
        f"conductor: {r['conductor']}",
        f"different: {r['different']}",
        f"dim Ext^1 (local): {r['ext1_dimension'] if r['ext1_dimension'] is not None else 'n/a (not faithful)'}",
        f"trace-zero basis exists: {'yes' if r['trace_zero_basis_exists'] else 'no'}",
    ]
    if r["witness"] is not None:
        f = TruncatedSeries(r["witness"], r["p"], len(r["witness"]))
        lines.append(f"verified witness: ({_series_preview(f)}) d/dx")
    return "\n".join(lines)


def cmd_node(args) -> dict:
    from .node_local import (
        RelevabilityClass,
        classify_relevability,
        h1_ext0_dimension,
        lift_first_order,
        node_profile,
        phi_kernel_dimension,
        standard_node_action,
        verify_lift,
    )
    from .series import check_prime

    p = args.p
    check_prime(p)
    m = args.m if args.m is INF else _conductor_value(args.m, p)
    mp = args.mp if args.mp is INF else _conductor_value(args.mp, p)
    a = standard_node_action(p, m, mp, _precision(args))
    prof = node_profile(a)
    try:
        h1 = h1_ext0_dimension(a)
    except HypothesisError:
        h1 = None
    rel = classify_relevability(a)
    out = {
        "p": p,
        "precision": a.precision,
        "conductor": _jsonable(prof.conductor_pair),
        "different": list(prof.different_pair),
        "image_orders": list(prof.image_orders),
        "h1_ext0_dimension": h1,
        "phi_kernel_dimension": phi_kernel_dimension(a),
        "relevability": rel.value,
        "lift": None,
    }
    if rel is not RelevabilityClass.NON_RELEVABLE:
        lift = lift_first_order(a)
        if not verify_lift(a, lift):
            raise AssertionError("computed lift failed verification")
        out["lift"] = {
            "lambda": int(lift.lam),
            "f0": [int(c) for c in lift.f0.coeffs],
            "f1": [int(c) for c in lift.f1.coeffs],
        }
    return out


def _format_node(r: dict) -> str:
    from .series import TruncatedSeries

    h1 = r["h1_ext0_dimension"]
    lines = [
        f"p = {r['p']}, precision {r['precision']}",
        f"conductors: ({', '.join(map(str, r['conductor']))})",
        f"differents: ({', '.join(map(str, r['different']))})",
        f"dim H^1(G, Ext^0): {h1 if h1 is not None else 'n/a (trivial branch)'}",
        f"dim ker phi: {r['phi_kernel_dimension']}",
        f"relevability: {r['relevability']}",
    ]
    if r["lift"] is not None:
        lift = r["lift"]
        for key in ("f0", "f1"):
            f = TruncatedSeries(lift[key], r["p"], len(lift[key]))
            lines.append(f"verified lift {key}: {_series_preview(f)}")
    return "\n".join(lines)


def cmd_global(args) -> dict:
    from .global_curve import dim_ext1_stable_curve, load_spec

    return dim_ext1_stable_curve(load_spec(args.path)).to_dict()


def _format_global(r: dict) -> str:
    from .global_curve import REPORT_FIELDS

    lines = []
    for k in REPORT_FIELDS:
        v = r[k]
        if v is None:
            lines.append(f"{k}: n/a ({r['inapplicable'].get(k, '')})")
        else:
            note = r["notes"].get(k)
            lines.append(f"{k}: {v}" + (f"    [{note}]" if note else ""))
    for h in r["hypotheses_checked"]:
        lines.append(f"checked: {h}")
    for w in r["warnings"]:
        lines.append(f"warning: {w}")
    return "\n".join(lines)


def _sweep_rows(p_list, m_max, precision, seed):
    from .cohomology_oracle import cocycle_class_is_zero, h1_dimension_bruteforce
    from .node_local import h1_ext0_dimension, standard_node_action
    from .series import TruncatedSeries, check_prime
    from .smooth_local import VectorField, act_on_vector_field, ext1_dimension_smooth, ramification_profile, standard_action

    rng = random.Random(seed)
    rows = []
    for p in sorted(set(p_list)):
        check_prime(p)
        ms = [m for m in range(1, m_max + 1) if m % p]
        for m in ms:
            a = standard_action(p, m, precision)
            formula = ext1_dimension_smooth(ramification_profile(a), 1)
            oracle = h1_dimension_bruteforce(a)
            # seeded self-check: a random coboundary must be recognised as one
            N = a.precision - 1
            psi = VectorField(TruncatedSeries([rng.randrange(p) for _ in range(N)], p, N))
            cob = psi - act_on_vector_field(a.generator, psi)
            ok = cocycle_class_is_zero(a, cob)
            rows.append({"kind": "smooth", "params": [p, m], "formula": formula, "oracle": oracle,
                         "match": formula == oracle and ok})
        for m in ms:
            for mp in ms:
                a = standard_node_action(p, m, mp, precision)
                formula = h1_ext0_dimension(a)
                oracle = h1_dimension_bruteforce(a, "node")
                rows.append({"kind": "node", "params": [p, m, mp], "formula": formula, "oracle": oracle,
                             "match": formula == oracle})
    rows.sort(key=lambda r: (r["kind"] != "smooth", r["params"]))
    return rows


def cmd_sweep(args) -> dict:
    if not args.p_list:
        raise HypothesisError("empty parameter list")
    if args.m_max < 1:
        raise HypothesisError("--m-max must be at least 1")
    rows = _sweep_rows(args.p_list, args.m_max, _precision(args), args.seed)
    return {"seed": args.seed, "rows": rows, "all_match": all(r["match"] for r in rows)}


def _format_sweep(r: dict) -> str:
    lines = [f"{'kind':<7}{'params':<14}{'formula':>8}{'oracle':>8}  match"]
    for row in r["rows"]:
        params = ",".join(str(v) for v in row["params"])
        lines.append(f"{row['kind']:<7}{params:<14}{row['formula']:>8}{row['oracle']:>8}  {'yes' if row['match'] else 'NO'}")
    lines.append("all rows match" if r["all_match"] else "MISMATCH")
    return "\n".join(lines)


COMMANDS = {
    "smooth": (cmd_smooth, _format_smooth),
    "node": (cmd_node, _format_node),
    "global": (cmd_global, _format_global),
    "sweep": (cmd_sweep, _format_sweep),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="equideform", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--json", action="store_true", help="machine-readable output")
        sp.add_argument("--precision", type=int, default=None,
                        help="series precision (default: per-module policy, or $EQUIDEFORM_PRECISION)")

    sp = sub.add_parser("smooth", help="local invariants of an action on k[[x]]")
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--m", type=int, nargs="+", required=True, help="lower jump(s); two give a Z/p^2 tower")
    sp.add_argument("--n", type=int, default=None, help="group Z/p^n (one jump: acts through Z/p)")
    common(sp)

    sp = sub.add_parser("node", help="local invariants of an action on k[[x,y]]/(xy)")
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--m", type=_conductor_arg, required=True, help="conductor on the x-branch (or inf)")
    sp.add_argument("--mp", type=_conductor_arg, default=None, help="conductor on the y-branch (default: --m)")
    common(sp)

    sp = sub.add_parser("global", help="dimension report for a stable curve described in a JSON file")
    sp.add_argument("path")
    sp.add_argument("--json", action="store_true", help="machine-readable output")

    sp = sub.add_parser("sweep", help="formula against brute-force cohomology")
    sp.add_argument("--p-list", type=_p_list, default=[2, 3])
    sp.add_argument("--m-max", type=int, default=5)
    sp.add_argument("--seed", type=int, default=DEFAULT_SEED)
    common(sp)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "smooth" and args.n is None:
        args.n = 1 if len(args.m) == 1 else 2
    if args.command == "node" and args.mp is None:
        args.mp = args.m
    run, fmt = COMMANDS[args.command]
    try:
        result = run(args)
    except (HypothesisError, SpecError, PrecisionError, NotLiftable, ExistenceFails) as exc:
        msg = str(exc)
        if args.json:
            print(json.dumps({"error": type(exc).__name__, "message": msg}))
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except (EquideformError, Exception) as exc:  # noqa: BLE001
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    print(json.dumps(result, indent=2, sort_keys=True) if args.json else fmt(result))
    if args.command == "sweep" and not result["all_match"]:
        return EXIT_INTERNAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
