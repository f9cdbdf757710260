"""Command-line front end.

Every subcommand prints a JSON run report on stdout. ``--out`` receives the
bare result object, which the matching ``--in`` accepts again.  Validation
errors exit 1 with ``{"error": ..., "message": ...}``; a flow that misses
its target exits 2.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time

import numpy as np

from . import __version__
from .quiver import (QuiverError, default_tol, endomorphism_Xk, matrix_from_json, matrix_to_json,
                     moment_level, predicted_eigenvalues, quiver_from_json, quiver_to_json, traceless)


class ConvergenceError(RuntimeError):
    pass


def _cjson(z) -> list[float]:
    z = complex(z)
    return [z.real, z.imag]


def _read_json(path: str):
    if path == "-":
        return json.load(sys.stdin)
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _write_json(path: str | None, obj) -> None:
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(obj, fh, indent=1)
            fh.write("\n")


def _need_in(args):
    if not args.input:
        raise QuiverError(f"`{args.command}` needs --in")
    return _read_json(args.input)


def _read_matrix(obj) -> np.ndarray:
    if isinstance(obj, dict):
        obj = obj.get("X", obj.get("matrix"))
        if obj is None:
            raise QuiverError("expected a matrix under key 'X'")
    arr = np.asarray(obj, dtype=float)
    if arr.ndim == 2:  # plain real matrix
        return arr.astype(complex)
    return matrix_from_json(obj)


def _parse_S(text: str | None) -> list[tuple[int, int]]:
    if not text:
        return []
    return [tuple(int(v) for v in p) for p in json.loads(text)]


def _parse_delta(text: str | None, pairs: list[tuple[int, int]]) -> list[tuple[int, int]]:
    """Accepts {"i": d} or a list aligned with the sorted pairs of S."""
    if not text:
        return []
    obj = json.loads(text)
    if isinstance(obj, dict):
        return [(int(k), int(v)) for k, v in obj.items()]
    if isinstance(obj, int):
        obj = [obj]
    starts = [i for i, _ in sorted(pairs)]
    if len(obj) != len(starts):
        raise QuiverError("--delta list must have one entry per pair of --S")
    return list(zip(starts, (int(v) for v in obj)))


def _label_from_args(args):
    from .stratification import Relation, StratumLabel

    if args.n is None:
        raise QuiverError("--n is required")
    pairs = _parse_S(args.S)
    return StratumLabel(Relation(frozenset(pairs)), tuple(_parse_delta(args.delta, pairs)), args.n)


def _level_json(q) -> dict:
    lv = moment_level(q)
    out = {"lambda_c": [_cjson(v) for v in lv.lambda_c], "lambda_r": list(lv.lambda_r),
           "residual_c": lv.residual_c, "residual_r": lv.residual_r}
    if q.dims.strictly_ordered and q.r > 1:
        pred = predicted_eigenvalues(lv, q.dims)
        out["kappa"] = [_cjson(k) for k in pred.kappa]
        out["multiplicity"] = list(pred.multiplicity)
    return out


TABLE_COMMANDS = ("strata", "selftest")


def _table_line(args, text: str) -> None:
    # table commands print human-readable rows unless --json asks for the report
    print(text, file=sys.stderr if args.json else sys.stdout, flush=True)


# ------------------------------------------------------------ commands


def cmd_moment(args):
    q = quiver_from_json(_need_in(args))
    result = _level_json(q)
    return result, {"residual_c": result["residual_c"], "residual_r": result["residual_r"]}


def cmd_classify(args):
    from .stratification import classify

    q = quiver_from_json(_need_in(args))
    label = classify(q, samples=args.samples, seed=args.seed, tol=args.tol)
    out = label.to_json()
    out["label"] = str(label)
    lv = moment_level(q)
    return out, {"residual_c": lv.residual_c, "residual_r": lv.residual_r}


def cmd_strata(args):
    from .stratification import enumerate_strata, stratum_dimension_data

    if args.n is None:
        raise QuiverError("--n is required")
    rows = []
    for label in enumerate_strata(args.n):
        data = stratum_dimension_data(label)
        row = label.to_json()
        row.update(label=str(label), ell=data.ell, stratum_dim=data.stratum_dim)
        rows.append(row)
    width = max(len(r["label"]) for r in rows)
    for r in rows:
        _table_line(args, f"{r['label']:<{width}}  m={tuple(r['m'])}  ell={r['ell']}  "
                          f"complex dim={r['stratum_dim']}")
    return rows, {}


def cmd_augment(args):
    from .stratification import augment, chain_scalars

    q = quiver_from_json(_need_in(args))
    label = _label_from_args(args)
    lv = moment_level(q)
    scalars = chain_scalars(label, lv.lambda_r, lv.lambda_c)
    big = augment(q, label, scalars)
    big_lv = moment_level(big)
    return quiver_to_json(big), {"residual_c": big_lv.residual_c, "residual_r": big_lv.residual_r}


def cmd_standardize(args):
    from .standardization import standardize_beta

    q = quiver_from_json(_need_in(args))
    std = standardize_beta(q, tol=args.tol)
    return ({"quiver": quiver_to_json(std.quiver), "gauge": [matrix_to_json(g) for g in std.gauge],
             "X": matrix_to_json(std.X), "dims": list(q.dims.dims),
             "lambda_c": [_cjson(v) for v in std.lambda_c]}, {})


def cmd_reconstruct(args):
    from .standardization import reconstruct_from_X

    obj = _need_in(args)
    x = _read_matrix(obj)
    dims = obj.get("dims") if isinstance(obj, dict) else None
    if args.dims:
        dims = json.loads(args.dims)
    if dims is None:
        raise QuiverError("dimension vector needed: --dims or a 'dims' key")
    lam = obj.get("lambda_c") if isinstance(obj, dict) else None
    lam = [complex(*v) for v in lam] if lam is not None else None
    q = reconstruct_from_X(x, tuple(dims), lam)
    err = float(np.linalg.norm(endomorphism_Xk(q, 1) - x))
    return quiver_to_json(q), {"X_error": err}


def cmd_flow(args):
    from .kempf_ness import FlowConfig, flow_to_real_zero
    from .stratification import Relation

    q = quiver_from_json(_need_in(args))
    relation = Relation(frozenset(_parse_S(args.S))) if args.group == "HS" else None
    cfg = FlowConfig(group=args.group, relation=relation, max_iters=args.max_iters,
                     target=args.target)
    res = flow_to_real_zero(q, cfg)
    if args.trace:
        with open(args.trace, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["iteration", "residual"])
            w.writerows(enumerate(res.trace))
    resid = {"residual": res.residual, "target": args.target, "iterations": res.iterations,
             "converged": res.converged}
    out = quiver_to_json(res.quiver)
    if not res.converged:
        _write_json(args.out, out)  # keep the partial result
        raise ConvergenceError(json.dumps(resid))
    return out, resid


def cmd_kostant(args):
    from .kostant import KostantPoint, realize_orbit, rho

    x = _read_matrix(_need_in(args))
    if args.action == "rho":
        pt = KostantPoint.from_matrix(x)
        return ({"chi": [_cjson(c) for c in rho(x)], "eigenvalues": [_cjson(e) for e in pt.eigenvalues],
                 "multiplicities": list(pt.multiplicities), "regular": pt.regular,
                 "nilpotent": pt.nilpotent}, {})
    real = realize_orbit(traceless(x))
    err = float(np.max(np.abs(traceless(endomorphism_Xk(real.quiver, 1)) - traceless(x)), initial=0.0))
    return quiver_to_json(real.quiver), {"realize_error": err}


def cmd_symplectic(args):
    from .symplectic import symplectic_embed, symplectic_stratum, to_sparse

    q = quiver_from_json(_need_in(args))
    if args.action == "stratum":
        return symplectic_stratum(q).to_json(), {}
    comps = symplectic_embed(q)
    out = []
    for j, c in enumerate(comps, start=1):
        out.append({"j": j, "entries": [{"index": list(k), "value": _cjson(v)}
                                        for k, v in to_sparse(c, q.n, j).items()]})
    return out, {}


def cmd_selftest(args):
    from .acceptance import CRITERIA, run_criterion

    numbers = args.only or list(range(1, len(CRITERIA) + 1))
    results = []
    for k in numbers:
        c = run_criterion(k)
        _table_line(args, c.line())
        results.append(c)
    passed = sum(c.passed for c in results)
    _table_line(args, f"{passed}/{len(results)} criteria passed")
    out = [c.to_json() for c in results]
    if passed != len(results):
        raise ConvergenceError(json.dumps({"failed": [c.number for c in results if not c.passed]}))
    return out, {}


COMMANDS = {
    "moment": cmd_moment, "classify": cmd_classify, "strata": cmd_strata, "augment": cmd_augment,
    "standardize": cmd_standardize, "reconstruct": cmd_reconstruct, "flow": cmd_flow,
    "kostant": cmd_kostant, "symplectic": cmd_symplectic, "selftest": cmd_selftest,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--in", dest="input", help="input JSON file ('-' for stdin)")
    common.add_argument("--out", help="write the result object here")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--tol", type=float, default=None, help="default: IMPLODE_TOL or 1e-9")
    common.add_argument("--samples", type=int, default=32, help="rotations tried in rank searches")
    common.add_argument("--json", action="store_true",
                        help="strata/selftest: print the JSON report instead of the table")

    parser = argparse.ArgumentParser(prog="implode", description="Hyperkähler quiver toolkit.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("moment", parents=[common], help="moment map levels and residuals")
    sub.add_parser("classify", parents=[common], help="stratum label of a full-flag solution")
    p = sub.add_parser("strata", parents=[common], help="list strata labels for n")
    p.add_argument("--n", type=int)
    p = sub.add_parser("augment", parents=[common], help="add zero blocks and scalar chains")
    p.add_argument("--n", type=int)
    p.add_argument("--S", help='pairs as JSON, e.g. "[[1,2]]"')
    p.add_argument("--delta", help='JSON {"i": d} or a list aligned with sorted S')
    sub.add_parser("standardize", parents=[common], help="standard form for surjective beta")
    p = sub.add_parser("reconstruct", parents=[common], help="quiver from a standardized X")
    p.add_argument("--dims", help="dimension vector as JSON")
    p = sub.add_parser("flow", parents=[common], help="flow to a zero of the real moment map")
    p.add_argument("--group", choices=["H", "HS", "Htilde"], default="H")
    p.add_argument("--S", help="relation for --group HS")
    p.add_argument("--trace", help="CSV file for the residual trace")
    p.add_argument("--max-iters", type=int, default=5000)
    p.add_argument("--target", type=float, default=1e-10)
    p = sub.add_parser("kostant", parents=[common], help="invariants and realizations of X")
    p.add_argument("action", choices=["rho", "realize"])
    p = sub.add_parser("symplectic", parents=[common], help="beta = 0 quivers")
    p.add_argument("action", choices=["embed", "stratum"])
    p = sub.add_parser("selftest", parents=[common], help="run the acceptance suite")
    p.add_argument("--only", type=int, nargs="*", help="criterion numbers")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.tol is None:
        args.tol = default_tol()
    start = time.perf_counter()
    report = {"command": args.command, "version": __version__, "seed": args.seed, "tol": args.tol,
              "inputs": {k: v for k, v in vars(args).items() if k not in ("command",) and v is not None}}
    try:
        result, residuals = COMMANDS[args.command](args)
    except ConvergenceError as exc:
        report.update(status="not_converged", detail=json.loads(str(exc)),
                      timings={"seconds": round(time.perf_counter() - start, 4)})
        if args.command not in TABLE_COMMANDS or args.json:
            print(json.dumps(report))
        return 2
    except (QuiverError, ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc), "command": args.command}))
        return 1
    _write_json(args.out, result)
    report.update(status="ok", outputs=result if not args.out else {"file": args.out},
                  residuals=residuals, timings={"seconds": round(time.perf_counter() - start, 4)})
    if args.command not in TABLE_COMMANDS or args.json:
        print(json.dumps(report))
    return 0


if __name__ == "__main__":
    sys.exit(main())
