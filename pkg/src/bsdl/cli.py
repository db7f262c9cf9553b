"""Command line front end: catalog inspection, relation checks, and the
numerical estimators, all reporting JSON.

Exit status is 0 for a conclusive positive report, 2 for an inconclusive
or failing one (Unknown labels, open orbits, no fixed point found, a
relation or criterion that does not pass), and 1 for usage or runtime
errors. Set BSDL_THREADS to cap worker threads in the orbit sweeps.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile

import numpy as np

from .acceptance import _jsonable, run_all
from .bsgroup import finite_bs_orbit, relation_report
from .catalog import CATALOG, build_action
from .circle import rotation_number
from .estimators import bs_minimal_set, fixed_cells
from .experiments import classify_perturbed, persistent_fixed_point
from .gl2z import IntMatrix2, conjugate_in_gl2z, finite_order
from .torus import bs_rotation_constraint, rotation_set

OK = 0
ERROR = 1
INCONCLUSIVE = 2

_CLI_ERRORS = (ValueError, TypeError, KeyError, RuntimeError, OSError)


def _atomic_write(path, text):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _emit(payload, args):
    text = json.dumps(_jsonable(payload), indent=1, sort_keys=True)
    if args.out:
        _atomic_write(args.out, text + "\n")
    else:
        print(text)


def _build(args):
    if args.action not in CATALOG:
        known = ", ".join(sorted(CATALOG))
        raise KeyError(f"unknown action {args.action!r}; known: {known}")
    params = {}
    if args.eps is not None:
        params["eps"] = args.eps
    if args.k is not None:
        params["k"] = args.k
    return build_action(args.action, n=args.n, **params)


def _parse_matrix(text):
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 4:
        raise ValueError(f"matrix needs 4 comma-separated integers, got {text!r}")
    a, b, c, d = (int(p) for p in parts)
    return IntMatrix2.from_rows((a, b), (c, d))


def _parse_point(text, space):
    parts = [float(p) for p in text.split(",")]
    if space == "circle":
        if len(parts) != 1:
            raise ValueError("circle start point is a single number")
        return parts[0]
    if len(parts) != 2:
        raise ValueError("torus start point is u,theta")
    return np.array(parts)


# ---------------------------------------------------------------------------
# subcommands


def _cmd_catalog(args):
    if args.action:
        if args.action not in CATALOG:
            raise KeyError(f"unknown action {args.action!r}")
        e = CATALOG[args.action]
        _emit(
            {
                "id": e.id,
                "space": e.space,
                "summary": e.summary,
                "defaults": e.defaults,
                "expected": e.expected_for(args.n),
            },
            args,
        )
        return OK
    rows = [
        {
            "id": e.id,
            "space": e.space,
            "summary": e.summary,
            "defaults": e.defaults,
        }
        for e in (CATALOG[k] for k in sorted(CATALOG))
    ]
    _emit(rows, args)
    return OK


def _cmd_verify_relation(args):
    act = _build(args)
    rep = relation_report(
        act,
        grid=args.resolution or 10000,
        primary_tol=args.tol if args.tol is not None else 1e-8,
    )
    _emit({"action": act.name, **rep.to_json()}, args)
    return OK if rep.passed else INCONCLUSIVE


def _cmd_rotation_number(args):
    act = _build(args)
    if act.space != "circle":
        raise ValueError(
            "rotation-number works on circle actions; use trichotomy or "
            "rotation-set for torus actions"
        )
    lift = act.h if args.gen == "h" else act.f
    est = rotation_number(
        lift,
        iterates=args.iterates or 10**5,
        tol=args.tol if args.tol is not None else 1e-8,
    )
    _emit({"action": act.name, "generator": args.gen, **est.to_json()}, args)
    return OK


def _cmd_rotation_set(args):
    act = _build(args)
    if act.space != "torus":
        raise ValueError("rotation-set needs a torus action")
    est = rotation_set(
        act.f, grid=args.resolution or 32, iterates=args.iterates or 10**4
    )
    constraint = bs_rotation_constraint(est.center, act.h.linear_part, act.n)
    _emit(
        {
            "action": act.name,
            "estimate": est.to_json(),
            "constraint": constraint.to_json(),
        },
        args,
    )
    return OK


def _cmd_fixed_set(args):
    act = _build(args)
    cells = fixed_cells(act.f, resolution=args.resolution or 256, delta=args.tol)
    _emit(
        {
            "action": act.name,
            "count": len(cells),
            "measure": cells.measure(),
            **cells.to_json(),
        },
        args,
    )
    return OK


def _cmd_minimal_set(args):
    act = _build(args)
    est = bs_minimal_set(
        act,
        resolution=args.resolution or 256,
        orbit_iterates=args.iterates or 10**5,
    )
    _emit({"action": act.name, **est.to_json()}, args)
    return OK if est.label != "Unknown" else INCONCLUSIVE


def _cmd_finite_orbit(args):
    act = _build(args)
    x0 = (
        _parse_point(args.start, act.space)
        if args.start
        else (0.0 if act.space == "circle" else np.zeros(2))
    )
    orb = finite_bs_orbit(
        act, x0, merge_tol=args.tol if args.tol is not None else 1e-6
    )
    _emit({"action": act.name, **orb.to_json()}, args)
    return OK if orb.closed else INCONCLUSIVE


def _cmd_classify_matrix(args):
    A = _parse_matrix(args.matrix)
    payload = {
        "matrix": [list(r) for r in A.rows()],
        "det": A.det(),
        "trace": A.trace(),
        "unimodular": A.is_unimodular(),
        "order": finite_order(A) if A.is_unimodular() else None,
    }
    if args.other:
        B = _parse_matrix(args.other)
        X = conjugate_in_gl2z(A, B, bound=50)
        payload["other"] = [list(r) for r in B.rows()]
        payload["conjugator"] = None if X is None else [list(r) for r in X.rows()]
        payload["conjugate_within_bound"] = X is not None
    _emit(payload, args)
    return OK


def _cmd_trichotomy(args):
    act = _build(args)
    base = args.resolution or 256
    rep = classify_perturbed(
        act,
        resolutions=(base, 2 * base, 4 * base),
        orbit_iterates=args.iterates or 10**5,
    )
    _emit({"action": act.name, **rep.to_json()}, args)
    return OK if rep.outcome != "Unknown" else INCONCLUSIVE


def _cmd_persistent_fp(args):
    act = _build(args)
    v = persistent_fixed_point(
        act,
        search_resolution=args.resolution or 64,
        tol=args.tol if args.tol is not None else 1e-8,
    )
    if v is None:
        _emit({"action": act.name, "found": False, "point": None}, args)
        return INCONCLUSIVE
    point = [float(p) for p in np.atleast_1d(np.asarray(v, dtype=float))]
    _emit({"action": act.name, "found": True, "point": point}, args)
    return OK


def _cmd_reproduce_all(args):
    rows = run_all(seed=args.seed)
    for r in rows:
        mark = "PASS" if r["passed"] else "FAIL"
        print(f"[{r['id']:2d}] {r['name']:26s} {mark} {r['elapsed']:7.2f}s")
    n_pass = sum(r["passed"] for r in rows)
    print(f"{n_pass}/{len(rows)} criteria passed (seed {args.seed})")
    if args.out:
        _atomic_write(
            args.out, json.dumps(_jsonable(rows), indent=1, sort_keys=True) + "\n"
        )
    return OK if n_pass == len(rows) else INCONCLUSIVE


# ---------------------------------------------------------------------------
# wiring


def _add_common(p):
    p.add_argument("--n", type=int, default=None, help="group parameter n")
    p.add_argument("--eps", type=float, default=None, help="fiber angle offset")
    p.add_argument("--k", default=None, metavar="SPEC", help="fiber lift spec")
    p.add_argument("--resolution", type=int, default=None, help="grid resolution")
    p.add_argument("--iterates", type=int, default=None, help="orbit length")
    p.add_argument("--tol", type=float, default=None, help="tolerance override")
    p.add_argument("--seed", type=int, default=7, help="random seed")
    p.add_argument("--out", default=None, metavar="PATH", help="write JSON here")


def _parser():
    ap = argparse.ArgumentParser(
        prog="bsdl",
        description=__doc__,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("catalog", help="list actions or show one entry")
    p.add_argument("action", nargs="?", default=None)
    _add_common(p)
    p.set_defaults(fn=_cmd_catalog)

    p = sub.add_parser("verify-relation", help="check h f h^-1 = f^n on a grid")
    p.add_argument("action")
    _add_common(p)
    p.set_defaults(fn=_cmd_verify_relation)

    p = sub.add_parser("rotation-number", help="rotation number of a generator")
    p.add_argument("action")
    p.add_argument("--gen", choices=("f", "h"), default="h")
    _add_common(p)
    p.set_defaults(fn=_cmd_rotation_number)

    p = sub.add_parser("rotation-set", help="rotation set of b with the relation constraint")
    p.add_argument("action")
    _add_common(p)
    p.set_defaults(fn=_cmd_rotation_set)

    p = sub.add_parser("fixed-set", help="cells with small b displacement")
    p.add_argument("action")
    _add_common(p)
    p.set_defaults(fn=_cmd_fixed_set)

    p = sub.add_parser("minimal-set", help="minimal set estimate and label")
    p.add_argument("action")
    _add_common(p)
    p.set_defaults(fn=_cmd_minimal_set)

    p = sub.add_parser("finite-orbit", help="orbit closure under both generators")
    p.add_argument("action")
    p.add_argument("start", nargs="?", default=None, help="x or u,theta")
    _add_common(p)
    p.set_defaults(fn=_cmd_finite_orbit)

    p = sub.add_parser("classify-matrix", help="order and conjugacy of integer matrices")
    p.add_argument("matrix", help="a,b,c,d")
    p.add_argument("other", nargs="?", default=None, help="a,b,c,d to test conjugacy (bound 50)")
    _add_common(p)
    p.set_defaults(fn=_cmd_classify_matrix)

    p = sub.add_parser("trichotomy", help="classify the minimal set of a torus action")
    p.add_argument("action")
    _add_common(p)
    p.set_defaults(fn=_cmd_trichotomy)

    p = sub.add_parser("persistent-fp", help="common fixed point of both generators")
    p.add_argument("action")
    _add_common(p)
    p.set_defaults(fn=_cmd_persistent_fp)

    p = sub.add_parser("reproduce-all", help="run the numbered acceptance checks")
    _add_common(p)
    p.set_defaults(fn=_cmd_reproduce_all)

    return ap


def main(argv=None):
    args = _parser().parse_args(argv)
    try:
        return args.fn(args)
    except _CLI_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return ERROR


if __name__ == "__main__":
    sys.exit(main())
