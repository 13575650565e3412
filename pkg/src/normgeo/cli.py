"""Command-line front end: ``normgeo <subcommand> [options]``.

Spaces are JSON objects (``{"kind": "lp", "p": 2, "n": 3}``, ``{"kind": "sum1",
"left": ..., "right": ...}``, ``{"kind": "prodmax", ...}``) or the compact form
``lp:<p>:<n>``.  Vectors are coordinate lists or ``{"space": ..., "v": [...]}``.
Operators are ``{"X": ..., "Y": ..., "Z": ..., "c": [[[...]]]}`` with
``T(x, y)_k = sum_ij c[k][i][j] x_i y_j``.  ``--input FILE`` (``-`` for stdin)
supplies the same fields as a JSON object; flags given on the command line
take precedence.

Exit status: 0 computed (relation holds / no counterexample), 1 relation fails
or counterexample found (output still written), 2 bad input.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

from . import __version__
from .bilinear import (attainment_set, is_operator_approx_birkhoff, is_operator_birkhoff,
                       is_operator_smooth, norming_sequence_conditions, operator_norm, parse_operator)
from .derivatives import rho, rho_closed, rho_numeric, rho_sign_conditions
from .errors import DomainError, InputError, NumericalError
from .oracle import theorem_ids, verify_theorem
from .orthogonality import (OrthoVerdict, _jsonable, check_james, in_negative_part, in_positive_part,
                            is_approx_birkhoff, is_b_star, is_birkhoff, is_strong_birkhoff,
                            orthogonality_cone, rho_orthogonal, support_range, support_set)
from .spaces import parse_space, parse_vector, space_to_json

RELATIONS = ("birkhoff", "strong", "approx", "bstar", "rho", "positive", "negative", "james")

SCHEMAS = """\
payloads:
  space     {"kind":"lp","p":<number|"inf">,"n":<int>} | {"kind":"sum1"|"prodmax","left":<space>,"right":<space>} | lp:<p>:<n>
  vector    [<number>, ...] | {"space":<space>,"v":[<number>, ...]}
  operator  {"X":<space>,"Y":<space>,"Z":<space>,"c":<Z.n x X.n x Y.n nested list>}
  --input   JSON object with any of: space, x, y, op, a, eps, tol
"""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(message)


def _common(p, *fields):
    p.add_argument("--input", help="JSON file (or - for stdin) holding the payload fields")
    if "space" in fields:
        p.add_argument("--space", help="space JSON or lp:<p>:<n>")
    if "x" in fields:
        p.add_argument("--x", help="vector x")
    if "y" in fields:
        p.add_argument("--y", help="vector y")
    if "op" in fields:
        p.add_argument("--op", help="operator T")
    if "a" in fields:
        p.add_argument("--a", help="operator A")
    p.add_argument("--format", choices=("json", "table"), default="json")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="normgeo", description=__doc__.split("\n")[0],
                     epilog=SCHEMAS, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=f"normgeo {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("derive", help="one-sided norm derivatives rho_plus / rho_minus",
                       epilog=SCHEMAS, formatter_class=argparse.RawDescriptionHelpFormatter)
    _common(p, "space", "x", "y")
    p.add_argument("--method", choices=("auto", "closed", "numeric"), default="auto")

    p = sub.add_parser("ortho", help="evaluate an orthogonality relation x ~ y",
                       epilog=SCHEMAS, formatter_class=argparse.RawDescriptionHelpFormatter)
    _common(p, "space", "x", "y")
    p.add_argument("--relation", choices=RELATIONS, default="birkhoff")
    p.add_argument("--eps", type=float, help="eps for --relation approx")
    p.add_argument("--tol", type=float, help="decision tolerance")
    p.add_argument("--method", choices=("rho", "grid"), default="rho", help="B* method")

    p = sub.add_parser("cone", help="orthogonality cone of x in span{x, y} (2-D, unit x _|_B y)",
                       epilog=SCHEMAS, formatter_class=argparse.RawDescriptionHelpFormatter)
    _common(p, "space", "x", "y")

    p = sub.add_parser("support", help="supporting functionals at x (and their values on y)",
                       epilog=SCHEMAS, formatter_class=argparse.RawDescriptionHelpFormatter)
    _common(p, "space", "x", "y")

    p = sub.add_parser("bilinear-norm", help="operator norm and attainment set",
                       epilog=SCHEMAS, formatter_class=argparse.RawDescriptionHelpFormatter)
    _common(p, "op")
    p.add_argument("--method", choices=("alternating", "multistart", "grid"), default="alternating")
    p.add_argument("--restarts", type=int, default=32)
    p.add_argument("--resolution", type=int, default=721)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("bilinear-ortho", help="T _|_B A (or T _|_B^eps A with --eps)",
                       epilog=SCHEMAS, formatter_class=argparse.RawDescriptionHelpFormatter)
    _common(p, "op", "a")
    p.add_argument("--eps", type=float)
    p.add_argument("--tol", type=float)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--sequence", action="store_true",
                   help="also report the norming-sequence clauses")

    p = sub.add_parser("bilinear-smooth", help="is T a smooth point of the operator space",
                       epilog=SCHEMAS, formatter_class=argparse.RawDescriptionHelpFormatter)
    _common(p, "op")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("verify", help="run randomised equivalence suites")
    p.add_argument("--theorem", required=True, help="suite id or 'all'")
    p.add_argument("--trials", type=int, help="instances per family (suite default if omitted)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--timing", action="store_true", help="include wall time in the report")
    p.add_argument("--format", choices=("json", "table"), default="json")

    p = sub.add_parser("list-theorems", help="registered suite ids")
    p.add_argument("--format", choices=("json", "table"), default="json")
    return parser


# ---------------------------------------------------------------------------
# payload handling

def _load_input(path):
    if path is None:
        return {}
    try:
        text = sys.stdin.read() if path == "-" else open(path, encoding="utf-8").read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from None
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from None
    if not isinstance(obj, dict):
        raise InputError("--input must hold a JSON object")
    return obj


def _field(args, payload, name, required=True):
    v = getattr(args, name, None)
    if v is None:
        v = payload.get(name)
    if v is None and required:
        raise InputError(f"missing --{name}")
    return v


def _json_arg(v, what):
    if isinstance(v, str):
        try:
            return json.loads(v)
        except json.JSONDecodeError as exc:
            raise InputError(f"{what} is not valid JSON: {exc}") from None
    return v


def _space_xy(args, payload, need_y=True):
    space = parse_space(_field(args, payload, "space"))
    x = parse_vector(_json_arg(_field(args, payload, "x"), "x"), space).coords
    y = None
    raw = _field(args, payload, "y", need_y)
    if raw is not None:
        y = parse_vector(_json_arg(raw, "y"), space).coords
    return space, x, y


def _operator(args, payload, name):
    return parse_operator(_json_arg(_field(args, payload, name), name))


def _number(args, payload, name, default=None):
    v = _field(args, payload, name, False)
    if v is None:
        return default
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise InputError(f"{name} must be a number")
    if not math.isfinite(v):
        raise InputError(f"{name} must be finite")
    return float(v)


# ---------------------------------------------------------------------------
# subcommands

def _derive(args, payload):
    space, x, y = _space_xy(args, payload)
    fn = {"auto": rho, "closed": rho_closed, "numeric": rho_numeric}[args.method]
    out = fn(space, x, y).to_json()
    if space.kind == "lp":
        sc = rho_sign_conditions(space, x, y)
        out["sign_conditions"] = {"plus_nonneg": sc.plus_nonneg, "minus_nonpos": sc.minus_nonpos}
    return out, 0


def _ortho(args, payload):
    space, x, y = _space_xy(args, payload)
    rel = args.relation
    tol = _number(args, payload, "tol")
    kw = {} if tol is None else {"tol": tol}
    if rel == "birkhoff":
        v = is_birkhoff(space, x, y, **kw)
    elif rel == "strong":
        v = is_strong_birkhoff(space, x, y)
    elif rel == "approx":
        eps = _number(args, payload, "eps")
        if eps is None:
            raise InputError("--relation approx needs --eps")
        v = is_approx_birkhoff(space, x, y, eps, **kw)
    elif rel == "bstar":
        v = is_b_star(space, x, y, method=args.method)
    elif rel == "rho":
        flags = rho_orthogonal(space, x, y, **kw)
        v = OrthoVerdict("rho", flags["perp_rho"], flags, tol if tol is not None else 1e-9)
    elif rel in ("positive", "negative"):
        member = in_positive_part if rel == "positive" else in_negative_part
        r = rho(space, x, y)
        v = OrthoVerdict(rel, member(space, x, y),
                         {"rho_plus": r.rho_plus, "rho_minus": r.rho_minus}, 1e-10)
    else:
        lo, hi = support_range(space, x, y)
        t = 1e-9 if tol is None else tol
        v = OrthoVerdict("james", check_james(space, x, y, t), {"f_y_min": lo, "f_y_max": hi}, t)
    return v.to_json(), 0 if v.holds else 1


def _cone(args, payload):
    space, x, y = _space_xy(args, payload)
    return orthogonality_cone(space, x, y).to_json(), 0


def _support(args, payload):
    space, x, y = _space_xy(args, payload, need_y=False)
    out = {"space": space_to_json(space), "x": x.tolist()}
    if space.kind == "lp":
        out.update(support_set(space, x).to_json())
    if y is not None:
        lo, hi = support_range(space, x, y)
        out["value_range"] = [lo, hi]
    return out, 0


def _bilinear_norm(args, payload):
    T = _operator(args, payload, "op")
    v, (x, y) = operator_norm(T, args.method, args.seed, args.restarts, args.resolution)
    out = {"norm": v, "x": x.tolist(), "y": y.tolist(), "method": args.method}
    if v > 0:
        out["attainment_set"] = attainment_set(T, seed=args.seed).to_json()
    return out, 0


def _bilinear_ortho(args, payload):
    T, A = _operator(args, payload, "op"), _operator(args, payload, "a")
    eps = _number(args, payload, "eps")
    tol = _number(args, payload, "tol")
    kw = {} if tol is None else {"tol": tol}
    if eps is None:
        v = is_operator_birkhoff(T, A, seed=args.seed, **kw)
    else:
        v = is_operator_approx_birkhoff(T, A, eps, seed=args.seed, **kw)
    out = v.to_json()
    if args.sequence:
        out["sequence"] = _jsonable(norming_sequence_conditions(T, A, seed=args.seed))
    return out, 0 if v.holds else 1


def _bilinear_smooth(args, payload):
    T = _operator(args, payload, "op")
    v = is_operator_smooth(T, seed=args.seed)
    return v.to_json(), 0 if v.holds else 1


def _verify(args):
    if args.theorem == "all":
        ids = [t[0] for t in theorem_ids()]
    else:
        ids = [args.theorem]
    reports = [verify_theorem(t, args.trials, args.seed) for t in ids]
    bad = sum(len(r.counterexamples) for r in reports)
    if args.format == "table":
        lines = [r.table_row() for r in reports]
        if len(reports) > 1:
            lines.append(f"{'summary':<15} {'PASS' if not bad else 'FAIL':<5} "
                         f"suites={len(reports)} counterexamples={bad}")
        return "\n".join(lines), 1 if bad else 0
    if len(reports) == 1:
        out = reports[0].to_json(args.timing)
    else:
        out = {"reports": [r.to_json(args.timing) for r in reports], "suites": len(reports),
               "trials": sum(r.trials for r in reports),
               "skipped_boundary": sum(r.skipped_boundary for r in reports),
               "counterexamples": bad, "seed": args.seed}
    return out, 1 if bad else 0


def _list(args):
    rows = [{"theorem_id": t, "default_trials": n, "description": d} for t, n, d in theorem_ids()]
    if args.format == "table":
        return "\n".join(f"{r['theorem_id']:<15} {r['default_trials']:>6}  {r['description']}"
                         for r in rows), 0
    return rows, 0


def _table(obj, indent=""):
    lines = []
    for k, v in obj.items():
        if isinstance(v, dict):
            lines.append(f"{indent}{k}:")
            lines.extend(_table(v, indent + "  "))
        else:
            lines.append(f"{indent}{k}: {json.dumps(v)}")
    return lines


_HANDLERS = {"derive": _derive, "ortho": _ortho, "cone": _cone, "support": _support,
             "bilinear-norm": _bilinear_norm, "bilinear-ortho": _bilinear_ortho,
             "bilinear-smooth": _bilinear_smooth}


def run(argv=None, stdout=None, stderr=None) -> int:
    """Parse ``argv``, write the result to ``stdout`` and return the exit code."""
    stdout = sys.stdout if stdout is None else stdout
    stderr = sys.stderr if stderr is None else stderr
    try:
        args = build_parser().parse_args(argv)
        if args.command == "verify":
            out, code = _verify(args)
        elif args.command == "list-theorems":
            out, code = _list(args)
        else:
            out, code = _HANDLERS[args.command](args, _load_input(args.input))
    except (InputError, DomainError, NumericalError) as exc:
        stderr.write(f"normgeo: error: {exc}\n")
        return 2
    if isinstance(out, str):
        stdout.write(out + "\n")
    elif args.format == "table" and isinstance(out, dict):
        stdout.write("\n".join(_table(out)) + "\n")
    else:
        stdout.write(json.dumps(_jsonable(out), sort_keys=True) + "\n")
    return code


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
