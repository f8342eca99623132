"""Command-line front end.

Exit codes: 0 success, 1 a check that ran but failed, 2 invalid input,
3 numeric non-convergence.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from typing import Sequence

from pfaffian_tau.algebra import ConfigurationError, SeriesError, format_scalar
from pfaffian_tau.combinatorics import StrictTuple, combined_strict_partition, is_strict
from pfaffian_tau.drinfeld_sokolov import (
    DSProblem,
    example_configs,
    load_config,
    problem_from_config,
    time_ring,
)
from pfaffian_tau.engines import format_minor_table, square_check, widom_tau
from pfaffian_tau.qschur import q_lambda, q_multiple

EXIT_OK, EXIT_FAILED, EXIT_INVALID, EXIT_NONCONVERGED = 0, 1, 2, 3
ISO_TOLERANCE = 1e-6
DEFAULT_WIDOM_WEIGHT = 6


class UsageError(ConfigurationError):
    pass


# ---------------------------------------------------------------------------
# config handling
# ---------------------------------------------------------------------------


def normalize_config(cfg: dict) -> dict:
    """Accept sparse ``initial_condition`` entries and a ``times`` mapping.

    ``initial_condition`` is a list of ``[row, col, z_power, expression]``
    (1-based indices).  ``times`` may be a list of odd integers or a mapping
    ``{"t1": null, "t3": 0}``; numeric values are substituted into results.
    """
    out = dict(cfg)
    if "initial_condition" in cfg:
        if "X" in cfg:
            raise ConfigurationError("give either X or initial_condition, not both")
        alg = cfg.get("algebra") or {}
        try:
            N = 2 * int(alg["rank"]) + (1 if alg["series"] == "B" else 0)
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigurationError("initial_condition needs an algebra block") from exc
        X: dict[str, list[list[str]]] = {}
        for entry in cfg["initial_condition"]:
            if not isinstance(entry, (list, tuple)) or len(entry) != 4:
                raise ConfigurationError(f"initial_condition entry {entry!r} is not [row, col, power, expr]")
            i, j, k, expr = entry
            if not (1 <= int(i) <= N and 1 <= int(j) <= N):
                raise ConfigurationError(f"entry ({i}, {j}) outside a {N} x {N} matrix")
            rows = X.setdefault(str(int(k)), [["0"] * N for _ in range(N)])
            rows[int(i) - 1][int(j) - 1] = str(expr)
        out["X"] = X
        del out["initial_condition"]
    times = cfg.get("times", [1, 3, 5])
    values = {}
    if isinstance(times, dict):
        names = []
        for name, v in times.items():
            if not (name.startswith("t") and name[1:].isdigit()):
                raise ConfigurationError(f"bad time name {name!r}")
            names.append(int(name[1:]))
            if v is not None:
                values[name] = Fraction(str(v))
        out["times"] = sorted(names)
    subs = dict(cfg.get("substitute", {}))
    for k, v in subs.items():
        values[k] = Fraction(str(v))
    out["_values"] = values
    return out


def load_problem(path: str) -> tuple[DSProblem, dict, dict]:
    cfg = normalize_config(load_config(path))
    problem = problem_from_config(cfg)
    problem.validate()
    return problem, cfg["_values"], cfg


def _subs(x, values):
    return x.subs(values) if values else x


def _emit(payload: dict, text: str, fmt: str):
    if fmt == "json":
        print(json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=False))
    else:
        print(text)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def run_ds_tau(args) -> int:
    problem, values, _ = load_problem(args.config)
    res = problem.tau(args.max_weight)
    value = _subs(res.value, values)
    payload = {
        "algebra": str(problem.spec),
        "exact": res.exact,
        "max_weight": str(res.truncation),
        "nonzero_minors": len(res.terms) - 1,
        "tau_o": format_scalar(value),
    }
    text = f"tau_O = {format_scalar(value)}"
    if args.widom:
        w = DEFAULT_WIDOM_WEIGHT if args.max_weight is None else args.max_weight
        W = widom_tau(problem.a_kernel(w), problem.d_kernel(), w, method=args.method)
        payload["tau_w"] = format_scalar(_subs(W.value, values))
        payload["tau_w_cutoff"] = str(w)
        text += f"\ntau_W (sum p + sum q <= {w}) = {payload['tau_w']}"
    if not res.exact:
        text += f"\n# truncated at weight {res.truncation}"
    _emit(payload, text, args.output)
    return EXIT_OK


def q_label(lam: StrictTuple, pf_a) -> str | None:
    """``c*Q(...)`` when the merged strict partition reproduces ``pf_a`` as a multiple."""
    parts, distinct = combined_strict_partition(lam)
    if not distinct:
        return None
    c = q_multiple(pf_a, parts)
    if c is None:
        return None
    return f"{format_scalar(Fraction(c))}*Q({','.join(map(str, parts))})"


def table_rows(problem: DSProblem, max_weight, values) -> list[dict]:
    rows = problem.tables(max_weight)
    out = []
    for r in rows:
        pd = _subs(r["pf_d"], values)
        if problem.ring.is_zero(pd):
            continue
        pa = _subs(r["pf_a"], values)
        out.append(dict(r, pf_d=pd, pf_a=pa, q_label=q_label(r["tuple"], pa)))
    return out


def run_tables(args) -> int:
    problem, values, _ = load_problem(args.config)
    rows = table_rows(problem, args.max_weight, values)
    if not rows:
        # trivial data: only the empty tuple survives
        empty = StrictTuple(((),) * problem.spec.N)
        one = problem.ring.one()
        rows = [{"tuple": empty, "weight": 0, "pf_d": one, "pf_a": one, "q_label": None}]
    rows_text = format_minor_table(rows, extra={"q_label": True})
    payload = {
        "algebra": str(problem.spec),
        "rows": [
            {
                "tuple": str(r["tuple"]),
                "weight": r["weight"],
                "pf_d": format_scalar(r["pf_d"]),
                "pf_a": format_scalar(r["pf_a"]),
                "q_label": r["q_label"],
            }
            for r in rows
        ],
    }
    _emit(payload, rows_text, args.output)
    return EXIT_OK


def parse_partition(text: str) -> tuple[int, ...]:
    body = text.strip().strip("()[]{}")
    try:
        parts = tuple(int(x) for x in body.split(",") if x.strip())
    except ValueError as exc:
        raise UsageError(f"cannot parse partition {text!r}") from exc
    if not is_strict(parts):
        raise UsageError(f"{parts} is not a strict partition")
    return parts


def run_qschur(args) -> int:
    parts = parse_partition(args.partition)
    times = [int(x) for x in args.times.split(",")] if args.times else list(range(1, max(sum(parts), 1) + 1, 2))
    ring = time_ring([], times)
    Q = q_lambda(parts, ring)
    label = f"Q({','.join(map(str, parts))})"
    _emit({"partition": list(parts), "q": format_scalar(Q)}, f"{label} = {format_scalar(Q)}", args.output)
    return EXIT_OK


def run_square_check(args) -> int:
    problem, values, _ = load_problem(args.config)
    w = DEFAULT_WIDOM_WEIGHT if args.max_weight is None else args.max_weight
    d = problem.d_kernel()
    a = problem.a_kernel(w)
    rep = square_check(a, d, problem.S, w, method=args.method)
    payload = {k: (format_scalar(_subs(v, values)) if k in ("tau_w", "tau_o", "tau_o_squared", "difference") else v)
               for k, v in rep.items()}
    payload["max_weight"] = str(w)
    text = "\n".join(
        [
            f"tau_W          = {payload['tau_w']}",
            f"tau_O^2        = {payload['tau_o_squared']}",
            f"difference     = {payload['difference']}",
            f"agrees (sum p <= {w}): {rep['agrees']}",
        ]
    )
    _emit(payload, text, args.output)
    return EXIT_OK if rep["agrees"] else EXIT_FAILED


def run_iso(args) -> int:
    from pfaffian_tau.isomonodromy import DEFAULT_PARAMS, ConvergenceError, IsoParams, iso_square_check

    if args.config:
        cfg = load_config(args.config)
        if "iso" not in cfg:
            raise UsageError("config has no 'iso' block")
        params = IsoParams.from_mapping(cfg["iso"])
    else:
        params = DEFAULT_PARAMS
    refinements = sorted({max(params.M // 2, 1), (3 * params.M) // 4, params.M}) if args.convergence else None
    try:
        rep = iso_square_check(params, refinements)
    except (ConvergenceError, SeriesError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGED
    rep.pop("seconds", None)
    payload = _stringify(rep)
    if not args.convergence:
        payload.pop("convergence_table")
        payload.pop("monotone")
    lines = [
        f"tau_W[SL2]   = {payload['tau_w_sl2']}",
        f"tau_O[SO3]   = {payload['tau_o_so3']}",
        f"residual     = {payload['residual']}",
        f"JMU exponent = {payload['exponent']}",
    ]
    if args.convergence:
        lines.append("M   residual")
        lines += [f"{row['M']:<3} {row['residual']}" for row in payload["convergence_table"]]
    lines += [f"warning: {w}" for w in rep["warnings"]]
    _emit(payload, "\n".join(lines), args.output)
    ok = rep["residual"] <= ISO_TOLERANCE and (not args.convergence or rep["monotone"])
    return EXIT_OK if ok else EXIT_NONCONVERGED


def _stringify(x):
    if isinstance(x, dict):
        return {k: _stringify(v) for k, v in x.items()}
    if isinstance(x, list):
        return [_stringify(v) for v in x]
    if isinstance(x, bool) or x is None or isinstance(x, (int, str)):
        return x
    if isinstance(x, float):
        return f"{x:.17g}"
    if isinstance(x, complex):
        return format_scalar(x)
    return str(x)


def run_algebra(args) -> int:
    from pfaffian_tau.lie import AlgebraSpec, build_algebra

    data = build_algebra(AlgebraSpec(args.series, args.rank))

    def mat(M):
        return [[format_scalar(x) for x in row] for row in M]

    payload = {
        "algebra": str(data.spec),
        "N": data.N,
        "coxeter": data.spec.coxeter,
        "S": mat(data.S),
        "cartan": [list(r) for r in data.cartan],
        "E": [mat(M) for M in data.E],
        "F": [mat(M) for M in data.F],
        "H": [mat(M) for M in data.H],
    }
    print(json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=False))
    return EXIT_OK


def run_example(args) -> int:
    cfgs = example_configs()
    if args.name not in cfgs:
        raise UsageError(f"unknown example {args.name!r}; choose from {', '.join(sorted(cfgs))}")
    print(json.dumps(cfgs[args.name], sort_keys=True, indent=2))
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pfaffian-tau", description="Pfaffian and Widom tau-functions for orthogonal loop groups.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, config=True):
        if config:
            sp.add_argument("config", help="JSON problem description")
        sp.add_argument("--output", choices=("text", "json"), default="text")

    def widom_method(sp):
        sp.add_argument(
            "--method",
            choices=("series", "minors"),
            default="series",
            help="Widom tau by resummed series determinant (default) or term-by-term minors",
        )

    sp = sub.add_parser("ds-tau", help="tau_O of a polynomial Drinfeld-Sokolov problem")
    common(sp)
    sp.add_argument("--max-weight", type=int, default=None)
    sp.add_argument("--widom", action="store_true", help="also print the truncated Widom tau")
    widom_method(sp)
    sp.set_defaults(func=run_ds_tau)

    sp = sub.add_parser("tables", help="nonzero Pf(d) minors with their Pf(a) partners and Q labels")
    common(sp)
    sp.add_argument("--max-weight", type=int, default=None)
    sp.set_defaults(func=run_tables)

    sp = sub.add_parser("qschur", help="print a Schur Q-function")
    common(sp, config=False)
    sp.add_argument("--partition", required=True, help='strict partition such as "(4,2)"')
    sp.add_argument("--times", default=None, help="comma separated odd times, default all up to |lambda|")
    sp.set_defaults(func=run_qschur)

    sp = sub.add_parser("square-check", help="compare tau_W with tau_O^2 up to a block weight")
    common(sp)
    sp.add_argument("--max-weight", type=int, default=None)
    widom_method(sp)
    sp.set_defaults(func=run_square_check)

    sp = sub.add_parser("iso", help="SO(3) isomonodromic square relation report")
    sp.add_argument("config", nargs="?", default=None, help="JSON with an 'iso' block (default parameters if omitted)")
    sp.add_argument("--output", choices=("text", "json"), default="text")
    sp.add_argument("--convergence", action="store_true", help="add a three-row mode refinement table")
    sp.set_defaults(func=run_iso)

    sp = sub.add_parser("algebra", help="dump Weyl generators, Cartan matrix and S as JSON")
    sp.add_argument("--series", choices=("B", "D"), required=True)
    sp.add_argument("--rank", type=int, required=True)
    sp.set_defaults(func=run_algebra)

    sp = sub.add_parser("example", help="print a built-in example config (J1, J2, J3, J4)")
    sp.add_argument("name")
    sp.set_defaults(func=run_example)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code else EXIT_OK
    if getattr(args, "max_weight", None) is not None and args.max_weight < 0:
        print("error: --max-weight must be non-negative", file=sys.stderr)
        return EXIT_INVALID
    try:
        code = args.func(args)
        sys.stdout.flush()
        return code
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except BrokenPipeError:
        # output piped into e.g. head; silence the flush at interpreter exit
        sys.stdout = open(os.devnull, "w")
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
