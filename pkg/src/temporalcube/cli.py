"""Command-line front end.

One binary with subcommands; every run is reproducible from its flags.  A
JSON config file may predefine flag values (explicit flags win).  Numeric
output uses '.' decimals and shortest round-trip float formatting; exit code
0 means success, 1 a guard violation (with a one-line diagnostic on stderr),
2 a usage error.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import exact, experiments, limitlaw, pairs, trees
from .core import WeightOracle
from .experiments import ExperimentConfig, write_output

EXIT_OK = 0
EXIT_GUARD = 1
EXIT_USAGE = 2


def _parse_n_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(p) for p in text.split(",") if p)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma list of integers: {text!r}")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="temporalcube",
        description="Accessible direct paths in the randomly edge-weighted hypercube",
    )
    ap.add_argument("--config", help="JSON file with default flag values", default=None)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="base seed (default 0)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--out", default=None, help="output path ('-' or omitted: stdout)")
    common.add_argument("--threads", type=int, default=1)

    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common], help="empirical law of the count")
    p.add_argument("--n", type=_parse_n_list, required=True, help="dimension or comma grid")
    p.add_argument("--samples", type=int, default=1000)

    p = sub.add_parser("exact", parents=[common], help="exact count for one seed")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--paths", action="store_true", help="also list accessible paths as edge codes")

    p = sub.add_parser("pair-overlap", parents=[common], help="(shared, gaps) statistics of accessible pairs")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--samples", type=int, default=1000)

    p = sub.add_parser("limit-pmf", parents=[common], help="limiting mass function")
    p.add_argument("--x-max", type=int, default=10)

    p = sub.add_parser("moments", parents=[common], help="exact limit moments")
    p.add_argument("--k-max", type=int, default=5)

    p = sub.add_parser("second-moment", parents=[common], help="pair-class decomposition of the second moment")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True, help="head/tail split of the single-gap sum")
    p.add_argument("--budget", type=int, default=pairs.DEFAULT_BUDGET)
    p.add_argument("--grid", action="store_true", help="emit the full (s, g) class grid instead")

    p = sub.add_parser("tree", parents=[common], help="greedy tree campaign")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--r", type=int, default=None, help="branching (default ceil(1.5 ln k))")
    p.add_argument("--samples", type=int, default=100)

    p = sub.add_parser("gompertz", parents=[common], help="the Gompertz constant")
    p.add_argument("--digits", type=int, default=12)
    return ap


def _apply_config_defaults(argv: list[str], ap: argparse.ArgumentParser) -> list[str]:
    """Inject values from --config FILE as defaults (explicit flags win)."""
    if "--config" not in argv:
        return argv
    at = argv.index("--config")
    path = argv[at + 1]
    with open(path, encoding="utf-8") as fh:
        conf = json.load(fh)
    out = list(argv[:at]) + list(argv[at + 2:])
    explicit = {a.split("=", 1)[0] for a in out if a.startswith("--")}
    extra: list[str] = []
    for key, val in sorted(conf.items()):
        flag = "--" + key.replace("_", "-")
        if flag in explicit:
            continue
        if isinstance(val, bool):
            if val:
                extra.append(flag)
        else:
            extra.extend([flag, str(val)])
    return out + extra


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return "" if v is None else str(v)


def _run_limit_pmf(args) -> str:
    ctx = limitlaw.build_context()
    rows = []
    for x in range(args.x_max + 1):
        if x <= ctx.x_max:
            value, a, b = limitlaw.pmf_exact(x, ctx)
            rows.append((x, str(a), str(b), value))
        else:
            rows.append((x, "", "", limitlaw.pmf_quadrature(x)))
    if args.format == "csv":
        lines = ["x,delta_coefficient,constant_term,probability"]
        lines += [f"{x},{a},{b},{_fmt(v)}" for x, a, b, v in rows]
        return "\n".join(lines) + "\n"
    return json.dumps({
        "rows": [{"x": x, "delta_coefficient": a, "constant_term": b, "probability": v}
                 for x, a, b, v in rows]
    }, sort_keys=True, indent=2) + "\n"


def _run_exact(args) -> str:
    oracle = WeightOracle(seed=args.seed, n=args.n)
    count = exact.count_accessible(args.n, oracle)
    lines_rows = []
    if args.paths:
        for p in exact.list_accessible(args.n, oracle):
            lines_rows.append((count, ";".join(e.encode() for e in p.edges())))
    if args.format == "csv":
        lines = ["n,seed,count,path"]
        if lines_rows:
            lines += [f"{args.n},{args.seed},{c},{enc}" for c, enc in lines_rows]
        else:
            lines.append(f"{args.n},{args.seed},{count},")
        return "\n".join(lines) + "\n"
    return json.dumps({
        "n": args.n, "seed": args.seed, "count": count,
        "paths": [enc for _, enc in lines_rows],
    }, sort_keys=True, indent=2) + "\n"


def _run_moments(args) -> str:
    rows = [(k, limitlaw.moment(k)) for k in range(1, args.k_max + 1)]
    if args.format == "csv":
        return "\n".join(["k,moment"] + [f"{k},{m}" for k, m in rows]) + "\n"
    return json.dumps({"rows": [{"k": k, "moment": m} for k, m in rows]}, sort_keys=True, indent=2) + "\n"


def _run_second_moment(args) -> str:
    if args.grid:
        rows = pairs.overlap_grid(args.n, args.budget)
        if args.format == "csv":
            lines = ["shared,gaps,value,exactness"]
            lines += [f"{s},{g},{_fmt(v)},{e}" for s, g, v, e in rows]
            return "\n".join(lines) + "\n"
        return json.dumps({
            "rows": [{"shared": s, "gaps": g, "value": v, "exactness": e} for s, g, v, e in rows]
        }, sort_keys=True, indent=2) + "\n"
    sm = pairs.second_moment_summary(args.n, args.k, args.budget)
    payload = {
        "n": sm.n, "k": sm.k,
        "single_gap_head": sm.single_gap_head,
        "single_gap_tail": sm.single_gap_tail,
        "multi_gap_low": sm.multi_gap_low,
        "multi_gap_high": sm.multi_gap_high,
        "second_moment_lower": sm.second_moment_lower,
        "second_moment_upper": sm.second_moment_upper,
        "truncated_classes": sm.truncated_classes,
    }
    if sm.exact_total is not None:
        payload["exact_total"] = str(sm.exact_total)
    if args.format == "csv":
        keys = list(payload)
        return ",".join(keys) + "\n" + ",".join(_fmt(payload[k]) for k in keys) + "\n"
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def _run_gompertz(args) -> str:
    import mpmath

    val = limitlaw.gompertz_delta(args.digits)
    with mpmath.workdps(args.digits + 10):
        text = mpmath.nstr(val, args.digits, strip_zeros=False)
    if args.format == "csv":
        return "digits,delta\n" + f"{args.digits},{text}\n"
    return json.dumps({"digits": args.digits, "delta": text}, sort_keys=True, indent=2) + "\n"


def dispatch(args) -> str:
    if args.command == "simulate":
        cfg = ExperimentConfig("simulate", n=args.n[0] if len(args.n) == 1 else None,
                               n_grid=args.n if len(args.n) > 1 else (), samples=args.samples,
                               base_seed=args.seed, threads=args.threads)
        result = experiments.run_pmf(cfg)
        return experiments.to_csv(result) if args.format == "csv" else experiments.to_json(result)
    if args.command == "exact":
        return _run_exact(args)
    if args.command == "pair-overlap":
        cfg = ExperimentConfig("pair-overlap", n=args.n, samples=args.samples,
                               base_seed=args.seed, threads=args.threads)
        result = experiments.run_pair_overlap(cfg)
        return experiments.to_csv(result) if args.format == "csv" else experiments.to_json(result)
    if args.command == "limit-pmf":
        return _run_limit_pmf(args)
    if args.command == "moments":
        return _run_moments(args)
    if args.command == "second-moment":
        return _run_second_moment(args)
    if args.command == "tree":
        r = args.r if args.r is not None else trees.default_branching(args.k)
        cfg = ExperimentConfig("tree", n=args.n, samples=args.samples, base_seed=args.seed,
                               k=args.k, r=r, threads=args.threads)
        result = experiments.run_tree_campaign(cfg)
        return experiments.to_csv(result) if args.format == "csv" else experiments.to_json(result)
    if args.command == "gompertz":
        return _run_gompertz(args)
    raise ValueError(f"unknown command {args.command!r}")


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        argv = _apply_config_defaults(argv, ap)
    except (OSError, json.JSONDecodeError, IndexError) as err:
        print(f"error: cannot load config: {err}", file=sys.stderr)
        return EXIT_USAGE
    args = ap.parse_args(argv)
    try:
        text = dispatch(args)
    except (ValueError, RuntimeError, OverflowError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_GUARD
    write_output(text, args.out)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
