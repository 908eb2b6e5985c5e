"""Command-line interface.

Exit codes: 0 ok, 1 property violation, 2 usage or parse error, 3 budget
exhausted. The default budget comes from ``DENSETS_BUDGET_VALUE`` and
``DENSETS_BUDGET_INDEX`` (both default to 10**8).
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from typing import Optional, Sequence

from . import __version__
from .constructions import PartitionFamily, build_xr, parse_source, real_to_bits
from .density import (
    density_report,
    intrinsic_probe,
    parse_grid,
    principal_checkpoints,
    render_float,
)
from .dsl import evaluate, parse
from .errors import (
    BudgetExhausted,
    DensetsError,
    DomainError,
    DSLError,
    FillExhausted,
    IndexCapExceeded,
    SetExhausted,
)
from .identities import SUITES, run_suite
from .permutations import parse_family
from .sets import EvaluationBudget, default_budget

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_common(p: argparse.ArgumentParser, fmt=("text", "csv", "json"), default_fmt="text"):
    p.add_argument("--budget-value", type=int, help="largest natural a query may touch (env DENSETS_BUDGET_VALUE)")
    p.add_argument("--budget-index", type=int, help="largest enumeration index (env DENSETS_BUDGET_INDEX)")
    p.add_argument("--format", choices=fmt, default=default_fmt)
    p.add_argument("--out", help="write output here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="densets", description="Computable subsets of omega: into/within, permutations, densities.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("eval", help="list the prefix of a set expression")
    p.add_argument("--expr", required=True)
    p.add_argument("--prefix", type=int, default=100, help="list members below this bound")
    _add_common(p, ("text", "json"))

    p = sub.add_parser("density", help="density report of a set expression")
    p.add_argument("--expr", required=True)
    p.add_argument("--max-n", type=int, default=10**5)
    p.add_argument("--grid", default="geometric", help="geometric[:n0=64,g=1.3] | linear[:step=S]")
    p.add_argument("--estimator", choices=("counting", "principal"), default="counting")
    p.add_argument("--k", type=int, default=1000, help="principal estimator: number of elements")
    _add_common(p, ("csv", "json"), "csv")

    p = sub.add_parser("identities", help="run an exact identity suite on seeded random sets")
    p.add_argument("--suite", choices=sorted(SUITES), default="core")
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--prefix", type=int, default=10**4)
    _add_common(p, ("text", "json"))

    p = sub.add_parser("probe", help="intrinsic-density probe over a permutation family")
    p.add_argument("--expr", required=True)
    p.add_argument("--family", default="default", help="'default' or ';'-separated permutation specs")
    p.add_argument("--max-n", type=int, default=10**5)
    p.add_argument("--grid", default="geometric")
    _add_common(p, ("text", "json"))

    p = sub.add_parser("partition", help="densities of the partition pieces A_i")
    p.add_argument("--source", default="seed:1", help="seed:<n>[,mode=derived|pairing] or column=evens")
    p.add_argument("--levels", type=int, default=6)
    p.add_argument("--max-n", type=int, default=10**5)
    _add_common(p, ("text", "json"))

    p = sub.add_parser("construct-xr", help="build X_r and report its density")
    p.add_argument("--real", required=True, help="p/q, 0.ddd or seed:<n>")
    p.add_argument("--source", default="seed:1")
    p.add_argument("--max-n", type=int, default=10**5)
    p.add_argument("--grid", default="geometric")
    _add_common(p, ("csv", "json"), "csv")
    return parser


def _budget(args) -> EvaluationBudget:
    base = default_budget()
    return EvaluationBudget(
        args.budget_value if args.budget_value is not None else base.max_value,
        args.budget_index if args.budget_index is not None else base.max_index,
    )


def _config(args, budget: EvaluationBudget) -> dict:
    out = {k: v for k, v in sorted(vars(args).items()) if k not in ("out", "budget_value", "budget_index")}
    out["budget"] = {"max_value": budget.max_value, "max_index": budget.max_index}
    return out


def _emit(text: str, args):
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def cmd_eval(args, budget) -> int:
    handle = evaluate(parse(args.expr), budget)
    members = handle.prefix(args.prefix)
    if args.format == "json":
        _emit(_json({"config": _config(args, budget), "count": len(members), "members": members}), args)
    else:
        _emit(" ".join(map(str, members)) + "\n" + f"count {len(members)}\n", args)
    return EXIT_OK


def cmd_density(args, budget) -> int:
    handle = evaluate(parse(args.expr), budget)
    if args.estimator == "principal":
        report = principal_checkpoints(handle, args.k)
    else:
        report = density_report(handle, parse_grid(args.grid, args.max_n), label=args.expr)
    config = _config(args, budget)
    _emit(report.to_json(config) if args.format == "json" else report.to_csv(config), args)
    return EXIT_OK


def cmd_identities(args, budget) -> int:
    results = run_suite(args.suite, args.trials, args.seed, args.prefix)
    failed = [r for r in results if not r.passed]
    if args.format == "json":
        payload = {
            "config": _config(args, budget),
            "results": [
                {"name": r.name, "trials": r.trials, "violations": len(r.failures),
                 "witness": None if r.passed else {"trial": r.failures[0][0], "detail": r.failures[0][1]}}
                for r in results
            ],
        }
        _emit(_json(payload), args)
    else:
        lines = [f"# config: {json.dumps(_config(args, budget), sort_keys=True)}"]
        for r in results:
            if r.passed:
                lines.append(f"PASS  {r.name}  ({r.trials} trials)")
            else:
                trial, detail = r.failures[0]
                lines.append(f"FAIL  {r.name}  ({len(r.failures)}/{r.trials} trials; first: trial {trial}, {detail})")
        lines.append(f"{len(results) - len(failed)}/{len(results)} identities hold")
        _emit("\n".join(lines) + "\n", args)
    return EXIT_VIOLATION if failed else EXIT_OK


def cmd_probe(args, budget) -> int:
    handle = evaluate(parse(args.expr), budget)
    result = intrinsic_probe(handle, parse_family(args.family), parse_grid(args.grid, args.max_n))
    config = _config(args, budget)
    if args.format == "json":
        _emit(_json(result.to_dict(config)), args)
    else:
        lines = [f"# config: {json.dumps(config, sort_keys=True)}"]
        for pid, rep in result.reports:
            lines.append(
                f"{pid:32s} tail_inf={render_float(rep.tail_inf):>14s} tail_sup={render_float(rep.tail_sup):>14s} "
                f"final={render_float(rep.final.rho)}"
            )
        lines.append(f"spread {render_float(result.spread)} ({result.spread})")
        lines.append("UNSTABLE" if result.unstable else "stable")
        _emit("\n".join(lines) + "\n", args)
    return EXIT_OK


def cmd_partition(args, budget) -> int:
    part = PartitionFamily(parse_source(args.source), budget=budget)
    rows = []
    for i in range(args.levels):
        count = part.A(i).count(args.max_n)
        rho = Fraction(count, args.max_n)
        rows.append({"i": i, "count": count, "rho": str(rho), "rho_float": render_float(rho),
                     "target": render_float(Fraction(1, 2 ** (i + 1)))})
    rest = part.B(args.levels).count(args.max_n)
    config = _config(args, budget)
    if args.format == "json":
        _emit(_json({"config": config, "levels": rows, "remaining_in_B": rest}), args)
    else:
        lines = [f"# config: {json.dumps(config, sort_keys=True)}", "i count rho_float target"]
        lines += [f"{r['i']} {r['count']} {r['rho_float']} {r['target']}" for r in rows]
        lines.append(f"B_{args.levels} count {rest}")
        _emit("\n".join(lines) + "\n", args)
    return EXIT_OK


def cmd_construct_xr(args, budget) -> int:
    part = PartitionFamily(parse_source(args.source), budget=budget)
    xr = build_xr(real_to_bits(args.real), part, budget)
    report = density_report(xr, parse_grid(args.grid, args.max_n), label=f"xr({args.real}, {args.source})")
    config = _config(args, budget)
    _emit(report.to_json(config) if args.format == "json" else report.to_csv(config), args)
    return EXIT_OK


COMMANDS = {
    "eval": cmd_eval,
    "density": cmd_density,
    "identities": cmd_identities,
    "probe": cmd_probe,
    "partition": cmd_partition,
    "construct-xr": cmd_construct_xr,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        budget = _budget(args)
        return COMMANDS[args.command](args, budget)
    except (DSLError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (BudgetExhausted, SetExhausted, IndexCapExceeded, FillExhausted) as exc:
        print(f"budget: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except DensetsError as exc:  # pragma: no cover - every subclass is mapped above
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VIOLATION


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
