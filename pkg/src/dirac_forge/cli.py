"""Command-line front end: ``dirac-forge verify-algebra|run|convergence|list``."""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys

from . import kernels
from .report import RunReport
from .scenarios import PRESETS, Scenario, ScenarioError, catalog, load_scenario, preset, scenario_from_dict
from .suites import CONVERGENCE, SUITES, fit_order

EXIT_OK, EXIT_FAILED, EXIT_PARSE = 0, 1, 2


def _int_list(text: str) -> tuple:
    try:
        values = tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("empty list")
    return values


def _epsilon(text: str) -> tuple:
    table = {"+1": (1,), "1": (1,), "-1": (-1,), "both": (1, -1)}
    if text.strip() not in table:
        raise argparse.ArgumentTypeError(f"epsilon must be +1, -1 or both, got {text!r}")
    return table[text.strip()]


def _signature(text: str) -> tuple:
    values = _int_list(text)
    if len(values) != 2 or min(values) < 0 or sum(values) < 1:
        raise argparse.ArgumentTypeError(f"signature must be p,q with p + q >= 1, got {text!r}")
    return values


def _common(parser: argparse.ArgumentParser):
    parser.add_argument("--out", help="output directory (default: the scenario's, else ./reports)")
    parser.add_argument("--format", choices=("csv", "json"), help="write only this format (default: both)")
    parser.add_argument("--seed", type=int, help="seed for random test data (overrides the scenario)")
    parser.add_argument("--threads", type=int,
                        help="kernel threads (default: $DIRAC_FORGE_THREADS, else 1)")
    parser.add_argument("--quiet", action="store_true", help="print only the final verdict")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dirac-forge", description="Discrete Clifford module and Dirac "
                                     "operator checks driven by scenario files.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify-algebra", help="Clifford relations, symbol map and quantization checks")
    p.add_argument("--sig", type=_signature, help="p,q (default: every signature with n <= --max-dim)")
    p.add_argument("--eps", type=_epsilon, default=(1, -1), help="+1, -1 or both (default both)")
    p.add_argument("--max-dim", type=int, default=4)
    _common(p)

    p = sub.add_parser("run", help="run a scenario file or a built-in preset")
    p.add_argument("scenario", help="path to a .cfg/.ini/.json file, or a preset name")
    p.add_argument("--eps", type=_epsilon, help="override the scenario's epsilon")
    p.add_argument("--grids", type=_int_list, help="override the scenario's grid sizes")
    _common(p)

    p = sub.add_parser("convergence", help="error per grid size and the fitted order")
    p.add_argument("scenario", help="path to a scenario file, or a preset name")
    p.add_argument("--grids", type=_int_list, help="grid sizes, strictly increasing")
    p.add_argument("--eps", type=_epsilon, help="override the scenario's epsilon")
    _common(p)

    sub.add_parser("list", help="print the built-in presets")
    return parser


def _resolve_threads(requested) -> int:
    if requested is None:
        env = os.environ.get("DIRAC_FORGE_THREADS", "").strip()
        if env:
            try:
                requested = int(env)
            except ValueError:
                raise ScenarioError(f"DIRAC_FORGE_THREADS must be an integer, got {env!r}") from None
        else:
            requested = 1
    if requested < 1:
        raise ScenarioError(f"thread count must be positive, got {requested}")
    return kernels.set_threads(requested)


def _load(target: str) -> Scenario:
    if target in PRESETS and not os.path.exists(target):
        return preset(target)
    return load_scenario(target)


def _override(sc: Scenario, args) -> Scenario:
    changes = {}
    if getattr(args, "eps", None):
        changes["epsilons"] = args.eps
    if getattr(args, "grids", None):
        changes["grids"] = args.grids
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.format:
        changes["formats"] = (args.format,)
    return dataclasses.replace(sc, **changes) if changes else sc


def _finish(report: RunReport, sc: Scenario, args) -> int:
    out = args.out or sc.out or "reports"
    paths = report.write(out, sc.formats)
    if not args.quiet:
        for line in report.summary_lines():
            print(line)
    failed = len(report.failures)
    verdict = "PASS" if failed == 0 else "FAIL"
    print(f"{verdict}: {sc.name}: {len(report.records) - failed}/{len(report.records)} checks passed; "
          f"wrote {', '.join(paths)}")
    for rec in report.failures:
        print(f"  failed {rec.check_name}: |{rec.value} - {rec.reference}| = {rec.abs_error:.3e} "
              f">= {rec.tolerance:.3e}", file=sys.stderr)
    return EXIT_OK if failed == 0 else EXIT_FAILED


def cmd_verify_algebra(args, threads: int) -> int:
    model = {"max_dim": args.max_dim}
    if args.sig:
        model.update(p=args.sig[0], q=args.sig[1])
        if sum(args.sig) > 6:
            raise ScenarioError(f"signature {args.sig} exceeds the dimension cap 6")
    name = "verify-algebra" if not args.sig else f"verify-algebra-{args.sig[0]}-{args.sig[1]}"
    sc = scenario_from_dict({"scenario": {"name": name, "suite": "algebra",
                                          "equation_ref": "clifford-relations-and-symbol-map",
                                          "epsilon": args.eps}, "algebra": model}, name)
    sc = _override(sc, args)
    report = RunReport(sc.name, sc.echo(), threads)
    SUITES["algebra"](sc, report)
    return _finish(report, sc, args)


def cmd_run(args, threads: int) -> int:
    sc = _override(_load(args.scenario), args)
    report = RunReport(sc.name, sc.echo(), threads)
    SUITES[sc.suite](sc, report)
    return _finish(report, sc, args)


def cmd_convergence(args, threads: int) -> int:
    sc = _override(_load(args.scenario), args)
    if sc.suite not in CONVERGENCE:
        raise ScenarioError(f"suite {sc.suite!r} has no convergence study; available: {sorted(CONVERGENCE)}")
    if len(sc.grids) < 2:
        raise ScenarioError("a convergence study needs at least two grid sizes (--grids a,b,...)")
    sc = dataclasses.replace(sc, name=f"{sc.name}-convergence")
    report = RunReport(sc.name, sc.echo(), threads)
    errors = []
    for nodes in sc.grids:
        err = CONVERGENCE[sc.suite](sc, nodes)
        errors.append(err)
        report.add(f"error[n={nodes}]", sc.equation_ref, err, None, 0.0, "measured")
    report.add("fitted-order", sc.equation_ref, fit_order(sc.grids, errors), float(sc.order), 0.3, "closed-form")
    return _finish(report, sc, args)


def cmd_list() -> int:
    rows = catalog()
    width = max(len(r[0]) for r in rows)
    ref_width = max(len(r[2]) for r in rows)
    for name, suite, ref, desc in rows:
        print(f"{name:<{width}}  {ref:<{ref_width}}  {desc}")
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "list":
        return cmd_list()
    try:
        threads = _resolve_threads(args.threads)
        if args.command == "verify-algebra":
            return cmd_verify_algebra(args, threads)
        if args.command == "run":
            return cmd_run(args, threads)
        return cmd_convergence(args, threads)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
