"""
Linha de comando do planejador.

Subcomandos:
    plan     resolve (ou apenas exporta) cenários de um problema
    verify   verifica um arquivo de solução contra um modelo MPS
    oracle   executa o conjunto de equivalência com instâncias pequenas
    compare  monta a tabela de reduções a partir de relatórios JSON

O código de saída vem do `exit_code` da exceção de domínio: 2 para erro de
leitura ou validação, 3 para inviável, 4 para limite atingido e 5 para falha
de verificação.
"""
import argparse
import asyncio
import json
import logging
import sys
from pathlib import Path

import pandas as pd
from pydantic import ValidationError

from microgrid.core.config import settings
from microgrid.core.exceptions import (
    BaseException,
    ParseException,
    VerificationException,
)
from microgrid.oracle.suite import (
    generate_suite,
    read_suite,
    run_suite,
    write_suite,
)
from microgrid.schemas.report import RunSummary, ScenarioReport
from microgrid.schemas.solution import SolveOptions, SolveStatus
from microgrid.solvers.feasibility import check_feasibility
from microgrid.solvers.mps import read_mps, read_solution
from microgrid.usecases.plan import plan_usecase
from microgrid.usecases.report import compare, emit_outputs

logger = logging.getLogger("microgrid")


def _export_path(path: Path, scenario: str, many: bool) -> Path:
    if not many:
        return path
    return path.with_name(f"{path.stem}_{scenario}{path.suffix}")


def cmd_plan(args: argparse.Namespace) -> int:
    problems = [
        plan_usecase.load(scenario, builtin=None if args.problem else args.builtin,
                          path=args.problem, years=args.years, hours=args.hours)
        for scenario in args.scenario
    ]

    if args.export_only:
        many = len(problems) > 1
        for problem in problems:
            path = plan_usecase.export(
                problem, _export_path(Path(args.export_only),
                                      problem.scenario.id, many), args.format)
            print(path)
        return 0

    opts = SolveOptions(gap=args.gap, time_limit=args.time_limit,
                        node_limit=args.node_limit, backend=args.backend)
    runs = asyncio.run(plan_usecase.run_many(problems, opts))
    reports = [run.report for run in runs]
    emit_outputs(reports, [run.plan for run in runs], args.out,
                 problem=problems[0], options=opts.model_dump(mode="json"))

    frame = pd.DataFrame([{
        "scenario": r.scenario_id, "status": r.status,
        "total": r.cost.total, "capital": r.cost.capital, "fuel": r.cost.fuel,
        "om": r.cost.om, "litres": r.cost.litres,
    } for r in reports])
    print(frame.to_string(index=False, float_format=lambda v: f"{v:,.2f}"))

    if any(run.plan.status is SolveStatus.LIMIT_HIT for run in runs):
        logger.warning("at least one scenario stopped at a solver limit")
        return 4
    return 0


def cmd_verify(args: argparse.Namespace) -> int:
    instance = read_mps(args.model)
    values, declared = read_solution(args.solution, instance)
    report = check_feasibility(instance, values, args.tol)
    objective = instance.objective(values)
    print(json.dumps({
        "passed": report.passed,
        "objective": objective,
        "declared_objective": declared,
        "max_residual": report.max_residual,
        "violated_tags": sorted(report.tags()),
        "violated_columns": [v.column for v in report.violated_columns],
    }, indent=2))
    if not report.passed:
        raise VerificationException(
            message=f"{args.solution} violates {len(report.violated_rows)} "
                    f"row(s) and {len(report.violated_columns)} column bound(s)")
    return 0


def cmd_oracle(args: argparse.Namespace) -> int:
    seed = settings.ORACLE_SEED if args.seed is None else args.seed
    if args.suite == "default":
        problems = generate_suite(seed, args.size)
    else:
        problems = read_suite(args.suite)
    if args.write:
        write_suite(problems, args.write)
    report = run_suite(problems, seed)
    for verdict in report.verdicts:
        print(f"{verdict.name}: {'pass' if verdict.passed else 'FAIL'}"
              + (f" ({verdict.message})" if verdict.message else ""))
    if report.missing_tags:
        print(f"missing equation tags: {', '.join(report.missing_tags)}")
    if not report.passed:
        failed = sum(not verdict.passed for verdict in report.verdicts)
        raise VerificationException(
            message=f"{failed} of {len(report.verdicts)} oracle checks failed")
    return 0


def _read_reports(path: Path) -> list[ScenarioReport]:
    try:
        data = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseException(message=f"{path}: {exc}") from exc
    try:
        if isinstance(data, dict) and "reports" in data:
            return RunSummary.model_validate(data).reports
        return [ScenarioReport.model_validate(data)]
    except ValidationError as exc:
        raise ParseException(message=f"{path}: {exc}") from exc


def cmd_compare(args: argparse.Namespace) -> int:
    reports = [report for path in args.reports
               for report in _read_reports(Path(path))]
    bau = next((r for r in reports if r.scenario_id == args.bau), None)
    if bau is None:
        raise ParseException(message=f"no {args.bau} report among the inputs")
    rows = compare(reports, bau)
    frame = pd.DataFrame([row.model_dump(exclude={"schema_version"})
                          for row in rows])
    print(frame.to_string(index=False, float_format=lambda v: f"{v:.2f}"))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="microgrid",
        description="Microgrid capacity expansion planning",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    parser.add_argument("--log-level", default=settings.LOG_LEVEL)
    commands = parser.add_subparsers(dest="command", required=True)

    plan = commands.add_parser(
        "plan", help="solve or export scenarios",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    source = plan.add_mutually_exclusive_group()
    source.add_argument("--builtin", default="sanikiluaq",
                        choices=["sanikiluaq"])
    source.add_argument("--problem", type=Path, help="problem YAML file")
    plan.add_argument("--scenario", action="append",
                      help="scenario id, repeatable (default: BAU)")
    plan.add_argument("--years", type=int)
    plan.add_argument("--hours", type=int)
    plan.add_argument("--export-only", metavar="PATH",
                      help="write the model (.mps or .lp) and skip solving")
    plan.add_argument("--format", choices=["mps", "lp"])
    plan.add_argument("--gap", type=float, default=settings.DEFAULT_GAP)
    plan.add_argument("--time-limit", type=float)
    plan.add_argument("--node-limit", type=int)
    plan.add_argument("--backend", default="auto",
                      choices=["auto", "embedded", "highs"])
    plan.add_argument("--out", type=Path, default=Path(settings.OUTPUT_DIR))
    plan.set_defaults(func=cmd_plan)

    verify = commands.add_parser("verify", help="check a solution file")
    verify.add_argument("model", type=Path, help="MPS model")
    verify.add_argument("solution", type=Path)
    verify.add_argument("--tol", type=float, default=1e-6)
    verify.set_defaults(func=cmd_verify)

    oracle = commands.add_parser("oracle", help="run the equivalence suite")
    oracle.add_argument("--suite", default="default",
                        help="'default' (seeded) or a directory written by --write")
    oracle.add_argument("--seed", type=int)
    oracle.add_argument("--size", type=int)
    oracle.add_argument("--write", type=Path,
                        help="also write the instances as YAML")
    oracle.set_defaults(func=cmd_oracle)

    comp = commands.add_parser("compare", help="reduction table vs BAU")
    comp.add_argument("reports", nargs="+", help="summary.json or report files")
    comp.add_argument("--bau", default="BAU")
    comp.set_defaults(func=cmd_compare)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "scenario", None) is None and args.command == "plan":
        args.scenario = ["BAU"]
    logging.basicConfig(
        level=args.log_level.upper(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except BaseException as exc:
        logger.error("%s", exc.message)
        return exc.exit_code
    except Exception:
        logger.exception("unexpected failure")
        return 1


if __name__ == "__main__":
    sys.exit(main())
