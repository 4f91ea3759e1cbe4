import asyncio
import logging
from pathlib import Path
from typing import Literal, NamedTuple

from microgrid.core.exceptions import (
    InfeasibleException,
    LimitHitException,
    ProblemValidationException,
)
from microgrid.models.builder import build_model
from microgrid.schemas.plan import (
    CompareRequest,
    PlanRequest,
    PlanResponse,
    ValidateResponse,
)
from microgrid.schemas.problem import PlanningProblem
from microgrid.schemas.report import ReductionRow, ScenarioReport
from microgrid.schemas.solution import PlanSolution, SolveOptions, SolveStatus
from microgrid.solvers.extract import extract_plan
from microgrid.solvers.mps import export_model
from microgrid.solvers.solve import solve
from microgrid.usecases.catalog import (
    builtin_sanikiluaq,
    load_problem,
    parse_document,
    problem_from_document,
    validate_problem,
)
from microgrid.usecases.report import build_report, compare

logger = logging.getLogger(__name__)


class ScenarioRun(NamedTuple):
    problem: PlanningProblem
    plan: PlanSolution
    report: ScenarioReport


class PlanUsecase:
    """
    Orquestra a montagem, resolução e relato de cenários de planejamento.
    """

    def load(self, scenario_id: str, builtin: str | None = None,
             path: Path | str | None = None, document: str | None = None,
             years: int | None = None,
             hours: int | None = None) -> PlanningProblem:
        """
        Carrega o problema de um cenário a partir do conjunto embutido, de
        um arquivo ou de um documento YAML, reduzindo-o quando pedido.
        """
        if builtin is not None:
            if builtin != "sanikiluaq":
                raise ProblemValidationException(
                    message=f"unknown builtin problem {builtin!r}")
            problem = builtin_sanikiluaq(scenario_id)
        elif path is not None:
            problem = load_problem(path, scenario_id)
        elif document is not None:
            problem = problem_from_document(
                parse_document(document, "<request>"), scenario_id)
        else:
            raise ProblemValidationException(message="no problem given")
        if years is not None or hours is not None:
            problem = problem.reduced(years=years, hours=hours)
        return problem

    def run(self, problem: PlanningProblem,
            opts: SolveOptions | None = None) -> ScenarioRun:
        """
        Resolve um cenário e monta seu relatório.

        Quando o resolvedor para por limite com uma solução incumbente, o
        plano é devolvido com status `limit-hit`.

        Raises:
            InfeasibleException: Se o modelo for inviável ou ilimitado.
            LimitHitException: Se o limite foi atingido sem incumbente.
            VerificationException: Se a solução falhar na verificação.
        """
        instance, index = build_model(problem)
        solution = solve(instance, opts)
        scenario = problem.scenario.id
        if not solution.has_incumbent:
            if solution.status is SolveStatus.LIMIT_HIT:
                raise LimitHitException(
                    message=f"scenario {scenario}: {solution.message or 'limit reached'}"
                            " without an incumbent")
            raise InfeasibleException(
                message=f"scenario {scenario} is {solution.status.value}")

        plan = extract_plan(solution, index, problem, instance)
        report = build_report(plan, problem)
        logger.info("scenario %s: %s, total NPC %.2f $", scenario,
                    plan.status.value, report.cost.total)
        return ScenarioRun(problem=problem, plan=plan, report=report)

    async def run_many(self, problems: list[PlanningProblem],
                       opts: SolveOptions | None = None) -> list[ScenarioRun]:
        return list(await asyncio.gather(*(
            asyncio.to_thread(self.run, problem, opts) for problem in problems)))

    def export(self, problem: PlanningProblem, path: Path | str,
               fmt: Literal["mps", "lp"] | None = None) -> Path:
        path = Path(path)
        fmt = fmt or ("lp" if path.suffix.lower() == ".lp" else "mps")
        instance, _ = build_model(problem)
        return export_model(instance, fmt, path)

    def _problems(self, body: PlanRequest) -> list[PlanningProblem]:
        return [
            self.load(scenario, builtin=body.builtin, document=body.problem,
                      years=body.years, hours=body.hours)
            for scenario in body.scenarios
        ]

    async def plan(self, body: PlanRequest) -> PlanResponse:
        runs = await self.run_many(self._problems(body), body.options)
        reports = [run.report for run in runs]
        bau = next((r for r in reports if r.scenario_id == "BAU"), None)
        reductions = compare(reports, bau) if bau is not None else []
        return PlanResponse(reports=reports, reductions=reductions)

    async def compare(self, body: CompareRequest) -> list[ReductionRow]:
        bau = next((r for r in body.reports if r.scenario_id == body.bau_id),
                   None)
        if bau is None:
            raise ProblemValidationException(
                message=f"reports do not include the {body.bau_id} scenario")
        return compare(body.reports, bau)

    async def validate(self, body: PlanRequest) -> list[ValidateResponse]:
        responses = []
        for problem in self._problems(body):
            findings = validate_problem(problem)
            responses.append(ValidateResponse(
                scenario_id=problem.scenario.id,
                valid=not any(f.severity == "error" for f in findings),
                findings=findings))
        return responses


plan_usecase = PlanUsecase()
