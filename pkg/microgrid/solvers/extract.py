import logging

import numpy as np

from microgrid.core.exceptions import NoIncumbentException, VerificationException
from microgrid.models.milp import ColumnKey, Family, MilpInstance, VariableIndex
from microgrid.schemas.problem import PlanningProblem
from microgrid.schemas.solution import MilpSolution, PlanSolution, SolveStatus
from microgrid.solvers.feasibility import check_feasibility
from microgrid.usecases.profiles import linearize_fuel_curve

logger = logging.getLogger(__name__)

YEARLY_TABLES = {
    Family.COUNT: "counts",
    Family.ADDITION: "additions",
    Family.INSTALLED: "installed",
}


def extract_plan(solution: MilpSolution, index: VariableIndex,
                 problem: PlanningProblem, instance: MilpInstance,
                 tol: float = 1e-6) -> PlanSolution:
    """
    Converte os valores de uma solução em um plano estruturado.

    As colunas inteiras são arredondadas e a solução arredondada é
    verificada de novo por `check_feasibility` antes de virar plano.

    Raises:
        NoIncumbentException: Se a solução não trouxer valores.
        VerificationException: Se a solução arredondada violar alguma
        restrição.
    """
    if not solution.has_incumbent or solution.status in (
            SolveStatus.INFEASIBLE, SolveStatus.UNBOUNDED):
        raise NoIncumbentException()

    values = solution.array().copy()
    integral = instance.integral()
    values[integral] = np.round(values[integral])
    report = check_feasibility(instance, values, tol)
    if not report.passed:
        worst = report.violated_rows[:3] + report.violated_columns[:3]
        raise VerificationException(
            message="rounded solution violates "
                    + ", ".join(getattr(v, "row", None) or v.column
                                for v in worst)
                    + f" (tags {', '.join(sorted(report.tags())) or '-'})")

    a = problem.assumptions
    years, hours = a.horizon_years, a.rep_hours
    tables: dict[str, dict[str, list[float]]] = {
        name: {} for name in YEARLY_TABLES.values()}
    hourly: dict[str, np.ndarray] = {}
    terminal: dict[str, float] = {}
    for column, key in enumerate(index.keys()):
        value = float(values[column])
        if key.family in YEARLY_TABLES:
            table = tables[YEARLY_TABLES[key.family]]
            table.setdefault(key.unit, [0.0] * years)[key.year - 1] = value
        elif key.family is Family.SEGMENT:
            continue
        elif key.hour is not None:
            name = f"{key.family.value}_{key.unit}"
            if key.hour > hours:
                terminal[name] = value
                continue
            series = hourly.setdefault(name, np.zeros((years, hours)))
            series[key.year - 1, key.hour - 1] = value

    plan = PlanSolution(
        scenario_id=problem.scenario.id, horizon_years=years, rep_hours=hours,
        status=solution.status, objective=instance.objective(values),
        additions=tables["additions"], counts=tables["counts"],
        installed=tables["installed"],
        hourly={name: series.tolist() for name, series in hourly.items()},
        terminal=terminal, verified=True)
    logger.info("extracted plan for scenario %s, objective %.10g",
                plan.scenario_id, plan.objective)
    return plan


def _derived_columns(plan: PlanSolution, index: VariableIndex,
                     problem: PlanningProblem, values: np.ndarray) -> None:
    # w = I·u, F pela curva linearizada e Z pela faixa de operação
    a = problem.assumptions
    catalog = problem.catalog
    new_ids = {spec.id for spec in catalog.new_diesel}
    for spec in catalog.existing_diesel + catalog.new_diesel:
        if not index.columns(Family.FUEL, spec.id):
            continue
        curve = linearize_fuel_curve(spec, a.fuel_segments)
        power = plan.series("P", spec.id)
        state = plan.series("U", spec.id)
        keep_fuel = f"F_{spec.id}" in plan.hourly
        keep_online = f"W_{spec.id}" in plan.hourly
        lo, hi = curve.domain
        for y in range(1, a.horizon_years + 1):
            if spec.id in new_ids:
                online = plan.yearly("installed", spec.id)[y - 1] / spec.rated_kw
            else:
                online = 1.0
            for h in range(1, a.rep_hours + 1):
                on = state[y - 1, h - 1] >= 0.5
                if spec.id in new_ids and not keep_online:
                    values[index[ColumnKey(Family.ONLINE_CAPACITY, spec.id, y, h)]] = (
                        online * spec.rated_kw if on else 0.0)
                if not on:
                    if not keep_fuel:
                        values[index[ColumnKey(Family.FUEL, spec.id, y, h)]] = 0.0
                    continue
                p = power[y - 1, h - 1]
                if online > 1e-9:
                    segment = curve.segment_of(min(max(p / online, lo), hi))
                else:
                    segment = 0
                chords = [s * p + i * online
                          for s, i in zip(curve.slopes, curve.intercepts)]
                convex = curve.convex or curve.segments == 1
                if not keep_fuel:
                    values[index[ColumnKey(Family.FUEL, spec.id, y, h)]] = max(
                        0.0, max(chords) if convex else chords[segment])
                if not convex:
                    values[index[ColumnKey(Family.SEGMENT, spec.id, y, h,
                                           segment + 1)]] = 1.0


def plan_to_values(plan: PlanSolution, index: VariableIndex,
                   problem: PlanningProblem) -> np.ndarray:
    """
    Reconstrói o vetor de colunas de um plano.

    Colunas que o plano não traz são derivadas: w = I·u para os diesel
    novos, o combustível F pela curva linearizada e as binárias de segmento
    Z pela faixa de operação de cada hora.
    """
    values = np.zeros(len(index))
    for column, key in enumerate(index.keys()):
        if key.family in YEARLY_TABLES:
            table = getattr(plan, YEARLY_TABLES[key.family])
            if key.unit in table:
                values[column] = table[key.unit][key.year - 1]
        elif key.hour is not None and key.family is not Family.SEGMENT:
            name = f"{key.family.value}_{key.unit}"
            if key.hour > plan.rep_hours:
                values[column] = plan.terminal.get(name, 0.0)
            elif name in plan.hourly:
                values[column] = plan.hourly[name][key.year - 1][key.hour - 1]
    _derived_columns(plan, index, problem, values)
    return values
