import logging

import numpy as np

from microgrid.core.exceptions import ScenarioTechnologyException
from microgrid.models.milp import (
    ColumnKey,
    Family,
    MilpInstance,
    RowKey,
    Sense,
    VariableIndex,
)
from microgrid.models.objective import npc_capital, replacement_install_year
from microgrid.schemas.catalog import Technology
from microgrid.schemas.problem import PlanningProblem, ScenarioDefinition

logger = logging.getLogger(__name__)

RES_UNITS = ("solar", "wind", "battery", "fuel_cell", "electrolizer", "tank")
H2_UNITS = ("fuel_cell", "electrolizer", "tank")
DIESEL_FAMILIES = (Family.GEN_POWER, Family.ON_STATE)


def unit_technologies(problem: PlanningProblem) -> dict[str, Technology]:
    catalog = problem.catalog
    owners = {spec.id: Technology.EXISTING_DIESEL
              for spec in catalog.existing_diesel}
    owners.update({spec.id: Technology.NEW_DIESEL
                   for spec in catalog.new_diesel})
    owners.update({
        "solar": Technology.SOLAR,
        "wind": Technology.WIND,
        "battery": Technology.BATTERY,
        **{unit: Technology.HYDROGEN for unit in H2_UNITS},
    })
    return owners


def _require(index: VariableIndex, key: ColumnKey, scenario_id: str) -> int:
    column = index.get(key)
    if column is None:
        raise ScenarioTechnologyException(
            message=f"scenario {scenario_id} needs column {key.name()}, which "
                    f"the model does not have")
    return column


def apply_scenario(instance: MilpInstance, index: VariableIndex,
                   scenario: ScenarioDefinition,
                   problem: PlanningProblem) -> MilpInstance:
    """
    Aplica as restrições de um cenário a um modelo construído para o mesmo
    problema (altera a instância no lugar).

    Fixa em zero as colunas de tecnologias não permitidas e as adições fora
    das janelas de investimento, acrescenta as linhas de inclusão mínima
    (`Scn`), fixa o sistema de hidrogênio obrigatório do ano 1, cobra a
    troca de eletrolisadores e, em cenários de diesel só para reserva, fixa
    P e u dos geradores diesel em zero.

    Raises:
        ScenarioTechnologyException: Se o cenário referenciar uma tecnologia
        ausente do catálogo.
    """
    a = problem.assumptions
    absent = scenario.allowed_tech - problem.catalog.technologies()
    if absent:
        raise ScenarioTechnologyException(
            message=f"scenario {scenario.id} allows technologies absent from "
                    f"the catalog: {', '.join(sorted(t.value for t in absent))}")

    owners = unit_technologies(problem)
    new_diesel = {spec.id for spec in problem.catalog.new_diesel}
    diesel = new_diesel | {spec.id for spec in problem.catalog.existing_diesel}
    for column, key in enumerate(index.keys()):
        tech = owners.get(key.unit)
        if tech is not None and tech not in scenario.allowed_tech:
            instance.fix(column, 0.0)
            continue
        if key.family in (Family.COUNT, Family.ADDITION):
            if key.unit in RES_UNITS and key.year not in a.res_invest_window:
                instance.fix(column, 0.0)
            elif (key.unit in new_diesel
                  and key.year not in a.diesel_invest_window):
                instance.fix(column, 0.0)
        if (scenario.diesel_reserve_only and key.unit in diesel
                and key.family in DIESEL_FAMILIES):
            instance.fix(column, 0.0)

    years = range(1, a.horizon_years + 1)
    inclusion = scenario.min_inclusion
    if inclusion.battery:
        instance.add_row(RowKey("Scn", "battery").name(), [
            (_require(index, ColumnKey(Family.COUNT, "battery", y),
                      scenario.id), 1.0) for y in years], Sense.GE, 1.0)
    if inclusion.hydrogen:
        for unit in H2_UNITS:
            instance.add_row(RowKey("Scn", unit).name(), [
                (_require(index, ColumnKey(Family.COUNT, unit, y),
                          scenario.id), 1.0) for y in years], Sense.GE, 1.0)
    if inclusion.solar:
        load = problem.profiles.load.array()
        for y in years:
            energy = float(np.sum(load) * (1 + a.load_growth) ** (y - 1))
            instance.add_row(RowKey("Scn", "solar", y).name(), [
                (_require(index, ColumnKey(Family.SOLAR_POWER, "solar", y, h),
                          scenario.id), 1.0)
                for h in range(1, a.rep_hours + 1)],
                Sense.GE, a.solar_min_share * energy)

    if scenario.mandatory_h2_year1:
        for unit in H2_UNITS:
            instance.fix(_require(index, ColumnKey(Family.COUNT, unit, 1),
                                  scenario.id), 1.0)

    install = replacement_install_year(problem.with_scenario(scenario))
    if install is not None:
        column = _require(index, ColumnKey(Family.COUNT, "electrolizer",
                                           install), scenario.id)
        instance.add_cost(column, npc_capital(
            problem.catalog.hydrogen.el_cost, 1.0,
            scenario.el_replacement_year, a.discount_rate))
    elif scenario.el_replacement_year is not None:
        logger.info("electrolizer replacement in year %d falls outside the "
                    "%d-year horizon, not charged",
                    scenario.el_replacement_year, a.horizon_years)
    return instance
