from typing import NamedTuple

import numpy as np

from microgrid.core.exceptions import DimensionMismatchException
from microgrid.schemas.catalog import DieselGenSpec, Technology
from microgrid.schemas.problem import PlanningProblem
from microgrid.schemas.profiles import PiecewiseCurve
from microgrid.schemas.report import ObjectiveBreakdown
from microgrid.schemas.solution import PlanSolution
from microgrid.usecases.profiles import linearize_fuel_curve


def npc_capital(unit_cost: float, capacity: float, year: int,
                r: float) -> float:
    """
    Custo de capital em valor presente de uma adição no ano `year`.

    Args:
        unit_cost (float): Custo unitário ($/kW, $/kWh ou $/unidade).
        capacity (float): Capacidade (ou quantidade) adicionada.
        year (int): Ano da adição (>= 1).
        r (float): Taxa de desconto.

    Returns:
        float: `unit_cost·capacity / (1+r)^(year−1)`.
    """
    if year < 1:
        raise ValueError("year must be >= 1")
    return unit_cost * capacity / (1.0 + r) ** (year - 1)


class CostTerm(NamedTuple):
    technology: str
    year: int
    kind: str
    value: float
    litres: float = 0.0


def replacement_install_year(problem: PlanningProblem) -> int | None:
    """
    Ano de instalação dos eletrolisadores substituídos no ano
    `el_replacement_year`, ou `None` quando a troca cai fora do horizonte.
    """
    year = problem.scenario.el_replacement_year
    h2 = problem.catalog.hydrogen
    if year is None or h2 is None:
        return None
    install = year - int(round(h2.el_lifetime_y))
    if install < 1 or year > problem.assumptions.horizon_years:
        return None
    return install


def _pooled_fuel(spec: DieselGenSpec, curve: PiecewiseCurve, power: float,
                 online: float) -> tuple[float, float]:
    # carga dividida igualmente entre as unidades ligadas
    if online <= 1e-9 or power <= 1e-9:
        return 0.0, 0.0
    lo, hi = curve.domain
    per_unit = min(max(power / online, lo), hi)
    exact = spec.fuel_a * per_unit ** 2 + spec.fuel_b * per_unit + spec.fuel_c
    return online * curve.evaluate(per_unit), online * exact


def objective_terms(plan: PlanSolution,
                    problem: PlanningProblem) -> list[CostTerm]:
    """
    Termos do objetivo (capital, combustível, O&M) por tecnologia e ano,
    recalculados a partir do plano.

    O combustível aparece duas vezes: `fuel` pela curva linearizada e
    `fuel_exact` pela quadrática; `litres` acompanha o termo exato.
    """
    a = problem.assumptions
    catalog = problem.catalog
    if (plan.horizon_years != a.horizon_years
            or plan.rep_hours != a.rep_hours):
        raise DimensionMismatchException(
            message=f"plan covers {plan.horizon_years} y × {plan.rep_hours} h,"
                    f" problem has {a.horizon_years} y × {a.rep_hours} h")

    lam, hours = a.days_per_month, a.rep_hours
    terms: list[CostTerm] = []
    curves = {
        spec.id: linearize_fuel_curve(spec, a.fuel_segments)
        for spec in catalog.existing_diesel + catalog.new_diesel
    }

    for y in range(1, a.horizon_years + 1):
        disc = a.discount(y)
        k = y - 1

        for tech, specs in ((Technology.EXISTING_DIESEL,
                             catalog.existing_diesel),
                            (Technology.NEW_DIESEL, catalog.new_diesel)):
            for spec in specs:
                power = plan.series("P", spec.id)[k]
                state = plan.series("U", spec.id)[k]
                if tech is Technology.NEW_DIESEL:
                    terms.append(CostTerm(tech.value, y, "capital", npc_capital(
                        spec.capital_cost, plan.yearly("additions", spec.id)[k],
                        y, a.discount_rate)))
                    online = plan.yearly("installed", spec.id)[k] / spec.rated_kw
                else:
                    online = 1.0
                piecewise = exact = 0.0
                for h in range(hours):
                    if state[h] < 0.5:
                        continue
                    pw, ex = _pooled_fuel(spec, curves[spec.id], power[h], online)
                    piecewise += pw
                    exact += ex
                scale = lam * a.diesel_price * disc
                terms.append(CostTerm(tech.value, y, "fuel", scale * piecewise))
                terms.append(CostTerm(tech.value, y, "fuel_exact",
                                      scale * exact, lam * exact))
                terms.append(CostTerm(tech.value, y, "om",
                                      lam * spec.om_cost * disc * power.sum()))

        for tech, spec in ((Technology.SOLAR, catalog.solar),
                           (Technology.WIND, catalog.wind),
                           (Technology.BATTERY, catalog.battery)):
            if spec is None:
                continue
            unit = tech.value
            terms.append(CostTerm(unit, y, "capital", npc_capital(
                spec.capital_cost, plan.yearly("additions", unit)[k], y,
                a.discount_rate)))
            terms.append(CostTerm(unit, y, "om", hours * spec.om_cost * disc
                                  * plan.yearly("installed", unit)[k]))

        h2 = catalog.hydrogen
        if h2 is not None:
            tech = Technology.HYDROGEN.value
            for unit, cost in (("fuel_cell", h2.fc_cost),
                               ("electrolizer", h2.el_cost),
                               ("tank", h2.tank_cost)):
                terms.append(CostTerm(tech, y, "capital", npc_capital(
                    cost, plan.yearly("counts", unit)[k], y, a.discount_rate)))
            fc_power = plan.series("PF", "fuel_cell")[k].sum()
            om = (lam * h2.fc_om_per_h / h2.fc_kw * fc_power
                  + h2.el_om_per_year / h2.el_kw
                  * plan.yearly("installed", "electrolizer")[k]
                  + h2.tank_om_per_year / h2.tank_kg
                  * plan.yearly("installed", "tank")[k])
            terms.append(CostTerm(tech, y, "om", disc * om))

    install = replacement_install_year(problem)
    if install is not None:
        year = problem.scenario.el_replacement_year
        replaced = plan.yearly("counts", "electrolizer")[install - 1]
        terms.append(CostTerm(Technology.HYDROGEN.value, year, "capital",
                              npc_capital(catalog.hydrogen.el_cost, replaced,
                                          year, a.discount_rate)))
    return terms


def recompute_objective(plan: PlanSolution,
                        problem: PlanningProblem) -> ObjectiveBreakdown:
    """
    Reavalia o objetivo de um plano fora da matriz do modelo.

    Raises:
        DimensionMismatchException: Se as dimensões do plano não
        corresponderem às do problema.
    """
    sums = {"capital": 0.0, "fuel": 0.0, "fuel_exact": 0.0, "om": 0.0}
    for term in objective_terms(plan, problem):
        sums[term.kind] += term.value
    return ObjectiveBreakdown(**{key: float(np.float64(value))
                                 for key, value in sums.items()})
