"""
Despacho guloso por ordem de mérito para capacidades fixas.

Serve de cota superior para o ótimo: qualquer despacho viável produzido
aqui custa pelo menos o objetivo ótimo do mesmo problema.
"""
import logging

import numpy as np

from microgrid.models.objective import recompute_objective
from microgrid.models.scenario import H2_UNITS, unit_technologies
from microgrid.schemas.catalog import DieselGenSpec, Technology
from microgrid.schemas.oracle import DispatchResult
from microgrid.schemas.problem import PlanningProblem
from microgrid.schemas.solution import PlanSolution
from microgrid.usecases.catalog import unit_limits
from microgrid.usecases.profiles import (
    fuel_rate,
    solar_unit_output,
    wind_unit_output,
)

logger = logging.getLogger(__name__)

TOL = 1e-7


class Infeasible(Exception):
    pass


class _Dispatcher:
    def __init__(self, problem: PlanningProblem,
                 capacities: dict[str, list[float]]) -> None:
        self.problem = problem
        self.a = a = problem.assumptions
        self.catalog = catalog = problem.catalog
        self.scenario = problem.scenario
        self.years = range(1, a.horizon_years + 1)
        self.hours = range(1, a.rep_hours + 1)
        self.allowed = self.scenario.allowed_tech & catalog.technologies()

        self.installed = {
            unit: np.asarray(values, dtype=float)
            for unit, values in capacities.items()
            if np.any(np.asarray(values, dtype=float) > TOL)
        }
        self.sizes = self._module_sizes()
        load = problem.profiles.load.array()
        self.demand = {y: load * (1 + a.load_growth) ** (y - 1)
                       for y in self.years}
        self.series: dict[str, np.ndarray] = {}
        self.terminal: dict[str, float] = {}

    def _module_sizes(self) -> dict[str, float]:
        catalog = self.catalog
        sizes = {spec.id: spec.rated_kw for spec in catalog.new_diesel}
        if catalog.wind is not None:
            sizes["wind"] = catalog.wind.rated_kw
        if catalog.battery is not None:
            sizes["battery"] = catalog.battery.module_kwh
        if catalog.hydrogen is not None:
            h2 = catalog.hydrogen
            sizes.update(fuel_cell=h2.fc_kw, electrolizer=h2.el_kw,
                         tank=h2.tank_kg)
        return sizes

    def capacity(self, unit: str, year: int) -> float:
        values = self.installed.get(unit)
        return 0.0 if values is None else float(values[year - 1])

    def additions(self, unit: str) -> np.ndarray:
        values = self.installed.get(unit, np.zeros(len(self.years)))
        return np.diff(values, prepend=0.0)

    def put(self, name: str, y: int, h: int, value: float) -> None:
        series = self.series.setdefault(
            name, np.zeros((len(self.years), len(self.hours))))
        series[y - 1, h - 1] = value

    def check_capacities(self) -> None:
        """
        Regras sobre as capacidades: tecnologia permitida, módulos inteiros,
        limites, janelas de investimento e inclusão mínima.
        """
        a, scenario = self.a, self.scenario
        owners = unit_technologies(self.problem)
        limits = unit_limits(self.problem)
        new_ids = {spec.id for spec in self.catalog.new_diesel}
        for unit, values in self.installed.items():
            owner = owners.get(unit)
            if owner is None:
                raise Infeasible(f"unknown unit {unit}")
            if owner not in self.allowed:
                raise Infeasible(f"{unit} is not allowed in scenario "
                                 f"{scenario.id}")
            added = self.additions(unit)
            if np.any(added < -TOL):
                raise Infeasible(f"{unit} capacity decreases")
            window = (a.diesel_invest_window if unit in new_ids
                      else a.res_invest_window)
            for y in self.years:
                if added[y - 1] > TOL and y not in window:
                    raise Infeasible(f"{unit} added outside its window in "
                                     f"year {y}")
            size = self.sizes.get(unit)
            if size is None:
                total = values[-1]
            else:
                counts = added / size
                if np.any(np.abs(counts - np.round(counts)) > 1e-6):
                    raise Infeasible(f"{unit} is not a whole number of modules")
                if unit in new_ids and np.any(np.round(counts) > 1):
                    raise Infeasible(f"more than one {unit} in a year")
                total = float(np.round(counts).sum())
            if total > limits.get(unit, np.inf) + 1e-6:
                raise Infeasible(f"{unit} exceeds its limit")

        if len(new_ids) > 1:
            added = sum((self.additions(unit) > TOL).astype(int)
                        for unit in new_ids)
            if np.any(added > 1):
                raise Infeasible("more than one new diesel type in a year")

        inclusion = scenario.min_inclusion
        if inclusion.battery and self.capacity("battery", len(self.years)) <= TOL:
            raise Infeasible("battery inclusion")
        if inclusion.hydrogen or scenario.mandatory_h2_year1:
            for unit in H2_UNITS:
                year = 1 if scenario.mandatory_h2_year1 else len(self.years)
                if self.capacity(unit, year) <= TOL:
                    raise Infeasible(f"{unit} inclusion")

    def _diesel_units(self, y: int) -> list[tuple[DieselGenSpec, float]]:
        # (especificação, capacidade disponível) em ordem de mérito
        if self.scenario.diesel_reserve_only:
            return []
        units = []
        if Technology.EXISTING_DIESEL in self.allowed:
            for spec in self.catalog.existing_diesel:
                if not spec.standby_parity.is_standby(y):
                    units.append((spec, spec.rated_kw))
        if Technology.NEW_DIESEL in self.allowed:
            for spec in self.catalog.new_diesel:
                if self.capacity(spec.id, y) > TOL:
                    units.append((spec, self.capacity(spec.id, y)))
        return sorted(units, key=lambda item: (
            fuel_rate(item[0], item[0].rated_kw) / item[0].rated_kw,
            item[0].id))

    def run(self) -> PlanSolution:
        a, catalog = self.a, self.catalog
        self.check_capacities()
        problem = self.problem
        solar = (solar_unit_output(problem.profiles.irradiance.array(),
                                   problem.profiles.cell_temperature.array(),
                                   catalog.solar)
                 if catalog.solar is not None else None)
        wind = (wind_unit_output(problem.profiles.wind_speed.array(),
                                 catalog.wind) / catalog.wind.rated_kw
                if catalog.wind is not None else None)
        battery, h2 = catalog.battery, catalog.hydrogen

        soc = battery.soc0_frac * self.additions("battery")[0] if battery else 0.0
        tank = h2.tank_min_frac * self.additions("tank")[0] if h2 else 0.0
        cycles = (battery.cycle_life * self.additions("battery").sum()
                  if battery else 0.0)
        hours_cap = a.rep_hours * (1 - a.maintenance_frac)
        lifetime: dict[str, float] = {}
        existing_kw = (sum(spec.rated_kw for spec in catalog.existing_diesel)
                       if Technology.EXISTING_DIESEL in self.allowed else 0.0)
        new_ids = [spec.id for spec in catalog.new_diesel]

        for y in self.years:
            ib, ifc = self.capacity("battery", y), self.capacity("fuel_cell", y)
            iel, iq = (self.capacity("electrolizer", y),
                       self.capacity("tank", y))
            used: dict[str, int] = {}
            units = self._diesel_units(y)
            firm = existing_kw + ifc + sum(self.capacity(u, y) for u in new_ids)
            solar_energy = 0.0
            for h in self.hours:
                d = float(self.demand[y][h - 1])
                self.put("SB_battery", y, h, soc)
                self.put("SQ_tank", y, h, tank)

                # a reserva limita o quanto de RES pode ser usado
                slack = soc + firm - (1 + a.reserve_load) * d
                if slack < -TOL:
                    raise Infeasible(f"reserve short in year {y} hour {h}")
                ps_av = (float(solar[h - 1]) * self.capacity("solar", y)
                         if solar is not None else 0.0)
                pw_av = (float(wind[h - 1]) * self.capacity("wind", y)
                         if wind is not None else 0.0)
                ps = min(ps_av, slack / a.reserve_solar) if a.reserve_solar else ps_av
                slack -= a.reserve_solar * ps
                pw = min(pw_av, max(slack, 0.0) / a.reserve_wind) if a.reserve_wind else pw_av
                if not a.curtailment and (ps < ps_av - TOL or pw < pw_av - TOL):
                    raise Infeasible(f"reserve requires curtailment in year {y}")

                bc = bd = pf = px = 0.0
                net = d - ps - pw
                commit: dict[str, float] = {}
                if net > TOL:
                    if battery is not None and ib > TOL:
                        bd = min(net, battery.discharge_limit_frac * ib,
                                 a.big_m,
                                 (soc - battery.dod_frac * ib) * battery.eta_dch,
                                 cycles)
                        bd = bd if bd >= 1.0 else 0.0
                        net -= bd
                    if h2 is not None and ifc > TOL:
                        pf = max(0.0, min(net, ifc, (tank - h2.tank_min_frac * iq)
                                          / h2.kg_per_kwh_fuel_cell))
                        net -= pf
                    for spec, cap in units:
                        if net <= TOL:
                            break
                        if used.get(spec.id, 0) + 1 > hours_cap + 1e-9:
                            continue
                        if (a.days_per_month * (lifetime.get(spec.id, 0) + 1)
                                > spec.lifetime_h + 1e-9):
                            continue
                        lo = spec.min_load_frac * cap
                        p = max(min(net, cap), lo)
                        commit[spec.id] = p
                        net -= p
                    if net > TOL:
                        raise Infeasible(f"unserved load in year {y} hour {h}")
                    if net < -TOL:
                        # mínimo técnico acima da demanda: recua o armazenamento
                        surplus = -net
                        cut = min(surplus, pf)
                        pf, surplus = pf - cut, surplus - cut
                        cut = min(surplus, bd)
                        bd, surplus = bd - cut, surplus - cut
                        if 0.0 < bd < 1.0:
                            bd, surplus = 0.0, surplus + bd
                        net = -surplus

                if net < -TOL:
                    surplus = -net
                    if battery is not None and ib > TOL and bd == 0.0:
                        bc = min(surplus, battery.charge_limit_frac * ib,
                                 a.big_m, (ib - soc) / battery.eta_ch,
                                 cycles - bd)
                        bc = bc if bc >= 1.0 else 0.0
                        surplus -= bc
                    if h2 is not None and iel > TOL and pf == 0.0:
                        px = max(0.0, min(surplus, iel,
                                          (h2.tank_max_frac * iq - tank)
                                          / h2.kg_per_kwh_electrolysis))
                        surplus -= px
                    if surplus > TOL and not a.curtailment:
                        raise Infeasible(f"surplus without curtailment in "
                                         f"year {y} hour {h}")
                    cut = min(surplus, pw)
                    pw, surplus = pw - cut, surplus - cut
                    cut = min(surplus, ps)
                    ps, surplus = ps - cut, surplus - cut
                    if surplus > TOL:
                        raise Infeasible(f"cannot absorb surplus in year {y} "
                                         f"hour {h}")

                cycles -= bc + bd
                if battery is not None:
                    soc += battery.eta_ch * bc - bd / battery.eta_dch
                if h2 is not None:
                    tank += (h2.kg_per_kwh_electrolysis * px
                             - h2.kg_per_kwh_fuel_cell * pf)
                for spec, cap in units:
                    on = spec.id in commit
                    self.put(f"U_{spec.id}", y, h, 1.0 if on else 0.0)
                    self.put(f"P_{spec.id}", y, h, commit.get(spec.id, 0.0))
                    if spec.id in new_ids:
                        self.put(f"W_{spec.id}", y, h, cap if on else 0.0)
                    if on:
                        used[spec.id] = used.get(spec.id, 0) + 1
                        lifetime[spec.id] = lifetime.get(spec.id, 0) + 1
                for name, value in (("PS_solar", ps), ("PW_wind", pw),
                                    ("BC_battery", bc), ("BD_battery", bd),
                                    ("PF_fuel_cell", pf),
                                    ("PX_electrolizer", px)):
                    self.put(name, y, h, value)
                self.put("UC_battery", y, h, 1.0 if bc > 0 else 0.0)
                self.put("UD_battery", y, h, 1.0 if bd > 0 else 0.0)
                solar_energy += ps

            if (self.scenario.min_inclusion.solar and solar_energy
                    < a.solar_min_share * float(self.demand[y].sum()) - 1e-6):
                raise Infeasible(f"solar share not met in year {y}")
            if y < len(self.years):
                if battery is not None:
                    soc += battery.soc0_frac * self.additions("battery")[y]
                if h2 is not None:
                    tank += h2.tank_min_frac * self.additions("tank")[y]

        self.terminal = {"SB_battery": soc, "SQ_tank": tank}
        return self._plan()

    def _plan(self) -> PlanSolution:
        years, hours = len(self.years), len(self.hours)
        tables = {"additions": {}, "counts": {}, "installed": {}}
        units = {"solar": Technology.SOLAR, "wind": Technology.WIND,
                 "battery": Technology.BATTERY,
                 **{unit: Technology.HYDROGEN for unit in H2_UNITS},
                 **{spec.id: Technology.NEW_DIESEL
                    for spec in self.catalog.new_diesel}}
        for unit, tech in units.items():
            if tech not in self.allowed:
                continue
            installed = self.installed.get(unit, np.zeros(years))
            added = np.diff(installed, prepend=0.0)
            tables["installed"][unit] = installed.tolist()
            tables["additions"][unit] = added.tolist()
            if unit in self.sizes:
                tables["counts"][unit] = np.round(
                    added / self.sizes[unit]).tolist()

        keep = {"SB_battery": Technology.BATTERY, "BC_battery": Technology.BATTERY,
                "BD_battery": Technology.BATTERY, "UC_battery": Technology.BATTERY,
                "UD_battery": Technology.BATTERY, "PS_solar": Technology.SOLAR,
                "PW_wind": Technology.WIND, "SQ_tank": Technology.HYDROGEN,
                "PF_fuel_cell": Technology.HYDROGEN,
                "PX_electrolizer": Technology.HYDROGEN}
        hourly = {name: series.tolist() for name, series in self.series.items()
                  if name not in keep or keep[name] in self.allowed}
        terminal = {name: value for name, value in self.terminal.items()
                    if keep[name] in self.allowed}
        return PlanSolution(
            scenario_id=self.scenario.id, horizon_years=years,
            rep_hours=hours, additions=tables["additions"],
            counts=tables["counts"], installed=tables["installed"],
            hourly=hourly, terminal=terminal, verified=False)


def simulate_dispatch(capacities: dict[str, list[float]],
                      problem: PlanningProblem) -> DispatchResult:
    """
    Opera o sistema hora a hora com regras de mérito: renováveis primeiro,
    depois armazenamento (bateria, célula a combustível) e diesel por último,
    em ordem de consumo específico a plena carga.

    Excedentes carregam a bateria, depois o eletrolisador, e o resto é
    cortado. A reserva de cada hora limita quanta energia renovável entra.
    Inviabilidade é um resultado, não um erro.

    Args:
        capacities (dict[str, list[float]]): Capacidade instalada por unidade
        e ano (kW, kWh ou kg), como em `PlanSolution.installed`.
        problem (PlanningProblem): Problema a operar.

    Returns:
        DispatchResult: Viabilidade, custo total (o mesmo objetivo do modelo,
        recalculado) e o plano produzido.
    """
    for unit, values in capacities.items():
        if any(value < -TOL for value in values):
            raise ValueError(f"negative capacity for {unit}")
    dispatcher = _Dispatcher(problem, capacities)
    try:
        plan = dispatcher.run()
    except Infeasible as exc:
        logger.debug("dispatch infeasible: %s", exc)
        return DispatchResult(feasible=False, reason=str(exc))
    cost = recompute_objective(plan, problem).total
    plan = plan.model_copy(update={"objective": cost})
    return DispatchResult(feasible=True, cost=cost, plan=plan)
