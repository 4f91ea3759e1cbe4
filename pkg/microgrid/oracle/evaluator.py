"""
Avaliador independente de uma atribuição discreta.

Dada uma escolha para cada decisão inteira do planejamento (quantidade de
módulos por ano, liga/desliga e segmento de cada gerador diesel, modo da
bateria em cada hora), monta e resolve o LP contínuo restante diretamente
a partir do `PlanningProblem`, sem passar pelo construtor do modelo. As
checagens puramente discretas (horas de uso, inclusão mínima, janelas)
descartam a atribuição antes do LP.
"""
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy import sparse

from microgrid.models.objective import npc_capital, replacement_install_year
from microgrid.models.scenario import H2_UNITS
from microgrid.schemas.catalog import Technology
from microgrid.schemas.problem import PlanningProblem
from microgrid.schemas.solution import PlanSolution, SolveStatus
from microgrid.solvers import simplex
from microgrid.usecases.catalog import unit_limits
from microgrid.usecases.profiles import (
    linearize_fuel_curve,
    solar_unit_output,
    wind_unit_output,
)

IDLE, CHARGE, DISCHARGE = 0, 1, 2


class Slot(NamedTuple):
    """
    Uma decisão discreta: `kind` é `count`, `on` ou `mode`.

    Para `on`, o valor 0 é desligado e k >= 1 é ligado no segmento k
    (curvas côncavas) ou simplesmente ligado (valor 1).
    """
    kind: str
    unit: str
    year: int
    hour: int | None
    domain: tuple[int, ...]


@dataclass
class Evaluation:
    feasible: bool
    objective: float = math.inf
    reason: str = ""
    values: dict[str, float] = field(default_factory=dict)


class _LP:
    def __init__(self) -> None:
        self.names: dict[str, int] = {}
        self.cost: list[float] = []
        self.lb: list[float] = []
        self.ub: list[float] = []
        self.rows: list[dict[int, float]] = []
        self.senses: list[str] = []
        self.rhs: list[float] = []

    def var(self, name: str, lb: float = 0.0, ub: float = math.inf,
            cost: float = 0.0) -> int:
        self.names[name] = len(self.cost)
        self.cost.append(cost)
        self.lb.append(lb)
        self.ub.append(ub)
        return self.names[name]

    def constrain(self, terms: dict[int, float], sense: str, rhs: float) -> None:
        self.rows.append(terms)
        self.senses.append(sense)
        self.rhs.append(rhs)

    def solve(self) -> simplex.LPResult:
        n = len(self.cost)
        if not n:
            return simplex.LPResult(status=simplex.OPTIMAL, x=np.zeros(0),
                                    objective=0.0)
        cells = [(i, j, value) for i, terms in enumerate(self.rows)
                 for j, value in terms.items()]
        rows, cols, vals = zip(*cells) if cells else ((), (), ())
        matrix = sparse.csc_matrix(
            (np.asarray(vals, dtype=float),
             (np.asarray(rows, dtype=int), np.asarray(cols, dtype=int))),
            shape=(len(self.rows), n))
        return simplex.solve_lp(np.array(self.cost), matrix, self.senses,
                                np.array(self.rhs), np.array(self.lb),
                                np.array(self.ub))


class AssignmentEvaluator:
    """
    Dados pré-calculados do problema, compartilhados por todas as
    atribuições enumeradas.
    """
    def __init__(self, problem: PlanningProblem) -> None:
        self.problem = problem
        self.a = a = problem.assumptions
        self.catalog = catalog = problem.catalog
        scenario = problem.scenario
        self.years = list(range(1, a.horizon_years + 1))
        self.hours = list(range(1, a.rep_hours + 1))
        allowed = scenario.allowed_tech & catalog.technologies()
        self.allowed = allowed
        self.limits = unit_limits(problem)

        load = problem.profiles.load.array()
        self.demand = {y: load * (1 + a.load_growth) ** (y - 1)
                       for y in self.years}
        self.existing = (list(catalog.existing_diesel)
                         if Technology.EXISTING_DIESEL in allowed else [])
        self.new = (list(catalog.new_diesel)
                    if Technology.NEW_DIESEL in allowed else [])
        self.curves = {spec.id: linearize_fuel_curve(spec, a.fuel_segments)
                       for spec in self.existing + self.new}

        # tamanho do módulo e custo de capital por módulo
        self.modules: dict[str, tuple[float, float]] = {}
        for spec in self.new:
            self.modules[spec.id] = (spec.rated_kw,
                                     spec.capital_cost * spec.rated_kw)
        if Technology.WIND in allowed:
            wind = catalog.wind
            self.modules["wind"] = (wind.rated_kw,
                                    wind.capital_cost * wind.rated_kw)
            self.wind_per_kw = (wind_unit_output(
                problem.profiles.wind_speed.array(), wind) / wind.rated_kw)
        if Technology.BATTERY in allowed:
            battery = catalog.battery
            self.modules["battery"] = (battery.module_kwh,
                                       battery.capital_cost * battery.module_kwh)
        if Technology.HYDROGEN in allowed:
            h2 = catalog.hydrogen
            self.modules["fuel_cell"] = (h2.fc_kw, h2.fc_cost)
            self.modules["electrolizer"] = (h2.el_kw, h2.el_cost)
            self.modules["tank"] = (h2.tank_kg, h2.tank_cost)
        if Technology.SOLAR in allowed:
            self.solar_factor = solar_unit_output(
                problem.profiles.irradiance.array(),
                problem.profiles.cell_temperature.array(), catalog.solar)

    def _window(self, unit: str) -> object:
        if unit in {spec.id for spec in self.new}:
            return self.a.diesel_invest_window
        return self.a.res_invest_window

    def slots(self) -> list[Slot]:
        """
        Decisões discretas do problema, em ordem determinística.
        """
        a, scenario = self.a, self.problem.scenario
        slots = []
        for unit in self.modules:
            limit = int(self.limits[unit])
            binary = unit in {spec.id for spec in self.new}
            top = 1 if binary else limit
            for y in self.years:
                if y not in self._window(unit):
                    continue
                domain = tuple(range(0, top + 1))
                if (scenario.mandatory_h2_year1 and unit in H2_UNITS
                        and y == 1):
                    domain = (1,)
                slots.append(Slot("count", unit, y, None, domain))
        for spec in self.existing + self.new:
            curve = self.curves[spec.id]
            concave = not curve.convex and curve.segments > 1
            on = tuple(range(1, curve.segments + 1)) if concave else (1,)
            for y in self.years:
                standby = (spec in self.existing
                           and spec.standby_parity.is_standby(y))
                for h in self.hours:
                    if standby or scenario.diesel_reserve_only:
                        continue
                    slots.append(Slot("on", spec.id, y, h, (0, *on)))
        if "battery" in self.modules:
            for y in self.years:
                for h in self.hours:
                    slots.append(Slot("mode", "battery", y, h,
                                      (IDLE, CHARGE, DISCHARGE)))
        return slots

    def counts(self, choice: dict) -> dict[str, list[int]]:
        return {unit: [choice.get(("count", unit, y, None), 0)
                       for y in self.years] for unit in self.modules}

    def screen(self, choice: dict) -> str:
        """
        Motivo de descarte da atribuição, ou `""` quando passa nas
        checagens discretas.
        """
        a, scenario = self.a, self.problem.scenario
        counts = self.counts(choice)
        for unit, per_year in counts.items():
            if sum(per_year) > self.limits[unit] + 1e-9:
                return f"{unit} exceeds its module limit"
        if len(self.new) > 1:
            for k in range(len(self.years)):
                if sum(counts[spec.id][k] for spec in self.new) > 1:
                    return "more than one new diesel type in a year"

        inclusion = scenario.min_inclusion
        if inclusion.battery and sum(counts.get("battery", [0])) < 1:
            return "battery inclusion"
        if inclusion.hydrogen:
            for unit in H2_UNITS:
                if sum(counts.get(unit, [0])) < 1:
                    return f"{unit} inclusion"

        for spec in self.existing + self.new:
            installed = np.cumsum(counts.get(spec.id, [0] * len(self.years)))
            total = 0
            for y in self.years:
                on_hours = sum(1 for h in self.hours
                               if choice.get(("on", spec.id, y, h), 0))
                if on_hours > a.rep_hours * (1 - a.maintenance_frac) + 1e-9:
                    return f"{spec.id} maintenance hours in year {y}"
                if spec in self.new and on_hours and installed[y - 1] == 0:
                    return f"{spec.id} committed without capacity"
                total += on_hours
            if a.days_per_month * total > spec.lifetime_h + 1e-9:
                return f"{spec.id} lifetime hours"

        if "battery" in self.modules:
            installed = np.cumsum(counts["battery"])
            for y in self.years:
                for h in self.hours:
                    if (choice.get(("mode", "battery", y, h), IDLE) != IDLE
                            and installed[y - 1] == 0):
                        return "battery mode without capacity"
        return ""

    def evaluate(self, choice: dict) -> Evaluation:
        reason = self.screen(choice)
        if reason:
            return Evaluation(feasible=False, reason=reason)
        return self._solve(choice)

    def _solve(self, choice: dict) -> Evaluation:
        a, catalog, problem = self.a, self.catalog, self.problem
        lp = _LP()
        constant = 0.0
        counts = self.counts(choice)
        installed = {unit: np.cumsum(per_year) * self.modules[unit][0]
                     for unit, per_year in counts.items()}
        additions = {unit: np.asarray(per_year, dtype=float)
                     * self.modules[unit][0]
                     for unit, per_year in counts.items()}

        for unit, per_year in counts.items():
            size, capital = self.modules[unit]
            for y, n in zip(self.years, per_year):
                constant += npc_capital(capital, n, y, a.discount_rate)
        for unit, om in self._fixed_om().items():
            for y in self.years:
                constant += om * a.discount(y) * installed[unit][y - 1]
        install = replacement_install_year(problem)
        if install is not None and "electrolizer" in counts:
            constant += npc_capital(
                catalog.hydrogen.el_cost, counts["electrolizer"][install - 1],
                problem.scenario.el_replacement_year, a.discount_rate)

        balance = {(y, h): {} for y in self.years for h in self.hours}
        reserve = {(y, h): {} for y in self.years for h in self.hours}
        reserve_rhs = {
            (y, h): (1 + a.reserve_load) * self.demand[y][h - 1]
            - sum(spec.rated_kw for spec in self.existing)
            for y in self.years for h in self.hours
        }

        for spec in self.existing + self.new:
            new = spec in self.new
            curve = self.curves[spec.id]
            for y in self.years:
                disc = a.discount(y)
                online = installed[spec.id][y - 1] / spec.rated_kw if new else 1.0
                for h in self.hours:
                    if new:
                        reserve_rhs[y, h] -= installed[spec.id][y - 1]
                    state = choice.get(("on", spec.id, y, h), 0)
                    if not state:
                        continue
                    lo, hi = spec.min_kw * online, spec.rated_kw * online
                    concave = not curve.convex and curve.segments > 1
                    if concave:
                        k = state - 1
                        lo = max(lo, curve.breakpoints[k] * online)
                        hi = min(hi, curve.breakpoints[k + 1] * online)
                    fuel_price = a.days_per_month * a.diesel_price * disc
                    power = lp.var(f"P_{spec.id}_{y}_{h}", lo, hi,
                                   a.days_per_month * spec.om_cost * disc)
                    if concave:
                        lp.cost[power] += fuel_price * curve.slopes[k]
                        constant += fuel_price * curve.intercepts[k] * online
                    else:
                        fuel = lp.var(f"F_{spec.id}_{y}_{h}", cost=fuel_price)
                        for s, i in zip(curve.slopes, curve.intercepts):
                            lp.constrain({fuel: 1.0, power: -s}, ">=", i * online)
                    balance[y, h][power] = 1.0

        if Technology.SOLAR in self.allowed:
            self._solar(lp, balance, reserve)
        if "wind" in self.modules:
            for y in self.years:
                for h in self.hours:
                    available = float(self.wind_per_kw[h - 1]
                                      * installed["wind"][y - 1])
                    low = 0.0 if a.curtailment else available
                    power = lp.var(f"PW_wind_{y}_{h}", low, available)
                    balance[y, h][power] = 1.0
                    reserve[y, h][power] = -a.reserve_wind
        if "battery" in self.modules:
            reason = self._battery(lp, choice, installed["battery"],
                                   additions["battery"], balance, reserve)
            if reason:
                return Evaluation(feasible=False, reason=reason)
        if "fuel_cell" in self.modules:
            self._hydrogen(lp, installed, additions["tank"], balance)
            for (y, h) in reserve_rhs:
                reserve_rhs[y, h] -= installed["fuel_cell"][y - 1]

        for (y, h), terms in balance.items():
            if not terms:
                if self.demand[y][h - 1] > 1e-9:
                    return Evaluation(feasible=False, reason="no supply")
                continue
            lp.constrain(terms, "=", float(self.demand[y][h - 1]))
        for (y, h), terms in reserve.items():
            if terms:
                lp.constrain(terms, ">=", float(reserve_rhs[y, h]))
            elif reserve_rhs[y, h] > 1e-9:
                return Evaluation(feasible=False, reason="reserve")

        result = lp.solve()
        if result.status != simplex.OPTIMAL:
            return Evaluation(feasible=False, reason=f"LP {result.status}")
        values = {name: float(result.x[j]) for name, j in lp.names.items()}
        return Evaluation(feasible=True,
                          objective=float(result.objective) + constant,
                          values=values)

    def _fixed_om(self) -> dict[str, float]:
        # O&M por unidade de capacidade instalada e ano
        a, catalog = self.a, self.catalog
        om = {}
        if "wind" in self.modules:
            om["wind"] = a.rep_hours * catalog.wind.om_cost
        if "battery" in self.modules:
            om["battery"] = a.rep_hours * catalog.battery.om_cost
        if "fuel_cell" in self.modules:
            h2 = catalog.hydrogen
            om["electrolizer"] = h2.el_om_per_year / h2.el_kw
            om["tank"] = h2.tank_om_per_year / h2.tank_kg
        return om

    def _solar(self, lp: _LP, balance: dict, reserve: dict) -> None:
        a, spec = self.a, self.catalog.solar
        limit = self.limits["solar"]
        total = None
        installed = {}
        for y in self.years:
            ub = limit if y in a.res_invest_window else 0.0
            addition = lp.var(f"A_solar_{y}", 0.0, ub,
                              npc_capital(spec.capital_cost, 1.0, y,
                                          a.discount_rate))
            capacity = lp.var(f"I_solar_{y}", 0.0, limit,
                              a.rep_hours * spec.om_cost * a.discount(y))
            terms = {capacity: 1.0, addition: -1.0}
            if total is not None:
                terms[total] = -1.0
            lp.constrain(terms, "=", 0.0)
            total = installed[y] = capacity

        inclusion = self.problem.scenario.min_inclusion.solar
        for y in self.years:
            produced = {}
            for h in self.hours:
                power = lp.var(f"PS_solar_{y}_{h}")
                lp.constrain({power: 1.0,
                              installed[y]: -float(self.solar_factor[h - 1])},
                             "<=" if a.curtailment else "=", 0.0)
                balance[y, h][power] = 1.0
                reserve[y, h][power] = -a.reserve_solar
                produced[power] = 1.0
            if inclusion:
                lp.constrain(produced, ">=",
                             a.solar_min_share * float(self.demand[y].sum()))

    def _storage(self, lp: _LP, prefix: str, floor: np.ndarray,
                 ceiling: np.ndarray, start: np.ndarray,
                 flows: dict) -> dict:
        # estado no início de cada hora e estado final após a última hora
        last_year, last_hour = self.years[-1], self.hours[-1]
        states = {}
        for y in self.years:
            for h in self.hours:
                states[y, h] = lp.var(f"{prefix}_{y}_{h}", floor[y - 1],
                                      ceiling[y - 1])
        states[last_year, last_hour + 1] = lp.var(
            f"{prefix}_{last_year}_{last_hour + 1}", floor[-1], ceiling[-1])

        lp.constrain({states[1, 1]: 1.0}, "=", float(start[0]))
        for y in self.years:
            for h in self.hours:
                if h < last_hour:
                    after, rhs = states[y, h + 1], 0.0
                elif y < last_year:
                    after, rhs = states[y + 1, 1], float(start[y])
                else:
                    after, rhs = states[y, h + 1], 0.0
                terms = {after: 1.0, states[y, h]: -1.0}
                for column, coefficient in flows[y, h]:
                    terms[column] = terms.get(column, 0.0) - coefficient
                lp.constrain(terms, "=", rhs)
        return states

    def _battery(self, lp: _LP, choice: dict, installed: np.ndarray,
                 additions: np.ndarray, balance: dict, reserve: dict) -> str:
        a, spec = self.a, self.catalog.battery
        flows, throughput = {}, {}
        for y in self.years:
            for h in self.hours:
                mode = choice.get(("mode", "battery", y, h), IDLE)
                charge_ub = min(a.big_m, spec.charge_limit_frac * installed[y - 1])
                discharge_ub = min(a.big_m,
                                   spec.discharge_limit_frac * installed[y - 1])
                # o modo ativo exige ao menos 1 kW
                if ((mode == CHARGE and charge_ub < 1.0)
                        or (mode == DISCHARGE and discharge_ub < 1.0)):
                    return f"battery mode below 1 kW in year {y} hour {h}"
                charge = lp.var(f"BC_battery_{y}_{h}",
                                1.0 if mode == CHARGE else 0.0,
                                charge_ub if mode == CHARGE else 0.0)
                discharge = lp.var(f"BD_battery_{y}_{h}",
                                   1.0 if mode == DISCHARGE else 0.0,
                                   discharge_ub if mode == DISCHARGE else 0.0)
                flows[y, h] = [(charge, spec.eta_ch),
                               (discharge, -1.0 / spec.eta_dch)]
                balance[y, h][discharge] = 1.0
                balance[y, h][charge] = -1.0
                throughput[charge] = throughput[discharge] = 1.0
        states = self._storage(lp, "SB_battery", spec.dod_frac * installed,
                               installed, spec.soc0_frac * additions, flows)
        for (y, h), state in states.items():
            if h <= self.hours[-1]:
                reserve[y, h][state] = 1.0
        lp.constrain(throughput, "<=", spec.cycle_life * float(additions.sum()))
        return ""

    def _hydrogen(self, lp: _LP, installed: dict, tank_additions: np.ndarray,
                  balance: dict) -> None:
        a, spec = self.a, self.catalog.hydrogen
        flows = {}
        for y in self.years:
            disc = a.discount(y)
            for h in self.hours:
                fuel_cell = lp.var(
                    f"PF_fuel_cell_{y}_{h}", 0.0, installed["fuel_cell"][y - 1],
                    a.days_per_month * spec.fc_om_per_h / spec.fc_kw * disc)
                electrolizer = lp.var(f"PX_electrolizer_{y}_{h}", 0.0,
                                      installed["electrolizer"][y - 1])
                flows[y, h] = [(electrolizer, spec.kg_per_kwh_electrolysis),
                               (fuel_cell, -spec.kg_per_kwh_fuel_cell)]
                balance[y, h][fuel_cell] = 1.0
                balance[y, h][electrolizer] = -1.0
        tank = installed["tank"]
        self._storage(lp, "SQ_tank", spec.tank_min_frac * tank,
                      spec.tank_max_frac * tank,
                      spec.tank_min_frac * tank_additions, flows)

    def to_plan(self, choice: dict, evaluation: Evaluation,
                status: SolveStatus = SolveStatus.OPTIMAL) -> PlanSolution:
        """
        Plano estruturado de uma atribuição avaliada como viável.
        """
        years, hours = len(self.years), len(self.hours)
        counts = self.counts(choice)
        tables = {"counts": {}, "additions": {}, "installed": {}}
        for unit, per_year in counts.items():
            size = self.modules[unit][0]
            tables["counts"][unit] = [float(n) for n in per_year]
            tables["additions"][unit] = [float(n * size) for n in per_year]
            tables["installed"][unit] = [float(v) for v in
                                         np.cumsum(per_year) * size]
        values = evaluation.values
        if "A_solar_1" in values:
            additions = [float(values[f"A_solar_{y}"]) for y in self.years]
            tables["additions"]["solar"] = additions
            tables["installed"]["solar"] = [
                float(values[f"I_solar_{y}"]) for y in self.years]

        hourly: dict[str, np.ndarray] = {}
        terminal: dict[str, float] = {}

        def put(name: str, y: int, h: int, value: float) -> None:
            if h > hours:
                terminal[name] = float(value)
                return
            series = hourly.setdefault(name, np.zeros((years, hours)))
            series[y - 1, h - 1] = value

        for name, value in values.items():
            parts = name.split("_")
            if parts[0] in ("A", "I"):
                continue
            y, h = int(parts[-2]), int(parts[-1])
            put("_".join(parts[:-2]), y, h, value)

        for spec in self.existing + self.new:
            for y in self.years:
                for h in self.hours:
                    state = choice.get(("on", spec.id, y, h), 0)
                    put(f"U_{spec.id}", y, h, 1.0 if state else 0.0)
                    if spec in self.new:
                        put(f"W_{spec.id}", y, h,
                            tables["installed"][spec.id][y - 1] if state else 0.0)
                    curve = self.curves[spec.id]
                    if state and not curve.convex and curve.segments > 1:
                        k = state - 1
                        online = (tables["installed"][spec.id][y - 1]
                                  / spec.rated_kw if spec in self.new else 1.0)
                        power = values[f"P_{spec.id}_{y}_{h}"]
                        put(f"F_{spec.id}", y, h, curve.slopes[k] * power
                            + curve.intercepts[k] * online)
        if "battery" in self.modules:
            for y in self.years:
                for h in self.hours:
                    mode = choice.get(("mode", "battery", y, h), IDLE)
                    put("UC_battery", y, h, 1.0 if mode == CHARGE else 0.0)
                    put("UD_battery", y, h, 1.0 if mode == DISCHARGE else 0.0)

        return PlanSolution(
            scenario_id=self.problem.scenario.id, horizon_years=years,
            rep_hours=hours, status=status, objective=evaluation.objective,
            additions=tables["additions"], counts=tables["counts"],
            installed=tables["installed"],
            hourly={name: series.tolist() for name, series in hourly.items()},
            terminal=terminal, verified=False)
