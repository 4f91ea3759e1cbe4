import logging
import math

import numpy as np

from microgrid.core.exceptions import ProblemValidationException
from microgrid.models.milp import (
    ColumnKey,
    Family,
    MilpInstance,
    RowKey,
    Sense,
    VariableIndex,
    VarType,
)
from microgrid.models.objective import npc_capital
from microgrid.models.scenario import apply_scenario
from microgrid.schemas.catalog import DieselGenSpec, Technology
from microgrid.schemas.problem import PlanningProblem
from microgrid.schemas.profiles import PiecewiseCurve
from microgrid.usecases.catalog import unit_limits, validate_problem
from microgrid.usecases.profiles import (
    linearize_fuel_curve,
    solar_unit_output,
    wind_unit_output,
)

logger = logging.getLogger(__name__)

LE, EQ, GE = Sense.LE, Sense.EQ, Sense.GE
BINARY, INTEGER = VarType.BINARY, VarType.INTEGER


class ModelBuilder:
    """
    Compila um `PlanningProblem` no MILP de planejamento.

    Cada bloco (`_existing_diesel`, `_new_diesel`, `_solar`, `_wind`,
    `_battery`, `_hydrogen`) aloca suas colunas e linhas e acumula seus
    termos no balanço (Eq4) e na reserva (Eq5) de cada hora, que são
    emitidos ao final.
    """
    def __init__(self, problem: PlanningProblem) -> None:
        self.problem = problem
        self.a = problem.assumptions
        self.catalog = problem.catalog
        self.instance = MilpInstance(name=problem.name)
        self.index = VariableIndex()
        self.years = range(1, self.a.horizon_years + 1)
        self.hours = range(1, self.a.rep_hours + 1)
        self.allowed = problem.scenario.allowed_tech & self.catalog.technologies()
        self.limits = unit_limits(problem)

        load = problem.profiles.load.array()
        self.demand = {
            y: load * (1 + self.a.load_growth) ** (y - 1) for y in self.years
        }
        self.balance = {(y, h): [] for y in self.years for h in self.hours}
        self.reserve = {(y, h): [] for y in self.years for h in self.hours}
        self.reserve_capacity = 0.0

    def column(self, family: Family, unit: str, year=None, hour=None,
               part=None, lb: float = 0.0, ub: float = math.inf,
               vtype: VarType = VarType.CONTINUOUS, cost: float = 0.0) -> int:
        key = ColumnKey(family, unit, year, hour, part)
        column = self.index.add(key)
        self.instance.add_column(key.name(), lb, ub, vtype, cost)
        return column

    def row(self, tag: str, unit=None, year=None, hour=None, part=None, *,
            terms, sense: Sense, rhs: float = 0.0) -> int:
        key = RowKey(tag, unit, year, hour, part)
        return self.instance.add_row(key.name(), terms, sense, rhs)

    def build(self) -> tuple[MilpInstance, VariableIndex]:
        if Technology.EXISTING_DIESEL in self.allowed:
            self._existing_diesel()
        if Technology.NEW_DIESEL in self.allowed:
            self._new_diesel()
        if Technology.SOLAR in self.allowed:
            self._solar()
        if Technology.WIND in self.allowed:
            self._wind()
        if Technology.BATTERY in self.allowed:
            self._battery()
        if Technology.HYDROGEN in self.allowed:
            self._hydrogen()
        self._balance_and_reserve()
        return self.instance, self.index

    def _capacity_columns(self, unit: str, unit_size: float | None,
                          limit: float, capital: float, fixed_om: float,
                          count_type: VarType = INTEGER,
                          capital_on_count: bool = False):
        """
        Colunas anuais de quantidade (N), adição (A) e capacidade instalada
        (I) com as linhas Eq2 e Eq3. `unit_size=None` indica adição contínua.
        """
        counts, additions, installed = {}, {}, {}
        capacity_ub = limit if unit_size is None else limit * unit_size
        for y in self.years:
            disc = self.a.discount(y)
            if unit_size is not None:
                counts[y] = self.column(
                    Family.COUNT, unit, y, ub=limit, vtype=count_type,
                    cost=npc_capital(capital, 1.0, y, self.a.discount_rate)
                    if capital_on_count else 0.0)
            additions[y] = self.column(
                Family.ADDITION, unit, y, ub=capacity_ub,
                cost=0.0 if capital_on_count else npc_capital(
                    capital, 1.0, y, self.a.discount_rate))
            installed[y] = self.column(
                Family.INSTALLED, unit, y, ub=capacity_ub, cost=fixed_om * disc)

            if unit_size is not None:
                self.row("Eq3", unit, y, sense=EQ, terms=[
                    (additions[y], 1.0), (counts[y], -unit_size)])
            terms = [(installed[y], 1.0), (additions[y], -1.0)]
            if y > 1:
                terms.append((installed[y - 1], -1.0))
            self.row("Eq2", unit, y, sense=EQ, terms=terms)
        return counts, additions, installed

    def _fuel_rows(self, spec: DieselGenSpec, curve: PiecewiseCurve, y: int,
                   h: int, power: int, fuel: int, state: int,
                   online: list[tuple[int, float]], power_ub: float) -> None:
        """
        Liga o combustível F à potência P pela curva linearizada.

        `online` expressa a quantidade de unidades ligadas (u para um
        gerador existente, w/R para o conjunto de geradores novos). Curvas
        convexas usam a forma epígrafe; curvas côncavas com mais de um
        segmento selecionam o segmento ativo com binárias Z. Partes das
        linhas: 1..K epígrafe, 0 seleção, K+1.. domínio dos segmentos.
        """
        segments = curve.segments
        if curve.convex or segments == 1:
            for k in range(segments):
                self.row("Fuel", spec.id, y, h, k + 1, sense=GE, terms=[
                    (fuel, 1.0), (power, -curve.slopes[k]),
                    *[(col, -curve.intercepts[k] * coef) for col, coef in online]])
            return

        online_ub = power_ub / spec.rated_kw
        big_fuel = max(
            max(s, 0.0) * power_ub + max(i, 0.0) * online_ub
            for s, i in zip(curve.slopes, curve.intercepts))
        selectors = [
            self.column(Family.SEGMENT, spec.id, y, h, k + 1, vtype=BINARY)
            for k in range(segments)
        ]
        self.row("Fuel", spec.id, y, h, 0, sense=EQ, terms=[
            *[(z, 1.0) for z in selectors], (state, -1.0)])
        for k, z in enumerate(selectors):
            self.row("Fuel", spec.id, y, h, k + 1, sense=GE, rhs=-big_fuel,
                     terms=[(fuel, 1.0), (power, -curve.slopes[k]),
                            *[(col, -curve.intercepts[k] * coef)
                              for col, coef in online],
                            (z, -big_fuel)])

        lo, hi = curve.breakpoints[:-1], curve.breakpoints[1:]
        if len(online) == 1 and online[0][0] == state:
            # gerador único: o segmento escolhido delimita P diretamente
            self.row("Fuel", spec.id, y, h, segments + 1, sense=GE, terms=[
                (power, 1.0), *[(z, -lo[k]) for k, z in enumerate(selectors)]])
            self.row("Fuel", spec.id, y, h, segments + 2, sense=LE, terms=[
                (power, 1.0), *[(z, -hi[k]) for k, z in enumerate(selectors)]])
            return
        for k, z in enumerate(selectors):
            part = segments + 1 + 2 * k
            self.row("Fuel", spec.id, y, h, part, sense=GE, rhs=-power_ub,
                     terms=[(power, 1.0), (z, -power_ub),
                            *[(col, -lo[k] * coef) for col, coef in online]])
            self.row("Fuel", spec.id, y, h, part + 1, sense=LE, rhs=power_ub,
                     terms=[(power, 1.0), (z, power_ub),
                            *[(col, -hi[k] * coef) for col, coef in online]])

    def _diesel_life_rows(self, spec: DieselGenSpec,
                          states: dict[tuple[int, int], int]) -> None:
        a = self.a
        for y in self.years:
            self.row("Eq11", spec.id, y, sense=LE,
                     rhs=a.rep_hours * (1 - a.maintenance_frac),
                     terms=[(states[y, h], 1.0) for h in self.hours])
        self.row("Eq10", spec.id, sense=LE, rhs=spec.lifetime_h,
                 terms=[(u, a.days_per_month) for u in states.values()])

    def _existing_diesel(self) -> None:
        a = self.a
        for spec in self.catalog.existing_diesel:
            curve = linearize_fuel_curve(spec, a.fuel_segments)
            self.reserve_capacity += spec.rated_kw
            states = {}
            for y in self.years:
                disc = a.discount(y)
                standby = spec.standby_parity.is_standby(y)
                for h in self.hours:
                    power = self.column(
                        Family.GEN_POWER, spec.id, y, h, ub=spec.rated_kw,
                        cost=a.days_per_month * spec.om_cost * disc)
                    state = self.column(Family.ON_STATE, spec.id, y, h,
                                        vtype=BINARY)
                    if standby:
                        self.instance.fix(state, 0.0)
                    fuel = self.column(
                        Family.FUEL, spec.id, y, h,
                        cost=a.days_per_month * a.diesel_price * disc)
                    states[y, h] = state

                    self.row("Eq7", spec.id, y, h, sense=LE, terms=[
                        (power, 1.0), (state, -spec.rated_kw)])
                    self.row("Eq9", spec.id, y, h, sense=GE, terms=[
                        (power, 1.0), (state, -spec.min_kw)])
                    self._fuel_rows(spec, curve, y, h, power, fuel, state,
                                    [(state, 1.0)], spec.rated_kw)
                    self.balance[y, h].append((power, 1.0))
            self._diesel_life_rows(spec, states)

    def _new_diesel(self) -> None:
        a = self.a
        counts_by_year: dict[int, list[int]] = {y: [] for y in self.years}
        for spec in self.catalog.new_diesel:
            curve = linearize_fuel_curve(spec, a.fuel_segments)
            limit = self.limits[spec.id]
            cap_max = limit * spec.rated_kw
            counts, _, installed = self._capacity_columns(
                spec.id, spec.rated_kw, limit, spec.capital_cost, 0.0,
                count_type=BINARY)
            for y, column in counts.items():
                counts_by_year[y].append(column)

            states = {}
            for y in self.years:
                disc = a.discount(y)
                for h in self.hours:
                    power = self.column(
                        Family.GEN_POWER, spec.id, y, h, ub=cap_max,
                        cost=a.days_per_month * spec.om_cost * disc)
                    state = self.column(Family.ON_STATE, spec.id, y, h,
                                        vtype=BINARY)
                    online = self.column(Family.ONLINE_CAPACITY, spec.id, y, h,
                                         ub=cap_max)
                    fuel = self.column(
                        Family.FUEL, spec.id, y, h,
                        cost=a.days_per_month * a.diesel_price * disc)
                    states[y, h] = state

                    # w = I·u
                    self.row("Eq6", spec.id, y, h, 1, sense=LE, terms=[
                        (online, 1.0), (installed[y], -1.0)])
                    self.row("Eq6", spec.id, y, h, 2, sense=LE, terms=[
                        (online, 1.0), (state, -cap_max)])
                    self.row("Eq6", spec.id, y, h, 3, sense=GE, rhs=-cap_max,
                             terms=[(online, 1.0), (installed[y], -1.0),
                                    (state, -cap_max)])
                    self.row("Eq6", spec.id, y, h, sense=LE, terms=[
                        (power, 1.0), (online, -1.0)])
                    self.row("Eq8", spec.id, y, h, sense=GE, terms=[
                        (power, 1.0), (online, -spec.min_load_frac)])
                    self._fuel_rows(spec, curve, y, h, power, fuel, state,
                                    [(online, 1.0 / spec.rated_kw)], cap_max)
                    self.balance[y, h].append((power, 1.0))
                    self.reserve[y, h].append((installed[y], 1.0))
            self._diesel_life_rows(spec, states)

        if len(self.catalog.new_diesel) > 1:
            for y, columns in counts_by_year.items():
                self.row("Eq3", "diesel", y, sense=LE, rhs=1.0,
                         terms=[(column, 1.0) for column in columns])

    def _solar(self) -> None:
        a, spec = self.a, self.catalog.solar
        factor = solar_unit_output(
            self.problem.profiles.irradiance.array(),
            self.problem.profiles.cell_temperature.array(), spec)
        _, _, installed = self._capacity_columns(
            "solar", None, self.limits["solar"], spec.capital_cost,
            a.rep_hours * spec.om_cost)
        sense = LE if a.curtailment else EQ
        for y in self.years:
            for h in self.hours:
                power = self.column(Family.SOLAR_POWER, "solar", y, h)
                self.row("Eq12", "solar", y, h, sense=sense, terms=[
                    (power, 1.0), (installed[y], -float(factor[h - 1]))])
                self.balance[y, h].append((power, 1.0))
                self.reserve[y, h].append((power, -a.reserve_solar))

    def _wind(self) -> None:
        a, spec = self.a, self.catalog.wind
        per_kw = wind_unit_output(
            self.problem.profiles.wind_speed.array(), spec) / spec.rated_kw
        _, _, installed = self._capacity_columns(
            "wind", spec.rated_kw, self.limits["wind"], spec.capital_cost,
            a.rep_hours * spec.om_cost)
        sense = LE if a.curtailment else EQ
        for y in self.years:
            for h in self.hours:
                power = self.column(Family.WIND_POWER, "wind", y, h)
                self.row("Eq13", "wind", y, h, sense=sense, terms=[
                    (power, 1.0), (installed[y], -float(per_kw[h - 1]))])
                self.balance[y, h].append((power, 1.0))
                self.reserve[y, h].append((power, -a.reserve_wind))

    def _storage_state(self, unit: str, family: Family, tags: tuple[str, str],
                       additions: dict[int, int], initial_frac: float,
                       flows: dict[tuple[int, int], list[tuple[int, float]]]):
        """
        Recursão de estado de carga (linhas Eq14/Eq15 ou Eq27/Eq28).

        O estado da hora h é o do início da hora; capacidade adicionada no
        ano y entra com a fração inicial no início de y. A coluna terminal
        (hora ℋ+1 do último ano) fecha a recursão.
        """
        inner, wrap = tags
        last_year, last_hour = self.years[-1], self.hours[-1]
        states = {
            (y, h): self.column(family, unit, y, h)
            for y in self.years for h in self.hours
        }
        states[last_year, last_hour + 1] = self.column(
            family, unit, last_year, last_hour + 1)

        self.row(wrap, unit, 1, sense=EQ, terms=[
            (states[1, 1], 1.0), (additions[1], -initial_frac)])
        for y in self.years:
            for h in self.hours:
                if h < last_hour:
                    self.row(inner, unit, y, h, sense=EQ, terms=[
                        (states[y, h + 1], 1.0), (states[y, h], -1.0),
                        *flows[y, h]])
                elif y < last_year:
                    self.row(wrap, unit, y + 1, sense=EQ, terms=[
                        (states[y + 1, 1], 1.0), (states[y, h], -1.0),
                        *flows[y, h], (additions[y + 1], -initial_frac)])
                else:
                    self.row(wrap, unit, y, h, sense=EQ, terms=[
                        (states[y, h + 1], 1.0), (states[y, h], -1.0),
                        *flows[y, h]])
        return states

    def _battery(self) -> None:
        a, spec = self.a, self.catalog.battery
        limit = self.limits["battery"]
        _, additions, installed = self._capacity_columns(
            "battery", spec.module_kwh, limit, spec.capital_cost,
            a.rep_hours * spec.om_cost)
        big_m = min(a.big_m, max(spec.charge_limit_frac,
                                 spec.discharge_limit_frac)
                    * spec.module_kwh * limit)

        flows, throughput = {}, []
        for y in self.years:
            for h in self.hours:
                charge = self.column(Family.BATT_CHARGE, "battery", y, h)
                discharge = self.column(Family.BATT_DISCHARGE, "battery", y, h)
                charge_on = self.column(Family.BATT_CHARGE_ON, "battery", y, h,
                                        vtype=BINARY)
                discharge_on = self.column(Family.BATT_DISCHARGE_ON, "battery",
                                           y, h, vtype=BINARY)
                flows[y, h] = [(charge, -spec.eta_ch),
                               (discharge, 1.0 / spec.eta_dch)]
                throughput += [(charge, 1.0), (discharge, 1.0)]

                self.row("Eq18", "battery", y, h, sense=LE, terms=[
                    (discharge, 1.0),
                    (installed[y], -spec.discharge_limit_frac)])
                self.row("Eq19", "battery", y, h, sense=LE, terms=[
                    (charge, 1.0), (installed[y], -spec.charge_limit_frac)])
                self.row("Eq20", "battery", y, h, sense=GE, terms=[
                    (discharge, 1.0), (discharge_on, -1.0)])
                self.row("Eq21", "battery", y, h, sense=GE, terms=[
                    (charge, 1.0), (charge_on, -1.0)])
                self.row("Eq23", "battery", y, h, sense=LE, terms=[
                    (discharge, 1.0), (discharge_on, -big_m)])
                self.row("Eq24", "battery", y, h, sense=LE, terms=[
                    (charge, 1.0), (charge_on, -big_m)])
                self.row("Eq25", "battery", y, h, sense=LE, rhs=1.0, terms=[
                    (discharge_on, 1.0), (charge_on, 1.0)])
                self.balance[y, h] += [(discharge, 1.0), (charge, -1.0)]

        states = self._storage_state("battery", Family.BATT_SOC,
                                     ("Eq14", "Eq15"), additions,
                                     spec.soc0_frac, flows)
        for (y, h), state in states.items():
            self.row("Eq16", "battery", y, h, sense=LE, terms=[
                (state, 1.0), (installed[y], -1.0)])
            self.row("Eq17", "battery", y, h, sense=GE, terms=[
                (state, 1.0), (installed[y], -spec.dod_frac)])
            if h in self.hours:
                self.reserve[y, h].append((state, 1.0))
        self.row("Eq26", "battery", sense=LE, terms=[
            *throughput,
            *[(additions[y], -spec.cycle_life) for y in self.years]])

    def _hydrogen(self) -> None:
        a, spec = self.a, self.catalog.hydrogen
        _, _, fc_installed = self._capacity_columns(
            "fuel_cell", spec.fc_kw, self.limits["fuel_cell"], spec.fc_cost,
            0.0, capital_on_count=True)
        _, _, el_installed = self._capacity_columns(
            "electrolizer", spec.el_kw, self.limits["electrolizer"],
            spec.el_cost, spec.el_om_per_year / spec.el_kw,
            capital_on_count=True)
        _, tank_additions, tank_installed = self._capacity_columns(
            "tank", spec.tank_kg, self.limits["tank"], spec.tank_cost,
            spec.tank_om_per_year / spec.tank_kg, capital_on_count=True)

        flows = {}
        for y in self.years:
            disc = a.discount(y)
            for h in self.hours:
                fuel_cell = self.column(
                    Family.FUEL_CELL, "fuel_cell", y, h,
                    cost=a.days_per_month * spec.fc_om_per_h / spec.fc_kw * disc)
                electrolizer = self.column(Family.ELECTROLIZER, "electrolizer",
                                           y, h)
                flows[y, h] = [(electrolizer, -spec.kg_per_kwh_electrolysis),
                               (fuel_cell, spec.kg_per_kwh_fuel_cell)]
                self.row("Eq31", "fuel_cell", y, h, sense=LE, terms=[
                    (fuel_cell, 1.0), (fc_installed[y], -1.0)])
                self.row("Eq31", "electrolizer", y, h, sense=LE, terms=[
                    (electrolizer, 1.0), (el_installed[y], -1.0)])
                self.balance[y, h] += [(fuel_cell, 1.0), (electrolizer, -1.0)]
                self.reserve[y, h].append((fc_installed[y], 1.0))

        states = self._storage_state("tank", Family.TANK_SOC, ("Eq27", "Eq28"),
                                     tank_additions, spec.tank_min_frac, flows)
        for (y, h), state in states.items():
            self.row("Eq29", "tank", y, h, sense=LE, terms=[
                (state, 1.0), (tank_installed[y], -spec.tank_max_frac)])
            self.row("Eq30", "tank", y, h, sense=GE, terms=[
                (state, 1.0), (tank_installed[y], -spec.tank_min_frac)])

    def _balance_and_reserve(self) -> None:
        a = self.a
        for (y, h), terms in self.balance.items():
            self.row("Eq4", None, y, h, sense=EQ, terms=terms,
                     rhs=float(self.demand[y][h - 1]))
        for (y, h), terms in self.reserve.items():
            rhs = (1 + a.reserve_load) * self.demand[y][h - 1]
            self.row("Eq5", None, y, h, sense=GE, terms=terms,
                     rhs=float(rhs - self.reserve_capacity))


def build_model(problem: PlanningProblem) -> tuple[MilpInstance, VariableIndex]:
    """
    Compila o problema no MILP de planejamento, com as restrições do
    cenário já aplicadas.

    Raises:
        ProblemValidationException: Se `validate_problem` reportar erros.
        ModelSizeException: Se o modelo exceder `MAX_MODEL_COLUMNS`.
    """
    errors = [f for f in validate_problem(problem) if f.severity == "error"]
    if errors:
        raise ProblemValidationException(message="; ".join(
            f"{finding.field}: {finding.message}" for finding in errors))

    instance, index = ModelBuilder(problem).build()
    apply_scenario(instance, index, problem.scenario, problem)
    logger.info("built model %r scenario %s: %s", problem.name,
                problem.scenario.id, instance.summary())
    return instance, index


def demand_matrix(problem: PlanningProblem) -> np.ndarray:
    """
    Demanda (kW) ano × hora com o crescimento anual aplicado.
    """
    a = problem.assumptions
    load = problem.profiles.load.array()
    return np.array([load * (1 + a.load_growth) ** (y - 1)
                     for y in range(1, a.horizon_years + 1)])
