import math
from enum import Enum
from typing import Optional

from pydantic import Field, model_validator

from microgrid.schemas.base import (
    BaseSchemaMixin,
    Energy,
    Fraction,
    Hours,
    Mass,
    Money,
    Power,
    Speed,
    Temperature,
)


class Technology(str, Enum):
    EXISTING_DIESEL = "existing-diesel"
    NEW_DIESEL = "new-diesel"
    SOLAR = "solar"
    WIND = "wind"
    BATTERY = "battery"
    HYDROGEN = "hydrogen"


class StandbyParity(str, Enum):
    """
    Paridade dos anos em que um gerador existente fica em stand-by.

    O ano 1 do horizonte de planejamento é considerado ímpar.
    """
    NONE = "none"
    EVEN = "even-years"
    ODD = "odd-years"

    def is_standby(self, year: int) -> bool:
        if self is StandbyParity.EVEN:
            return year % 2 == 0
        if self is StandbyParity.ODD:
            return year % 2 == 1
        return False


class DieselGenSpec(BaseSchemaMixin):
    """
    Schema de um gerador diesel, existente ou novo.

    A curva de consumo é a quadrática `a·p² + b·p + c` (l/h), válida no
    domínio de operação `[ψ·R, R]`. Geradores existentes não têm custo de
    capital; geradores novos não têm paridade de stand-by.
    """
    id: str = Field(..., description="Unit label")
    rated_kw: Power = Field(..., gt=0, description="Rated power R [kW]")
    lifetime_h: Hours = Field(..., gt=0, description="Remaining life θ [h]")
    fuel_a: float = Field(..., description="Fuel curve a [l/h/kW²]")
    fuel_b: float = Field(..., description="Fuel curve b [l/h/kW]")
    fuel_c: float = Field(..., description="Fuel curve c [l/h]")
    min_load_frac: Fraction = Field(..., ge=0, lt=1, description="ψ [pu]")
    om_cost: Money = Field(..., ge=0, description="O&M c [$/kWh]")
    capital_cost: Optional[Money] = Field(
        None, ge=0, description="Capital cost [$/kW], new units only")
    standby_parity: StandbyParity = Field(
        StandbyParity.NONE, description="Stand-by years, existing units only")

    @property
    def min_kw(self) -> float:
        return self.min_load_frac * self.rated_kw

    @model_validator(mode="after")
    def check_fuel_domain(self):
        # a quadrática não pode ficar negativa no domínio [ψR, R]
        for p in (self.min_kw, self.rated_kw):
            rate = self.fuel_a * p * p + self.fuel_b * p + self.fuel_c
            if rate < 0:
                raise ValueError(
                    f"fuel_c: fuel rate {rate:.6g} l/h at {p:.6g} kW is "
                    f"negative for unit {self.id}")
        vertex = -self.fuel_b / (2 * self.fuel_a) if self.fuel_a else None
        if vertex is not None and self.min_kw < vertex < self.rated_kw:
            rate = (self.fuel_a * vertex * vertex + self.fuel_b * vertex
                    + self.fuel_c)
            if rate < 0:
                raise ValueError(
                    f"fuel_c: fuel rate is negative inside the operating "
                    f"domain of unit {self.id}")
        return self


class SolarSpec(BaseSchemaMixin):
    capital_cost: Money = Field(..., ge=0, description="[$/kW]")
    om_cost: Money = Field(..., ge=0, description="c_s [$/kWh]")
    temp_coeff: float = Field(..., description="α [pu/°C]")
    derating: Fraction = Field(..., gt=0, le=1, description="φ [pu]")
    lifetime_y: float = Field(..., gt=0, description="[years]")
    tau_stc: Temperature = Field(25.0, description="τ_stc [°C]")
    g_stc: float = Field(1.0, gt=0, description="G_stc [kW/m²]")


class WindCurveSegment(BaseSchemaMixin):
    """
    Trecho afim da curva de potência: `W(S) = slope·S + intercept` para
    `lower ≤ S < upper` (intervalo fechado à esquerda).
    """
    lower: Speed = Field(..., ge=0)
    upper: Speed = Field(...)
    slope: float = Field(0.0, description="[kW·s/m]")
    intercept: float = Field(0.0, description="[kW]")

    def at(self, speed: float) -> float:
        return self.slope * speed + self.intercept


class WindSpec(BaseSchemaMixin):
    """
    Schema das turbinas eólicas.

    A curva é guardada exatamente como tabelada, inclusive o salto em
    7,5 m/s (35·7,5 − 100 = 162,5 kW contra 250 kW); não é suavizada.
    """
    rated_kw: Power = Field(..., gt=0, description="R_w per turbine [kW]")
    curve: tuple[WindCurveSegment, ...] = Field(..., min_length=1)
    cut_in: Speed = Field(..., ge=0)
    nominal: Speed = Field(..., gt=0)
    cut_out: Speed = Field(..., gt=0)
    capital_cost: Money = Field(..., ge=0, description="[$/kW]")
    om_cost: Money = Field(..., ge=0, description="[$/kWh]")
    lifetime_y: float = Field(..., gt=0)

    @model_validator(mode="after")
    def check_curve(self):
        if not self.cut_in < self.nominal < self.cut_out:
            raise ValueError("cut_in < nominal < cut_out must hold")

        curve = self.curve
        if curve[0].lower != 0:
            raise ValueError("curve: first interval must start at 0 m/s")
        if not math.isinf(curve[-1].upper):
            raise ValueError("curve: last interval must extend to infinity")
        for left, right in zip(curve, curve[1:]):
            if left.upper != right.lower:
                raise ValueError(
                    f"curve: intervals [{left.lower}, {left.upper}) and "
                    f"[{right.lower}, {right.upper}) are not contiguous")
        for segment in curve:
            if segment.upper <= segment.lower:
                raise ValueError("curve: empty or reversed interval")
            zero_zone = (segment.upper <= self.cut_in
                         or segment.lower >= self.cut_out)
            if zero_zone and (segment.slope or segment.intercept):
                raise ValueError(
                    f"curve: output must be 0 outside [cut_in, cut_out), "
                    f"interval starting at {segment.lower} m/s")
            ends = [segment.lower]
            if not math.isinf(segment.upper):
                ends.append(segment.upper)
            for speed in ends:
                value = segment.at(speed)
                if value > self.rated_kw + 1e-9 or value < -1e-9:
                    raise ValueError(
                        f"curve: output {value:.6g} kW at {speed} m/s is "
                        f"outside [0, rated_kw]")
        return self


class BatterySpec(BaseSchemaMixin):
    module_kwh: Energy = Field(..., gt=0, description="R_b [kWh]")
    peak_kw: Power = Field(..., gt=0, description="[kW] per module")
    capital_cost: Money = Field(..., ge=0, description="[$/kWh]")
    om_cost: Money = Field(..., ge=0, description="[$/kWh]")
    eta_ch: Fraction = Field(..., gt=0, le=1)
    eta_dch: Fraction = Field(..., gt=0, le=1)
    soc0_frac: Fraction = Field(..., ge=0, le=1, description="SOC_0 [pu]")
    dod_frac: Fraction = Field(..., ge=0, lt=1, description="δ [pu]")
    t_ch: Hours = Field(..., gt=0)
    t_dch: Hours = Field(..., gt=0)
    cycle_life: float = Field(..., gt=0, description="𝒞 [cycles]")

    @property
    def charge_limit_frac(self) -> float:
        return (1 - self.dod_frac) / self.t_ch

    @property
    def discharge_limit_frac(self) -> float:
        return (1 - self.dod_frac) / self.t_dch

    @model_validator(mode="after")
    def check_peak(self):
        peak = self.charge_limit_frac * self.module_kwh
        if abs(peak - self.peak_kw) > 1e-9:
            raise ValueError(
                f"peak_kw: (1 - dod_frac) / t_ch · module_kwh = {peak:.9g} "
                f"kW differs from peak_kw = {self.peak_kw:.9g} kW")
        if self.soc0_frac < self.dod_frac:
            raise ValueError("soc0_frac: initial state is below dod_frac")
        return self


class HydrogenSpec(BaseSchemaMixin):
    fc_kw: Power = Field(..., gt=0, description="R_f [kW]")
    el_kw: Power = Field(..., gt=0, description="R_ξ [kW]")
    tank_kg: Mass = Field(..., gt=0, description="R_q [kg]")
    fc_cost: Money = Field(..., ge=0, description="[$/unit]")
    el_cost: Money = Field(..., ge=0, description="[$/unit]")
    tank_cost: Money = Field(..., ge=0, description="[$/unit]")
    fc_om_per_h: Money = Field(..., ge=0, description="[$/h]")
    el_om_per_year: Money = Field(..., ge=0, description="[$/y]")
    tank_om_per_year: Money = Field(..., ge=0, description="[$/y]")
    eta_fc: Fraction = Field(..., gt=0, le=1)
    eta_el: Fraction = Field(..., gt=0, le=1)
    hhv_kwh_per_kg: float = Field(..., gt=0, description="V [kWh/kg]")
    compressor_load: Fraction = Field(..., ge=0, description="l_C [pu]")
    tank_max_frac: Fraction = Field(..., le=1)
    tank_min_frac: Fraction = Field(..., gt=0)
    fc_lifetime_h: Hours = Field(..., gt=0)
    el_lifetime_y: float = Field(..., gt=0)
    tank_lifetime_y: float = Field(..., gt=0)

    @property
    def kg_per_kwh_electrolysis(self) -> float:
        return self.eta_el / ((1 + self.compressor_load) * self.hhv_kwh_per_kg)

    @property
    def kg_per_kwh_fuel_cell(self) -> float:
        return 1.0 / (self.hhv_kwh_per_kg * self.eta_fc)

    @model_validator(mode="after")
    def check_tank(self):
        if not self.tank_min_frac < self.tank_max_frac:
            raise ValueError("tank_min_frac must be below tank_max_frac")
        return self


class TechnologyCatalog(BaseSchemaMixin):
    """
    Catálogo de todas as especificações de geração e armazenamento.

    Tecnologias ausentes (`None` ou lista vazia) simplesmente não podem ser
    usadas por nenhum cenário.
    """
    existing_diesel: tuple[DieselGenSpec, ...] = ()
    new_diesel: tuple[DieselGenSpec, ...] = ()
    solar: Optional[SolarSpec] = None
    wind: Optional[WindSpec] = None
    battery: Optional[BatterySpec] = None
    hydrogen: Optional[HydrogenSpec] = None

    @model_validator(mode="after")
    def check_units(self):
        ids = [unit.id for unit in self.existing_diesel + self.new_diesel]
        duplicated = sorted({uid for uid in ids if ids.count(uid) > 1})
        if duplicated:
            raise ValueError(f"duplicated diesel ids: {duplicated}")
        for unit in self.existing_diesel:
            if unit.capital_cost is not None:
                raise ValueError(
                    f"existing_diesel.{unit.id}.capital_cost: existing units "
                    f"carry no capital cost")
        for unit in self.new_diesel:
            if unit.capital_cost is None:
                raise ValueError(
                    f"new_diesel.{unit.id}.capital_cost: required for new "
                    f"units")
            if unit.standby_parity is not StandbyParity.NONE:
                raise ValueError(
                    f"new_diesel.{unit.id}.standby_parity: only existing "
                    f"units have stand-by years")
        return self

    def technologies(self) -> frozenset[Technology]:
        present = {
            Technology.EXISTING_DIESEL: bool(self.existing_diesel),
            Technology.NEW_DIESEL: bool(self.new_diesel),
            Technology.SOLAR: self.solar is not None,
            Technology.WIND: self.wind is not None,
            Technology.BATTERY: self.battery is not None,
            Technology.HYDROGEN: self.hydrogen is not None,
        }
        return frozenset(tech for tech, ok in present.items() if ok)
