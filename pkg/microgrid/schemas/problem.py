import hashlib
import json
from enum import Enum
from typing import Annotated, Literal, Optional, Union

from pydantic import Field, field_validator, model_validator

from microgrid.schemas.base import BaseSchemaMixin, Fraction, Money
from microgrid.schemas.catalog import Technology, TechnologyCatalog
from microgrid.schemas.profiles import Profile, UnitTag

DIESEL = frozenset({Technology.EXISTING_DIESEL, Technology.NEW_DIESEL})


class YearWindow(BaseSchemaMixin):
    first: int = Field(..., ge=1)
    last: int = Field(..., ge=1)

    @model_validator(mode="after")
    def check_order(self):
        if self.last < self.first:
            raise ValueError("window last year precedes first year")
        return self

    def __contains__(self, year: int) -> bool:
        return self.first <= year <= self.last


class PlanningAssumptions(BaseSchemaMixin):
    """
    Premissas econômicas e operacionais do planejamento.

    `rep_hours` vale 288 (um dia de 24 horas por mês) em problemas
    completos; problemas reduzidos usam as primeiras `rep_hours` horas.
    """
    discount_rate: Fraction = Field(..., ge=0, lt=1, description="r")
    horizon_years: int = Field(..., ge=1, description="Y")
    days_per_month: float = Field(30.0, gt=0, description="λ")
    rep_hours: int = Field(288, ge=1, le=288, description="ℋ")
    reserve_load: Fraction = Field(..., ge=0, lt=1, description="β")
    reserve_solar: Fraction = Field(..., ge=0, lt=1, description="γ")
    reserve_wind: Fraction = Field(..., ge=0, lt=1, description="ρ")
    load_growth: Fraction = Field(..., ge=0, lt=1)
    diesel_price: Money = Field(..., ge=0, description="𝒟 [$/l]")
    maintenance_frac: Fraction = Field(..., ge=0, lt=1, description="𝒜")
    big_m: float = Field(..., gt=0, description="ℳ")
    res_invest_window: YearWindow = Field(...)
    diesel_invest_window: YearWindow = Field(...)
    fuel_segments: int = Field(3, ge=1)
    emission_factor: float = Field(2.68, ge=0, description="[kg CO2e/l]")
    solar_min_share: Fraction = Field(0.01, ge=0, lt=1)
    capacity_limit_factor: float = Field(5.0, gt=0)
    max_units: dict[str, int] = Field(default_factory=dict)
    curtailment: bool = Field(True)

    def discount(self, year: int) -> float:
        return 1.0 / (1.0 + self.discount_rate) ** (year - 1)


class MinInclusion(BaseSchemaMixin):
    battery: bool = False
    solar: bool = False
    hydrogen: bool = False

    def any(self) -> bool:
        return self.battery or self.solar or self.hydrogen


class ScenarioDefinition(BaseSchemaMixin):
    """
    Schema de um cenário de planejamento (BAU, 1A…4B ou personalizado).
    """
    id: str = Field(..., min_length=1)
    description: str = ""
    allowed_tech: frozenset[Technology] = Field(...)
    diesel_reserve_only: bool = False
    min_inclusion: MinInclusion = Field(default_factory=MinInclusion)
    mandatory_h2_year1: bool = False
    el_replacement_year: Optional[int] = Field(None, ge=1)

    @model_validator(mode="after")
    def check_scenario(self):
        if self.id == "BAU":
            if not self.allowed_tech <= DIESEL:
                raise ValueError("BAU allows diesel generation only")
            if self.min_inclusion.any() or self.mandatory_h2_year1:
                raise ValueError("BAU carries no minimum-inclusion flags")
        if (self.diesel_reserve_only
                and Technology.EXISTING_DIESEL not in self.allowed_tech):
            raise ValueError(
                "diesel_reserve_only requires existing-diesel to stay in the "
                "reserve accounting")
        return self


class ProfileSet(BaseSchemaMixin):
    load: Profile
    irradiance: Profile
    cell_temperature: Profile
    wind_speed: Profile

    def items(self):
        return [("load", self.load), ("irradiance", self.irradiance),
                ("cell_temperature", self.cell_temperature),
                ("wind_speed", self.wind_speed)]


class Provenance(BaseSchemaMixin):
    profiles: Literal["measured", "digitized-approximate", "synthetic"]
    note: str = ""


class PlanningProblem(BaseSchemaMixin):
    """
    Entrada completa do modelo: catálogo, perfis, premissas e cenário.

    As verificações cruzadas (comprimento dos perfis, carga positiva,
    suficiência do big-M) ficam em `validate_problem`, que as reporta como
    dados em vez de falhar na construção.
    """
    name: str = "problem"
    catalog: TechnologyCatalog
    profiles: ProfileSet
    assumptions: PlanningAssumptions
    scenario: ScenarioDefinition
    provenance: Provenance = Provenance(profiles="synthetic")

    def reduced(self, years: int | None = None,
                hours: int | None = None) -> "PlanningProblem":
        """
        Cria uma cópia com horizonte e/ou horas representativas reduzidos.

        Args:
            years (int | None): Novo horizonte em anos.
            hours (int | None): Quantidade das primeiras horas
            representativas mantidas.

        Returns:
            PlanningProblem: Novo problema; o original não é alterado.
        """
        assumptions = self.assumptions
        profiles = self.profiles
        update = {}
        if years is not None:
            update["horizon_years"] = years
        if hours is not None:
            update["rep_hours"] = hours
            profiles = ProfileSet(**{
                name: profile.head(hours) for name, profile in profiles.items()
            })
        if update:
            assumptions = assumptions.model_copy(update=update)
        return self.model_copy(
            update={"assumptions": assumptions, "profiles": profiles})

    def with_scenario(self, scenario: ScenarioDefinition) -> "PlanningProblem":
        return self.model_copy(update={"scenario": scenario})

    def fingerprint(self) -> str:
        """
        Impressão digital sha256 do problema sem o cenário.

        Relatórios de cenários diferentes de um mesmo problema compartilham a
        mesma impressão digital.
        """
        payload = self.model_dump(mode="json", exclude={"scenario"})
        text = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()


class MonthlySource(BaseSchemaMixin):
    """
    Perfil sintetizado a partir de 12 médias mensais e um formato diário
    multiplicativo de 24 pontos (normalizado para média 1).
    """
    kind: Literal["monthly"]
    unit: UnitTag
    monthly_mean: tuple[float, ...] = Field(..., min_length=12, max_length=12)
    shape: tuple[float, ...] = Field(..., min_length=24, max_length=24)

    @field_validator("shape")
    @classmethod
    def check_shape(cls, value):
        if sum(value) <= 0 or min(value) < 0:
            raise ValueError("shape must be non-negative with positive mean")
        return value


class OffsetSource(BaseSchemaMixin):
    """
    Perfil sintetizado a partir de 12 médias mensais e uma oscilação
    diária aditiva de 24 pontos (centrada em zero).
    """
    kind: Literal["offset"]
    unit: UnitTag
    monthly_mean: tuple[float, ...] = Field(..., min_length=12, max_length=12)
    swing: tuple[float, ...] = Field(..., min_length=24, max_length=24)


class DaylightSource(BaseSchemaMixin):
    """
    Irradiância sintetizada: meia senoide centrada no meio-dia solar, com
    duração do dia por mês, escalada para respeitar a média mensal de 24 h.
    """
    kind: Literal["daylight"]
    unit: UnitTag
    monthly_mean: tuple[float, ...] = Field(..., min_length=12, max_length=12)
    daylight_hours: tuple[float, ...] = Field(
        ..., min_length=12, max_length=12)
    solar_noon: float = Field(12.5, ge=0, lt=24)


class SeriesSource(BaseSchemaMixin):
    kind: Literal["series"]
    unit: UnitTag
    values: tuple[float, ...] = Field(..., min_length=1)


class CsvSource(BaseSchemaMixin):
    kind: Literal["csv"]
    path: str
    column: str


ProfileSource = Annotated[
    Union[MonthlySource, OffsetSource, DaylightSource, SeriesSource,
          CsvSource],
    Field(discriminator="kind"),
]


class ProfileSources(BaseSchemaMixin):
    load: ProfileSource
    irradiance: ProfileSource
    cell_temperature: ProfileSource
    wind_speed: ProfileSource


class ProblemDocument(BaseSchemaMixin):
    """
    Schema do arquivo de problema (YAML, `schema_version: 1`).

    As seções espelham as tabelas de tecnologias; os perfis são descritos
    por fontes (`ProfileSource`) e os cenários personalizados complementam
    os cenários padrão.
    """
    schema_version: Literal[1]
    name: str
    provenance: Provenance
    assumptions: PlanningAssumptions
    catalog: TechnologyCatalog
    profiles: ProfileSources
    scenarios: tuple[ScenarioDefinition, ...] = ()
