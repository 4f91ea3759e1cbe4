from typing import Any, Optional

from pydantic import Field

from microgrid.schemas.base import OutSchema


class ObjectiveBreakdown(OutSchema):
    """
    Reavaliação do objetivo fora da matriz.

    `fuel` usa a curva linearizada por partes (o que o modelo minimiza);
    `fuel_exact` usa a quadrática original.
    """
    capital: float = 0.0
    fuel: float = 0.0
    fuel_exact: float = 0.0
    om: float = 0.0

    @property
    def total(self) -> float:
        return self.capital + self.fuel + self.om

    @property
    def total_exact(self) -> float:
        return self.capital + self.fuel_exact + self.om


class CostReport(OutSchema):
    capital: float = 0.0
    fuel: float = 0.0
    om: float = 0.0
    total: float = 0.0
    by_technology: dict[str, dict[str, float]] = Field(default_factory=dict)
    by_year: list[dict[str, float]] = Field(default_factory=list)
    litres: float = Field(0.0, ge=0)
    emissions_kg: float = Field(0.0, ge=0)


class AdditionRow(OutSchema):
    year: int
    unit: str
    count: Optional[float] = None
    capacity: float


class ReductionRow(OutSchema):
    scenario_id: str
    total_cost_pct: float
    om_pct: float
    fuel_pct: float
    ghg_pct: float


class ScenarioReport(OutSchema):
    scenario_id: str
    fingerprint: str
    provenance: str
    objective: float
    status: str
    cost: CostReport
    additions: list[AdditionRow] = Field(default_factory=list)
    reductions: Optional[ReductionRow] = None


class RunSummary(OutSchema):
    """
    Conteúdo do `summary.json` de uma execução: metadados do problema, opções
    do resolvedor, procedência dos perfis e os relatórios de cada cenário.
    """
    problem: str
    fingerprint: str
    provenance: str
    provenance_note: str = ""
    options: dict[str, Any] = Field(default_factory=dict)
    reports: list[ScenarioReport] = Field(default_factory=list)
    reductions: list[ReductionRow] = Field(default_factory=list)
