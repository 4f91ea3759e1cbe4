from typing import Annotated, Literal, Optional

from pydantic import Field, model_validator

from microgrid.schemas.base import BaseSchemaMixin, OutSchema
from microgrid.schemas.feasibility import ValidationFinding
from microgrid.schemas.profiles import YEAR_HOURS
from microgrid.schemas.report import ReductionRow, ScenarioReport
from microgrid.schemas.solution import SolveOptions


class PlanRequest(BaseSchemaMixin):
    """
    Pedido de planejamento: um problema (embutido ou documento YAML), os
    cenários a resolver e as opções do resolvedor.
    """
    builtin: Annotated[Optional[Literal["sanikiluaq"]],
                       Field(description="Bundled problem")] = None
    problem: Annotated[Optional[str],
                       Field(description="Problem document (YAML)")] = None
    scenarios: list[str] = Field(["BAU"], min_length=1)
    years: Optional[int] = Field(None, ge=1)
    hours: Optional[int] = Field(None, ge=1, le=YEAR_HOURS)
    options: SolveOptions = SolveOptions()

    @model_validator(mode="after")
    def check_source(self):
        if (self.builtin is None) == (self.problem is None):
            raise ValueError("exactly one of 'builtin' and 'problem' is required")
        return self


class PlanResponse(OutSchema):
    reports: list[ScenarioReport] = Field(default_factory=list)
    reductions: list[ReductionRow] = Field(default_factory=list)


class CompareRequest(BaseSchemaMixin):
    reports: list[ScenarioReport] = Field(..., min_length=1)
    bau_id: str = "BAU"


class ValidateResponse(OutSchema):
    scenario_id: str
    valid: bool
    findings: list[ValidationFinding] = Field(default_factory=list)
