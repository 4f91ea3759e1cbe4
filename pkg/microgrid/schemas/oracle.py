from typing import Optional

from pydantic import Field

from microgrid.schemas.base import BaseSchemaMixin, OutSchema
from microgrid.schemas.solution import PlanSolution

MAX_YEARS = 2
MAX_HOURS = 8
MAX_MODULES = 2
MAX_INTEGER_COLUMNS = 24


class TinyInstanceSpec(BaseSchemaMixin):
    """
    Dimensões de uma instância pequena o bastante para enumeração exaustiva.

    Os limites são verificados por `check_tiny`; os campos guardam o que foi
    medido no problema.
    """
    years: int = Field(..., ge=1, le=MAX_YEARS)
    rep_hours: int = Field(..., ge=1, le=MAX_HOURS)
    max_modules: int = Field(..., ge=0, le=MAX_MODULES)
    technologies: tuple[str, ...] = ()
    integer_columns: int = Field(..., ge=0, le=MAX_INTEGER_COLUMNS)
    assignments: int = Field(..., ge=1)


class DispatchResult(OutSchema):
    feasible: bool
    cost: Optional[float] = None
    reason: str = ""
    plan: Optional[PlanSolution] = None


class OracleVerdict(OutSchema):
    """
    Veredito de uma instância do conjunto de equivalência.
    """
    name: str
    passed: bool
    solver_objective: Optional[float] = None
    oracle_objective: Optional[float] = None
    simulated_cost: Optional[float] = None
    relative_error: Optional[float] = None
    tags: list[str] = Field(default_factory=list)
    message: str = ""


class SuiteReport(OutSchema):
    seed: int
    verdicts: list[OracleVerdict] = Field(default_factory=list)
    missing_tags: list[str] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return (all(verdict.passed for verdict in self.verdicts)
                and not self.missing_tags)
