import math
from enum import Enum
from typing import Literal, Optional

import numpy as np
from pydantic import Field

from microgrid.schemas.base import BaseSchemaMixin, OutSchema


class SolveStatus(str, Enum):
    OPTIMAL = "optimal"
    GAP_LIMIT = "gap-limit"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    LIMIT_HIT = "limit-hit"


class SolveOptions(BaseSchemaMixin):
    """
    Opções do resolvedor.

    `backend="auto"` usa o branch-and-bound embutido até
    `settings.EMBEDDED_COLUMN_LIMIT` colunas e o HiGHS acima disso.
    """
    gap: float = Field(1e-6, ge=0, description="Relative MIP gap")
    time_limit: Optional[float] = Field(None, gt=0, description="[s]")
    node_limit: Optional[int] = Field(None, gt=0)
    branching: Literal["most-fractional"] = "most-fractional"
    pivot_tol: float = Field(1e-9, gt=0)
    backend: Literal["auto", "embedded", "highs"] = "auto"
    open_node_limit: int = Field(
        50_000, gt=0,
        description="Open nodes before switching to depth-first selection")


class MilpSolution(OutSchema):
    status: SolveStatus
    values: Optional[list[float]] = None
    objective: Optional[float] = None
    best_bound: Optional[float] = None
    root_bound: Optional[float] = None
    nodes: int = 0
    backend: str = "embedded"
    message: str = ""

    @property
    def has_incumbent(self) -> bool:
        return self.values is not None

    def array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)

    def gap(self) -> float:
        if self.objective is None or self.best_bound is None:
            return math.inf
        return abs(self.objective - self.best_bound) / max(
            1.0, abs(self.objective))


class PlanSolution(OutSchema):
    """
    Plano estruturado extraído de uma solução.

    `additions` e `installed` trazem um valor por ano, por unidade
    (`N1`, `solar`, `battery`, `fuel_cell`...). Para tecnologias modulares,
    `additions` guarda a capacidade adicionada (kW, kWh ou kg) e `counts` a
    quantidade de unidades. `hourly` mapeia `"<família>_<unidade>"`
    (`P_G1`, `SB_battery`...) para matrizes ano × hora; `terminal` guarda o
    estado de carga após a última hora do horizonte.
    """
    scenario_id: str
    horizon_years: int
    rep_hours: int
    status: SolveStatus = SolveStatus.OPTIMAL
    objective: float = 0.0
    additions: dict[str, list[float]] = Field(default_factory=dict)
    counts: dict[str, list[float]] = Field(default_factory=dict)
    installed: dict[str, list[float]] = Field(default_factory=dict)
    hourly: dict[str, list[list[float]]] = Field(default_factory=dict)
    terminal: dict[str, float] = Field(default_factory=dict)
    verified: bool = False

    def series(self, code: str, unit: str) -> np.ndarray:
        """
        Matriz ano × hora de uma família; zeros quando ausente.
        """
        values = self.hourly.get(f"{code}_{unit}")
        if values is None:
            return np.zeros((self.horizon_years, self.rep_hours))
        return np.asarray(values, dtype=float)

    def yearly(self, table: str, unit: str) -> np.ndarray:
        values = getattr(self, table).get(unit)
        if values is None:
            return np.zeros(self.horizon_years)
        return np.asarray(values, dtype=float)
