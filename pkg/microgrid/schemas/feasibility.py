from typing import Literal

from pydantic import Field

from microgrid.schemas.base import OutSchema


class ValidationFinding(OutSchema):
    severity: Literal["error", "warning"]
    field: str
    message: str


class RowViolation(OutSchema):
    row: str
    tag: str
    activity: float
    sense: str
    rhs: float
    violation: float


class ColumnViolation(OutSchema):
    column: str
    value: float
    kind: Literal["bound", "integrality"]
    violation: float


class FeasibilityReport(OutSchema):
    """
    Resultado da verificação independente de uma solução.

    `residuals` guarda, para cada linha, o quanto a restrição é violada
    (zero quando satisfeita).
    """
    tolerance: float
    passed: bool
    max_residual: float = 0.0
    residuals: list[float] = Field(default_factory=list)
    violated_rows: list[RowViolation] = Field(default_factory=list)
    violated_columns: list[ColumnViolation] = Field(default_factory=list)

    def tags(self) -> set[str]:
        return {row.tag for row in self.violated_rows}
