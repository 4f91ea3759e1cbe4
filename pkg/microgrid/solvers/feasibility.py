import logging

import numpy as np

from microgrid.core.exceptions import DimensionMismatchException
from microgrid.models.milp import MilpInstance, Sense, tag_of
from microgrid.schemas.feasibility import (
    ColumnViolation,
    FeasibilityReport,
    RowViolation,
)

logger = logging.getLogger(__name__)


def row_residuals(instance: MilpInstance, values) -> np.ndarray:
    """
    Quanto cada linha é violada por `values` (zero quando satisfeita).
    """
    activity = instance.activities(values)
    rhs = np.asarray(instance.rhs, dtype=float)
    senses = np.array([sense.value for sense in instance.senses])
    excess = activity - rhs
    return np.where(senses == Sense.LE.value, np.maximum(excess, 0.0),
                    np.where(senses == Sense.GE.value,
                             np.maximum(-excess, 0.0), np.abs(excess)))


def check_feasibility(instance: MilpInstance, values,
                      tol: float = 1e-6) -> FeasibilityReport:
    """
    Verifica uma solução contra todas as linhas, limites e integralidades
    da instância, sem depender do resolvedor que a produziu.

    Uma linha é violada quando o resíduo passa de `tol·max(1, |rhs|)`; um
    limite, quando a distância passa de `tol·max(1, |limite|)`; uma coluna
    inteira, quando dista mais de `tol` do inteiro mais próximo.

    Args:
        instance (MilpInstance): Instância verificada.
        values: Um valor por coluna.
        tol (float): Tolerância.

    Returns:
        FeasibilityReport: Resíduos por linha e listas de violações com as
        etiquetas das equações.

    Raises:
        DimensionMismatchException: Se a quantidade de valores diferir da
        quantidade de colunas.
    """
    values = np.asarray(values, dtype=float)
    if values.shape != (instance.n_cols,):
        raise DimensionMismatchException(
            message=f"{values.size} values for {instance.n_cols} columns")

    activity = instance.activities(values)
    residuals = row_residuals(instance, values)
    rhs = np.asarray(instance.rhs, dtype=float)
    rows = [
        RowViolation(row=instance.row_names[i], tag=tag_of(instance.row_names[i]),
                     activity=float(activity[i]),
                     sense=instance.senses[i].value, rhs=float(rhs[i]),
                     violation=float(residuals[i]))
        for i in np.flatnonzero(residuals > tol * np.maximum(1.0, np.abs(rhs)))
    ]

    _, lb, ub, _ = instance.arrays()
    columns = []
    below = lb - values
    above = values - ub
    for j in range(instance.n_cols):
        if below[j] > tol * max(1.0, abs(lb[j])):
            columns.append(ColumnViolation(
                column=instance.col_names[j], value=float(values[j]),
                kind="bound", violation=float(below[j])))
        elif above[j] > tol * max(1.0, abs(ub[j])):
            columns.append(ColumnViolation(
                column=instance.col_names[j], value=float(values[j]),
                kind="bound", violation=float(above[j])))
    integral = instance.integral()
    distance = np.abs(values - np.round(values))
    for j in np.flatnonzero(integral & (distance > tol)):
        columns.append(ColumnViolation(
            column=instance.col_names[j], value=float(values[j]),
            kind="integrality", violation=float(distance[j])))

    report = FeasibilityReport(
        tolerance=tol, passed=not rows and not columns,
        max_residual=float(residuals.max(initial=0.0)),
        residuals=residuals.tolist(), violated_rows=rows,
        violated_columns=columns)
    if not report.passed:
        logger.info("feasibility check failed: %d rows (%s), %d columns",
                    len(rows), ", ".join(sorted(report.tags())), len(columns))
    return report
