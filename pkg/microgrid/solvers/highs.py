import logging
import math

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp

from microgrid.core.exceptions import NumericalException
from microgrid.models.milp import MilpInstance, Sense
from microgrid.schemas.solution import MilpSolution, SolveOptions, SolveStatus

logger = logging.getLogger(__name__)

OPTIMAL_GAP = 1e-9


def _row_bounds(instance: MilpInstance):
    rhs = np.asarray(instance.rhs, dtype=float)
    lower = np.full(rhs.shape, -np.inf)
    upper = np.full(rhs.shape, np.inf)
    for i, sense in enumerate(instance.senses):
        if sense is not Sense.GE:
            upper[i] = rhs[i]
        if sense is not Sense.LE:
            lower[i] = rhs[i]
    return lower, upper


def _polish(instance: MilpInstance, values: np.ndarray,
            constraints, integrality: np.ndarray) -> np.ndarray:
    """
    Fixa as colunas inteiras arredondadas e resolve o LP restante.
    """
    c, lb, ub, _ = instance.arrays()
    mask = integrality.astype(bool)
    rounded = values.copy()
    rounded[mask] = np.round(rounded[mask])
    lb, ub = lb.copy(), ub.copy()
    lb[mask] = ub[mask] = rounded[mask]
    result = milp(c, constraints=constraints, bounds=Bounds(lb, ub),
                  integrality=np.zeros_like(integrality))
    if result.status != 0 or result.x is None:
        logger.warning("LP polish failed (%s), keeping the MIP values",
                       result.message)
        return rounded
    polished = result.x
    polished[mask] = rounded[mask]
    return polished


def solve_highs(instance: MilpInstance, opts: SolveOptions) -> MilpSolution:
    """
    Resolve a instância com o HiGHS via `scipy.optimize.milp`.

    Os valores devolvidos passam por um polimento: as colunas inteiras são
    arredondadas e fixadas e o LP contínuo é resolvido de novo.

    Raises:
        NumericalException: Se o HiGHS reportar falha numérica.
    """
    c, lb, ub, _ = instance.arrays()
    integrality = instance.integral().astype(int)
    lower, upper = _row_bounds(instance)
    constraints = LinearConstraint(instance.matrix(), lower, upper)
    options = {"disp": False, "mip_rel_gap": opts.gap}
    if opts.time_limit is not None:
        options["time_limit"] = opts.time_limit
    if opts.node_limit is not None:
        options["node_limit"] = opts.node_limit

    result = milp(c, constraints=constraints, bounds=Bounds(lb, ub),
                  integrality=integrality, options=options)
    logger.info("HiGHS finished: status %d (%s)", result.status, result.message)

    best_bound = getattr(result, "mip_dual_bound", None)
    if best_bound is not None and math.isfinite(best_bound):
        best_bound += instance.obj_offset
    else:
        best_bound = None
    nodes = int(getattr(result, "mip_node_count", 0) or 0)

    if result.status == 2:
        return MilpSolution(status=SolveStatus.INFEASIBLE, nodes=nodes,
                            backend="highs", message=result.message)
    if result.status == 3:
        return MilpSolution(status=SolveStatus.UNBOUNDED, nodes=nodes,
                            backend="highs", message=result.message)
    if result.status not in (0, 1):
        raise NumericalException(message=f"HiGHS: {result.message}")

    values = objective = None
    if result.x is not None:
        x = _polish(instance, np.asarray(result.x), constraints, integrality)
        values, objective = x.tolist(), instance.objective(x)

    if result.status == 1:
        status = SolveStatus.LIMIT_HIT
    else:
        gap = getattr(result, "mip_gap", 0.0) or 0.0
        status = (SolveStatus.OPTIMAL if gap <= OPTIMAL_GAP
                  else SolveStatus.GAP_LIMIT)
        if best_bound is None:
            best_bound = objective
    return MilpSolution(status=status, values=values, objective=objective,
                        best_bound=best_bound, nodes=nodes, backend="highs",
                        message=result.message)
