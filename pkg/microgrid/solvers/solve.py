import logging
import time

from microgrid.core.config import settings
from microgrid.models.milp import MilpInstance
from microgrid.schemas.solution import MilpSolution, SolveOptions, SolveStatus
from microgrid.solvers.bnb import solve_embedded
from microgrid.solvers.highs import solve_highs

logger = logging.getLogger(__name__)


def _auto(instance: MilpInstance, opts: SolveOptions) -> MilpSolution:
    """
    Branch-and-bound embutido com orçamento de tempo; se ele parar por limite
    sem incumbente, ou pelo orçamento que o próprio `auto` impôs, o HiGHS
    recebe o tempo restante.
    """
    budget = opts.time_limit or settings.EMBEDDED_TIME_LIMIT
    started = time.monotonic()
    solution = solve_embedded(
        instance, opts.model_copy(update={"time_limit": budget}))
    if solution.status is not SolveStatus.LIMIT_HIT:
        return solution
    imposed = opts.time_limit is None and solution.message == "time limit"
    if solution.has_incumbent and not imposed:
        return solution

    remaining = None
    if opts.time_limit is not None:
        remaining = max(opts.time_limit - (time.monotonic() - started), 1.0)
    logger.warning("embedded search stopped (%s, incumbent %s); falling back "
                   "to HiGHS", solution.message, solution.objective)
    fallback = solve_highs(
        instance, opts.model_copy(update={"time_limit": remaining}))
    if fallback.has_incumbent or not solution.has_incumbent:
        return fallback.model_copy(update={
            "message": f"embedded {solution.message}; {fallback.message}"})
    return solution


def solve(instance: MilpInstance,
          opts: SolveOptions | None = None) -> MilpSolution:
    """
    Resolve um `MilpInstance` com o backend escolhido em `opts.backend`.

    `"auto"` usa o branch-and-bound embutido em instâncias de até
    `settings.EMBEDDED_COLUMN_LIMIT` colunas e o HiGHS acima disso ou quando
    a busca embutida termina por limite sem incumbente.

    Args:
        instance (MilpInstance): Instância a resolver (não é alterada).
        opts (SolveOptions | None): Opções; padrão `SolveOptions()`.

    Returns:
        MilpSolution: Status, valores, objetivo e limitantes.
    """
    opts = opts or SolveOptions()
    backend = opts.backend
    if backend == "auto":
        backend = ("embedded" if instance.n_cols <= settings.EMBEDDED_COLUMN_LIMIT
                   else "highs")
    logger.info("solving %r (%d columns, %d rows) with %s backend",
                instance.name, instance.n_cols, instance.n_rows, backend)
    if backend == "embedded" and opts.backend == "auto":
        solution = _auto(instance, opts)
    elif backend == "embedded":
        solution = solve_embedded(instance, opts)
    else:
        solution = solve_highs(instance, opts)
    logger.info("status %s objective %s bound %s nodes %d",
                solution.status.value, solution.objective, solution.best_bound,
                solution.nodes)
    return solution
