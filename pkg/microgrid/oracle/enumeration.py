"""
Ótimo global por enumeração exaustiva das decisões inteiras.
"""
import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor

from pydantic import ValidationError

from microgrid.core.config import settings
from microgrid.core.exceptions import InfeasibleException, OracleBoundException
from microgrid.oracle.evaluator import AssignmentEvaluator, Evaluation
from microgrid.schemas.catalog import Technology
from microgrid.schemas.oracle import TinyInstanceSpec
from microgrid.schemas.problem import PlanningProblem
from microgrid.schemas.solution import PlanSolution
from microgrid.usecases.profiles import linearize_fuel_curve

logger = logging.getLogger(__name__)

_CHUNK = 256


def integer_column_count(problem: PlanningProblem) -> int:
    """
    Quantidade de colunas inteiras e binárias do modelo induzido pelo
    problema, contada sem construí-lo.
    """
    a, catalog = problem.assumptions, problem.catalog
    allowed = problem.scenario.allowed_tech & catalog.technologies()
    years, hours = a.horizon_years, a.rep_hours
    cells = years * hours

    def diesel(specs) -> int:
        total = 0
        for spec in specs:
            curve = linearize_fuel_curve(spec, a.fuel_segments)
            concave = not curve.convex and curve.segments > 1
            total += cells * (1 + (curve.segments if concave else 0))
        return total

    total = 0
    if Technology.EXISTING_DIESEL in allowed:
        total += diesel(catalog.existing_diesel)
    if Technology.NEW_DIESEL in allowed:
        total += diesel(catalog.new_diesel) + years * len(catalog.new_diesel)
    if Technology.WIND in allowed:
        total += years
    if Technology.BATTERY in allowed:
        total += years + 2 * cells
    if Technology.HYDROGEN in allowed:
        total += 3 * years
    return total


def check_tiny(problem: PlanningProblem,
               evaluator: AssignmentEvaluator | None = None) -> TinyInstanceSpec:
    """
    Mede o problema contra os limites de instância pequena.

    Raises:
        OracleBoundException: Se algum limite for excedido, inclusive o
        número de atribuições (`ORACLE_MAX_ASSIGNMENTS`).
    """
    evaluator = evaluator or AssignmentEvaluator(problem)
    a = problem.assumptions
    modules = [int(evaluator.limits[unit]) for unit in evaluator.modules]
    assignments = math.prod(len(slot.domain) for slot in evaluator.slots())
    try:
        spec = TinyInstanceSpec(
            years=a.horizon_years, rep_hours=a.rep_hours,
            max_modules=max(modules, default=0),
            technologies=tuple(sorted(t.value for t in evaluator.allowed)),
            integer_columns=integer_column_count(problem),
            assignments=assignments)
    except ValidationError as exc:
        fields = ", ".join(".".join(map(str, e["loc"])) for e in exc.errors())
        raise OracleBoundException(
            message=f"problem {problem.name!r} is not a tiny instance "
                    f"({fields})") from exc
    if assignments > settings.ORACLE_MAX_ASSIGNMENTS:
        raise OracleBoundException(
            message=f"{assignments} assignments exceed ORACLE_MAX_ASSIGNMENTS "
                    f"= {settings.ORACLE_MAX_ASSIGNMENTS}")
    return spec


def _better(candidate: tuple[float, tuple], best: tuple[float, tuple] | None):
    if best is None:
        return True
    objective, assignment = candidate
    incumbent, incumbent_assignment = best
    tol = 1e-9 * max(1.0, abs(incumbent))
    if objective < incumbent - tol:
        return True
    return abs(objective - incumbent) <= tol and assignment < incumbent_assignment


def _best_of(evaluator: AssignmentEvaluator, keys: list,
             chunk: list[tuple]) -> tuple[float, tuple, Evaluation] | None:
    best = None
    for assignment in chunk:
        evaluation = evaluator.evaluate(dict(zip(keys, assignment)))
        if not evaluation.feasible:
            continue
        if best is None or _better((evaluation.objective, assignment),
                                   best[:2]):
            best = (evaluation.objective, assignment, evaluation)
    return best


def enumerate_optimum(problem: PlanningProblem,
                      workers: int = 1) -> PlanSolution:
    """
    Resolve um problema pequeno avaliando todas as atribuições inteiras.

    Para cada atribuição, o LP contínuo restante é resolvido pelo
    `AssignmentEvaluator`. Empates de objetivo ficam com a atribuição
    lexicograficamente menor, de modo que o resultado não depende de
    `workers`.

    Args:
        problem (PlanningProblem): Instância pequena (`TinyInstanceSpec`).
        workers (int): Threads que avaliam blocos de atribuições.

    Returns:
        PlanSolution: Plano ótimo, com status `optimal`.

    Raises:
        OracleBoundException: Se a instância exceder os limites.
        InfeasibleException: Se nenhuma atribuição for viável.
    """
    evaluator = AssignmentEvaluator(problem)
    spec = check_tiny(problem, evaluator)
    slots = evaluator.slots()
    keys = [(slot.kind, slot.unit, slot.year, slot.hour) for slot in slots]
    assignments = itertools.product(*(slot.domain for slot in slots))
    chunks = iter(lambda: list(itertools.islice(assignments, _CHUNK)), [])

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(
                lambda chunk: _best_of(evaluator, keys, chunk), chunks))
    else:
        results = [_best_of(evaluator, keys, chunk) for chunk in chunks]

    best = None
    for result in results:
        if result is not None and (best is None or _better(result[:2],
                                                           best[:2])):
            best = result
    if best is None:
        raise InfeasibleException(
            message=f"all {spec.assignments} assignments of {problem.name!r} "
                    f"are infeasible")

    objective, assignment, evaluation = best
    logger.info("enumerated %d assignments of %r: objective %.10g",
                spec.assignments, problem.name, objective)
    return evaluator.to_plan(dict(zip(keys, assignment)), evaluation)
