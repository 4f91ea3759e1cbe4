import numpy as np
import pytest

from microgrid.core.config import settings
from microgrid.core.exceptions import NoIncumbentException, NumericalException
from microgrid.models.builder import build_model
from microgrid.models.milp import MilpInstance, Sense, VarType
from microgrid.oracle.suite import tiny_problem
from microgrid.schemas.problem import PlanningProblem
from microgrid.schemas.solution import MilpSolution, SolveOptions, SolveStatus
from microgrid.solvers.extract import extract_plan, plan_to_values
from microgrid.solvers.feasibility import check_feasibility
from microgrid.solvers import solve as solve_module
from microgrid.solvers.solve import solve
from tests.factories import diesel_data, problem_data, wind_data


def _knapsack(ub: float = 10.0) -> MilpInstance:
    instance = MilpInstance(name="knapsack")
    x = instance.add_column("x", 0.0, ub, VarType.INTEGER, -5.0)
    y = instance.add_column("y", 0.0, ub, VarType.INTEGER, -4.0)
    instance.add_row("c1", [(x, 6.0), (y, 4.0)], Sense.LE, 24.0)
    instance.add_row("c2", [(x, 1.0), (y, 2.0)], Sense.LE, 6.0)
    return instance


@pytest.mark.parametrize("backend", ["embedded", "highs"])
def test_solvers_solve_should_find_integer_optimum(backend):
    """
    Este teste verifica o ótimo inteiro de um problema da mochila pequeno,
    cuja relaxação linear (x = 3, y = 1,5) vale −21.

    Espere:
        * Ótimo inteiro x = 4, y = 0 com objetivo −20 nos dois backends.
    """
    solution = solve(_knapsack(), SolveOptions(gap=0.0, backend=backend))

    assert solution.status is SolveStatus.OPTIMAL
    assert solution.objective == pytest.approx(-20.0)
    assert solution.values == pytest.approx([4.0, 0.0])
    assert solution.backend == backend


def test_solvers_solve_should_pick_embedded_for_small_models():
    solution = solve(_knapsack(), SolveOptions(gap=0.0))

    assert solution.backend == "embedded"


def test_solvers_solve_should_report_infeasible_model():
    instance = MilpInstance(name="infeasible")
    x = instance.add_column("x", 0.0, 2.0, VarType.INTEGER)
    instance.add_row("c1", [(x, 1.0)], Sense.GE, 3.0)

    solution = solve(instance, SolveOptions(backend="embedded"))

    assert solution.status is SolveStatus.INFEASIBLE
    assert not solution.has_incumbent


def test_solvers_solve_should_stop_at_node_limit():
    solution = solve(_knapsack(), SolveOptions(backend="embedded",
                                               node_limit=1))

    assert solution.status is SolveStatus.LIMIT_HIT


def test_solvers_solve_should_reject_unbounded_integer_column():
    with pytest.raises(NumericalException) as err:
        solve(_knapsack(ub=float("inf")), SolveOptions(backend="embedded"))

    assert "x" in err.value.message


def test_solvers_extract_plan_should_structure_dispatch(one_generator_plan):
    """
    Este teste verifica o plano do problema de um gerador: o gerador atende
    toda a carga nas duas horas e fica ligado.
    """
    assert one_generator_plan.verified
    assert one_generator_plan.hourly["P_G1"] == [pytest.approx([50.0, 80.0])]
    assert one_generator_plan.hourly["U_G1"] == [[1.0, 1.0]]
    assert one_generator_plan.additions == {}


def test_solvers_extract_plan_should_require_incumbent(one_generator,
                                                       one_generator_model):
    instance, index = one_generator_model

    with pytest.raises(NoIncumbentException):
        extract_plan(MilpSolution(status=SolveStatus.INFEASIBLE), index,
                     one_generator, instance)


def test_solvers_plan_to_values_should_rebuild_feasible_vector(
        one_generator, one_generator_model, one_generator_plan):
    instance, index = one_generator_model

    values = plan_to_values(one_generator_plan, index, one_generator)

    assert check_feasibility(instance, values).passed
    assert instance.objective(values) == pytest.approx(
        one_generator_plan.objective, rel=1e-9)


def _solve_plan(problem, **options):
    instance, index = build_model(problem)
    solution = solve(instance, SolveOptions(backend="embedded", **options))
    return extract_plan(solution, index, problem, instance)


def test_solvers_solve_should_respect_battery_bounds(battery_problem):
    """
    Este teste verifica o plano com bateria obrigatória.

    Espere:
        * Ao menos um módulo instalado.
        * δ·I ≤ SB ≤ I em todas as horas e no estado terminal.
        * Carga e descarga nunca ligadas na mesma hora.
    """
    plan = _solve_plan(battery_problem, gap=0.0)

    installed = plan.yearly("installed", "battery")
    state = plan.series("SB", "battery")
    assert plan.yearly("counts", "battery").sum() >= 1
    assert np.all(state <= installed[:, None] + 1e-6)
    assert np.all(state >= 0.2 * installed[:, None] - 1e-6)
    assert 0.2 * installed[-1] - 1e-6 <= plan.terminal["SB_battery"] \
        <= installed[-1] + 1e-6
    assert np.all(plan.series("UC", "battery")
                  + plan.series("UD", "battery") <= 1.0 + 1e-9)


def test_solvers_solve_should_add_cheap_wind():
    """
    Este teste verifica um problema de 1 ano × 2 horas com vento de 10 m/s
    e turbinas de 40 kW a 1 $/kW.

    Espere:
        * Ao menos uma turbina adicionada e potência eólica despachada.
        * Potência eólica limitada pela capacidade instalada.
    """
    data = problem_data(
        catalog={"existing_diesel": [diesel_data()], "wind": wind_data()},
        scenario={"id": "tiny-wind",
                  "allowed_tech": ["existing-diesel", "wind"]},
        max_units={"wind": 2})
    data["profiles"]["wind_speed"]["values"] = [10.0, 10.0]
    problem = PlanningProblem.model_validate(data)

    plan = _solve_plan(problem, gap=0.0)

    installed = plan.yearly("installed", "wind")
    assert plan.yearly("counts", "wind").sum() >= 1
    assert plan.series("PW", "wind").sum() > 0
    assert np.all(plan.series("PW", "wind") <= installed[:, None] + 1e-6)


@pytest.mark.parametrize("seed", [11, 12])
def test_solvers_solve_should_respect_tank_bounds(seed):
    """
    Este teste verifica o hidrogênio obrigatório no ano 1 (2 anos × 2
    horas): o estoque do tanque fica entre as frações mínima e máxima da
    capacidade instalada (kg), inclusive no estado terminal.
    """
    problem = tiny_problem("hydrogen", np.random.default_rng(seed), "h2")
    spec = problem.catalog.hydrogen

    plan = _solve_plan(problem, gap=0.0)

    installed = plan.yearly("installed", "tank")
    stock = plan.series("SQ", "tank")
    assert installed[0] >= spec.tank_kg
    assert np.all(stock <= spec.tank_max_frac * installed[:, None] + 1e-6)
    assert np.all(stock >= spec.tank_min_frac * installed[:, None] - 1e-6)
    assert plan.terminal["SQ_tank"] >= spec.tank_min_frac * installed[-1] - 1e-6


def test_solvers_solve_should_find_incumbent_on_reduced_sanikiluaq(
        sanikiluaq):
    """
    Este teste verifica que o branch-and-bound embutido encontra um plano
    para o BAU de Sanikiluaq reduzido a 1 ano × 2 horas dentro do limite de
    tempo.
    """
    instance, _ = build_model(sanikiluaq.reduced(years=1, hours=2))

    solution = solve(instance, SolveOptions(gap=0.01, time_limit=120,
                                            backend="embedded"))

    assert solution.has_incumbent
    assert check_feasibility(instance, solution.array()).passed


def test_solvers_solve_should_fall_back_to_highs_without_incumbent(
        monkeypatch):
    """
    Este teste verifica o backend `auto` quando a busca embutida para por
    limite sem incumbente.

    Espere:
        * Solução do HiGHS com o ótimo −20 da mochila.
        * Mensagem com o motivo da parada embutida.
    """
    monkeypatch.setattr(solve_module, "solve_embedded", lambda instance, opts:
                        MilpSolution(status=SolveStatus.LIMIT_HIT,
                                     message="time limit"))

    solution = solve(_knapsack(), SolveOptions(gap=0.0))

    assert solution.backend == "highs"
    assert solution.objective == pytest.approx(-20.0)
    assert solution.message.startswith("embedded time limit")


def test_solvers_solve_should_budget_embedded_search(monkeypatch):
    captured = []
    embedded = solve_module.solve_embedded

    def _spy(instance, opts):
        captured.append(opts.time_limit)
        return embedded(instance, opts)

    monkeypatch.setattr(settings, "EMBEDDED_TIME_LIMIT", 7.0)
    monkeypatch.setattr(solve_module, "solve_embedded", _spy)

    solution = solve(_knapsack(), SolveOptions(gap=0.0))

    assert captured == [7.0]
    assert solution.backend == "embedded"
    assert solution.status is SolveStatus.OPTIMAL
