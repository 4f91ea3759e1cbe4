import pytest

from microgrid.core.exceptions import (
    InfeasibleException,
    LimitHitException,
    ProblemValidationException,
)
from microgrid.schemas.plan import CompareRequest, PlanRequest
from microgrid.schemas.problem import PlanningProblem
from microgrid.schemas.solution import SolveOptions
from microgrid.usecases.plan import PlanUsecase
from tests.factories import problem_data, problem_yaml


@pytest.fixture
def usecase() -> PlanUsecase:
    return PlanUsecase()


def test_usecases_load_should_reduce_builtin(usecase):
    problem = usecase.load("3B", builtin="sanikiluaq", years=2, hours=24)

    assert problem.scenario.id == "3B"
    assert (problem.assumptions.horizon_years,
            problem.assumptions.rep_hours) == (2, 24)


def test_usecases_load_should_require_a_source(usecase):
    with pytest.raises(ProblemValidationException):
        usecase.load("BAU")


def test_usecases_run_should_return_verified_report(usecase, one_generator):
    run = usecase.run(one_generator, SolveOptions(gap=0.0))

    assert run.plan.verified
    assert run.report.scenario_id == "BAU"
    assert run.report.fingerprint == one_generator.fingerprint()


def test_usecases_run_should_raise_infeasible(usecase):
    """
    Este teste verifica um problema cuja carga de 150 kW excede o único
    gerador de 100 kW.
    """
    problem = PlanningProblem.model_validate(problem_data(load=(50.0, 150.0)))

    with pytest.raises(InfeasibleException) as err:
        usecase.run(problem, SolveOptions(backend="embedded"))

    assert "BAU" in err.value.message


def test_usecases_run_should_raise_limit_hit_without_incumbent(
        usecase, one_generator):
    with pytest.raises(LimitHitException):
        usecase.run(one_generator, SolveOptions(backend="embedded",
                                                node_limit=1))


def test_usecases_export_should_infer_format_from_suffix(usecase, tmp_path,
                                                         one_generator):
    lp = usecase.export(one_generator, tmp_path / "model.lp")
    mps = usecase.export(one_generator, tmp_path / "model.txt")

    assert lp.read_text().startswith("\\")
    assert mps.read_text().startswith("NAME")


async def test_usecases_plan_should_skip_reductions_without_bau(usecase):
    text = problem_yaml().replace("id: BAU", "id: DIESEL")
    body = PlanRequest(problem=text, scenarios=["DIESEL"],
                       options=SolveOptions(gap=0.0))

    response = await usecase.plan(body)

    assert [r.scenario_id for r in response.reports] == ["DIESEL"]
    assert response.reductions == []


async def test_usecases_compare_should_require_bau(usecase, one_generator):
    report = usecase.run(one_generator).report

    with pytest.raises(ProblemValidationException):
        await usecase.compare(CompareRequest(reports=[report], bau_id="4A"))


@pytest.mark.slow
async def test_usecases_run_many_should_remove_diesel_in_reserve_only_case(
        usecase):
    """
    Este teste resolve o BAU e o cenário 4A do problema embutido reduzido a
    1 ano × 12 horas com o HiGHS.

    Espere:
        * Nenhum litro de diesel no 4A (diesel só como reserva).
        * Redução de 100% de combustível e GEE frente ao BAU.
    """
    problems = [usecase.load(s, builtin="sanikiluaq", years=1, hours=12)
                for s in ("BAU", "4A")]

    runs = await usecase.run_many(problems, SolveOptions(
        gap=0.01, time_limit=300, backend="highs"))

    bau, res = (run.report for run in runs)
    assert res.cost.litres == 0.0
    assert bau.cost.litres > 0.0
