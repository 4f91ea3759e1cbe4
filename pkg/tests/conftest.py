import asyncio

import pytest
from httpx import AsyncClient

from microgrid.models.builder import build_model
from microgrid.schemas.problem import PlanningProblem
from microgrid.schemas.solution import SolveOptions
from microgrid.solvers.extract import extract_plan
from microgrid.solvers.solve import solve
from microgrid.usecases.catalog import builtin_sanikiluaq
from tests.factories import battery_data, diesel_data, problem_data


@pytest.fixture(scope="session")
def event_loop():
    """
    Este fixture configura um loop de eventos do asyncio para uso em testes
    assíncronos.

    O escopo `session` garante que o loop seja criado apenas uma vez por sessão
    de teste.
    """
    loop = asyncio.get_event_loop_policy().new_event_loop()
    yield loop
    loop.close()


@pytest.fixture(autouse=True)
def current_event_loop(event_loop):
    """
    Este fixture reinstala o loop da sessão como loop corrente antes de cada
    teste, pois `asyncio.run` (usado pela CLI) o desinstala ao terminar.
    """
    asyncio.set_event_loop(event_loop)


@pytest.fixture
async def client() -> AsyncClient:
    """
    Este fixture cria um cliente HTTP assíncrono para interagir com a API
    durante os testes.

    Ele utiliza o aplicativo (`app`) definido em `microgrid.main` e configura a
    URL base como "http://test".
    """
    from microgrid.main import app

    async with AsyncClient(app=app, base_url="http://test") as ac:
        yield ac


@pytest.fixture
def plans_url() -> str:
    """
    Este fixture define a URL base para os endpoints de planejamento na API.
    """
    return "/plans/"


@pytest.fixture(scope="session")
def sanikiluaq() -> PlanningProblem:
    """
    Este fixture carrega o problema embutido de Sanikiluaq no cenário BAU.
    """
    return builtin_sanikiluaq("BAU")


@pytest.fixture
def one_generator() -> PlanningProblem:
    """
    Este fixture cria um problema de 1 ano × 2 horas com um único gerador
    existente de 100 kW (dados de fábrica `problem_data`).
    """
    return PlanningProblem.model_validate(problem_data())


@pytest.fixture
def one_generator_model(one_generator):
    """
    Este fixture monta o modelo do problema `one_generator` e devolve a
    tupla `(instance, index)`.
    """
    return build_model(one_generator)


@pytest.fixture
def one_generator_plan(one_generator, one_generator_model):
    """
    Este fixture resolve o problema `one_generator` com o branch-and-bound
    embutido (gap 0) e devolve o plano verificado.
    """
    instance, index = one_generator_model
    solution = solve(instance, SolveOptions(gap=0.0, backend="embedded"))
    return extract_plan(solution, index, one_generator, instance)


@pytest.fixture
def battery_problem() -> PlanningProblem:
    """
    Este fixture cria o problema de 1 ano × 2 horas com o gerador `G1` e
    uma bateria obrigatória (módulos de 20 kWh).
    """
    return PlanningProblem.model_validate(problem_data(
        catalog={"existing_diesel": [diesel_data()],
                 "battery": battery_data()},
        scenario={"id": "tiny-battery",
                  "allowed_tech": ["existing-diesel", "battery"],
                  "min_inclusion": {"battery": True}}))
