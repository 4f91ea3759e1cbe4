import pytest

from microgrid.core.exceptions import DimensionMismatchException
from microgrid.models.objective import (
    npc_capital,
    objective_terms,
    recompute_objective,
    replacement_install_year,
)
from microgrid.schemas.solution import PlanSolution
from microgrid.usecases.catalog import builtin_sanikiluaq
from tests.factories import plan_data


def test_models_npc_capital_should_discount_by_year():
    """
    Este teste verifica o custo de capital de um gerador novo de 320 kW a
    727 $/kW adicionado no ano 3 com taxa de 8%.

    Espere:
        * 727·320 / 1,08² = 199.451,30 $.
    """
    assert npc_capital(727.0, 320.0, 3, 0.08) == pytest.approx(199_451.30,
                                                               abs=0.01)
    assert npc_capital(727.0, 320.0, 1, 0.08) == 727.0 * 320.0


def test_models_npc_capital_should_reject_year_zero():
    with pytest.raises(ValueError):
        npc_capital(727.0, 320.0, 0, 0.08)


def test_models_recompute_objective_should_match_solver(one_generator_plan,
                                                        one_generator):
    breakdown = recompute_objective(one_generator_plan, one_generator)

    assert breakdown.capital == 0.0
    assert breakdown.total == pytest.approx(one_generator_plan.objective,
                                            rel=1e-6)
    assert breakdown.fuel_exact <= breakdown.fuel + 1e-9


def test_models_recompute_objective_should_reject_other_dimensions(
        one_generator):
    plan = PlanSolution.model_validate(plan_data(rep_hours=3))

    with pytest.raises(DimensionMismatchException):
        recompute_objective(plan, one_generator)


def test_models_objective_terms_should_carry_litres(one_generator_plan,
                                                    one_generator):
    terms = objective_terms(one_generator_plan, one_generator)

    exact = [t for t in terms if t.kind == "fuel_exact"]
    assert len(exact) == 1
    assert exact[0].litres == pytest.approx(exact[0].value / 2.391)


def test_models_replacement_install_year_should_follow_lifetime():
    """
    Este teste verifica o ano de instalação dos eletrolisadores trocados no
    ano 16, e que a troca fora do horizonte não é cobrada.
    """
    problem = builtin_sanikiluaq("1A")
    lifetime = int(round(problem.catalog.hydrogen.el_lifetime_y))

    assert replacement_install_year(problem) == 16 - lifetime
    assert replacement_install_year(problem.reduced(years=10)) is None
    assert replacement_install_year(builtin_sanikiluaq("3A")) is None


def test_models_hydrogen_conversion_should_match_published_steps():
    h2 = builtin_sanikiluaq("1A").catalog.hydrogen

    assert h2.kg_per_kwh_electrolysis * 330 == pytest.approx(5.7479, abs=1e-4)
    assert h2.kg_per_kwh_fuel_cell * 250 == pytest.approx(10.5753, abs=1e-4)
