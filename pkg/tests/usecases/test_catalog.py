import pytest

from microgrid.core.exceptions import (
    ParseException,
    ProblemValidationException,
    UnknownScenarioException,
)
from microgrid.schemas.catalog import Technology
from microgrid.schemas.problem import PlanningProblem
from microgrid.usecases.catalog import (
    builtin_sanikiluaq,
    dump_problem,
    load_problem,
    parse_document,
    problem_from_document,
    standard_scenarios,
    unit_limits,
    validate_problem,
)
from tests.factories import problem_data, problem_yaml


def test_usecases_builtin_sanikiluaq_should_be_valid(sanikiluaq):
    """
    Este teste verifica se o problema embutido carrega com o ano
    representativo completo e passa em todas as verificações cruzadas.

    Espere:
        * 288 horas em todos os perfis.
        * Nenhum achado de validação.
        * Procedência marcada como digitalizada.
    """
    assert sanikiluaq.assumptions.rep_hours == 288
    assert all(len(p) == 288 for _, p in sanikiluaq.profiles.items())
    assert validate_problem(sanikiluaq) == []
    assert sanikiluaq.provenance.profiles == "digitized-approximate"


def test_usecases_standard_scenarios_should_list_all_cases():
    assert sorted(standard_scenarios()) == [
        "1A", "1B", "2A", "2B", "3A", "3B", "4A", "4B", "BAU"]


def test_usecases_load_problem_should_raise_unknown_scenario():
    with pytest.raises(UnknownScenarioException) as err:
        builtin_sanikiluaq("5C")

    assert "5C" in err.value.message


def test_usecases_parse_document_should_report_line_and_column():
    with pytest.raises(ParseException) as err:
        parse_document("name: [unclosed\nschema_version: 1\n", "broken.yaml")

    assert "broken.yaml" in err.value.message
    assert "line" in err.value.message


def test_usecases_parse_document_should_name_invalid_field():
    text = problem_yaml().replace("discount_rate: 0.08", "discount_rate: 1.5")

    with pytest.raises(ProblemValidationException) as err:
        parse_document(text)

    assert "assumptions.discount_rate" in err.value.message


def test_usecases_problem_from_document_should_normalize_units():
    problem = problem_from_document(parse_document(problem_yaml()), "BAU")

    assert problem.catalog.existing_diesel[0].rated_kw == pytest.approx(100.0)
    assert problem.assumptions.reserve_load == pytest.approx(0.1)
    assert problem.scenario.allowed_tech == {Technology.EXISTING_DIESEL}


def test_usecases_dump_problem_should_reload_identical_problem(tmp_path):
    """
    Este teste verifica se o YAML gerado por `dump_problem` recarrega o mesmo
    problema, com a mesma impressão digital.
    """
    problem = builtin_sanikiluaq("3A").reduced(years=2, hours=24)
    path = tmp_path / "problem.yaml"
    path.write_text(dump_problem(problem))

    reloaded = load_problem(path, "3A")

    assert reloaded == problem
    assert reloaded.fingerprint() == problem.fingerprint()


def test_usecases_fingerprint_should_ignore_scenario(sanikiluaq):
    assert builtin_sanikiluaq("1A").fingerprint() == sanikiluaq.fingerprint()
    assert sanikiluaq.reduced(years=2).fingerprint() != sanikiluaq.fingerprint()


def test_usecases_validate_problem_should_report_non_positive_load():
    problem = PlanningProblem.model_validate(problem_data(load=(50.0, 0.0)))

    findings = validate_problem(problem)

    assert [(f.severity, f.field) for f in findings if f.severity == "error"] \
        == [("error", "profiles.load")]


def test_usecases_validate_problem_should_warn_on_reduced_year(one_generator):
    findings = validate_problem(one_generator)

    assert [f.field for f in findings] == ["assumptions.rep_hours"]
    assert findings[0].severity == "warning"


def test_usecases_unit_limits_should_honor_overrides(sanikiluaq):
    limits = unit_limits(sanikiluaq)
    overridden = sanikiluaq.model_copy(update={
        "assumptions": sanikiluaq.assumptions.model_copy(
            update={"max_units": {"wind": 2}})})

    assert limits["wind"] >= 1
    assert unit_limits(overridden)["wind"] == 2
