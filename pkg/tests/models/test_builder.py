import numpy as np
import pytest

from microgrid.core.exceptions import (
    ModelSizeException,
    ProblemValidationException,
)
from microgrid.core.config import settings
from microgrid.models.builder import build_model, demand_matrix
from microgrid.models.milp import (
    EQUATION_TAGS,
    ColumnKey,
    Family,
    VarType,
    tag_of,
)
from microgrid.schemas.problem import PlanningProblem
from microgrid.usecases.catalog import builtin_sanikiluaq
from tests.factories import diesel_data, problem_data


def _tags(instance):
    return {tag_of(name) for name in instance.row_names}


def test_models_build_model_should_emit_diesel_rows(one_generator_model):
    """
    Este teste verifica as famílias de linhas do problema de um gerador
    existente.

    Espere:
        * Limites de potência (Eq7, Eq9), horas de operação (Eq10, Eq11).
        * Balanço (Eq4), reserva (Eq5) e linhas de combustível.
    """
    instance, _ = one_generator_model

    assert _tags(instance) == {"Eq4", "Eq5", "Eq7", "Eq9", "Eq10", "Eq11",
                               "Fuel"}


def test_models_build_model_should_name_columns(one_generator_model):
    instance, index = one_generator_model

    column = index[ColumnKey(Family.GEN_POWER, "G1", 1, 1)]

    assert instance.col_names[column] == "P_G1_y1_h1"
    assert instance.ub[column] == 100.0
    assert instance.vtype[index[ColumnKey(Family.ON_STATE, "G1", 1, 2)]] \
        is VarType.BINARY


def test_models_build_model_should_net_reserve_of_existing_units(
        one_generator_model):
    """
    Este teste verifica o lado direito da reserva na hora 2.

    Espere:
        * (1 + 0,1)·80 − 100 kW de capacidade existente = −12 kW.
    """
    instance, _ = one_generator_model

    assert instance.rhs[instance.row("Eq5_y1_h2")] == pytest.approx(-12.0)
    assert instance.rhs[instance.row("Eq4_y1_h1")] == pytest.approx(50.0)


def test_models_build_model_should_fix_standby_years():
    problem = PlanningProblem.model_validate(problem_data(
        catalog={"existing_diesel": [diesel_data(standby_parity="odd-years")]},
        horizon_years=2))

    instance, index = build_model(problem)

    standby = index[ColumnKey(Family.ON_STATE, "G1", 1, 1)]
    active = index[ColumnKey(Family.ON_STATE, "G1", 2, 1)]
    assert (instance.lb[standby], instance.ub[standby]) == (0.0, 0.0)
    assert instance.ub[active] == 1.0


def test_models_build_model_should_raise_on_invalid_problem():
    problem = PlanningProblem.model_validate(problem_data(load=(50.0, 0.0)))

    with pytest.raises(ProblemValidationException) as err:
        build_model(problem)

    assert "profiles.load" in err.value.message


def test_models_build_model_should_respect_column_limit(monkeypatch,
                                                         one_generator):
    monkeypatch.setattr(settings, "MAX_MODEL_COLUMNS", 3)

    with pytest.raises(ModelSizeException):
        build_model(one_generator)


def test_models_build_model_should_emit_every_equation_family():
    """
    Este teste verifica, no cenário 1A reduzido a 2 anos × 2 horas, que todas
    as famílias de equações e as linhas de inclusão mínima estão presentes.

    Espere:
        * Todas as etiquetas de equação e a etiqueta `Scn`.
        * Sistema de hidrogênio do ano 1 fixado em uma unidade de cada.
    """
    problem = builtin_sanikiluaq("1A").reduced(years=2, hours=2)

    instance, index = build_model(problem)

    assert set(EQUATION_TAGS) | {"Fuel", "Scn"} <= _tags(instance)
    for unit in ("fuel_cell", "electrolizer", "tank"):
        column = index[ColumnKey(Family.COUNT, unit, 1)]
        assert (instance.lb[column], instance.ub[column]) == (1.0, 1.0)


def test_models_build_model_should_skip_disallowed_technologies(sanikiluaq):
    instance, index = build_model(sanikiluaq.reduced(years=1, hours=2))

    assert index.units(Family.SOLAR_POWER) == []
    assert index.units(Family.BATT_SOC) == []
    assert "Scn" not in _tags(instance)


def test_models_demand_matrix_should_grow_load():
    problem = PlanningProblem.model_validate(problem_data(
        horizon_years=2, load_growth=0.1))

    np.testing.assert_allclose(demand_matrix(problem),
                               [[50.0, 80.0], [55.0, 88.0]])


def test_models_build_model_should_size_battery_tiny_model(battery_problem):
    """
    Este teste verifica o tamanho do modelo de 1 ano × 2 horas com `G1`
    (curva convexa, 3 segmentos) e uma bateria obrigatória.

    Espere:
        * Colunas: P, U, F por hora; N, A, I; BC, BD, UC, UD por hora; SB
          nas 2 horas e o estado terminal.
        * Inteiras: U por hora, N e as binárias UC, UD por hora.
        * Linhas: Eq7, Eq9 e 3 de combustível por hora; Eq10 e Eq11; Eq2 e
          Eq3; Eq18 a Eq21 e Eq23 a Eq25 por hora; 3 de recursão (Eq14,
          Eq15); Eq16 e Eq17 nos 3 estados; Eq26; Eq4 e Eq5 por hora; `Scn`.
    """
    instance, _ = build_model(battery_problem)

    summary = instance.summary()
    assert summary["columns"] == 3 * 2 + 3 + 4 * 2 + 3
    assert summary["integer_columns"] == 2 + 1 + 2 * 2
    assert summary["rows"] == 5 * 2 + 2 + 2 + 7 * 2 + 3 + 2 * 3 + 1 + 2 * 2 + 1
    assert {"Eq14", "Eq15", "Eq16", "Eq17", "Eq25", "Eq26", "Scn"} \
        <= _tags(instance)
