import pytest
from pydantic import ValidationError

from microgrid.schemas.profiles import (
    YEAR_HOURS,
    Profile,
    Profile288,
    make_profile,
)
from microgrid.schemas.solution import PlanSolution
from tests.factories import plan_data


def test_schemas_profile288_should_reject_short_series():
    with pytest.raises(ValidationError):
        Profile288(values=[1.0] * 24, unit="kW")


def test_schemas_make_profile_should_pick_class_by_length():
    """
    Este teste verifica se `make_profile` cria um `Profile288` para o ano
    representativo completo e um `Profile` geral para séries reduzidas.
    """
    full = make_profile([1.0] * YEAR_HOURS, "kW")
    reduced = make_profile([1.0, 2.0], "kW")

    assert isinstance(full, Profile288)
    assert type(reduced) is Profile
    assert reduced.head(1).values == (1.0,)


def test_schemas_profile288_index_should_map_month_and_hour():
    assert Profile288.index(1, 0) == 0
    assert Profile288.index(12, 23) == YEAR_HOURS - 1


def test_schemas_profile_should_reject_unknown_unit():
    with pytest.raises(ValidationError):
        Profile(values=[1.0], unit="furlongs")


def test_schemas_plan_series_should_default_to_zeros():
    plan = PlanSolution.model_validate(
        plan_data(hourly={"P_G1": [[10.0]]}))

    assert plan.series("P", "G1").tolist() == [[10.0]]
    assert plan.series("P", "G2").tolist() == [[0.0]]
    assert plan.yearly("installed", "solar").tolist() == [0.0]
