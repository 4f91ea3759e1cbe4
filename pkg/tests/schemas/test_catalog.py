import pytest
from pydantic import ValidationError

from microgrid.schemas.base import normalize_quantity
from microgrid.schemas.catalog import (
    BatterySpec,
    DieselGenSpec,
    StandbyParity,
    TechnologyCatalog,
)
from microgrid.schemas.problem import ScenarioDefinition
from tests.factories import battery_data, diesel_data


def test_schemas_normalize_quantity_should_convert_units():
    """
    Este teste verifica se `normalize_quantity` converte textos com unidade
    para a unidade canônica e mantém números como estão.

    Espere:
        * "0.5 MW" vira 500 kW, "98 %" vira 0,98 pu e "2 t" vira 2000 kg.
        * Aplicar a conversão a um valor já normalizado devolve o mesmo valor.
    """
    assert normalize_quantity("0.5 MW", "power") == 500.0
    assert normalize_quantity("98 %", "fraction") == pytest.approx(0.98)
    assert normalize_quantity("2 t", "mass") == 2000.0
    assert normalize_quantity(normalize_quantity("0.5 MW", "power"),
                              "power") == 500.0


def test_schemas_normalize_quantity_should_reject_unknown_unit():
    with pytest.raises(ValueError) as err:
        normalize_quantity("3 furlongs", "power")

    assert "furlongs" in str(err.value)


def test_schemas_diesel_should_accept_quantity_strings():
    unit = DieselGenSpec.model_validate(diesel_data(rated_kw="0.33 MW"))

    assert unit.rated_kw == pytest.approx(330.0)
    assert unit.min_kw == pytest.approx(132.0)


def test_schemas_diesel_should_be_immutable():
    unit = DieselGenSpec.model_validate(diesel_data())

    with pytest.raises(ValidationError):
        unit.rated_kw = 200.0


def test_schemas_diesel_should_reject_negative_fuel_rate():
    """
    Este teste verifica se uma curva de consumo negativa dentro do domínio
    de operação é rejeitada, nomeando o campo.
    """
    with pytest.raises(ValidationError) as err:
        DieselGenSpec.model_validate(diesel_data(fuel_b=0.0, fuel_c=-50.0))

    assert "fuel_c" in str(err.value)


def test_schemas_diesel_should_reject_unknown_field():
    with pytest.raises(ValidationError):
        DieselGenSpec.model_validate(diesel_data(colour="red"))


def test_schemas_battery_should_reject_inconsistent_peak():
    with pytest.raises(ValidationError) as err:
        BatterySpec.model_validate(battery_data(peak_kw=5.0))

    assert "peak_kw" in str(err.value)


def test_schemas_battery_should_expose_power_limits():
    battery = BatterySpec.model_validate(battery_data())

    assert battery.charge_limit_frac == pytest.approx(0.2)
    assert battery.discharge_limit_frac == pytest.approx(0.2)


def test_schemas_catalog_should_reject_capital_cost_on_existing_unit():
    with pytest.raises(ValidationError) as err:
        TechnologyCatalog.model_validate(
            {"existing_diesel": [diesel_data(capital_cost=727)]})

    assert "existing_diesel.G1.capital_cost" in str(err.value)


def test_schemas_catalog_should_reject_duplicated_ids():
    with pytest.raises(ValidationError):
        TechnologyCatalog.model_validate(
            {"existing_diesel": [diesel_data(), diesel_data()]})


@pytest.mark.parametrize("parity, year, expected", [
    (StandbyParity.ODD, 1, True),
    (StandbyParity.ODD, 2, False),
    (StandbyParity.EVEN, 2, True),
    (StandbyParity.NONE, 1, False),
])
def test_schemas_standby_parity_should_count_year_one_as_odd(parity, year,
                                                             expected):
    assert parity.is_standby(year) is expected


def test_schemas_scenario_should_reject_bau_with_renewables():
    with pytest.raises(ValidationError) as err:
        ScenarioDefinition(id="BAU", allowed_tech={"existing-diesel", "solar"})

    assert "BAU allows diesel generation only" in str(err.value)


def test_schemas_wind_curve_should_keep_published_jump(sanikiluaq):
    """
    Este teste verifica se a curva eólica embutida mantém o salto em
    7,5 m/s exatamente como tabelado.
    """
    wind = sanikiluaq.catalog.wind
    left = next(s for s in wind.curve if s.upper == 7.5)
    right = next(s for s in wind.curve if s.lower == 7.5)

    assert left.at(7.5) == pytest.approx(162.5)
    assert right.at(7.5) == pytest.approx(250.0)
