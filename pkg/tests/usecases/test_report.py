import json

import pytest

from microgrid.core.exceptions import (
    FingerprintMismatchException,
    VerificationException,
)
from microgrid.models.objective import recompute_objective
from microgrid.schemas.report import CostReport, ScenarioReport
from microgrid.schemas.solution import PlanSolution
from microgrid.usecases.profiles import read_profiles_csv
from microgrid.usecases.report import (
    build_report,
    compare,
    cost_breakdown,
    emissions,
    emit_outputs,
)
from tests.factories import plan_data


def _report(scenario_id, total, om, fuel, litres, fingerprint="abc"):
    return ScenarioReport(
        scenario_id=scenario_id, fingerprint=fingerprint,
        provenance="synthetic", objective=total, status="optimal",
        cost=CostReport(capital=total - om - fuel, fuel=fuel, om=om,
                        total=total, litres=litres,
                        emissions_kg=emissions(litres, 2.68)))


@pytest.mark.parametrize("litres, factor, expected", [
    (0.0, 2.68, 0.0), (1000.0, 2.68, 2680.0), (1234.5, 0.0, 0.0),
])
def test_usecases_emissions_should_multiply(litres, factor, expected):
    assert emissions(litres, factor) == pytest.approx(expected)


def test_usecases_emissions_should_reject_negative_input():
    with pytest.raises(ValueError):
        emissions(-1.0, 2.68)


def test_usecases_cost_breakdown_should_return_zeros_for_empty_plan(
        sanikiluaq):
    problem = sanikiluaq.reduced(years=1, hours=1)
    plan = PlanSolution.model_validate(plan_data())

    report = cost_breakdown(plan, problem)

    assert (report.capital, report.fuel, report.om, report.total) == \
        (0.0, 0.0, 0.0, 0.0)
    assert report.litres == 0.0


def test_usecases_cost_breakdown_should_price_fuel_by_exact_curve(sanikiluaq):
    """
    Este teste verifica o custo de combustível de uma hora representativa
    com G5 em 500 kW no ano 1.

    Espere:
        * Combustível: 30 · 2,391 · 123,05 = 8.826,38 $.
        * Litros: 30 · 123,05 e emissões de 2,68 kg por litro.
    """
    problem = sanikiluaq.reduced(years=1, hours=1)
    plan = PlanSolution.model_validate(
        plan_data(hourly={"P_G5": [[500.0]], "U_G5": [[1.0]]}))

    report = cost_breakdown(plan, problem)

    assert report.fuel == pytest.approx(8826.38, abs=0.01)
    assert report.litres == pytest.approx(30 * 123.05)
    assert report.emissions_kg == pytest.approx(2.68 * 30 * 123.05)
    assert report.by_technology["existing-diesel"]["fuel"] == \
        pytest.approx(report.fuel)


def test_usecases_cost_breakdown_should_discount_new_diesel(sanikiluaq):
    problem = sanikiluaq.reduced(years=3, hours=1)
    plan = PlanSolution.model_validate(plan_data(
        horizon_years=3, additions={"N1": [0.0, 0.0, 320.0]},
        counts={"N1": [0.0, 0.0, 1.0]}, installed={"N1": [0.0, 0.0, 320.0]}))

    report = cost_breakdown(plan, problem)

    assert report.capital == pytest.approx(199_451.30, abs=0.01)
    assert report.by_year[2]["capital"] == pytest.approx(report.capital)
    assert report.total == pytest.approx(
        report.capital + report.fuel + report.om, rel=1e-6)


def test_usecases_cost_breakdown_should_reject_unverified_plan(sanikiluaq):
    plan = PlanSolution.model_validate(plan_data(verified=False))

    with pytest.raises(VerificationException):
        cost_breakdown(plan, sanikiluaq.reduced(years=1, hours=1))


def test_usecases_cost_breakdown_should_match_recomputed_objective(
        one_generator, one_generator_plan):
    report = cost_breakdown(one_generator_plan, one_generator)

    exact = recompute_objective(one_generator_plan, one_generator).total_exact
    assert report.total == pytest.approx(exact, rel=1e-9)


def test_usecases_compare_should_compute_reductions():
    """
    Este teste verifica a tabela de reduções frente ao BAU.

    Espere:
        * Custo 0,8 × BAU resulta em 20% de redução no custo total.
        * Zero litros resultam em 100% de redução de combustível e GEE.
        * O BAU comparado consigo mesmo tem todas as reduções nulas.
    """
    bau = _report("BAU", 1000.0, 300.0, 500.0, 200.0)
    res = _report("4A", 800.0, 100.0, 0.0, 0.0)

    rows = {row.scenario_id: row for row in compare([bau, res], bau)}

    assert rows["4A"].total_cost_pct == 20.0
    assert rows["4A"].fuel_pct == 100.0
    assert rows["4A"].ghg_pct == 100.0
    assert rows["BAU"].model_dump(exclude={"schema_version"}) == {
        "scenario_id": "BAU", "total_cost_pct": 0.0, "om_pct": 0.0,
        "fuel_pct": 0.0, "ghg_pct": 0.0}


def test_usecases_compare_should_allow_cost_increase():
    bau = _report("BAU", 1000.0, 300.0, 500.0, 200.0)
    costly = _report("2B", 1001.6, 300.0, 400.0, 150.0)

    row = compare([costly], bau)[0]

    assert row.total_cost_pct == -0.16
    assert row.ghg_pct == 25.0


def test_usecases_compare_should_reject_fingerprint_mismatch():
    bau = _report("BAU", 1000.0, 300.0, 500.0, 200.0)
    other = _report("1A", 800.0, 100.0, 0.0, 0.0, fingerprint="xyz")

    with pytest.raises(FingerprintMismatchException) as err:
        compare([bau, other], bau)

    assert "1A" in err.value.message


def test_usecases_emit_outputs_should_write_reports(
        tmp_path, one_generator, one_generator_plan):
    """
    Este teste verifica os arquivos gravados por `emit_outputs` para o
    cenário BAU do problema de um gerador.

    Espere:
        * Subdiretório do cenário com adições, custos e despacho por ano.
        * Tabela de reduções e resumo JSON com a procedência dos perfis.
        * Despacho relido pelo leitor de perfis sem perda de valores.
    """
    report = build_report(one_generator_plan, one_generator)

    written = emit_outputs([report], [one_generator_plan], tmp_path,
                           problem=one_generator, options={"gap": 0.0})

    names = sorted(p.relative_to(tmp_path).as_posix() for p in written)
    assert names == ["BAU/additions.csv", "BAU/costs.csv",
                     "BAU/costs_by_year.csv", "BAU/dispatch_y1.csv",
                     "reductions.csv", "summary.json"]

    dispatch = read_profiles_csv(tmp_path / "BAU" / "dispatch_y1.csv")
    assert dispatch["P_G1"].values == tuple(one_generator_plan.hourly["P_G1"][0])
    assert dispatch["F_G1"].unit == "l/h"
    assert dispatch["load"].values == (50.0, 80.0)

    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["provenance"] == "synthetic"
    assert summary["options"] == {"gap": 0.0}
    assert summary["reports"][0]["reductions"]["total_cost_pct"] == 0.0


def test_usecases_emit_outputs_should_be_deterministic(
        tmp_path, one_generator, one_generator_plan):
    report = build_report(one_generator_plan, one_generator)

    for run in ("first", "second"):
        emit_outputs([report], [one_generator_plan], tmp_path / run,
                     problem=one_generator)

    for name in ("BAU/dispatch_y1.csv", "BAU/costs.csv", "summary.json"):
        assert (tmp_path / "first" / name).read_bytes() == \
            (tmp_path / "second" / name).read_bytes()
