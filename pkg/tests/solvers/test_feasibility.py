import pytest

from microgrid.core.exceptions import DimensionMismatchException
from microgrid.models.milp import ColumnKey, Family, MilpInstance, Sense, VarType
from microgrid.schemas.solution import SolveOptions
from microgrid.solvers.feasibility import check_feasibility
from microgrid.solvers.solve import solve


@pytest.fixture
def one_generator_values(one_generator_model):
    instance, _ = one_generator_model
    return solve(instance, SolveOptions(gap=0.0, backend="embedded")).array()


def test_solvers_check_feasibility_should_pass_solver_output(
        one_generator_model, one_generator_values):
    instance, _ = one_generator_model

    report = check_feasibility(instance, one_generator_values)

    assert report.passed
    assert report.max_residual <= 1e-6


def test_solvers_check_feasibility_should_tag_balance_violation(
        one_generator_model, one_generator_values):
    """
    Este teste verifica que somar 1 kW à potência do gerador na hora 1
    viola o balanço dessa hora com resíduo 1.
    """
    instance, index = one_generator_model
    values = one_generator_values.copy()
    values[index[ColumnKey(Family.GEN_POWER, "G1", 1, 1)]] += 1.0

    report = check_feasibility(instance, values)

    assert not report.passed
    assert "Eq4" in report.tags()
    assert report.residuals[instance.row("Eq4_y1_h1")] == pytest.approx(1.0)


def test_solvers_check_feasibility_should_tag_simultaneous_charge():
    instance = MilpInstance()
    charge = instance.add_column("UC_battery_y1_h1", vtype=VarType.BINARY)
    discharge = instance.add_column("UD_battery_y1_h1", vtype=VarType.BINARY)
    instance.add_row("Eq25_battery_y1_h1", [(charge, 1.0), (discharge, 1.0)],
                     Sense.LE, 1.0)

    report = check_feasibility(instance, [1.0, 1.0])

    assert report.tags() == {"Eq25"}
    assert report.violated_rows[0].violation == pytest.approx(1.0)


def test_solvers_check_feasibility_should_flag_fractional_binary():
    instance = MilpInstance()
    instance.add_column("U_G1_y1_h1", vtype=VarType.BINARY)

    report = check_feasibility(instance, [0.5])

    assert [v.kind for v in report.violated_columns] == ["integrality"]


def test_solvers_check_feasibility_should_reject_wrong_length(
        one_generator_model):
    instance, _ = one_generator_model

    with pytest.raises(DimensionMismatchException):
        check_feasibility(instance, [0.0])
