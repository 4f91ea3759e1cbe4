import pytest

from microgrid.core.exceptions import ParseException
from microgrid.models.milp import MilpInstance, Sense, VarType
from microgrid.solvers.mps import (
    FIELD_WIDTH,
    export_model,
    fixed_number,
    read_mps,
    read_solution,
    write_solution,
)


def test_solvers_export_model_should_be_byte_stable(tmp_path,
                                                    one_generator_model):
    instance, _ = one_generator_model

    first = export_model(instance, "mps", tmp_path / "first.mps")
    second = export_model(instance, "mps", tmp_path / "second.mps")

    assert first.read_bytes() == second.read_bytes()


def test_solvers_read_mps_should_restore_instance(tmp_path,
                                                  one_generator_model):
    """
    Este teste verifica se a instância relida de um MPS exportado tem os
    mesmos nomes (via mapa de nomes curtos), limites, custos e matriz.
    """
    instance, _ = one_generator_model
    path = export_model(instance, "mps", tmp_path / "model.mps")

    restored = read_mps(path)

    assert restored.col_names == instance.col_names
    assert restored.row_names == instance.row_names
    assert restored.senses == instance.senses
    assert restored.rhs == pytest.approx(instance.rhs)
    assert restored.cost == pytest.approx(instance.cost)
    assert restored.lb == instance.lb
    assert restored.ub == instance.ub
    assert restored.integral().tolist() == instance.integral().tolist()
    assert (restored.matrix().toarray()
            == pytest.approx(instance.matrix().toarray()))


def test_solvers_export_model_should_write_lp(tmp_path, one_generator_model):
    instance, _ = one_generator_model

    text = export_model(instance, "lp", tmp_path / "model.lp").read_text()

    assert text.lower().startswith(("\\", "minimize"))
    assert "Eq4_y1_h1" in text


def test_solvers_read_mps_should_report_line(tmp_path):
    path = tmp_path / "broken.mps"
    path.write_text("NAME x\nROWS\n N  COST\nCOLUMNS\n    x  COST  abc\n")

    with pytest.raises(ParseException) as err:
        read_mps(path)

    assert ":5" in err.value.message


def test_solvers_read_solution_should_match_written_file(tmp_path,
                                                         one_generator_model):
    instance, _ = one_generator_model
    values = [float(j) for j in range(instance.n_cols)]

    path = write_solution(tmp_path / "model.sol", instance, values, 12.5)
    restored, objective = read_solution(path, instance)

    assert restored.tolist() == values
    assert objective == 12.5


def test_solvers_read_solution_should_reject_unknown_column(
        tmp_path, one_generator_model):
    instance, _ = one_generator_model
    path = tmp_path / "model.sol"
    path.write_text("P_G9_y1_h1 3\n")

    with pytest.raises(ParseException) as err:
        read_solution(path, instance)

    assert "P_G9_y1_h1" in err.value.message


@pytest.mark.parametrize("value, expected", [
    (199451.30123456, "199451.30123"),
    (-0.000123456789012345, "-0.000123457"),
    (2.5, "2.5"),
    (100000, "100000"),
])
def test_solvers_fixed_number_should_fit_value_field(value, expected):
    text = fixed_number(value)

    assert text == expected
    assert len(text) <= FIELD_WIDTH


def test_solvers_write_mps_should_keep_values_in_fixed_columns(tmp_path):
    """
    Este teste verifica um modelo com custo, coeficiente, lado direito e
    limite de muitos dígitos.

    Espere:
        * Nenhuma linha de COLUMNS, RHS ou BOUNDS passa da coluna 36.
        * Valores relidos com até 12 dígitos significativos.
    """
    instance = MilpInstance(name="wide")
    x = instance.add_column("x", 0.0, 12345.678901234567, VarType.CONTINUOUS,
                            199451.30123456)
    instance.add_row("c1", [(x, 1.0000000012345)], Sense.GE,
                     0.000123456789012345)
    path = export_model(instance, "mps", tmp_path / "wide.mps")

    lines = path.read_text().splitlines()
    body = lines[lines.index("COLUMNS") + 1:lines.index("ENDATA")]
    restored = read_mps(path)

    assert all(len(line) <= 36 for line in body if "MARKER" not in line)
    assert restored.cost == pytest.approx(instance.cost, rel=1e-10)
    assert restored.rhs == pytest.approx(instance.rhs, rel=1e-5)
    assert restored.ub == pytest.approx(instance.ub, rel=1e-10)
