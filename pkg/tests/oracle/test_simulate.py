import pytest

from microgrid.oracle.simulate import simulate_dispatch


def test_oracle_simulate_dispatch_should_bound_optimum(one_generator,
                                                       one_generator_plan):
    """
    Este teste verifica o despacho por mérito do problema de um gerador.

    Espere:
        * Despacho viável, pois o gerador existente cobre a carga.
        * Custo igual ou acima do ótimo do modelo.
    """
    result = simulate_dispatch({}, one_generator)

    assert result.feasible
    assert result.cost >= one_generator_plan.objective - 1e-6
    assert result.plan.objective == result.cost


def test_oracle_simulate_dispatch_should_report_shortage(one_generator):
    problem = one_generator.model_copy(update={
        "profiles": one_generator.profiles.model_copy(update={
            "load": one_generator.profiles.load.model_copy(
                update={"values": (50.0, 150.0)})})})

    result = simulate_dispatch({}, problem)

    assert not result.feasible
    assert result.cost is None


def test_oracle_simulate_dispatch_should_reject_negative_capacity(
        one_generator):
    with pytest.raises(ValueError):
        simulate_dispatch({"solar": [-5.0]}, one_generator)
