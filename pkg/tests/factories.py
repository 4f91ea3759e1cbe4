import math


def diesel_data(**overrides):
    """
    Esta função de fábrica retorna um dicionário representando um gerador
    diesel existente de 100 kW com curva de consumo convexa.

    Os campos podem ser sobrescritos por argumentos nomeados.
    """
    return {
        "id": "G1",
        "rated_kw": 100.0,
        "lifetime_h": 100_000,
        "fuel_a": 0.0001,
        "fuel_b": 0.25,
        "fuel_c": 3.0,
        "min_load_frac": 0.4,
        "om_cost": 0.02,
        **overrides,
    }


def battery_data(**overrides):
    """
    Esta função de fábrica retorna um módulo de bateria de 20 kWh; a
    potência de pico segue `(1 − dod) / t_ch · module_kwh`.
    """
    return {
        "module_kwh": 20.0,
        "peak_kw": 4.0,
        "capital_cost": 300.0,
        "om_cost": 0.0069,
        "eta_ch": 0.95,
        "eta_dch": 0.95,
        "soc0_frac": 0.5,
        "dod_frac": 0.2,
        "t_ch": 4,
        "t_dch": 4,
        "cycle_life": 3000,
        **overrides,
    }


def wind_data(**overrides):
    """
    Esta função de fábrica retorna uma turbina eólica de 40 kW que entrega
    a potência nominal entre 8 e 20 m/s.
    """
    return {
        "rated_kw": 40.0,
        "cut_in": 3.0,
        "nominal": 8.0,
        "cut_out": 20.0,
        "capital_cost": 1.0,
        "om_cost": 0.0363,
        "lifetime_y": 20,
        "curve": [
            {"lower": 0, "upper": 3},
            {"lower": 3, "upper": 8, "slope": 8, "intercept": -24},
            {"lower": 8, "upper": 20, "intercept": 40},
            {"lower": 20, "upper": math.inf},
        ],
        **overrides,
    }


def assumptions_data(**overrides):
    """
    Esta função de fábrica retorna premissas de um problema de 1 ano × 2
    horas, sem manutenção e sem crescimento de carga.
    """
    return {
        "discount_rate": 0.08,
        "horizon_years": 1,
        "rep_hours": 2,
        "reserve_load": 0.1,
        "reserve_solar": 0.25,
        "reserve_wind": 0.5,
        "load_growth": 0.0,
        "diesel_price": 2.391,
        "maintenance_frac": 0.0,
        "big_m": 10_000,
        "res_invest_window": {"first": 1, "last": 1},
        "diesel_invest_window": {"first": 1, "last": 1},
        **overrides,
    }


def profiles_data(load=(50.0, 80.0)):
    hours = len(load)
    return {
        "load": {"values": list(load), "unit": "kW"},
        "irradiance": {"values": [0.0] * hours, "unit": "kW/m2"},
        "cell_temperature": {"values": [0.0] * hours, "unit": "degC"},
        "wind_speed": {"values": [0.0] * hours, "unit": "m/s"},
    }


def problem_data(load=(50.0, 80.0), catalog=None, scenario=None,
                 **assumptions):
    """
    Esta função de fábrica retorna um dicionário de `PlanningProblem` com um
    único gerador existente atendendo a carga `load` no cenário BAU.

    Os dados incluem:
        * catalog (dict): Catálogo de tecnologias (padrão: só `G1`).
        * profiles (dict): Perfis com uma hora por valor de `load`.
        * assumptions (dict): Premissas de `assumptions_data`.
        * scenario (dict): Cenário (padrão: BAU com diesel existente).
    """
    return {
        "name": "one-generator",
        "catalog": catalog or {"existing_diesel": [diesel_data()]},
        "profiles": profiles_data(load),
        "assumptions": assumptions_data(rep_hours=len(load), **assumptions),
        "scenario": scenario or {"id": "BAU",
                                 "allowed_tech": ["existing-diesel"]},
    }


def plan_data(**overrides):
    """
    Esta função de fábrica retorna um plano verificado de 1 ano × 1 hora,
    sem despacho nem adições.
    """
    return {
        "scenario_id": "BAU",
        "horizon_years": 1,
        "rep_hours": 1,
        "verified": True,
        **overrides,
    }


def problem_yaml():
    """
    Esta função de fábrica retorna um documento de problema mínimo, com
    perfis em séries, no formato aceito pelo `POST /plans/`.
    """
    return """
schema_version: 1
name: two-hours
provenance: {profiles: synthetic}
assumptions:
  discount_rate: 0.08
  horizon_years: 1
  rep_hours: 2
  reserve_load: "10 %"
  reserve_solar: 0.25
  reserve_wind: 0.5
  load_growth: 0
  diesel_price: 2.391
  maintenance_frac: 0
  big_m: 10000
  res_invest_window: {first: 1, last: 1}
  diesel_invest_window: {first: 1, last: 1}
catalog:
  existing_diesel:
    - {id: G1, rated_kw: "0.1 MW", lifetime_h: 100000, fuel_a: 0.0001, fuel_b: 0.25, fuel_c: 3, min_load_frac: 0.4, om_cost: 0.02}
profiles:
  load: {kind: series, unit: kW, values: [50, 80]}
  irradiance: {kind: series, unit: kW/m2, values: [0, 0]}
  cell_temperature: {kind: series, unit: degC, values: [0, 0]}
  wind_speed: {kind: series, unit: m/s, values: [0, 0]}
scenarios:
  - {id: BAU, description: Existing diesel only., allowed_tech: [existing-diesel]}
"""
