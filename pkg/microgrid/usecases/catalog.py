import logging
import math
from enum import Enum
from functools import lru_cache
from pathlib import Path

import yaml
from pydantic import ValidationError

from microgrid.core.exceptions import (
    ParseException,
    ProblemValidationException,
    UnknownScenarioException,
)
from microgrid.schemas.catalog import Technology
from microgrid.schemas.feasibility import ValidationFinding
from microgrid.schemas.problem import (
    PlanningProblem,
    ProblemDocument,
    ProfileSet,
    ScenarioDefinition,
)
from microgrid.schemas.profiles import YEAR_HOURS
from microgrid.usecases.profiles import synthesize_profile

logger = logging.getLogger(__name__)

DATA_DIR = Path(__file__).resolve().parent.parent / "data"
BUILTIN = {"sanikiluaq": DATA_DIR / "sanikiluaq.yaml"}

TECH_ORDER = list(Technology)


def _read_yaml(text: str, origin: str):
    try:
        return yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" (line {mark.line + 1}, column {mark.column + 1})" if mark else ""
        raise ParseException(
            message=f"{origin}{where}: {getattr(exc, 'problem', exc)}") from exc


def _describe(exc: ValidationError, prefix: str = "") -> str:
    parts = []
    for error in exc.errors():
        loc = ".".join(str(item) for item in error["loc"])
        parts.append(f"{prefix}{loc}: {error['msg']}")
    return "; ".join(parts)


@lru_cache
def standard_scenarios() -> dict[str, ScenarioDefinition]:
    """
    Cenários padrão (BAU, 1A…4B) disponíveis para qualquer problema.
    """
    data = _read_yaml((DATA_DIR / "scenarios.yaml").read_text(), "scenarios.yaml")
    scenarios = [ScenarioDefinition(**item) for item in data["scenarios"]]
    return {scenario.id: scenario for scenario in scenarios}


def parse_document(text: str, origin: str = "<problem>") -> ProblemDocument:
    data = _read_yaml(text, origin)
    if not isinstance(data, dict):
        raise ParseException(message=f"{origin}: expected a mapping at top level")
    try:
        return ProblemDocument.model_validate(data)
    except ValidationError as exc:
        raise ProblemValidationException(
            message=f"{origin}: {_describe(exc)}") from exc


def problem_from_document(document: ProblemDocument, scenario_id: str,
                          base_dir: Path | None = None) -> PlanningProblem:
    """
    Monta o `PlanningProblem` de um documento já validado, sintetizando os
    perfis e resolvendo o cenário (cenários do arquivo têm precedência sobre
    os padrão de mesmo id).
    """
    scenarios = dict(standard_scenarios())
    scenarios.update({scenario.id: scenario for scenario in document.scenarios})
    if scenario_id not in scenarios:
        raise UnknownScenarioException(
            message=f"Unknown scenario {scenario_id!r}; available: "
                    f"{', '.join(sorted(scenarios))}")

    profiles = {
        name: synthesize_profile(getattr(document.profiles, name), base_dir)
        for name in ProfileSet.model_fields
    }
    try:
        return PlanningProblem(
            name=document.name,
            catalog=document.catalog,
            profiles=ProfileSet(**profiles),
            assumptions=document.assumptions,
            scenario=scenarios[scenario_id],
            provenance=document.provenance,
        )
    except ValidationError as exc:
        raise ProblemValidationException(message=_describe(exc)) from exc


def load_problem(path: Path | str, scenario_id: str) -> PlanningProblem:
    """
    Lê e valida um arquivo de problema.

    Args:
        path (Path | str): Arquivo YAML no formato `schema_version: 1`.
        scenario_id (str): BAU, 1A…4B ou um cenário definido no arquivo.

    Returns:
        PlanningProblem: Problema validado, com unidades normalizadas.

    Raises:
        ParseException: Erro de sintaxe, com linha e coluna.
        ProblemValidationException: Invariante violado, nomeando o campo.
        UnknownScenarioException: Cenário inexistente.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseException(message=f"{path}: {exc}") from exc

    document = parse_document(text, str(path))
    problem = problem_from_document(document, scenario_id, path.parent)
    logger.info("loaded problem %r (scenario %s) from %s",
                problem.name, scenario_id, path)
    return problem


def builtin_sanikiluaq(scenario_id: str = "BAU") -> PlanningProblem:
    return load_problem(BUILTIN["sanikiluaq"], scenario_id)


def _plain(value):
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, dict):
        return {key: _plain(item) for key, item in value.items()}
    if isinstance(value, (frozenset, set)):
        items = [_plain(item) for item in value]
        order = {tech.value: i for i, tech in enumerate(TECH_ORDER)}
        return sorted(items, key=lambda item: (order.get(item, len(order)), item))
    if isinstance(value, (list, tuple)):
        return [_plain(item) for item in value]
    return value


def dump_problem(problem: PlanningProblem) -> str:
    """
    Serializa o problema como arquivo YAML recarregável por `load_problem`.

    Os perfis são gravados como séries (`kind: series`) e o cenário do
    problema entra na seção `scenarios`.
    """
    profiles = {
        name: {"kind": "series", "unit": _plain(profile.unit),
               "values": list(profile.values)}
        for name, profile in problem.profiles.items()
    }
    document = {
        "schema_version": 1,
        "name": problem.name,
        "provenance": _plain(problem.provenance.model_dump()),
        "assumptions": _plain(problem.assumptions.model_dump()),
        "catalog": _plain(problem.catalog.model_dump()),
        "profiles": profiles,
        "scenarios": [_plain(problem.scenario.model_dump())],
    }
    return yaml.safe_dump(document, sort_keys=False, default_flow_style=None,
                          width=100)


def peak_demand(problem: PlanningProblem) -> float:
    a = problem.assumptions
    return max(problem.profiles.load.values) * (1 + a.load_growth) ** (
        a.horizon_years - 1)


def window_years(problem: PlanningProblem, window) -> list[int]:
    return [y for y in range(1, problem.assumptions.horizon_years + 1)
            if y in window]


def unit_limits(problem: PlanningProblem) -> dict[str, float]:
    """
    Limites superiores de capacidade por unidade: quantidade máxima de
    módulos (tecnologias inteiras) ou kW (solar).

    O padrão dimensiona a capacidade total de cada tecnologia em
    `capacity_limit_factor` vezes o pico de demanda do horizonte;
    `assumptions.max_units` sobrescreve por id de unidade.
    """
    a = problem.assumptions
    catalog = problem.catalog
    target = a.capacity_limit_factor * peak_demand(problem)

    def modules(unit_kw: float) -> int:
        return max(1, math.ceil(target / unit_kw - 1e-9))

    limits: dict[str, float] = {}
    diesel_years = len(window_years(problem, a.diesel_invest_window))
    for unit in catalog.new_diesel:
        limits[unit.id] = min(diesel_years, modules(unit.rated_kw))
    if catalog.solar is not None:
        limits["solar"] = target
    if catalog.wind is not None:
        limits["wind"] = modules(catalog.wind.rated_kw)
    if catalog.battery is not None:
        limits["battery"] = modules(catalog.battery.peak_kw)
    if catalog.hydrogen is not None:
        h2 = catalog.hydrogen
        limits["fuel_cell"] = modules(h2.fc_kw)
        limits["electrolizer"] = modules(h2.el_kw)
        limits["tank"] = limits["fuel_cell"]
    for key, value in a.max_units.items():
        if key in limits:
            limits[key] = value
    return limits


def validate_problem(problem: PlanningProblem) -> list[ValidationFinding]:
    """
    Verificações cruzadas do problema, devolvidas como dados.

    Returns:
        list[ValidationFinding]: Vazia quando todos os invariantes valem.
    """
    findings: list[ValidationFinding] = []

    def error(field: str, message: str):
        findings.append(ValidationFinding(
            severity="error", field=field, message=message))

    def warning(field: str, message: str):
        findings.append(ValidationFinding(
            severity="warning", field=field, message=message))

    a = problem.assumptions
    for name, profile in problem.profiles.items():
        if len(profile) != a.rep_hours:
            error(f"profiles.{name}",
                  f"{len(profile)} values, expected rep_hours = {a.rep_hours}")
    if min(problem.profiles.load.values) <= 0:
        error("profiles.load", "load profile must be strictly positive")
    if min(problem.profiles.irradiance.values) < 0:
        error("profiles.irradiance", "irradiance must be non-negative")
    if min(problem.profiles.wind_speed.values) < 0:
        error("profiles.wind_speed", "wind speed must be non-negative")
    if a.rep_hours != YEAR_HOURS:
        warning("assumptions.rep_hours",
                f"reduced representative year ({a.rep_hours} of "
                f"{YEAR_HOURS} hours)")

    present = problem.catalog.technologies()
    scenario = problem.scenario
    absent = sorted(t.value for t in scenario.allowed_tech - present)
    if absent:
        error("scenario.allowed_tech",
              f"technologies absent from the catalog: {', '.join(absent)}")
    inclusion = scenario.min_inclusion
    for flag, tech in (("battery", Technology.BATTERY),
                       ("solar", Technology.SOLAR),
                       ("hydrogen", Technology.HYDROGEN)):
        if getattr(inclusion, flag) and tech not in scenario.allowed_tech:
            error(f"scenario.min_inclusion.{flag}",
                  f"{tech.value} is required but not allowed")
    if (scenario.mandatory_h2_year1
            and Technology.HYDROGEN not in scenario.allowed_tech):
        error("scenario.mandatory_h2_year1", "hydrogen is not allowed")
    if scenario.mandatory_h2_year1 and 1 not in a.res_invest_window:
        error("scenario.mandatory_h2_year1",
              "year 1 is outside the RES investment window")

    catalog = problem.catalog
    bounds = [peak_demand(problem) * (1 + a.reserve_load)]
    bounds += [unit.rated_kw for unit in catalog.existing_diesel]
    bounds += [unit.rated_kw for unit in catalog.new_diesel]
    if catalog.wind is not None:
        bounds.append(catalog.wind.rated_kw)
    if catalog.battery is not None:
        bounds.append(catalog.battery.peak_kw)
    if catalog.hydrogen is not None:
        bounds += [catalog.hydrogen.fc_kw, catalog.hydrogen.el_kw]
    if a.big_m < max(bounds):
        warning("assumptions.big_m",
                f"big_m = {a.big_m:g} is below the largest single-hour power "
                f"bound ({max(bounds):g} kW)")

    for name in ("res_invest_window", "diesel_invest_window"):
        window = getattr(a, name)
        if window.first > a.horizon_years:
            warning(f"assumptions.{name}",
                    f"window starts after the horizon ({a.horizon_years} y)")
    return findings
