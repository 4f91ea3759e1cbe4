"""
Conjunto aleatório (semente fixa) de instâncias pequenas e a verificação
de equivalência entre o resolvedor, a enumeração e o despacho guloso.

Cada instância é viável por construção: a capacidade diesel existente cobre
o pico com reserva e o mínimo técnico fica abaixo da menor demanda. Os
tipos se alternam para que todas as famílias de linhas apareçam:

- `bau`: dois geradores existentes, convexos, 1 ano × 3 horas;
- `res`: solar e eólica sobre um gerador existente, 1 ano × 3 horas;
- `battery`: bateria obrigatória, 1 ano × 2 horas;
- `hydrogen`: sistema de hidrogênio obrigatório no ano 1, 2 anos × 2 horas;
- `new-diesel`: dois tipos de diesel novo, 2 anos × 1 hora;
- `concave`: curva côncava com seleção de segmento, 1 ano × 2 horas.
"""
import logging
import math
from pathlib import Path

import numpy as np

from microgrid.core import exceptions
from microgrid.core.config import settings
from microgrid.models.builder import build_model
from microgrid.models.milp import EQUATION_TAGS
from microgrid.oracle.enumeration import enumerate_optimum
from microgrid.oracle.simulate import simulate_dispatch
from microgrid.schemas.catalog import (
    BatterySpec,
    DieselGenSpec,
    HydrogenSpec,
    SolarSpec,
    StandbyParity,
    Technology,
    TechnologyCatalog,
    WindCurveSegment,
    WindSpec,
)
from microgrid.schemas.oracle import OracleVerdict, SuiteReport
from microgrid.schemas.problem import (
    MinInclusion,
    PlanningAssumptions,
    PlanningProblem,
    ProfileSet,
    Provenance,
    ScenarioDefinition,
    YearWindow,
)
from microgrid.schemas.profiles import UnitTag, make_profile
from microgrid.schemas.solution import SolveOptions
from microgrid.solvers.extract import extract_plan, plan_to_values
from microgrid.solvers.feasibility import check_feasibility
from microgrid.solvers.solve import solve
from microgrid.usecases.catalog import (
    dump_problem,
    parse_document,
    problem_from_document,
)

logger = logging.getLogger(__name__)

KINDS = ("bau", "res", "battery", "hydrogen", "new-diesel", "concave")
SHAPES = {
    "bau": (1, 3), "res": (1, 3), "battery": (1, 2),
    "hydrogen": (2, 2), "new-diesel": (2, 1), "concave": (1, 2),
}
EQUIVALENCE_TOL = 1e-6


def _diesel(rng: np.random.Generator, uid: str, rated: float, psi: float,
            concave: bool = False, **extra) -> DieselGenSpec:
    if concave:
        a, b = -rng.uniform(1e-4, 3e-4), rng.uniform(0.32, 0.38)
    else:
        a, b = rng.uniform(1e-5, 1e-4), rng.uniform(0.2, 0.3)
    return DieselGenSpec(
        id=uid, rated_kw=rated, lifetime_h=100_000, fuel_a=a, fuel_b=b,
        fuel_c=rng.uniform(2.0, 10.0), min_load_frac=psi,
        om_cost=rng.uniform(0.01, 0.03), **extra)


def _wind(rng: np.random.Generator) -> WindSpec:
    rated = 40.0
    return WindSpec(
        rated_kw=rated, cut_in=3.0, nominal=8.0, cut_out=20.0,
        capital_cost=rng.uniform(50, 400), om_cost=0.0363, lifetime_y=20,
        curve=(WindCurveSegment(lower=0, upper=3),
               WindCurveSegment(lower=3, upper=8, slope=8, intercept=-24),
               WindCurveSegment(lower=8, upper=20, intercept=rated),
               WindCurveSegment(lower=20, upper=math.inf)))


def _battery(rng: np.random.Generator) -> BatterySpec:
    module, dod, hours = 20.0, 0.2, 4.0
    return BatterySpec(
        module_kwh=module, peak_kw=(1 - dod) / hours * module,
        capital_cost=rng.uniform(50, 600), om_cost=0.0069,
        eta_ch=rng.uniform(0.85, 0.98), eta_dch=rng.uniform(0.85, 0.98),
        soc0_frac=0.5, dod_frac=dod, t_ch=hours, t_dch=hours,
        cycle_life=3000)


def _hydrogen(rng: np.random.Generator) -> HydrogenSpec:
    return HydrogenSpec(
        fc_kw=20, el_kw=20, tank_kg=10, fc_cost=rng.uniform(1_000, 20_000),
        el_cost=rng.uniform(1_000, 20_000),
        tank_cost=rng.uniform(1_000, 20_000), fc_om_per_h=2,
        el_om_per_year=194, tank_om_per_year=rng.uniform(100, 1000),
        eta_fc=rng.uniform(0.5, 0.65), eta_el=rng.uniform(0.6, 0.75),
        hhv_kwh_per_kg=39.4, compressor_load=0.02, tank_max_frac=0.95,
        tank_min_frac=0.15, fc_lifetime_h=50_000, el_lifetime_y=1,
        tank_lifetime_y=25)


def tiny_problem(kind: str, rng: np.random.Generator,
                 name: str) -> PlanningProblem:
    """
    Sorteia uma instância pequena do tipo `kind` (ver `KINDS`).
    """
    years, hours = SHAPES[kind]
    beta, growth = rng.uniform(0.05, 0.15), rng.uniform(0.0, 0.02)
    load = rng.uniform(40.0, 80.0, size=hours).round(3)
    peak = load.max() * (1 + growth) ** (years - 1)

    def rated() -> float:
        return float(math.ceil((1 + beta) * peak * rng.uniform(1.0, 1.3)))

    def psi(kw: float) -> float:
        return float(min(0.4, 0.9 * load.min() / kw))

    first = rated()
    existing = [_diesel(rng, "G1", first, psi(first), concave=kind == "concave")]
    if kind in ("bau", "concave"):
        second = rated()
        parity = (StandbyParity.ODD if kind == "bau" and rng.random() < 0.3
                  else StandbyParity.NONE)
        existing.append(_diesel(rng, "G2", second, psi(second),
                                standby_parity=parity))

    catalog = {"existing_diesel": tuple(existing)}
    allowed = {Technology.EXISTING_DIESEL}
    inclusion = MinInclusion()
    scenario_extra = {}
    max_units = {}
    if kind == "res":
        catalog.update(solar=SolarSpec(
            capital_cost=rng.uniform(100, 2000), om_cost=0.0145,
            temp_coeff=-0.0041, derating=0.98, lifetime_y=20),
            wind=_wind(rng))
        allowed |= {Technology.SOLAR, Technology.WIND}
        max_units["wind"] = 2
    elif kind == "battery":
        catalog["battery"] = _battery(rng)
        allowed.add(Technology.BATTERY)
        inclusion = MinInclusion(battery=True)
        max_units["battery"] = 2
    elif kind == "hydrogen":
        catalog["hydrogen"] = _hydrogen(rng)
        allowed.add(Technology.HYDROGEN)
        inclusion = MinInclusion(hydrogen=True)
        scenario_extra = {"mandatory_h2_year1": True,
                          "el_replacement_year": 2}
        max_units.update(fuel_cell=2, electrolizer=2, tank=2)
    elif kind == "new-diesel":
        catalog["new_diesel"] = tuple(
            _diesel(rng, uid, kw, 0.3, capital_cost=rng.uniform(20, 200))
            for uid, kw in (("N1", 30.0), ("N2", 50.0)))
        allowed.add(Technology.NEW_DIESEL)

    assumptions = PlanningAssumptions(
        discount_rate=rng.uniform(0.03, 0.10), horizon_years=years,
        rep_hours=hours, reserve_load=beta, reserve_solar=0.25,
        reserve_wind=0.5, load_growth=growth,
        diesel_price=rng.uniform(1.5, 3.0), maintenance_frac=0.0,
        big_m=10_000, res_invest_window=YearWindow(first=1, last=years),
        diesel_invest_window=YearWindow(first=1, last=years),
        fuel_segments=2 if kind == "concave" else 3, max_units=max_units)
    profiles = ProfileSet(
        load=make_profile(load, UnitTag.KW),
        irradiance=make_profile(rng.uniform(0.0, 0.8, hours).round(3),
                                UnitTag.IRRADIANCE),
        cell_temperature=make_profile(rng.uniform(-20, 10, hours).round(2),
                                      UnitTag.CELSIUS),
        wind_speed=make_profile(rng.uniform(0.0, 14.0, hours).round(2),
                                UnitTag.SPEED))
    scenario = ScenarioDefinition(
        id="BAU" if kind == "bau" else f"tiny-{kind}",
        description=f"Generated {kind} instance",
        allowed_tech=frozenset(allowed), min_inclusion=inclusion,
        **scenario_extra)
    return PlanningProblem(
        name=name, catalog=TechnologyCatalog(**catalog), profiles=profiles,
        assumptions=assumptions, scenario=scenario,
        provenance=Provenance(profiles="synthetic",
                              note=f"oracle suite, type {kind}"))


def generate_suite(seed: int | None = None,
                   size: int | None = None) -> list[PlanningProblem]:
    """
    Gera o conjunto de instâncias pequenas.

    Args:
        seed (int | None): Semente; padrão `settings.ORACLE_SEED`.
        size (int | None): Quantidade; padrão `settings.ORACLE_SUITE_SIZE`.

    Returns:
        list[PlanningProblem]: Instâncias com tipos alternados.
    """
    seed = settings.ORACLE_SEED if seed is None else seed
    size = settings.ORACLE_SUITE_SIZE if size is None else size
    rng = np.random.default_rng(seed)
    return [
        tiny_problem(KINDS[i % len(KINDS)], rng,
                     f"tiny-{seed}-{i:02d}-{KINDS[i % len(KINDS)]}")
        for i in range(size)
    ]


def write_suite(problems: list[PlanningProblem], directory: Path | str) -> list[Path]:
    """
    Grava cada instância como arquivo de problema recarregável.
    """
    directory = Path(directory)
    paths = []
    try:
        directory.mkdir(parents=True, exist_ok=True)
        for problem in problems:
            path = directory / f"{problem.name}.yaml"
            path.write_text(dump_problem(problem))
            paths.append(path)
    except OSError as exc:
        raise exceptions.OutputWriteException(message=f"{directory}: {exc}") from exc
    return paths


def read_suite(directory: Path | str) -> list[PlanningProblem]:
    """
    Relê, em ordem de nome, as instâncias gravadas por `write_suite`; cada
    arquivo traz o próprio cenário.

    Raises:
        ParseException: Diretório sem arquivos de problema ou ilegível.
    """
    directory = Path(directory)
    paths = sorted(directory.glob("*.yaml"))
    if not paths:
        raise exceptions.ParseException(
            message=f"{directory}: no problem files to replay")
    problems = []
    for path in paths:
        try:
            text = path.read_text()
        except OSError as exc:
            raise exceptions.ParseException(message=f"{path}: {exc}") from exc
        document = parse_document(text, str(path))
        if not document.scenarios:
            raise exceptions.ProblemValidationException(
                message=f"{path}: scenarios: suite files carry their scenario")
        problems.append(problem_from_document(
            document, document.scenarios[0].id, path.parent))
    logger.info("replaying %d instances from %s", len(problems), directory)
    return problems


def check_instance(problem: PlanningProblem) -> OracleVerdict:
    """
    Compara, para uma instância, o resolvedor embutido (gap 0) com a
    enumeração, verifica os dois planos contra o modelo e usa o despacho
    guloso sobre as capacidades ótimas como cota superior.
    """
    tags: list[str] = []
    try:
        instance, index = build_model(problem)
        tags = sorted(set(instance.row_tags()))
        solution = solve(instance, SolveOptions(gap=0.0, backend="embedded"))
        plan = extract_plan(solution, index, problem, instance)
        oracle = enumerate_optimum(problem)
    except exceptions.BaseException as exc:
        return OracleVerdict(name=problem.name, passed=False, tags=tags,
                             message=exc.message)

    problems = []
    error = abs(plan.objective - oracle.objective) / max(1.0, abs(oracle.objective))
    if error > EQUIVALENCE_TOL:
        problems.append(f"objectives differ by {error:.3g}")
    oracle_values = plan_to_values(oracle, index, problem)
    report = check_feasibility(instance, oracle_values, EQUIVALENCE_TOL)
    if not report.passed:
        problems.append("enumerated plan violates "
                        + ", ".join(sorted(report.tags()) or ["bounds"]))
    model_objective = instance.objective(oracle_values)
    if (abs(model_objective - oracle.objective)
            > EQUIVALENCE_TOL * max(1.0, abs(oracle.objective))):
        problems.append(f"enumerated objective {oracle.objective:.10g} differs "
                        f"from the model objective {model_objective:.10g}")

    simulated = simulate_dispatch(plan.installed, problem)
    if simulated.feasible:
        if simulated.cost < oracle.objective - EQUIVALENCE_TOL * max(
                1.0, abs(oracle.objective)):
            problems.append(f"dispatch cost {simulated.cost:.10g} is below "
                            f"the optimum")
        dispatch = check_feasibility(
            instance, plan_to_values(simulated.plan, index, problem),
            EQUIVALENCE_TOL)
        if not dispatch.passed:
            problems.append("dispatch plan violates "
                            + ", ".join(sorted(dispatch.tags()) or ["bounds"]))

    verdict = OracleVerdict(
        name=problem.name, passed=not problems,
        solver_objective=plan.objective, oracle_objective=oracle.objective,
        simulated_cost=simulated.cost, relative_error=error, tags=tags,
        message="; ".join(problems))
    logger.info("oracle %s: %s (solver %.10g, enumeration %.10g)",
                problem.name, "pass" if verdict.passed else "FAIL",
                plan.objective, oracle.objective)
    return verdict


def run_suite(problems: list[PlanningProblem] | None = None,
              seed: int | None = None) -> SuiteReport:
    """
    Executa `check_instance` em todo o conjunto e verifica que todas as
    etiquetas de equação apareceram em algum modelo.
    """
    seed = settings.ORACLE_SEED if seed is None else seed
    problems = generate_suite(seed) if problems is None else problems
    verdicts = [check_instance(problem) for problem in problems]
    seen = set().union(*(verdict.tags for verdict in verdicts))
    missing = [tag for tag in EQUATION_TAGS if tag not in seen]
    if missing:
        logger.warning("equation tags never generated: %s", ", ".join(missing))
    return SuiteReport(seed=seed, verdicts=verdicts, missing_tags=missing)
