"""
Relatórios de resultados: custos em valor presente, litros de diesel,
emissões, reduções frente ao BAU e os arquivos CSV/JSON de saída.
"""
import logging
from collections import defaultdict
from pathlib import Path
from typing import Any

import pandas as pd

from microgrid.core.config import settings
from microgrid.core.exceptions import (
    FingerprintMismatchException,
    OutputWriteException,
    VerificationException,
)
from microgrid.models.builder import demand_matrix
from microgrid.models.objective import objective_terms
from microgrid.schemas.problem import PlanningProblem
from microgrid.schemas.profiles import UnitTag, make_profile
from microgrid.schemas.report import (
    AdditionRow,
    CostReport,
    ReductionRow,
    RunSummary,
    ScenarioReport,
)
from microgrid.schemas.solution import PlanSolution
from microgrid.usecases.profiles import write_profiles_csv

logger = logging.getLogger(__name__)

COST_KINDS = ("capital", "fuel", "om")

FAMILY_UNITS = {
    "P": UnitTag.KW, "W": UnitTag.KW, "PS": UnitTag.KW, "PW": UnitTag.KW,
    "BC": UnitTag.KW, "BD": UnitTag.KW, "PF": UnitTag.KW, "PX": UnitTag.KW,
    "F": UnitTag.LITRES_PER_HOUR, "SB": UnitTag.KWH, "SQ": UnitTag.KG,
    "U": UnitTag.PER_UNIT, "UC": UnitTag.PER_UNIT, "UD": UnitTag.PER_UNIT,
}

CAPACITY_UNITS = {"battery": "kWh", "tank": "kg"}


def emissions(litres: float, factor: float) -> float:
    """
    Emissões em kg CO2e de um volume de diesel.

    Raises:
        ValueError: Se `litres` ou `factor` for negativo.
    """
    if litres < 0 or factor < 0:
        raise ValueError("litres and emission factor must be >= 0")
    return litres * factor


def cost_breakdown(plan: PlanSolution, problem: PlanningProblem) -> CostReport:
    """
    Quebra o custo total em valor presente de um plano verificado.

    O combustível é valorado pela quadrática exata, e não pela curva
    linearizada; os litros acompanham a mesma curva.

    Args:
        plan (PlanSolution): Plano com `verified=True`.
        problem (PlanningProblem): Problema que originou o plano.

    Returns:
        CostReport: Totais por componente, por tecnologia e por ano.

    Raises:
        VerificationException: Se o plano não tiver passado pela verificação
        de viabilidade.
        DimensionMismatchException: Se as dimensões não corresponderem.
    """
    if not plan.verified:
        raise VerificationException(
            message=f"plan for scenario {plan.scenario_id} is not verified")

    by_technology: dict[str, dict[str, float]] = defaultdict(
        lambda: dict.fromkeys(COST_KINDS, 0.0))
    by_year = {y: dict.fromkeys(COST_KINDS, 0.0)
               for y in range(1, problem.assumptions.horizon_years + 1)}
    litres = 0.0
    for term in objective_terms(plan, problem):
        if term.kind == "fuel":
            continue
        kind = "fuel" if term.kind == "fuel_exact" else term.kind
        by_technology[term.technology][kind] += term.value
        by_year[term.year][kind] += term.value
        litres += term.litres

    totals = {kind: sum(item[kind] for item in by_year.values())
              for kind in COST_KINDS}
    litres = max(litres, 0.0)
    return CostReport(
        **totals,
        total=sum(totals.values()),
        by_technology={
            tech: {**costs, "total": sum(costs.values())}
            for tech, costs in sorted(by_technology.items())
        },
        by_year=[
            {"year": float(y), **costs, "total": sum(costs.values())}
            for y, costs in by_year.items()
        ],
        litres=litres,
        emissions_kg=emissions(litres, problem.assumptions.emission_factor),
    )


def additions_table(plan: PlanSolution, tol: float = 1e-9) -> list[AdditionRow]:
    rows = []
    for unit in sorted(plan.additions):
        counts = plan.counts.get(unit)
        for k, capacity in enumerate(plan.additions[unit]):
            if capacity <= tol:
                continue
            rows.append(AdditionRow(
                year=k + 1, unit=unit, capacity=capacity,
                count=None if counts is None else counts[k]))
    return sorted(rows, key=lambda row: (row.year, row.unit))


def build_report(plan: PlanSolution, problem: PlanningProblem) -> ScenarioReport:
    return ScenarioReport(
        scenario_id=plan.scenario_id,
        fingerprint=problem.fingerprint(),
        provenance=problem.provenance.profiles,
        objective=plan.objective,
        status=plan.status.value,
        cost=cost_breakdown(plan, problem),
        additions=additions_table(plan),
    )


def _reduction(value: float, base: float) -> float:
    if base == 0:
        return 0.0
    return round(100.0 * (base - value) / base, 2)


def compare(reports: list[ScenarioReport],
            bau: ScenarioReport) -> list[ReductionRow]:
    """
    Reduções percentuais (custo total, O&M, combustível e GEE) de cada
    cenário frente ao BAU. Valores negativos indicam aumento.

    Raises:
        FingerprintMismatchException: Se algum relatório vier de outro
        problema.
    """
    strangers = [r.scenario_id for r in reports
                 if r.fingerprint != bau.fingerprint]
    if strangers:
        raise FingerprintMismatchException(
            message=f"reports {', '.join(strangers)} do not share the "
                    f"fingerprint of {bau.scenario_id}")

    base = bau.cost
    return [
        ReductionRow(
            scenario_id=report.scenario_id,
            total_cost_pct=_reduction(report.cost.total, base.total),
            om_pct=_reduction(report.cost.om, base.om),
            fuel_pct=_reduction(report.cost.fuel, base.fuel),
            ghg_pct=_reduction(report.cost.litres, base.litres),
        )
        for report in reports
    ]


def _write_table(path: Path, columns: dict[tuple[str, str], list]) -> None:
    frame = pd.DataFrame(columns)
    frame.columns = pd.MultiIndex.from_tuples(list(columns))
    frame.to_csv(path, index=False)


def _write_additions(path: Path, report: ScenarioReport) -> None:
    rows = report.additions
    _write_table(path, {
        ("year", "y"): [row.year for row in rows],
        ("unit", "-"): [row.unit for row in rows],
        ("count", "units"): [row.count for row in rows],
        ("capacity", "-"): [row.capacity for row in rows],
        ("capacity_unit", "-"): [CAPACITY_UNITS.get(row.unit, "kW")
                                 for row in rows],
    })


def _write_costs(directory: Path, report: ScenarioReport) -> list[Path]:
    cost = report.cost
    kinds = (*COST_KINDS, "total")
    technologies = sorted(cost.by_technology)
    by_tech = directory / "costs.csv"
    _write_table(by_tech, {
        ("technology", "-"): technologies + ["total"],
        **{(kind, "$"): [cost.by_technology[t][kind] for t in technologies]
           + [getattr(cost, kind)] for kind in kinds},
    })
    by_year = directory / "costs_by_year.csv"
    _write_table(by_year, {
        ("year", "y"): [int(item["year"]) for item in cost.by_year],
        **{(kind, "$"): [item[kind] for item in cost.by_year] for kind in kinds},
    })
    return [by_tech, by_year]


def _write_dispatch(directory: Path, plan: PlanSolution,
                    problem: PlanningProblem | None) -> list[Path]:
    demand = demand_matrix(problem) if problem is not None else None
    paths = []
    for k in range(plan.horizon_years):
        columns = {}
        if demand is not None:
            columns["load"] = make_profile(demand[k], UnitTag.KW)
        for name in sorted(plan.hourly):
            family = name.split("_", 1)[0]
            columns[name] = make_profile(plan.hourly[name][k],
                                         FAMILY_UNITS.get(family, UnitTag.KW))
        path = directory / f"dispatch_y{k + 1}.csv"
        write_profiles_csv(path, columns)
        paths.append(path)
    return paths


def emit_outputs(reports: list[ScenarioReport], plans: list[PlanSolution],
                 out_dir: Path | str | None = None,
                 problem: PlanningProblem | None = None,
                 options: dict[str, Any] | None = None,
                 bau_id: str = "BAU") -> list[Path]:
    """
    Grava os artefatos de uma execução.

    Cada cenário tem seu próprio subdiretório com `additions.csv`,
    `costs.csv`, `costs_by_year.csv` e um `dispatch_y<ano>.csv` por ano
    (uma coluna por família de variável, relida sem perdas por
    `read_profiles_csv`). Na raiz ficam `reductions.csv`, quando o BAU faz
    parte da execução, e `summary.json` com metadados, opções e a procedência
    dos perfis. Nenhum arquivo traz data ou hora: entradas iguais produzem
    arquivos idênticos.

    Args:
        reports (list[ScenarioReport]): Relatórios, na ordem dos planos.
        plans (list[PlanSolution]): Planos verificados.
        out_dir (Path | str | None): Diretório; padrão `settings.OUTPUT_DIR`.
        problem (PlanningProblem | None): Problema base, para a coluna de
        carga e os metadados.
        options (dict | None): Opções do resolvedor registradas no resumo.
        bau_id (str): Cenário de referência da tabela de reduções.

    Returns:
        list[Path]: Arquivos gravados.

    Raises:
        OutputWriteException: Se algum arquivo não puder ser gravado.
    """
    out_dir = Path(out_dir or settings.OUTPUT_DIR)
    written: list[Path] = []
    bau = next((r for r in reports if r.scenario_id == bau_id), None)
    reductions = compare(reports, bau) if bau is not None else []

    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        for report, plan in zip(reports, plans):
            directory = out_dir / report.scenario_id
            directory.mkdir(exist_ok=True)
            _write_additions(directory / "additions.csv", report)
            written.append(directory / "additions.csv")
            written += _write_costs(directory, report)
            written += _write_dispatch(directory, plan, problem)

        if reductions:
            path = out_dir / "reductions.csv"
            _write_table(path, {
                ("scenario_id", "-"): [row.scenario_id for row in reductions],
                **{(field, "%"): [getattr(row, field) for row in reductions]
                   for field in ("total_cost_pct", "om_pct", "fuel_pct",
                                 "ghg_pct")},
            })
            written.append(path)

        first = reports[0] if reports else None
        summary = RunSummary(
            problem=problem.name if problem is not None else "-",
            fingerprint=first.fingerprint if first else "",
            provenance=first.provenance if first else "",
            provenance_note=problem.provenance.note if problem is not None else "",
            options=options or {},
            reports=[report.model_copy(update={"reductions": row})
                     for report, row in zip(
                         reports, reductions or [None] * len(reports))],
            reductions=reductions,
        )
        path = out_dir / "summary.json"
        path.write_text(summary.model_dump_json(indent=2) + "\n")
        written.append(path)
    except OSError as exc:
        raise OutputWriteException(
            message=f"could not write outputs to {out_dir}: {exc}") from exc

    for path in written:
        logger.info("wrote %s", path)
    return written
