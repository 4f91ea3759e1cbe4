import logging
import math
from pathlib import Path

import numpy as np
import pandas as pd

from microgrid.core.exceptions import ParseException, ProblemValidationException
from microgrid.schemas.catalog import DieselGenSpec, SolarSpec, WindSpec
from microgrid.schemas.problem import (
    CsvSource,
    DaylightSource,
    MonthlySource,
    OffsetSource,
    SeriesSource,
)
from microgrid.schemas.profiles import (
    HOURS_PER_DAY,
    MONTHS,
    PiecewiseCurve,
    Profile,
    Profile288,
    UnitTag,
    make_profile,
)

logger = logging.getLogger(__name__)


def representative_year(raw: pd.Series, unit: UnitTag | str) -> Profile288:
    """
    Constrói o ano representativo de 288 horas a partir de uma série horária.

    O valor de (mês m, hora do dia d) é a média de todas as amostras do mês
    m na hora d.

    Args:
        raw (pd.Series): Série com índice `DatetimeIndex`, cobrindo ao menos
        um ano civil completo.
        unit (UnitTag | str): Unidade da série.

    Returns:
        Profile288: Perfil representativo.

    Raises:
        ProblemValidationException: Se faltar algum mês ou alguma combinação
        (mês, hora) não tiver amostras.
    """
    if not isinstance(raw.index, pd.DatetimeIndex):
        raise ProblemValidationException(
            message="raw series must be indexed by timestamps")

    samples = raw.dropna()
    months = set(samples.index.month)
    missing = sorted(set(range(1, MONTHS + 1)) - months)
    if missing:
        raise ProblemValidationException(
            message=f"raw series is missing month(s) {missing}")

    means = samples.groupby([samples.index.month, samples.index.hour]).mean()
    values = []
    for month in range(1, MONTHS + 1):
        for hour in range(HOURS_PER_DAY):
            if (month, hour) not in means.index:
                raise ProblemValidationException(
                    message=f"no samples for month {month} hour {hour}")
            values.append(float(means.loc[(month, hour)]))

    return Profile288(values=values, unit=unit)


def grow_load(base: Profile, growth: float, year: int) -> Profile:
    if year < 1:
        raise ValueError("year must be >= 1")
    factor = (1.0 + growth) ** (year - 1)
    return make_profile(base.array() * factor, base.unit)


def solar_unit_output(g, tau, spec: SolarSpec):
    """
    Fator de saída do painel (kW por kW instalado), nunca negativo.

    Aceita escalares ou vetores do numpy.
    """
    factor = (spec.derating * (np.asarray(g, dtype=float) / spec.g_stc)
              * (1.0 + spec.temp_coeff * (np.asarray(tau, dtype=float)
                                          - spec.tau_stc)))
    factor = np.maximum(factor, 0.0)
    return float(factor) if factor.ndim == 0 else factor


def _wind_at(speed: float, spec: WindSpec) -> float:
    if speed < spec.cut_in or speed >= spec.cut_out:
        return 0.0
    for segment in spec.curve:
        if segment.lower <= speed < segment.upper:
            return min(max(segment.at(speed), 0.0), spec.rated_kw)
    return 0.0


def wind_unit_output(s, spec: WindSpec):
    """
    Potência de uma turbina (kW) pela curva tabelada.
    """
    speeds = np.asarray(s, dtype=float)
    if speeds.ndim == 0:
        return _wind_at(float(speeds), spec)
    return np.array([_wind_at(float(v), spec) for v in speeds])


def fuel_rate(spec: DieselGenSpec, p: float, on: bool = True) -> float:
    """
    Consumo de combustível (l/h) pela quadrática `a·p² + b·p + c`.

    Raises:
        ValueError: Se `p` estiver fora de `[ψ·R, R]` com o gerador ligado,
        ou diferente de zero com ele desligado.
    """
    if not on:
        if abs(p) > 1e-9:
            raise ValueError(f"unit {spec.id} is off but produces {p} kW")
        return 0.0
    if p < spec.min_kw - 1e-9 or p > spec.rated_kw + 1e-9:
        raise ValueError(
            f"{p} kW is outside the operating domain "
            f"[{spec.min_kw}, {spec.rated_kw}] of unit {spec.id}")
    return spec.fuel_a * p * p + spec.fuel_b * p + spec.fuel_c


def linearize_fuel_curve(spec: DieselGenSpec, segments: int) -> PiecewiseCurve:
    """
    Lineariza a curva de combustível por cordas em pontos igualmente
    espaçados de `[ψ·R, R]`.

    Args:
        spec (DieselGenSpec): Gerador.
        segments (int): Quantidade de segmentos (>= 1).

    Returns:
        PiecewiseCurve: Curva exata nos pontos de quebra; `convex` vale
        `a >= 0`.
    """
    if segments < 1:
        raise ValueError("segments must be >= 1")

    breakpoints = np.linspace(spec.min_kw, spec.rated_kw, segments + 1)
    rates = [fuel_rate(spec, float(p)) for p in breakpoints]
    slopes, intercepts = [], []
    for k in range(segments):
        slope = (rates[k + 1] - rates[k]) / (breakpoints[k + 1] - breakpoints[k])
        slopes.append(slope)
        intercepts.append(rates[k] - slope * breakpoints[k])

    return PiecewiseCurve(
        breakpoints=tuple(float(p) for p in breakpoints),
        slopes=tuple(slopes),
        intercepts=tuple(intercepts),
        convex=spec.fuel_a >= 0,
    )


def midpoint_errors(spec: DieselGenSpec, curve: PiecewiseCurve) -> list[float]:
    """
    Erro (curva linearizada − quadrática, em l/h) no ponto médio de cada
    segmento: positivo para curvas convexas, negativo para côncavas.
    """
    errors = []
    for k in range(curve.segments):
        mid = 0.5 * (curve.breakpoints[k] + curve.breakpoints[k + 1])
        chord = curve.slopes[k] * mid + curve.intercepts[k]
        errors.append(chord - fuel_rate(spec, mid))
    return errors


def _daylight_day(mean: float, daylight: float, noon: float) -> np.ndarray:
    # integral da meia senoide em cada hora [h, h+1)
    sunrise = noon - daylight / 2.0
    sunset = noon + daylight / 2.0
    weights = np.zeros(HOURS_PER_DAY)
    for hour in range(HOURS_PER_DAY):
        start, end = max(hour, sunrise), min(hour + 1, sunset)
        if end <= start:
            continue
        weights[hour] = (math.cos(math.pi * (start - sunrise) / daylight)
                         - math.cos(math.pi * (end - sunrise) / daylight))
    if weights.sum() <= 0:
        return np.zeros(HOURS_PER_DAY)
    return weights * mean * HOURS_PER_DAY / weights.sum()


def synthesize_profile(source, base_dir: Path | None = None) -> Profile:
    """
    Materializa uma fonte de perfil declarada no arquivo de problema.
    """
    if isinstance(source, MonthlySource):
        shape = np.asarray(source.shape) / np.mean(source.shape)
        values = np.concatenate([mean * shape for mean in source.monthly_mean])
        return make_profile(values, source.unit)

    if isinstance(source, OffsetSource):
        swing = np.asarray(source.swing) - np.mean(source.swing)
        values = np.concatenate([mean + swing for mean in source.monthly_mean])
        return make_profile(values, source.unit)

    if isinstance(source, DaylightSource):
        days = [
            _daylight_day(mean, daylight, source.solar_noon)
            for mean, daylight in zip(source.monthly_mean,
                                      source.daylight_hours)
        ]
        return make_profile(np.concatenate(days), source.unit)

    if isinstance(source, SeriesSource):
        return make_profile(source.values, source.unit)

    if isinstance(source, CsvSource):
        path = Path(source.path)
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        profiles = read_profiles_csv(path)
        if source.column not in profiles:
            raise ParseException(
                message=f"{path}: column {source.column!r} not found")
        return profiles[source.column]

    raise ParseException(message=f"unknown profile source {source!r}")


def read_profiles_csv(path: Path | str) -> dict[str, Profile]:
    """
    Lê um CSV de perfis com duas linhas de cabeçalho: nome da coluna e
    etiqueta de unidade.
    """
    try:
        frame = pd.read_csv(path, header=[0, 1], float_precision="round_trip")
    except (OSError, pd.errors.ParserError, ValueError) as exc:
        raise ParseException(message=f"{path}: {exc}") from exc

    profiles = {}
    for name, unit in frame.columns:
        try:
            profiles[name] = make_profile(frame[(name, unit)].to_numpy(), unit)
        except ValueError as exc:
            raise ParseException(
                message=f"{path}: column {name!r}: {exc}") from exc
    return profiles


def write_profiles_csv(path: Path | str, columns: dict[str, Profile]) -> None:
    frame = pd.DataFrame({
        (name, UnitTag(profile.unit).value): profile.array()
        for name, profile in columns.items()
    })
    frame.to_csv(path, index=False)
    logger.debug("wrote %d profile column(s) to %s", len(columns), path)
