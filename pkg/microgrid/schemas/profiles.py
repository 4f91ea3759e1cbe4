from enum import Enum

import numpy as np
from pydantic import Field, field_validator, model_validator

from microgrid.schemas.base import BaseSchemaMixin

HOURS_PER_DAY = 24
MONTHS = 12
YEAR_HOURS = HOURS_PER_DAY * MONTHS


class UnitTag(str, Enum):
    KW = "kW"
    KWH = "kWh"
    IRRADIANCE = "kW/m2"
    CELSIUS = "degC"
    SPEED = "m/s"
    KG = "kg"
    LITRES_PER_HOUR = "l/h"
    PER_UNIT = "pu"


class Profile(BaseSchemaMixin):
    """
    Série de horas representativas com etiqueta de unidade.

    A hora `h` (0-based) corresponde a `24·(mês−1) + hora-do-dia`. A classe
    geral aceita qualquer comprimento para servir a problemas reduzidos; a
    subclasse `Profile288` exige o ano representativo completo.
    """
    values: tuple[float, ...] = Field(..., min_length=1)
    unit: UnitTag = Field(...)

    def __len__(self) -> int:
        return len(self.values)

    def array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)

    def head(self, hours: int) -> "Profile":
        return make_profile(self.values[:hours], self.unit)


class Profile288(Profile):
    values: tuple[float, ...] = Field(
        ..., min_length=YEAR_HOURS, max_length=YEAR_HOURS)

    @staticmethod
    def index(month: int, hour_of_day: int) -> int:
        return HOURS_PER_DAY * (month - 1) + hour_of_day


def make_profile(values, unit: UnitTag | str) -> Profile:
    """
    Cria um `Profile288` quando a série cobre o ano representativo
    completo, ou um `Profile` geral (problemas reduzidos).
    """
    values = tuple(float(v) for v in values)
    if len(values) == YEAR_HOURS:
        return Profile288(values=values, unit=unit)
    return Profile(values=values, unit=unit)


class PiecewiseCurve(BaseSchemaMixin):
    """
    Aproximação linear por partes de uma curva de consumo de combustível.

    Os segmentos são cordas da quadrática entre pontos de quebra
    igualmente espaçados no domínio `[ψ·R, R]`. O segmento `k` vale
    `slopes[k]·p + intercepts[k]` em `[breakpoints[k], breakpoints[k+1]]`.
    """
    breakpoints: tuple[float, ...] = Field(..., min_length=2)
    slopes: tuple[float, ...] = Field(..., min_length=1)
    intercepts: tuple[float, ...] = Field(..., min_length=1)
    convex: bool = Field(...)

    @property
    def segments(self) -> int:
        return len(self.slopes)

    @property
    def domain(self) -> tuple[float, float]:
        return self.breakpoints[0], self.breakpoints[-1]

    @field_validator("breakpoints")
    @classmethod
    def check_breakpoints(cls, value):
        if any(b <= a for a, b in zip(value, value[1:])):
            raise ValueError("breakpoints must be strictly increasing")
        return value

    @model_validator(mode="after")
    def check_segments(self):
        if not (len(self.slopes) == len(self.intercepts)
                == len(self.breakpoints) - 1):
            raise ValueError("one slope and intercept per segment expected")
        for k in range(1, self.segments):
            p = self.breakpoints[k]
            left = self.slopes[k - 1] * p + self.intercepts[k - 1]
            right = self.slopes[k] * p + self.intercepts[k]
            if abs(left - right) > 1e-9 * max(1.0, abs(left)):
                raise ValueError(f"curve is discontinuous at {p} kW")
        return self

    def segment_of(self, p: float) -> int:
        """
        Índice do segmento que contém `p`; pontos de quebra internos
        pertencem ao segmento da esquerda.
        """
        lo, hi = self.domain
        if p < lo - 1e-9 or p > hi + 1e-9:
            raise ValueError(f"{p} kW is outside the curve domain [{lo}, {hi}]")
        for k in range(self.segments):
            if p <= self.breakpoints[k + 1] + 1e-12:
                return k
        return self.segments - 1

    def evaluate(self, p: float) -> float:
        k = self.segment_of(p)
        return self.slopes[k] * p + self.intercepts[k]
