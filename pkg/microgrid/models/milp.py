import math
from enum import Enum
from typing import Iterable, NamedTuple, Optional

import numpy as np
from scipy import sparse

from microgrid.core.config import settings
from microgrid.core.exceptions import ModelSizeException


class Family(str, Enum):
    """
    Famílias de variáveis de decisão; o valor é o prefixo do nome da coluna.
    """
    GEN_POWER = "P"
    ON_STATE = "U"
    ONLINE_CAPACITY = "W"
    FUEL = "F"
    SEGMENT = "Z"
    COUNT = "N"
    ADDITION = "A"
    INSTALLED = "I"
    SOLAR_POWER = "PS"
    WIND_POWER = "PW"
    BATT_CHARGE = "BC"
    BATT_DISCHARGE = "BD"
    BATT_SOC = "SB"
    BATT_CHARGE_ON = "UC"
    BATT_DISCHARGE_ON = "UD"
    FUEL_CELL = "PF"
    ELECTROLIZER = "PX"
    TANK_SOC = "SQ"


class VarType(str, Enum):
    CONTINUOUS = "continuous"
    INTEGER = "integer"
    BINARY = "binary"


class Sense(str, Enum):
    LE = "<="
    EQ = "="
    GE = ">="


# Eq22 não gera linhas: a exclusividade fica com Eq23 a Eq25.
EQUATION_TAGS = tuple(f"Eq{n}" for n in range(2, 32) if n != 22)
AUXILIARY_TAGS = ("Fuel", "Scn")


def _name(prefix: str, unit: Optional[str], year: Optional[int],
          hour: Optional[int], part: Optional[int]) -> str:
    name = prefix
    if unit:
        name += f"_{unit}"
    if year is not None:
        name += f"_y{year}"
    if hour is not None:
        name += f"_h{hour}"
    if part is not None:
        name += f"_k{part}"
    return name


class ColumnKey(NamedTuple):
    family: Family
    unit: str
    year: Optional[int] = None
    hour: Optional[int] = None
    part: Optional[int] = None

    def name(self) -> str:
        return _name(self.family.value, self.unit, self.year, self.hour,
                     self.part)


class RowKey(NamedTuple):
    tag: str
    unit: Optional[str] = None
    year: Optional[int] = None
    hour: Optional[int] = None
    part: Optional[int] = None

    def name(self) -> str:
        return _name(self.tag, self.unit, self.year, self.hour, self.part)


def tag_of(row_name: str) -> str:
    return row_name.split("_", 1)[0]


class VariableIndex:
    """
    Mapa bidirecional entre colunas da matriz e chaves
    (família, unidade, ano, hora, parte).
    """
    def __init__(self) -> None:
        self._keys: list[ColumnKey] = []
        self._columns: dict[ColumnKey, int] = {}

    def add(self, key: ColumnKey) -> int:
        if key in self._columns:
            raise KeyError(f"column {key.name()} already allocated")
        self._columns[key] = len(self._keys)
        self._keys.append(key)
        return self._columns[key]

    def __len__(self) -> int:
        return len(self._keys)

    def __contains__(self, key: ColumnKey) -> bool:
        return key in self._columns

    def __getitem__(self, key: ColumnKey) -> int:
        return self._columns[key]

    def get(self, key: ColumnKey, default=None):
        return self._columns.get(key, default)

    def key(self, column: int) -> ColumnKey:
        return self._keys[column]

    def keys(self) -> list[ColumnKey]:
        return list(self._keys)

    def columns(self, family: Family | None = None,
                unit: str | None = None) -> list[int]:
        return [
            j for j, key in enumerate(self._keys)
            if (family is None or key.family is family)
            and (unit is None or key.unit == unit)
        ]

    def units(self, family: Family) -> list[str]:
        seen: dict[str, None] = {}
        for key in self._keys:
            if key.family is family:
                seen.setdefault(key.unit)
        return list(seen)


class MilpInstance:
    """
    MILP esparso independente de resolvedor: min c·x + offset sujeito a
    linhas `a·x {<=,=,>=} b` e limites `lb <= x <= ub`.

    As linhas guardam os coeficientes como triplas (linha, coluna, valor)
    na ordem de construção; os nomes de linha começam pela etiqueta da
    equação de origem (`Eq4_y1_h1`, `Fuel_G1_y1_h1_k1`, `Scn_battery`).
    """
    def __init__(self, name: str = "microgrid") -> None:
        self.name = name
        self.obj_offset = 0.0
        self.col_names: list[str] = []
        self.cost: list[float] = []
        self.lb: list[float] = []
        self.ub: list[float] = []
        self.vtype: list[VarType] = []
        self.row_names: list[str] = []
        self.senses: list[Sense] = []
        self.rhs: list[float] = []
        self.t_rows: list[int] = []
        self.t_cols: list[int] = []
        self.t_vals: list[float] = []
        self._row_lookup: dict[str, int] = {}

    @property
    def n_cols(self) -> int:
        return len(self.col_names)

    @property
    def n_rows(self) -> int:
        return len(self.row_names)

    def add_column(self, name: str, lb: float = 0.0, ub: float = math.inf,
                   vtype: VarType = VarType.CONTINUOUS,
                   cost: float = 0.0) -> int:
        if self.n_cols >= settings.MAX_MODEL_COLUMNS:
            raise ModelSizeException(
                message=f"model exceeds MAX_MODEL_COLUMNS = "
                        f"{settings.MAX_MODEL_COLUMNS}")
        if vtype is VarType.BINARY:
            lb, ub = max(lb, 0.0), min(ub, 1.0)
        self.col_names.append(name)
        self.cost.append(float(cost))
        self.lb.append(float(lb))
        self.ub.append(float(ub))
        self.vtype.append(vtype)
        return self.n_cols - 1

    def add_row(self, name: str, terms: Iterable[tuple[int, float]],
                sense: Sense, rhs: float) -> int:
        """
        Acrescenta uma linha; coeficientes repetidos da mesma coluna são
        somados e zeros são descartados.
        """
        merged: dict[int, float] = {}
        for column, value in terms:
            merged[column] = merged.get(column, 0.0) + float(value)
        row = self.n_rows
        self.row_names.append(name)
        self._row_lookup[name] = row
        self.senses.append(Sense(sense))
        self.rhs.append(float(rhs))
        for column, value in merged.items():
            if value != 0.0:
                self.t_rows.append(row)
                self.t_cols.append(column)
                self.t_vals.append(value)
        return row

    def row(self, name: str) -> int:
        return self._row_lookup[name]

    def rename(self, rows: list[str], columns: list[str]) -> None:
        self.row_names = list(rows)
        self.col_names = list(columns)
        self._row_lookup = {name: i for i, name in enumerate(self.row_names)}

    def add_cost(self, column: int, value: float) -> None:
        self.cost[column] += float(value)

    def fix(self, column: int, value: float) -> None:
        self.lb[column] = float(value)
        self.ub[column] = float(value)

    def set_bounds(self, column: int, lb: float | None = None,
                   ub: float | None = None) -> None:
        if lb is not None:
            self.lb[column] = float(lb)
        if ub is not None:
            self.ub[column] = float(ub)

    def row_tags(self) -> list[str]:
        return [tag_of(name) for name in self.row_names]

    def integral(self) -> np.ndarray:
        return np.array([t is not VarType.CONTINUOUS for t in self.vtype],
                        dtype=bool)

    def matrix(self) -> sparse.csr_matrix:
        return sparse.csr_matrix(
            (np.asarray(self.t_vals, dtype=float),
             (np.asarray(self.t_rows, dtype=int),
              np.asarray(self.t_cols, dtype=int))),
            shape=(self.n_rows, self.n_cols))

    def arrays(self):
        """
        Vetores numpy `(c, lb, ub, rhs)` da instância.
        """
        return (np.asarray(self.cost, dtype=float),
                np.asarray(self.lb, dtype=float),
                np.asarray(self.ub, dtype=float),
                np.asarray(self.rhs, dtype=float))

    def objective(self, values) -> float:
        return float(np.dot(self.cost, values)) + self.obj_offset

    def activities(self, values) -> np.ndarray:
        return self.matrix() @ np.asarray(values, dtype=float)

    def summary(self) -> dict[str, int]:
        return {
            "columns": self.n_cols,
            "integer_columns": int(self.integral().sum()),
            "rows": self.n_rows,
            "nonzeros": len(self.t_vals),
        }
