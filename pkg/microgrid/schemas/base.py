import re
from typing import Annotated, Any

import numpy as np
from pydantic import BaseModel, BeforeValidator, ConfigDict, model_validator

from microgrid.core.config import settings

_QUANTITY = re.compile(r"^\s*([-+]?[0-9]*\.?[0-9]+(?:[eE][-+]?[0-9]+)?)\s*(\S+)?\s*$")

# fator para a unidade canônica de cada grandeza
_UNITS: dict[str, dict[str, float]] = {
    "power": {"kW": 1.0, "W": 1e-3, "MW": 1e3},
    "energy": {"kWh": 1.0, "Wh": 1e-3, "MWh": 1e3},
    "mass": {"kg": 1.0, "g": 1e-3, "t": 1e3},
    "hours": {"h": 1.0, "min": 1.0 / 60.0, "d": 24.0},
    "money": {"$": 1.0, "k$": 1e3, "M$": 1e6},
    "fraction": {"pu": 1.0, "%": 0.01},
    "speed": {"m/s": 1.0, "km/h": 1.0 / 3.6},
    "irradiance": {"kW/m2": 1.0, "W/m2": 1e-3},
    "temperature": {"degC": 1.0, "°C": 1.0},
}


def normalize_quantity(value: Any, quantity: str) -> Any:
    """
    Converte uma grandeza para a unidade canônica do esquema.

    Números são aceitos como já estando na unidade canônica (kW, kWh, kg, h,
    $, pu, m/s, kW/m², °C). Textos no formato `"<valor> <unidade>"` são
    convertidos usando a tabela `_UNITS`. Aplicar a função a um valor já
    normalizado devolve o próprio valor.

    Args:
        value (Any): Valor lido do arquivo de problema.
        quantity (str): Nome da grandeza (chave de `_UNITS`).

    Returns:
        Any: O valor em unidade canônica, ou o valor original quando não é
        texto (a validação de tipo fica a cargo do pydantic).

    Raises:
        ValueError: Se o texto não puder ser interpretado ou a unidade for
        desconhecida para a grandeza.
    """
    if not isinstance(value, str):
        return value

    match = _QUANTITY.match(value)
    if not match:
        raise ValueError(f"cannot read {quantity} value {value!r}")

    number, unit = float(match.group(1)), match.group(2)
    table = _UNITS[quantity]
    if unit is None:
        return number
    if unit not in table:
        raise ValueError(
            f"unit {unit!r} is not a {quantity} unit (expected one of "
            f"{', '.join(table)})")

    return number * table[unit]


def _quantity(name: str):
    return BeforeValidator(lambda value: normalize_quantity(value, name))


Power = Annotated[float, _quantity("power")]
Energy = Annotated[float, _quantity("energy")]
Mass = Annotated[float, _quantity("mass")]
Hours = Annotated[float, _quantity("hours")]
Money = Annotated[float, _quantity("money")]
Fraction = Annotated[float, _quantity("fraction")]
Speed = Annotated[float, _quantity("speed")]
Irradiance = Annotated[float, _quantity("irradiance")]
Temperature = Annotated[float, _quantity("temperature")]


class BaseSchemaMixin(BaseModel):
    """
    Classe Mixin para Schemas da aplicação.

    Esta classe mixin é herdada por outros Schemas para fornecer comportamento
    padrão: instâncias imutáveis (podem ser compartilhadas entre execuções de
    cenários concorrentes) e rejeição de campos desconhecidos, para que erros
    de digitação no arquivo de problema não passem despercebidos.
    """
    model_config = ConfigDict(
        from_attributes=True, frozen=True, extra="forbid")


class OutSchema(BaseModel):
    """
    Classe base para Schemas de saída de dados.

    Esta classe base é herdada pelos Schemas que representam resultados
    (soluções, relatórios). Ela carrega a versão do esquema de saída para que
    arquivos JSON/CSV emitidos possam ser versionados.
    """
    model_config = ConfigDict(from_attributes=True)

    schema_version: str = settings.OUTPUT_SCHEMA_VERSION

    @model_validator(mode="before")
    @classmethod
    def set_schema(cls, data):
        """
        Validador de entrada, converte escalares e vetores do numpy para tipos
        nativos do Python.

        Este método validador é executado antes da validação do Schema
        utilizando o decorador `@model_validator(mode="before")`. O método
        itera sobre os pares chave-valor do dicionário de dados (`data`) e
        converte `np.generic` em escalares Python e `np.ndarray` em listas,
        garantindo que a serialização JSON seja estável.

        Args:
            cls (type): Classe do Schema (utilizado pelo decorador).
            data (dict): Dicionário contendo os dados a serem validados.

        Returns:
            dict: Dicionário contendo os dados validados e convertidos.
        """
        if not isinstance(data, dict):
            return data

        for key, value in data.items():
            if isinstance(value, np.generic):
                data[key] = value.item()
            elif isinstance(value, np.ndarray):
                data[key] = value.tolist()

        return data
