"""
Exportação e leitura de modelos em MPS fixo e em formato LP (CPLEX), e
leitura/escrita de arquivos de solução.

Nomes com mais de `settings.MPS_NAME_LIMIT` caracteres não cabem nos campos
do MPS fixo: nesse caso todos os nomes viram `R0000001`/`C0000001` e o mapa
para os nomes originais é gravado em `<arquivo>.names.json`, que `read_mps`
aplica de volta. O formato LP mantém sempre os nomes originais.
"""
import json
import logging
import math
from pathlib import Path
from typing import Literal

import numpy as np

from microgrid.core.config import settings
from microgrid.core.exceptions import (
    DimensionMismatchException,
    OutputWriteException,
    ParseException,
)
from microgrid.models.milp import MilpInstance, Sense, VarType

logger = logging.getLogger(__name__)

OBJECTIVE_ROW = "COST"
LP_LINE_LIMIT = 255
FIELD_WIDTH = 12

_SENSE_CODE = {Sense.LE: "L", Sense.EQ: "E", Sense.GE: "G"}
_CODE_SENSE = {code: sense for sense, code in _SENSE_CODE.items()}


def format_number(value: float) -> str:
    """
    Representação mais curta que reproduz o valor exatamente.
    """
    value = float(value)
    if value == 0.0:
        return "0"
    if value.is_integer() and abs(value) < 1e15:
        return str(int(value))
    return repr(value)


def fixed_number(value: float) -> str:
    """
    Número que cabe no campo de valor do MPS fixo (`FIELD_WIDTH`
    caracteres), com o máximo de dígitos significativos que couber.
    """
    text = format_number(value)
    digits = 12
    while len(text) > FIELD_WIDTH:
        text = f"{float(value):.{digits}g}"
        digits -= 1
    return text


def _short_names(instance: MilpInstance) -> tuple[list[str], list[str], bool]:
    names = [OBJECTIVE_ROW, *instance.row_names, *instance.col_names]
    if all(len(name) <= settings.MPS_NAME_LIMIT for name in names):
        return list(instance.row_names), list(instance.col_names), False
    rows = [f"R{i + 1:07d}" for i in range(instance.n_rows)]
    cols = [f"C{j + 1:07d}" for j in range(instance.n_cols)]
    return rows, cols, True


def _field(code: str, first: str = "", second: str = "",
           value: str = "") -> str:
    # campos fixos: 2-3, 5-12, 15-22, 25-36
    line = f" {code:<2} {first:<8}  {second:<8}  {value:>{FIELD_WIDTH}}"
    return line.rstrip()


def write_mps(instance: MilpInstance, path: Path | str) -> Path:
    path = Path(path)
    rows, cols, shortened = _short_names(instance)
    c, lb, ub, rhs = instance.arrays()
    matrix = instance.matrix().tocsc()
    matrix.sort_indices()

    lines = [f"NAME          {instance.name}", "ROWS", f" N  {OBJECTIVE_ROW}"]
    lines += [f" {_SENSE_CODE[sense]}  {name}"
              for sense, name in zip(instance.senses, rows)]

    lines.append("COLUMNS")
    in_marker = False
    marker = 0
    for j, name in enumerate(cols):
        integral = instance.vtype[j] is not VarType.CONTINUOUS
        if integral != in_marker:
            kind = "'INTORG'" if integral else "'INTEND'"
            lines.append(f"    MARKER{marker:04d}  'MARKER'                 {kind}")
            marker += 1
            in_marker = integral
        start, end = matrix.indptr[j], matrix.indptr[j + 1]
        if c[j] != 0.0 or start == end:
            lines.append(_field("", name, OBJECTIVE_ROW, fixed_number(c[j])))
        for i, value in zip(matrix.indices[start:end], matrix.data[start:end]):
            lines.append(_field("", name, rows[i], fixed_number(value)))
    if in_marker:
        lines.append(f"    MARKER{marker:04d}  'MARKER'                 'INTEND'")

    lines.append("RHS")
    if instance.obj_offset != 0.0:
        lines.append(_field("", "RHS", OBJECTIVE_ROW,
                            fixed_number(-instance.obj_offset)))
    for name, value in zip(rows, rhs):
        if value != 0.0:
            lines.append(_field("", "RHS", name, fixed_number(value)))

    lines.append("BOUNDS")
    for j, name in enumerate(cols):
        lines += _mps_bounds(name, lb[j], ub[j], instance.vtype[j])
    lines.append("ENDATA")

    _write_text(path, "\n".join(lines) + "\n")
    if shortened:
        _write_text(_sidecar(path), json.dumps(
            {"rows": instance.row_names, "columns": instance.col_names},
            indent=1) + "\n")
    logger.info("wrote MPS model %s (%d rows, %d columns%s)", path,
                instance.n_rows, instance.n_cols,
                ", names in sidecar" if shortened else "")
    return path


def _mps_bounds(name: str, lb: float, ub: float, vtype: VarType) -> list[str]:
    if vtype is VarType.BINARY and lb == 0.0 and ub == 1.0:
        return [_field("BV", "BND", name)]
    if lb == ub:
        return [_field("FX", "BND", name, fixed_number(lb))]
    lines = []
    if lb == -math.inf:
        lines.append(_field("FR" if ub == math.inf else "MI", "BND", name))
    elif lb != 0.0 or vtype is not VarType.CONTINUOUS or ub < 0.0:
        lines.append(_field("LO", "BND", name, fixed_number(lb)))
    if ub != math.inf:
        lines.append(_field("UP", "BND", name, fixed_number(ub)))
    return lines


def _sidecar(path: Path) -> Path:
    return path.with_name(path.name + ".names.json")


def _write_text(path: Path, text: str) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise OutputWriteException(message=f"cannot write {path}: {exc}") from exc


def _wrap(tokens: list[str], indent: str = " ") -> list[str]:
    lines, current = [], indent
    for token in tokens:
        if len(current) + len(token) + 1 > LP_LINE_LIMIT and current.strip():
            lines.append(current.rstrip())
            current = indent
        current += token + " "
    lines.append(current.rstrip())
    return lines


def _lp_terms(pairs) -> list[str]:
    tokens = []
    for k, (value, name) in enumerate(pairs):
        sign = "-" if value < 0 else "+"
        if k == 0 and sign == "+":
            tokens.append(f"{format_number(abs(value))} {name}")
        else:
            tokens.append(f"{sign} {format_number(abs(value))} {name}")
    return tokens


def write_lp(instance: MilpInstance, path: Path | str) -> Path:
    path = Path(path)
    c, lb, ub, rhs = instance.arrays()
    names = instance.col_names
    matrix = instance.matrix()
    matrix.sort_indices()

    lines = [f"\\ Problem name: {instance.name}", "Minimize"]
    objective = [(value, names[j]) for j, value in enumerate(c) if value != 0.0]
    if not objective and names:
        objective = [(0.0, names[0])]
    tokens = [f"{OBJECTIVE_ROW.lower()}:", *_lp_terms(objective)]
    if instance.obj_offset != 0.0:
        sign = "-" if instance.obj_offset < 0 else "+"
        tokens.append(f"{sign} {format_number(abs(instance.obj_offset))}")
    lines += _wrap(tokens)

    lines.append("Subject To")
    symbol = {Sense.LE: "<=", Sense.EQ: "=", Sense.GE: ">="}
    for i, row in enumerate(instance.row_names):
        start, end = matrix.indptr[i], matrix.indptr[i + 1]
        pairs = [(value, names[j]) for j, value in
                 zip(matrix.indices[start:end], matrix.data[start:end])]
        if not pairs and names:
            pairs = [(0.0, names[0])]
        lines += _wrap([f"{row}:", *_lp_terms(pairs),
                        symbol[instance.senses[i]], format_number(rhs[i])])

    lines.append("Bounds")
    for j, name in enumerate(names):
        lo, hi, vtype = lb[j], ub[j], instance.vtype[j]
        if vtype is VarType.BINARY and lo == 0.0 and hi == 1.0:
            continue
        if lo == hi:
            lines.append(f" {name} = {format_number(lo)}")
        elif lo == -math.inf and hi == math.inf:
            lines.append(f" {name} free")
        elif lo == -math.inf:
            lines.append(f" -inf <= {name} <= {format_number(hi)}")
        elif hi == math.inf:
            if lo != 0.0:
                lines.append(f" {name} >= {format_number(lo)}")
        else:
            lines.append(f" {format_number(lo)} <= {name} <= {format_number(hi)}")

    general = [n for n, t in zip(names, instance.vtype) if t is VarType.INTEGER]
    binary = [n for n, t in zip(names, instance.vtype) if t is VarType.BINARY]
    if general:
        lines.append("General")
        lines += _wrap(general)
    if binary:
        lines.append("Binary")
        lines += _wrap(binary)
    lines.append("End")

    _write_text(path, "\n".join(lines) + "\n")
    logger.info("wrote LP model %s (%d rows, %d columns)", path,
                instance.n_rows, instance.n_cols)
    return path


def export_model(instance: MilpInstance, fmt: Literal["mps", "lp"],
                 path: Path | str) -> Path:
    """
    Exporta a instância em MPS fixo ou em formato LP.

    A saída é estável byte a byte: duas exportações da mesma instância
    produzem arquivos idênticos.

    Raises:
        OutputWriteException: Se o arquivo não puder ser gravado.
    """
    if fmt == "mps":
        return write_mps(instance, path)
    if fmt == "lp":
        return write_lp(instance, path)
    raise ValueError(f"unknown model format {fmt!r}")


def _number(token: str, path: Path, lineno: int) -> float:
    try:
        return float(token)
    except ValueError as exc:
        raise ParseException(
            message=f"{path}:{lineno}: {token!r} is not a number") from exc


def read_mps(path: Path | str) -> MilpInstance:
    """
    Lê um arquivo MPS (fixo ou livre, sem espaços nos nomes) gravado por
    `write_mps` ou por outra ferramenta, aplicando o mapa de nomes ao lado
    quando existir.

    Raises:
        ParseException: Em erro de sintaxe; a mensagem traz a linha.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseException(message=f"cannot read {path}: {exc}") from exc

    name = "model"
    objective = None
    row_order: list[str] = []
    senses: dict[str, Sense] = {}
    col_order: list[str] = []
    cost: dict[str, float] = {}
    entries: dict[str, list[tuple[str, float]]] = {}
    integral: set[str] = set()
    binary: set[str] = set()
    rhs: dict[str, float] = {}
    lower: dict[str, float] = {}
    upper: dict[str, float] = {}
    section = None
    in_marker = False

    for lineno, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip() or raw.startswith("*"):
            continue
        tokens = raw.split()
        if not raw[0].isspace():
            section = tokens[0]
            if section == "NAME" and len(tokens) > 1:
                name = tokens[1]
            elif section not in ("NAME", "ROWS", "COLUMNS", "RHS", "BOUNDS",
                                 "RANGES", "ENDATA"):
                raise ParseException(
                    message=f"{path}:{lineno}: unknown section {section!r}")
            continue

        if section == "ROWS":
            code, row = tokens[0], tokens[1]
            if code == "N":
                objective = objective or row
            elif code in _CODE_SENSE:
                row_order.append(row)
                senses[row] = _CODE_SENSE[code]
            else:
                raise ParseException(
                    message=f"{path}:{lineno}: unknown row type {code!r}")
        elif section == "COLUMNS":
            if len(tokens) >= 3 and tokens[1] == "'MARKER'":
                in_marker = tokens[2] == "'INTORG'"
                continue
            column = tokens[0]
            if column not in entries:
                col_order.append(column)
                entries[column] = []
                if in_marker:
                    integral.add(column)
            for row, value in zip(tokens[1::2], tokens[2::2]):
                value = _number(value, path, lineno)
                if row == objective:
                    cost[column] = cost.get(column, 0.0) + value
                elif row in senses:
                    entries[column].append((row, value))
                else:
                    raise ParseException(
                        message=f"{path}:{lineno}: unknown row {row!r}")
        elif section == "RHS":
            pairs = tokens[1:] if len(tokens) % 2 else tokens
            for row, value in zip(pairs[0::2], pairs[1::2]):
                rhs[row] = _number(value, path, lineno)
        elif section == "BOUNDS":
            code, column = tokens[0], tokens[2]
            if column not in entries:
                raise ParseException(
                    message=f"{path}:{lineno}: bound on unknown column "
                            f"{column!r}")
            value = (_number(tokens[3], path, lineno)
                     if len(tokens) > 3 else None)
            if code == "UP":
                upper[column] = value
            elif code in ("LO", "LI"):
                lower[column] = value
            elif code == "UI":
                upper[column] = value
                integral.add(column)
            elif code == "FX":
                lower[column] = upper[column] = value
            elif code == "FR":
                lower[column], upper[column] = -math.inf, math.inf
            elif code == "MI":
                lower[column] = -math.inf
            elif code == "PL":
                upper[column] = math.inf
            elif code == "BV":
                binary.add(column)
                lower.setdefault(column, 0.0)
                upper.setdefault(column, 1.0)
            else:
                raise ParseException(
                    message=f"{path}:{lineno}: unknown bound type {code!r}")
        elif section == "RANGES":
            raise ParseException(
                message=f"{path}:{lineno}: RANGES are not supported")

    instance = MilpInstance(name=name)
    instance.obj_offset = -rhs.get(objective, 0.0) if objective else 0.0
    for column in col_order:
        vtype = (VarType.BINARY if column in binary else
                 VarType.INTEGER if column in integral else VarType.CONTINUOUS)
        instance.add_column(column, lower.get(column, 0.0),
                            upper.get(column, math.inf), vtype,
                            cost.get(column, 0.0))
    position = {column: j for j, column in enumerate(col_order)}
    terms: dict[str, list[tuple[int, float]]] = {row: [] for row in row_order}
    for column in col_order:
        for row, value in entries[column]:
            terms[row].append((position[column], value))
    for row in row_order:
        instance.add_row(row, terms[row], senses[row], rhs.get(row, 0.0))

    sidecar = _sidecar(path)
    if sidecar.exists():
        _apply_names(instance, sidecar)
    return instance


def _apply_names(instance: MilpInstance, sidecar: Path) -> None:
    try:
        names = json.loads(sidecar.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseException(message=f"cannot read {sidecar}: {exc}") from exc
    rows, columns = names.get("rows", []), names.get("columns", [])
    if len(rows) != instance.n_rows or len(columns) != instance.n_cols:
        raise DimensionMismatchException(
            message=f"{sidecar} maps {len(rows)} rows × {len(columns)} columns,"
                    f" model has {instance.n_rows} × {instance.n_cols}")
    instance.rename(rows, columns)


def read_solution(path: Path | str,
                  instance: MilpInstance) -> tuple[np.ndarray, float | None]:
    """
    Lê um arquivo de solução de um resolvedor externo.

    Gramática: linhas `<nome> <valor>`; `#` inicia comentário; uma linha
    opcional `objective <valor>`. Nomes podem ser os originais ou os curtos
    (`C0000001`) do MPS exportado. Colunas ausentes valem zero.

    Returns:
        tuple[np.ndarray, float | None]: Valores por coluna e o objetivo
        declarado no arquivo, se houver.

    Raises:
        ParseException: Em linha malformada ou nome de coluna desconhecido.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseException(message=f"cannot read {path}: {exc}") from exc

    position = {name: j for j, name in enumerate(instance.col_names)}
    values = np.zeros(instance.n_cols)
    objective = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        if len(tokens) != 2:
            raise ParseException(
                message=f"{path}:{lineno}: expected '<name> <value>'")
        name, value = tokens[0], _number(tokens[1], path, lineno)
        if name.lower() == "objective":
            objective = value
            continue
        column = position.get(name)
        if column is None and len(name) == 8 and name.startswith("C"):
            try:
                column = int(name[1:]) - 1
            except ValueError:
                column = None
            if column is not None and not 0 <= column < instance.n_cols:
                column = None
        if column is None:
            raise ParseException(
                message=f"{path}:{lineno}: unknown column {name!r}")
        values[column] = value
    return values, objective


def write_solution(path: Path | str, instance: MilpInstance, values,
                   objective: float | None = None) -> Path:
    path = Path(path)
    values = np.asarray(values, dtype=float)
    if values.shape != (instance.n_cols,):
        raise DimensionMismatchException(
            message=f"{values.size} values for {instance.n_cols} columns")
    lines = [f"# {instance.name}"]
    if objective is not None:
        lines.append(f"objective {format_number(objective)}")
    lines += [f"{name} {format_number(value)}"
              for name, value in zip(instance.col_names, values)
              if value != 0.0]
    _write_text(path, "\n".join(lines) + "\n")
    return path
