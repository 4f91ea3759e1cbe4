"""
Simplex revisado com variáveis limitadas sobre matriz esparsa.

Resolve `min c·x` sujeito a `A·x {<=,=,>=} b` e `lb <= x <= ub`. Cada linha
recebe uma folga cujos limites codificam o sentido (`A·x + s = b`), de modo
que a base inicial é a identidade das folgas. A base é mantida fatorada
(LU esparsa do SuperLU) com atualizações em forma produto, refatorada a
cada `REFACTOR_EVERY` pivôs.

Partida a frio usa o simplex primal em duas fases compostas (a fase 1
minimiza a soma das inviabilidades das básicas). Partida a quente, a partir
da `Basis` de um LP com os mesmos coeficientes e outros limites, usa o
simplex dual e recorre ao primal quando a base não é dual viável. Nos dois
casos a seleção cai para a regra de Bland quando o objetivo estaciona.
"""
import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import splu

logger = logging.getLogger(__name__)

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
ITERATION_LIMIT = "iteration-limit"
NUMERICAL = "numerical"

PRIMAL_TOL = 1e-7
REFACTOR_EVERY = 64
_STALL_PIVOTS = 50


@dataclass
class Basis:
    """
    Base de uma solução: coluna básica de cada linha (`head`) e, para as
    não básicas, se estão no limite superior. Índices `n..n+m-1` são as
    folgas.
    """
    head: np.ndarray
    at_upper: np.ndarray


@dataclass
class LPResult:
    status: str
    x: Optional[np.ndarray] = None
    objective: Optional[float] = None
    iterations: int = 0
    basis: Optional[Basis] = None


class _Factor:
    def __init__(self, basis_matrix: sparse.csc_matrix) -> None:
        self.lu = splu(basis_matrix)
        self.etas: list[tuple[int, np.ndarray]] = []

    def ftran(self, a: np.ndarray) -> np.ndarray:
        y = self.lu.solve(a)
        for r, d in self.etas:
            yr = y[r] / d[r]
            y -= d * yr
            y[r] = yr
        return y

    def btran(self, h: np.ndarray) -> np.ndarray:
        h = h.astype(float, copy=True)
        for r, d in reversed(self.etas):
            h[r] = (h[r] - (h @ d - h[r] * d[r])) / d[r]
        return self.lu.solve(h, trans="T")

    def update(self, row: int, column: np.ndarray) -> None:
        self.etas.append((row, column.copy()))


class _Singular(Exception):
    pass


class LinearProgram:
    """
    Coeficientes fixos de um LP (`c`, `A`, sentidos e `b`); os limites das
    colunas variam a cada `solve`, o que permite reaproveitar a base de um
    nó pai no branch-and-bound.
    """
    def __init__(self, c, A, senses, b, tol: float = 1e-9) -> None:
        self.c = np.asarray(c, dtype=float)
        A = sparse.csc_matrix(A, dtype=float)
        self.m, self.n = A.shape
        m = self.m
        self.matrix = A if not m else sparse.hstack(
            [A, sparse.identity(m, format="csc")], format="csc")
        self.transposed = self.matrix.T.tocsr()
        self.cost = np.concatenate([self.c, np.zeros(m)])
        self.b = np.asarray(b, dtype=float)
        self.tol = tol
        self.dual_tol = tol * max(1.0, float(np.abs(self.c).max(initial=0.0)))

        self.slack_lo = np.zeros(m)
        self.slack_hi = np.zeros(m)
        for i, sense in enumerate(senses):
            sense = getattr(sense, "value", sense)
            if sense == "<=":
                self.slack_hi[i] = math.inf
            elif sense == ">=":
                self.slack_lo[i] = -math.inf

    def column(self, j: int) -> np.ndarray:
        out = np.zeros(self.m)
        start, end = self.matrix.indptr[j], self.matrix.indptr[j + 1]
        out[self.matrix.indices[start:end]] = self.matrix.data[start:end]
        return out

    def solve(self, lb, ub, basis: Optional[Basis] = None,
              max_iterations: Optional[int] = None) -> LPResult:
        """
        Resolve o LP com os limites `lb`/`ub`.

        Args:
            lb, ub: Limites das colunas (podem ser infinitos).
            basis (Basis | None): Base de partida; `None` parte das folgas.
            max_iterations (int | None): Limite de pivôs.

        Returns:
            LPResult: Status, solução, objetivo (sem deslocamento constante)
            e a base final quando ótimo.
        """
        lb = np.asarray(lb, dtype=float)
        ub = np.asarray(ub, dtype=float)
        if np.any(lb > ub + self.tol):
            return LPResult(status=INFEASIBLE)
        if not self.m:
            return _unconstrained(self.c, lb, ub)

        lo = np.concatenate([lb, self.slack_lo])
        hi = np.concatenate([ub, self.slack_hi])
        limit = max_iterations or 50 * (self.m + self.n) + 1000
        try:
            run = _Run(self, lo, hi, basis, limit)
            status = run.execute()
        except _Singular:
            return LPResult(status=NUMERICAL)
        if status != OPTIMAL:
            return LPResult(status=status, iterations=run.iterations)

        x = run.x[:self.n].copy()
        return LPResult(status=OPTIMAL, x=x, objective=float(self.c @ x),
                        iterations=run.iterations,
                        basis=Basis(head=run.head.copy(),
                                    at_upper=run.at_upper.copy()))


def _unconstrained(c: np.ndarray, lb: np.ndarray, ub: np.ndarray) -> LPResult:
    x = np.where(c > 0, lb, np.where(c < 0, ub,
                                     np.where(np.isfinite(lb), lb,
                                              np.where(np.isfinite(ub), ub,
                                                       0.0))))
    if not np.all(np.isfinite(x)):
        return LPResult(status=UNBOUNDED)
    return LPResult(status=OPTIMAL, x=x, objective=float(c @ x),
                    basis=Basis(head=np.zeros(0, dtype=int),
                                at_upper=(x == ub) & np.isfinite(ub)))


class _Run:
    def __init__(self, lp: LinearProgram, lo: np.ndarray, hi: np.ndarray,
                 basis: Optional[Basis], limit: int) -> None:
        self.lp = lp
        self.lo = lo
        self.hi = hi
        self.limit = limit
        self.iterations = 0
        self.free = ~np.isfinite(lo) & ~np.isfinite(hi)
        self.fixed = lo == hi
        self.warm = basis is not None

        total = lp.n + lp.m
        self.x = np.zeros(total)
        if self.warm:
            self.head = np.asarray(basis.head, dtype=int).copy()
            self.at_upper = np.asarray(basis.at_upper, dtype=bool).copy()
        else:
            self.head = np.arange(lp.n, total)
            self.at_upper = np.zeros(total, dtype=bool)
        self.is_basic = np.zeros(total, dtype=bool)
        self.is_basic[self.head] = True

        try:
            self._refactor()
        except _Singular:
            logger.debug("warm basis is singular, starting from slacks")
            self.warm = False
            self.head = np.arange(lp.n, total)
            self.at_upper = np.zeros(total, dtype=bool)
            self.is_basic[:] = False
            self.is_basic[self.head] = True
            self._refactor()
        self._place_nonbasic()
        self._compute_basic()

    def _refactor(self) -> None:
        try:
            self.factor = _Factor(self.lp.matrix[:, self.head].tocsc())
        except RuntimeError as exc:
            raise _Singular(str(exc)) from exc

    def _place_nonbasic(self) -> None:
        lo, hi = self.lo, self.hi
        lo_finite, hi_finite = np.isfinite(lo), np.isfinite(hi)
        upper = hi_finite & (self.at_upper | ~lo_finite)
        nonbasic = ~self.is_basic
        self.at_upper = upper & nonbasic
        self.x[nonbasic] = np.where(upper, hi,
                                    np.where(lo_finite, lo, 0.0))[nonbasic]

    def _compute_basic(self) -> None:
        x = self.x.copy()
        x[self.head] = 0.0
        self.x[self.head] = self.factor.ftran(self.lp.b - self.lp.matrix @ x)

    def _reduced_costs(self, cost: np.ndarray) -> np.ndarray:
        y = self.factor.btran(cost[self.head])
        return cost - self.lp.transposed @ y

    def _pivot(self, row: int, column: int, alpha: np.ndarray) -> None:
        leaving = self.head[row]
        self.is_basic[leaving] = False
        self.head[row] = column
        self.is_basic[column] = True
        self.at_upper[column] = False
        self.factor.update(row, alpha)
        if len(self.factor.etas) >= REFACTOR_EVERY:
            self._refactor()
            self._compute_basic()

    def _infeasibility(self) -> np.ndarray:
        xb = self.x[self.head]
        return np.maximum(np.maximum(self.lo[self.head] - xb,
                                     xb - self.hi[self.head]), 0.0)

    def execute(self) -> str:
        if self.warm:
            status = self._dual()
            if status is not None and status != OPTIMAL:
                return status
        return self._primal()

    # primal

    def _phase_cost(self) -> tuple[np.ndarray, bool]:
        xb = self.x[self.head]
        below = xb < self.lo[self.head] - PRIMAL_TOL
        above = xb > self.hi[self.head] + PRIMAL_TOL
        if not (below.any() or above.any()):
            return self.lp.cost, False
        cost = np.zeros_like(self.lp.cost)
        cost[self.head[below]] = -1.0
        cost[self.head[above]] = 1.0
        return cost, True

    def _primal(self) -> str:
        tol = self.lp.tol
        bland = False
        stall = 0
        last = math.inf
        phase1_before = None
        while True:
            if self.iterations >= self.limit:
                return ITERATION_LIMIT
            cost, phase1 = self._phase_cost()
            if phase1 != phase1_before:
                phase1_before, last, stall, bland = phase1, math.inf, 0, False
            dual_tol = tol if phase1 else self.lp.dual_tol
            d = self._reduced_costs(cost)

            increase = (d < -dual_tol) & (self.x < self.hi - tol)
            decrease = (d > dual_tol) & (self.x > self.lo + tol)
            candidates = (increase | decrease) & ~self.is_basic
            if not candidates.any():
                return INFEASIBLE if phase1 else OPTIMAL
            if bland:
                column = int(np.flatnonzero(candidates)[0])
            else:
                column = int(np.argmax(np.where(candidates, np.abs(d), -1.0)))
            direction = 1.0 if d[column] < 0 else -1.0

            alpha = self.factor.ftran(self.lp.column(column))
            step, row, target = self._primal_ratio(alpha * direction, bland)
            flip = self.hi[column] - self.lo[column]
            if flip <= step:
                step, row = flip, None
            if step == math.inf:
                return UNBOUNDED

            self.iterations += 1
            delta = direction * step
            self.x[self.head] -= alpha * delta
            self.x[column] += delta
            if row is None:
                self.at_upper[column] = direction > 0
                self.x[column] = self.hi[column] if direction > 0 else self.lo[column]
            else:
                leaving = self.head[row]
                self.x[leaving] = target
                self.at_upper[leaving] = target == self.hi[leaving]
                self._pivot(row, column, alpha)

            value = float(cost @ self.x) if not phase1 else float(
                self._infeasibility().sum())
            if value < last - 1e-12:
                last, stall, bland = value, 0, False
            else:
                stall += 1
                bland = stall > _STALL_PIVOTS

    def _primal_ratio(self, g: np.ndarray, bland: bool):
        """
        Passo máximo ao longo de `-g` nas básicas (teste de razão em duas
        passadas), a linha que sai e o limite em que ela fica. Básicas
        inviáveis só param ao atingir o limite violado.
        """
        pivot_tol = self.lp.tol
        head = self.head
        xb, lob, hib = self.x[head], self.lo[head], self.hi[head]
        below = xb < lob - PRIMAL_TOL
        above = xb > hib + PRIMAL_TOL

        room = np.full(xb.shape, math.inf)
        target = np.full(xb.shape, math.nan)
        dec = g > pivot_tol
        tgt = np.where(above, hib, lob)
        ok = dec & ~below & np.isfinite(tgt)
        room[ok], target[ok] = (xb - tgt)[ok], tgt[ok]
        inc = g < -pivot_tol
        tgt = np.where(below, lob, hib)
        ok = inc & ~above & np.isfinite(tgt)
        room[ok], target[ok] = (tgt - xb)[ok], tgt[ok]

        rows = np.flatnonzero(np.isfinite(room))
        if not rows.size:
            return math.inf, None, None
        size = np.abs(g[rows])
        ratio = np.maximum(room[rows], 0.0) / size
        if bland:
            best = ratio.min()
            tied = rows[ratio <= best + 1e-12]
            row = int(tied[np.argmin(head[tied])])
            return max(room[row], 0.0) / abs(g[row]), row, target[row]
        cap = ((room[rows] + PRIMAL_TOL) / size).min()
        eligible = ratio <= cap
        pick = int(np.argmax(np.where(eligible, size, -1.0)))
        row = int(rows[pick])
        return float(ratio[pick]), row, target[row]

    # dual

    def _make_dual_feasible(self, d: np.ndarray) -> bool:
        tol = self.lp.dual_tol
        nonbasic = ~self.is_basic & ~self.fixed
        at_lower = nonbasic & ~self.at_upper & ~self.free
        at_upper = nonbasic & self.at_upper
        to_upper = at_lower & (d < -tol) & np.isfinite(self.hi)
        to_lower = at_upper & (d > tol) & np.isfinite(self.lo)
        if to_upper.any() or to_lower.any():
            self.at_upper[to_upper] = True
            self.at_upper[to_lower] = False
            self.x[to_upper] = self.hi[to_upper]
            self.x[to_lower] = self.lo[to_lower]
            self._compute_basic()
        wrong = ((at_lower & ~to_upper & (d < -tol))
                 | (at_upper & ~to_lower & (d > tol))
                 | (nonbasic & self.free & (np.abs(d) > tol)))
        return not wrong.any()

    def _dual(self) -> Optional[str]:
        """
        Simplex dual a partir de uma base dual viável. Devolve `None` quando
        a base não é dual viável e o primal deve assumir.
        """
        lp = self.lp
        if not self._make_dual_feasible(self._reduced_costs(lp.cost)):
            return None
        bland = False
        stall = 0
        last = -math.inf
        while True:
            infeasibility = self._infeasibility()
            if infeasibility.max() <= PRIMAL_TOL:
                return OPTIMAL
            if self.iterations >= self.limit:
                return ITERATION_LIMIT
            if bland:
                rows = np.flatnonzero(infeasibility > PRIMAL_TOL)
                row = int(rows[np.argmin(self.head[rows])])
            else:
                row = int(np.argmax(infeasibility))
            leaving = self.head[row]
            raise_it = self.x[leaving] < self.lo[leaving]
            target = self.lo[leaving] if raise_it else self.hi[leaving]

            unit = np.zeros(lp.m)
            unit[row] = 1.0
            rho = self.factor.btran(unit)
            alpha_row = lp.transposed @ rho
            d = self._reduced_costs(lp.cost)
            column = self._dual_ratio(alpha_row, d, raise_it, bland)
            if column is None:
                return INFEASIBLE

            alpha = self.factor.ftran(lp.column(column))
            if abs(alpha[row]) <= lp.tol:
                raise _Singular(f"pivot {alpha[row]:.3g} on row {row}")
            self.iterations += 1
            delta = (self.x[leaving] - target) / alpha[row]
            self.x[self.head] -= alpha * delta
            self.x[column] += delta
            self.x[leaving] = target
            self.at_upper[leaving] = not raise_it
            self._pivot(row, column, alpha)

            value = float(lp.cost @ self.x)
            if value > last + 1e-12:
                last, stall, bland = value, 0, False
            else:
                stall += 1
                bland = stall > _STALL_PIVOTS

    def _dual_ratio(self, alpha_row: np.ndarray, d: np.ndarray,
                    raise_it: bool, bland: bool) -> Optional[int]:
        pivot_tol = self.lp.tol
        nonbasic = ~self.is_basic & ~self.fixed
        at_lower = nonbasic & ~self.at_upper & ~self.free
        at_upper = nonbasic & self.at_upper
        sign = -1.0 if raise_it else 1.0
        signed = alpha_row * sign
        eligible = ((at_lower & (signed > pivot_tol))
                    | (at_upper & (signed < -pivot_tol))
                    | (nonbasic & self.free & (np.abs(alpha_row) > pivot_tol)))
        columns = np.flatnonzero(eligible)
        if not columns.size:
            return None
        size = np.abs(alpha_row[columns])
        slack = np.where(at_lower[columns], np.maximum(d[columns], 0.0),
                         np.where(at_upper[columns],
                                  np.maximum(-d[columns], 0.0),
                                  np.abs(d[columns])))
        ratio = slack / size
        if bland:
            best = ratio.min()
            return int(columns[ratio <= best + 1e-12].min())
        cap = ((slack + self.lp.dual_tol) / size).min()
        pick = int(np.argmax(np.where(ratio <= cap, size, -1.0)))
        return int(columns[pick])


def solve_lp(c, A, senses, b, lb, ub, tol: float = 1e-9,
             max_iterations: Optional[int] = None,
             basis: Optional[Basis] = None) -> LPResult:
    """
    Resolve um LP com o simplex revisado de variáveis limitadas.

    Args:
        c: Custos (n).
        A: Matriz esparsa ou densa (m × n); é convertida para CSC.
        senses: Sentidos por linha (`"<="`, `"="`, `">="`).
        b: Lados direitos (m).
        lb, ub: Limites das colunas (podem ser infinitos).
        tol (float): Tolerância de pivô e de otimalidade.
        max_iterations (int | None): Limite de pivôs.
        basis (Basis | None): Base de partida.

    Returns:
        LPResult: Status, solução e objetivo (sem deslocamento constante).
    """
    return LinearProgram(c, A, senses, b, tol).solve(
        lb, ub, basis=basis, max_iterations=max_iterations)
