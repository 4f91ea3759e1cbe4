"""
Branch-and-bound sobre o simplex embutido.

Até o primeiro incumbente a busca mergulha em profundidade; depois passa à
seleção pelo melhor limitante (heap), voltando à profundidade quando a
quantidade de nós abertos passa de `SolveOptions.open_node_limit`. Na raiz,
um arredondamento das colunas inteiras seguido do LP contínuo tenta um
incumbente inicial. Cada nó filho parte da base ótima do pai (simplex dual).
Ramificação na variável mais fracionária, empate pelo menor índice de
coluna; a busca é determinística para entradas e opções idênticas.
"""
import heapq
import itertools
import logging
import math
import time
from dataclasses import dataclass

import numpy as np

from microgrid.core.exceptions import NumericalException
from microgrid.models.milp import MilpInstance
from microgrid.schemas.solution import MilpSolution, SolveOptions, SolveStatus
from microgrid.solvers import simplex

logger = logging.getLogger(__name__)

INTEGER_TOL = 1e-6
OPTIMAL_GAP = 1e-9
LOG_EVERY = 1_000


@dataclass
class _Node:
    bound: float
    lb: np.ndarray
    ub: np.ndarray
    x: np.ndarray
    basis: simplex.Basis | None = None
    depth: int = 0
    seq: int = 0


def _most_fractional(x: np.ndarray, integral: np.ndarray) -> int | None:
    frac = np.abs(x - np.round(x))
    frac[~integral] = 0.0
    column = int(np.argmax(frac))
    return column if frac[column] > INTEGER_TOL else None


class BranchAndBound:
    def __init__(self, instance: MilpInstance, opts: SolveOptions) -> None:
        self.instance = instance
        self.opts = opts
        self.c, self.lb, self.ub, self.rhs = instance.arrays()
        self.integral = instance.integral()
        self.offset = instance.obj_offset

        infinite = self.integral & ~(np.isfinite(self.lb) & np.isfinite(self.ub))
        if infinite.any():
            column = int(np.flatnonzero(infinite)[0])
            raise NumericalException(
                message=f"integer column {instance.col_names[column]} has an "
                        f"infinite bound")

        self.lp = simplex.LinearProgram(
            self.c, instance.matrix(), [sense.value for sense in instance.senses],
            self.rhs, tol=opts.pivot_tol)
        self.counter = itertools.count()
        self.depth_first = True
        self.crowded = False
        self.open: list = []
        self.nodes = 0
        self.started = time.monotonic()
        self.incumbent: np.ndarray | None = None
        self.incumbent_value = math.inf
        self.pruned_bound = math.inf

    def _relax(self, lb: np.ndarray, ub: np.ndarray,
               basis: simplex.Basis | None = None) -> simplex.LPResult:
        self.nodes += 1
        result = self.lp.solve(lb, ub, basis=basis)
        if result.status in (simplex.ITERATION_LIMIT, simplex.NUMERICAL):
            raise NumericalException(
                message=f"simplex {result.status} at node {self.nodes} "
                        f"({self.instance.n_rows} rows, "
                        f"{self.instance.n_cols} columns)")
        return result

    def _key(self, node: _Node):
        if self.depth_first:
            return (-node.depth, node.bound, node.seq)
        return (node.bound, node.seq)

    def _reorder(self) -> None:
        self.open = [(self._key(n), n.seq, n) for _, _, n in self.open]
        heapq.heapify(self.open)

    def _push(self, node: _Node) -> None:
        node.seq = next(self.counter)
        heapq.heappush(self.open, (self._key(node), node.seq, node))
        if not self.crowded and len(self.open) > self.opts.open_node_limit:
            logger.info("%d open nodes, switching to depth-first selection",
                        len(self.open))
            self.crowded = True
            if not self.depth_first:
                self.depth_first = True
                self._reorder()

    def _exhausted(self) -> str | None:
        if (self.opts.node_limit is not None
                and self.nodes >= self.opts.node_limit):
            return "node limit"
        if (self.opts.time_limit is not None
                and time.monotonic() - self.started > self.opts.time_limit):
            return "time limit"
        return None

    def _tolerance(self) -> float:
        return self.opts.gap * max(1.0, abs(self.incumbent_value))

    def _prunable(self, bound: float) -> bool:
        if self.incumbent is None:
            return False
        return bound >= self.incumbent_value - max(self._tolerance(), 1e-12)

    def _accept(self, x: np.ndarray, depth: int, source: str) -> None:
        x = x.copy()
        x[self.integral] = np.round(x[self.integral])
        value = float(self.c @ x) + self.offset
        if value < self.incumbent_value - 1e-12:
            first = self.incumbent is None
            self.incumbent, self.incumbent_value = x, value
            logger.info("incumbent %.10g from %s at node %d (depth %d)", value,
                        source, self.nodes, depth)
            if first and not self.crowded:
                self.depth_first = False
                self._reorder()

    def _round(self, root: simplex.LPResult) -> None:
        """
        Fixa as colunas inteiras da raiz arredondadas (ao mais próximo e
        para cima) e resolve o LP contínuo restante.
        """
        mask = self.integral
        for mode in (np.round, np.ceil):
            if self._exhausted():
                return
            fixed = np.clip(mode(root.x[mask] - (INTEGER_TOL if mode is np.ceil
                                                 else 0.0)),
                            self.lb[mask], self.ub[mask])
            lb, ub = self.lb.copy(), self.ub.copy()
            lb[mask] = ub[mask] = fixed
            result = self._relax(lb, ub, root.basis)
            if result.status == simplex.OPTIMAL:
                self._accept(result.x, 0, f"rounding ({mode.__name__})")

    def _best_bound(self) -> float:
        bounds = [self.incumbent_value, self.pruned_bound]
        bounds += [node.bound for _, _, node in self.open]
        return min(bounds)

    def _solution(self, status: SolveStatus, root_bound: float | None,
                  message: str = "") -> MilpSolution:
        values = None if self.incumbent is None else self.incumbent.tolist()
        objective = None if self.incumbent is None else self.incumbent_value
        best = self._best_bound() if self.incumbent is not None else (
            min([n.bound for _, _, n in self.open], default=root_bound))
        return MilpSolution(
            status=status, values=values, objective=objective,
            best_bound=best, root_bound=root_bound, nodes=self.nodes,
            backend="embedded", message=message)

    def run(self) -> MilpSolution:
        self.started = time.monotonic()
        root = self._relax(self.lb.copy(), self.ub.copy())
        if root.status == simplex.INFEASIBLE:
            return self._solution(SolveStatus.INFEASIBLE, None,
                                  "LP relaxation is infeasible")
        if root.status == simplex.UNBOUNDED:
            return self._solution(SolveStatus.UNBOUNDED, None,
                                  "LP relaxation is unbounded")
        root_bound = root.objective + self.offset
        logger.debug("root relaxation %.10g", root_bound)
        if _most_fractional(root.x, self.integral) is not None:
            self._round(root)
        self._push(_Node(bound=root_bound, lb=self.lb.copy(), ub=self.ub.copy(),
                         x=root.x, basis=root.basis))

        while self.open:
            reason = self._exhausted()
            if reason:
                return self._limit(root_bound, reason)

            _, _, node = heapq.heappop(self.open)
            if self._prunable(node.bound):
                self.pruned_bound = min(self.pruned_bound, node.bound)
                continue

            column = _most_fractional(node.x, self.integral)
            if column is None:
                self._accept(node.x, node.depth, "branching")
                continue

            value = node.x[column]
            for lb_value, ub_value in ((node.lb[column], math.floor(value)),
                                       (math.ceil(value), node.ub[column])):
                lb, ub = node.lb.copy(), node.ub.copy()
                lb[column], ub[column] = lb_value, ub_value
                child = self._relax(lb, ub, node.basis)
                if child.status != simplex.OPTIMAL:
                    continue
                bound = child.objective + self.offset
                if self._prunable(bound):
                    self.pruned_bound = min(self.pruned_bound, bound)
                    continue
                self._push(_Node(bound=bound, lb=lb, ub=ub, x=child.x,
                                 basis=child.basis, depth=node.depth + 1))

            if self.nodes % LOG_EVERY < 2:
                logger.info("nodes %d open %d incumbent %.10g bound %.10g",
                            self.nodes, len(self.open), self.incumbent_value,
                            self._best_bound())

        if self.incumbent is None:
            return self._solution(SolveStatus.INFEASIBLE, root_bound,
                                  "no integer-feasible assignment")
        best = self._best_bound()
        gap = (self.incumbent_value - best) / max(1.0, abs(self.incumbent_value))
        status = SolveStatus.OPTIMAL if gap <= OPTIMAL_GAP else SolveStatus.GAP_LIMIT
        return self._solution(status, root_bound)

    def _limit(self, root_bound: float, reason: str) -> MilpSolution:
        logger.warning("%s reached after %d nodes", reason, self.nodes)
        return self._solution(SolveStatus.LIMIT_HIT, root_bound, reason)


def solve_embedded(instance: MilpInstance, opts: SolveOptions) -> MilpSolution:
    """
    Resolve a instância com o branch-and-bound embutido.

    Raises:
        NumericalException: Se uma coluna inteira tiver limite infinito ou o
        simplex não convergir.
    """
    return BranchAndBound(instance, opts).run()
