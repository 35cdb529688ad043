"""
Ground truth for small instances.

:func:`lp_feasible` decides whether a fractional K_r-decomposition exists
by running Phase I of the simplex method over exact rationals, and
:func:`verify` checks any weighting against the edge constraints.
"""

import logging
from enum import Enum
from fractions import Fraction
from typing import List, NamedTuple, Optional

import numpy as np

from .backend import EXACT_BACKEND, Scalar
from .cliques import CliqueIndex
from .errors import IndexMismatchError, SizeLimitError
from .graph import PartiteGraph
from .weighting import CliqueWeighting

LOGGER = logging.getLogger(__name__)

__all__ = [
    "LpOutcome",
    "LpStatus",
    "SimplexTableau",
    "VerificationRecord",
    "lp_feasible",
    "verify",
]

MAX_CLIQUES = 2000
MAX_EDGES = 500


class LpStatus(Enum):
    """Outcome of a feasibility solve."""

    FEASIBLE = "feasible"
    INFEASIBLE = "infeasible"


class SimplexTableau:
    """
    A dense tableau over :class:`fractions.Fraction` for Phase I.

    Columns of ``A`` belong to the nonbasic variables and rows to the
    basic ones. ``c`` holds the rate at which raising each nonbasic
    variable lowers the sum of the artificial variables.
    """

    def __init__(self, matrix: np.ndarray, rhs: List[Fraction]) -> None:
        """
        Set up {matrix · x = rhs, x >= 0} with one artificial per row.

        :param matrix: ``(m, n)`` object array of Fractions.
        :param rhs: Nonnegative right-hand sides.
        """
        self.m, self.n = matrix.shape
        self.A = matrix.copy()
        self.b = np.array(rhs, dtype=object)
        self.nb_vars = list(range(self.n))
        self.b_vars = list(range(self.n, self.n + self.m))
        self.pivots = 0
        self.first_phase_cost()

    def first_phase_cost(self) -> None:
        """Reduced costs of the Phase I objective with every artificial basic."""
        self.c = self.A.sum(axis=0) if self.m else np.zeros(self.n, dtype=object)

    def is_artificial(self, var: int) -> bool:
        """Whether a variable label is one of the artificials."""
        return var >= self.n

    def pivot(self, i: int, j: int) -> None:
        """Exchange basic variable ``i`` with nonbasic variable ``j``."""
        piv = self.A[i, j]
        delta = self.c[j] / piv
        row = self.A[i] / piv
        row[j] = 1 / piv
        column = self.A[:, j].copy()

        self.c = self.c - delta * self.A[i]
        self.c[j] = -delta

        rhs = self.b[i] / piv
        self.A = self.A - np.outer(column, row)
        self.b = self.b - column * rhs
        self.A[:, j] = -column / piv
        self.A[i] = row
        self.b[i] = rhs

        self.nb_vars[j], self.b_vars[i] = self.b_vars[i], self.nb_vars[j]
        self.pivots += 1

    def bland_primal_step(self) -> str:
        """
        One pivot by Bland's rule.

        :returns: ``optimal`` or ``go_on``. Phase I is bounded below by
            zero, so it is never unbounded.
        """
        entering = [
            (self.nb_vars[j], j)
            for j in range(self.n)
            if self.c[j] > 0 and not self.is_artificial(self.nb_vars[j])
        ]
        if not entering:
            return "optimal"
        _, j = min(entering)
        _, _, i = min(
            (self.b[i] / self.A[i, j], self.b_vars[i], i)
            for i in range(self.m)
            if self.A[i, j] > 0
        )
        self.pivot(i, j)
        return "go_on"

    def bland_primal(self) -> None:
        """Pivot until no improving column is left."""
        while self.bland_primal_step() != "optimal":
            pass

    def objective(self) -> Fraction:
        """Current sum of the artificial variables."""
        return sum(
            (self.b[i] for i, var in enumerate(self.b_vars) if self.is_artificial(var)),
            Fraction(0),
        )

    def solution(self) -> List[Fraction]:
        """Values of the original variables."""
        values = [Fraction(0)] * self.n
        for i, var in enumerate(self.b_vars):
            if not self.is_artificial(var):
                values[var] = Fraction(self.b[i])
        return values


class LpOutcome(NamedTuple):
    """Result of :func:`lp_feasible`."""

    status: LpStatus
    witness: Optional[CliqueWeighting]
    certificate: Optional[str]
    pivots: int

    @property
    def feasible(self) -> bool:
        """Whether a fractional decomposition exists."""
        return self.status is LpStatus.FEASIBLE

    def to_text(self) -> str:
        """Render as ``key value`` lines."""
        lines = [f"status {self.status.value}", f"pivots {self.pivots}"]
        if self.certificate is not None:
            lines.append(f"certificate {self.certificate}")
        return "\n".join(lines) + "\n"


def _edge_clique_matrix(idx: CliqueIndex) -> np.ndarray:
    matrix = np.full((idx.edge_count, idx.k_total), Fraction(0), dtype=object)
    for cid, edge_ids in enumerate(idx.clique_edges.tolist()):
        for eid in edge_ids:
            matrix[eid, cid] = Fraction(1)
    return matrix


def lp_feasible(
        g: PartiteGraph,
        idx: CliqueIndex,
        *,
        force: bool = False,
        max_cliques: int = MAX_CLIQUES,
        max_edges: int = MAX_EDGES,
) -> LpOutcome:
    """
    Decide whether nonnegative clique weights give every edge total weight 1.

    :param force: Solve even above the size limits.
    :raises SizeLimitError: More than ``max_cliques`` cliques or ``max_edges``
        edges without ``force``.
    """
    k, e = idx.k_total, idx.edge_count
    if e == 0:
        LOGGER.info("No edges, the constraint system is empty")
        return LpOutcome(LpStatus.FEASIBLE, CliqueWeighting.zeros(idx), "no edges", 0)
    if k == 0:
        return LpOutcome(LpStatus.INFEASIBLE, None, f"{e} edges and no cliques", 0)
    if not force and (k > max_cliques or e > max_edges):
        raise SizeLimitError(
            f"Oracle limited to {max_cliques} cliques and {max_edges} edges, "
            f"got {k} and {e}",
        )

    tableau = SimplexTableau(_edge_clique_matrix(idx), [Fraction(1)] * e)
    tableau.bland_primal()
    leftover = tableau.objective()
    LOGGER.debug(
        f"Phase I finished after {tableau.pivots} pivots with objective {leftover}",
    )

    if leftover > 0:
        return LpOutcome(
            LpStatus.INFEASIBLE,
            None,
            f"phase one optimum {leftover}",
            tableau.pivots,
        )

    solution = np.array(tableau.solution(), dtype=object)
    witness = CliqueWeighting(idx, solution, EXACT_BACKEND)
    if not verify(g, idx, witness).verdict:
        raise ArithmeticError("Phase I witness failed verification")
    return LpOutcome(LpStatus.FEASIBLE, witness, None, tableau.pivots)


class VerificationRecord(NamedTuple):
    """How far a weighting is from a fractional decomposition."""

    max_effect: Optional[Scalar]
    min_effect: Optional[Scalar]
    edges_off: int
    min_weight: Optional[Scalar]
    negative_count: int
    verdict: bool

    def to_text(self) -> str:
        """Render as ``key value`` lines."""
        def show(value: Optional[Scalar]) -> str:
            if value is None:
                return "none"
            if isinstance(value, Fraction):
                return EXACT_BACKEND.format(value)
            return repr(float(value))

        return "".join(
            f"{key} {value}\n"
            for key, value in (
                ("max_effect", show(self.max_effect)),
                ("min_effect", show(self.min_effect)),
                ("edges_off", self.edges_off),
                ("min_weight", show(self.min_weight)),
                ("negative_count", self.negative_count),
                ("fractional_decomposition", str(self.verdict).lower()),
            )
        )


def verify(g: PartiteGraph, idx: CliqueIndex, w: CliqueWeighting) -> VerificationRecord:
    """
    Check a weighting against the edge constraints.

    Exact weightings are compared exactly; float weightings within the
    backend's verification tolerance.

    :raises IndexMismatchError: w is not indexed by idx.
    """
    if w.index.graph != g or len(w) != idx.k_total:
        raise IndexMismatchError("The weighting is not indexed by this graph's cliques")
    backend = w.backend
    effects = w.edge_effects().tolist()
    off = sum(
        1 for x in effects
        if not backend.is_zero(x - 1, tolerance=backend.verify_tolerance)
    )
    negatives = w.negative_count()
    return VerificationRecord(
        max_effect=max(effects, default=None),
        min_effect=min(effects, default=None),
        edges_off=off,
        min_weight=w.min_weight(),
        negative_count=negatives,
        verdict=off == 0 and negatives == 0,
    )
