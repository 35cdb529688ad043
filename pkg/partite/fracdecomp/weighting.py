"""
Clique weightings, their edge and vertex effects, and correction fields.

A weighting assigns a scalar to every transversal r-clique of a
:class:`~partite.fracdecomp.cliques.CliqueIndex`. The effect of a
weighting on an edge is the total weight of the cliques containing it.
"""

import logging
from fractions import Fraction
from math import comb, lcm
from pathlib import Path
from typing import Dict, Iterator, List, Optional, Tuple, Union

import numpy as np

from .backend import EXACT_BACKEND, NumericBackend, Scalar
from .cliques import CliqueIndex, EdgeLike
from .errors import (
    DivisibilityError,
    DomainError,
    GraphFormatError,
    IndexMismatchError,
    NoCliquesError,
    WeightingFormatError,
)
from .graph import PartiteGraph, VertexId, VertexLike, summarize

LOGGER = logging.getLogger(__name__)

__all__ = [
    "CliqueWeighting",
    "CorrectionField",
    "Rational",
    "SparseWeighting",
    "WeightAccumulator",
    "corrections",
    "dump_weighting",
    "edge_effect",
    "is_zero_sum",
    "load_weighting",
    "read_weighting",
    "uniform_init",
    "write_weighting",
]

Rational = Fraction


def _same_index(a: CliqueIndex, b: CliqueIndex) -> None:
    if a is not b and a.graph != b.graph:
        raise IndexMismatchError("Weightings are indexed by different clique indices")


def _sum_into(
        size: int,
        targets: np.ndarray,
        values: np.ndarray,
        backend: NumericBackend,
) -> np.ndarray:
    """Scatter-add ``values`` into a zero vector at ``targets``."""
    if backend.exact:
        out = backend.zeros(size)
        np.add.at(out, targets, values)
        return out
    return np.bincount(targets, weights=values, minlength=size).astype(np.float64)


class CliqueWeighting:
    """A dense vector of clique weights over a fixed clique index."""

    def __init__(
            self,
            index: CliqueIndex,
            values: np.ndarray,
            backend: NumericBackend = EXACT_BACKEND,
    ) -> None:
        values = np.asarray(values, dtype=backend.dtype)
        if values.shape != (index.k_total,):
            raise IndexMismatchError(
                f"Weighting has {values.shape[0] if values.ndim else 0} entries, "
                f"index has {index.k_total} cliques",
            )
        self._index = index
        self._values = values
        self._backend = backend

    @classmethod
    def zeros(
            cls,
            index: CliqueIndex,
            backend: NumericBackend = EXACT_BACKEND,
    ) -> "CliqueWeighting":
        """The zero weighting."""
        return cls(index, backend.zeros(index.k_total), backend)

    @property
    def index(self) -> CliqueIndex:
        """The clique index the weights refer to."""
        return self._index

    @property
    def backend(self) -> NumericBackend:
        """The numeric backend of the weights."""
        return self._backend

    @property
    def values(self) -> np.ndarray:
        """A copy of the weight vector."""
        return self._values.copy()

    def __len__(self) -> int:
        return len(self._values)

    def __getitem__(self, cid: int) -> Scalar:
        return self._values[cid]  # type: ignore[no-any-return]

    def _sum(self, ids: np.ndarray) -> Scalar:
        if not len(ids):
            return self._backend.zero()
        return self._backend.scalar(self._values[ids].sum())

    def edge_effect(self, e: EdgeLike) -> Scalar:
        """
        Total weight of the cliques containing an edge.

        :raises DomainError: The edge is not in the host graph.
        """
        return self._sum(self._index.cliques_on_edge(e))

    def edge_effects(self) -> np.ndarray:
        """Edge effects of every edge, in edge id order."""
        m = self._index.clique_edges.shape[1]
        return _sum_into(
            self._index.edge_count,
            self._index.clique_edges.ravel(),
            np.repeat(self._values, m),
            self._backend,
        )

    def vertex_effect(self, v: VertexLike) -> Scalar:
        """Total weight of the cliques containing a vertex."""
        return self._sum(self._index.cliques_at(v))

    def total(self) -> Scalar:
        """Sum of all weights."""
        return self._sum(np.arange(len(self._values)))

    def is_zero_sum(self) -> bool:
        """Whether the weights sum to zero."""
        return self._backend.is_zero(self.total())

    def min_weight(self) -> Optional[Scalar]:
        """The smallest weight, or None for an empty index."""
        if not len(self._values):
            return None
        return min(self._values.tolist())  # type: ignore[no-any-return]

    def negative_count(self) -> int:
        """Number of negative weights."""
        return int(np.count_nonzero(self._values < 0))

    def nonzero(self) -> Iterator[Tuple[int, Scalar]]:
        """Yield ``(clique id, weight)`` for the nonzero weights, by id."""
        for cid in np.flatnonzero(self._values != 0):
            yield int(cid), self._values[cid]

    def plus(
            self,
            delta: "WeightAccumulator",
            factor: Union[Fraction, int] = 1,
    ) -> "CliqueWeighting":
        """A new weighting with ``factor`` times an accumulated delta added."""
        _same_index(self._index, delta.index)
        return CliqueWeighting(
            self._index,
            self._values + delta.dense() * self._backend.scalar(factor),
            self._backend,
        )

    def __add__(self, other: "CliqueWeighting") -> "CliqueWeighting":
        _same_index(self._index, other._index)
        return CliqueWeighting(self._index, self._values + other._values, self._backend)

    def __sub__(self, other: "CliqueWeighting") -> "CliqueWeighting":
        _same_index(self._index, other._index)
        return CliqueWeighting(self._index, self._values - other._values, self._backend)

    def __mul__(self, factor: Union[Fraction, int, float]) -> "CliqueWeighting":
        return CliqueWeighting(
            self._index,
            self._values * self._backend.scalar(factor),
            self._backend,
        )

    __rmul__ = __mul__

    def __neg__(self) -> "CliqueWeighting":
        return self * -1

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CliqueWeighting):
            return NotImplemented
        return (
            self._index.graph == other._index.graph
            and bool(np.all(self._values == other._values))
        )

    def __repr__(self) -> str:
        return f"CliqueWeighting(k={len(self._values)}, backend={self._backend.name})"


class WeightAccumulator:
    """
    A running sum of clique-weight deltas.

    The exact backend keeps integer numerators over one common
    denominator, so adding a gadget costs integer arithmetic only;
    :meth:`dense` converts to :class:`fractions.Fraction` values once.
    """

    def __init__(
            self,
            index: CliqueIndex,
            backend: NumericBackend = EXACT_BACKEND,
    ) -> None:
        self._index = index
        self._backend = backend
        self._denominator = 1
        if backend.exact:
            self._numerators = np.zeros(index.k_total, dtype=object)
        else:
            self._numerators = np.zeros(index.k_total, dtype=np.float64)

    @property
    def index(self) -> CliqueIndex:
        """The clique index the deltas refer to."""
        return self._index

    @property
    def backend(self) -> NumericBackend:
        """The numeric backend."""
        return self._backend

    @property
    def denominator(self) -> int:
        """The common denominator of the exact numerators."""
        return self._denominator

    def _common(self, denominator: int) -> None:
        target = lcm(self._denominator, denominator)
        if target != self._denominator:
            self._numerators *= target // self._denominator
            self._denominator = target

    def add_terms(self, cids: np.ndarray, numerators: np.ndarray, scale: Scalar) -> None:
        """
        Add ``scale * numerators[i]`` to clique ``cids[i]``.

        :param cids: Distinct clique ids.
        :param numerators: Integer multipliers.
        :param scale: Common scalar factor.
        """
        if not len(cids):
            return
        if self._backend.exact:
            frac = Fraction(scale)
            if frac == 0:
                return
            self._common(frac.denominator)
            factor = frac.numerator * (self._denominator // frac.denominator)
            self._numerators[cids] += numerators.astype(object) * factor
        else:
            self._numerators[cids] += numerators.astype(np.float64) * float(scale)

    def add(
            self,
            other: "WeightAccumulator",
            factor: Union[Fraction, int] = 1,
            *,
            id_map: Optional[np.ndarray] = None,
    ) -> None:
        """
        Add ``factor`` times another accumulator.

        :param id_map: For an accumulator over a sub-index, the id in this
            index of each of its cliques.
        """
        if id_map is None:
            _same_index(self._index, other._index)
        numerators, denominator = other.parts()
        self.add_parts(numerators, denominator, factor, id_map=id_map)

    def parts(self) -> Tuple[np.ndarray, int]:
        """The numerator vector and the common denominator."""
        return self._numerators, self._denominator

    def add_parts(
            self,
            numerators: np.ndarray,
            denominator: int,
            factor: Union[Fraction, int] = 1,
            *,
            id_map: Optional[np.ndarray] = None,
    ) -> None:
        """
        Add ``factor * numerators / denominator``, as returned by :meth:`parts`.

        :param id_map: Target clique id of each entry; all cliques if None.
        """
        targets: Union[slice, np.ndarray] = slice(None) if id_map is None else id_map
        if self._backend.exact:
            frac = Fraction(factor)
            if frac == 0:
                return
            scaled = denominator * frac.denominator
            self._common(scaled)
            multiplier = frac.numerator * (self._denominator // scaled)
            self._numerators[targets] += numerators * multiplier
        else:
            self._numerators[targets] += numerators * float(factor)

    def dense(self) -> np.ndarray:
        """The accumulated values as a backend vector."""
        if self._backend.exact:
            d = self._denominator
            return np.array([Fraction(int(x), d) for x in self._numerators], dtype=object)
        return self._numerators.copy()

    def to_weighting(self) -> CliqueWeighting:
        """The accumulated values as a :class:`CliqueWeighting`."""
        return CliqueWeighting(self._index, self.dense(), self._backend)

    def _effects(self, size: int, targets: np.ndarray, width: int) -> np.ndarray:
        if self._backend.exact:
            sums = np.zeros(size, dtype=object)
            np.add.at(sums, targets, np.repeat(self._numerators, width))
            d = self._denominator
            return np.array([Fraction(int(x), d) for x in sums], dtype=object)
        return np.bincount(
            targets,
            weights=np.repeat(self._numerators, width),
            minlength=size,
        ).astype(np.float64)

    def edge_effects(self) -> np.ndarray:
        """Edge effects of the accumulated delta, in edge id order."""
        edges = self._index.clique_edges
        return self._effects(self._index.edge_count, edges.ravel(), edges.shape[1])

    def vertex_effects(self) -> np.ndarray:
        """Vertex effects of the accumulated delta, by global index."""
        cliques = self._index.cliques
        return self._effects(self._index.graph.order, cliques.ravel(), cliques.shape[1])

    def total(self) -> Scalar:
        """Sum of the accumulated values."""
        if self._backend.exact:
            return Fraction(int(sum(self._numerators.tolist())), self._denominator)
        return float(self._numerators.sum())

    def is_zero(self) -> bool:
        """Whether nothing nonzero has been accumulated."""
        return not np.any(self._numerators != 0)

    def support(self) -> np.ndarray:
        """Ids of the cliques with a nonzero value."""
        return np.flatnonzero(self._numerators != 0)

    def magnitudes(self) -> np.ndarray:
        """Absolute values as float64, for diagnostics."""
        if self._backend.exact:
            d = self._denominator
            return np.array(
                [abs(float(Fraction(int(x), d))) for x in self._numerators],
                dtype=np.float64,
            )
        return np.abs(self._numerators)


class SparseWeighting:
    """A clique weighting given by its nonzero entries."""

    def __init__(
            self,
            index: CliqueIndex,
            entries: Dict[int, Scalar],
            backend: NumericBackend = EXACT_BACKEND,
    ) -> None:
        self._index = index
        self._entries = {int(cid): value for cid, value in entries.items() if value != 0}
        self._backend = backend

    @property
    def index(self) -> CliqueIndex:
        """The clique index the entries refer to."""
        return self._index

    @property
    def backend(self) -> NumericBackend:
        """The numeric backend."""
        return self._backend

    @property
    def entries(self) -> Dict[int, Scalar]:
        """A copy of the nonzero entries."""
        return dict(self._entries)

    def __getitem__(self, cid: int) -> Scalar:
        return self._entries.get(cid, self._backend.zero())

    def __len__(self) -> int:
        return len(self._entries)

    def total(self) -> Scalar:
        """Sum of the entries."""
        return sum(self._entries.values(), self._backend.zero())

    def is_zero_sum(self) -> bool:
        """Whether the entries sum to zero."""
        return self._backend.is_zero(self.total())

    def edge_effects(self) -> Dict[int, Scalar]:
        """Edge id to effect, for the edges of supported cliques."""
        effects: Dict[int, Scalar] = {}
        for cid, value in self._entries.items():
            for eid in self._index.clique_edges[cid].tolist():
                effects[eid] = effects.get(eid, self._backend.zero()) + value
        return effects

    def edge_effect(self, e: EdgeLike) -> Scalar:
        """Total weight of the cliques containing an edge."""
        eid = self._index.edge_id(e)
        return self.edge_effects().get(eid, self._backend.zero())

    def to_dense(self) -> CliqueWeighting:
        """Expand into a :class:`CliqueWeighting`."""
        values = self._backend.zeros(self._index.k_total)
        for cid, value in self._entries.items():
            values[cid] = value
        return CliqueWeighting(self._index, values, self._backend)

    def __repr__(self) -> str:
        return (
            f"SparseWeighting(nonzero={len(self._entries)}, "
            f"backend={self._backend.name})"
        )


class CorrectionField:
    """
    Target adjustments z_e for every edge, with the vertex sums z_v.

    For a well-formed field, the entries from v into any foreign class
    sum to z_v, and on a K_r-divisible host every class has Σ z_v = 0.
    """

    def __init__(
            self,
            index: CliqueIndex,
            edge_values: np.ndarray,
            vertex_values: np.ndarray,
            backend: NumericBackend = EXACT_BACKEND,
    ) -> None:
        edge_values = np.asarray(edge_values, dtype=backend.dtype)
        vertex_values = np.asarray(vertex_values, dtype=backend.dtype)
        if edge_values.shape != (index.edge_count,):
            raise IndexMismatchError(f"Field needs {index.edge_count} edge values")
        if vertex_values.shape != (index.graph.order,):
            raise IndexMismatchError(f"Field needs {index.graph.order} vertex values")
        self._index = index
        self._edge_values = edge_values
        self._vertex_values = vertex_values
        self._backend = backend

    @classmethod
    def from_edge_values(
            cls,
            index: CliqueIndex,
            edge_values: np.ndarray,
            backend: NumericBackend = EXACT_BACKEND,
    ) -> "CorrectionField":
        """Build a field whose z_v are the sums into the first foreign class."""
        edge_values = np.asarray(edge_values, dtype=backend.dtype)
        sums = _class_sums(index, edge_values, backend)
        g = index.graph
        first = [1 if v // g.n == 0 else 0 for v in range(g.order)]
        vertex_values = np.array(
            [sums[v, first[v]] for v in range(g.order)],
            dtype=backend.dtype,
        )
        return cls(index, edge_values, vertex_values, backend)

    @classmethod
    def zeros(
            cls,
            index: CliqueIndex,
            backend: NumericBackend = EXACT_BACKEND,
    ) -> "CorrectionField":
        """The zero field."""
        return cls(
            index,
            backend.zeros(index.edge_count),
            backend.zeros(index.graph.order),
            backend,
        )

    @property
    def index(self) -> CliqueIndex:
        """The clique index whose edges are corrected."""
        return self._index

    @property
    def graph(self) -> PartiteGraph:
        """The host graph."""
        return self._index.graph

    @property
    def backend(self) -> NumericBackend:
        """The numeric backend."""
        return self._backend

    @property
    def edge_values(self) -> np.ndarray:
        """A copy of z_e in edge id order."""
        return self._edge_values.copy()

    @property
    def vertex_values(self) -> np.ndarray:
        """A copy of z_v by global index."""
        return self._vertex_values.copy()

    @property
    def per_edge(self) -> Dict[Tuple[int, int], Scalar]:
        """z_e keyed by ``(u, v)`` with u in the lower class."""
        return dict(zip(self._index.edges, self._edge_values.tolist()))

    @property
    def per_vertex(self) -> Dict[int, Scalar]:
        """z_v keyed by global index."""
        return dict(enumerate(self._vertex_values.tolist()))

    def value(self, u: VertexLike, v: VertexLike) -> Scalar:
        """z_uv."""
        eid = self._index.edge_id((u, v))
        return self._edge_values[eid]  # type: ignore[no-any-return]

    def around(self, v: VertexLike) -> Dict[int, Scalar]:
        """The entries z_vu keyed by the neighbour u."""
        g = self.graph.index(v)
        result = {}
        for eid in self._index.edges_at(g).tolist():
            a, b = self._index.edges[eid]
            result[b if a == g else a] = self._edge_values[eid]
        return result

    def is_zero(self) -> bool:
        """Whether every z_e and z_v is zero."""
        return bool(
            np.all(self._backend.zero_mask(self._edge_values))
            and np.all(self._backend.zero_mask(self._vertex_values)),
        )

    def max_abs(self) -> Scalar:
        """max |z_e|, zero for an edgeless graph."""
        if not len(self._edge_values):
            return self._backend.zero()
        largest = max(abs(x) for x in self._edge_values.tolist())
        return largest  # type: ignore[no-any-return]

    def scaled(self, factor: Union[Fraction, int, float]) -> "CorrectionField":
        """Every entry multiplied by ``factor``."""
        f = self._backend.scalar(factor)
        return CorrectionField(
            self._index,
            self._edge_values * f,
            self._vertex_values * f,
            self._backend,
        )

    def minus_effects(
            self,
            edge_effects: np.ndarray,
            vertex_effects: np.ndarray,
            factor: Union[Fraction, int] = 1,
    ) -> "CorrectionField":
        """The field left after a delta with these effects realises ``factor`` of them."""
        f = self._backend.scalar(factor)
        return CorrectionField(
            self._index,
            self._edge_values - edge_effects * f,
            self._vertex_values - vertex_effects * f,
            self._backend,
        )

    def restricted(
            self,
            sub_index: CliqueIndex,
            new_to_old: List[int],
    ) -> "CorrectionField":
        """
        The field on an induced subgraph.

        :param sub_index: Clique index of the induced subgraph.
        :param new_to_old: Host index of each subgraph vertex.
        """
        mapping = np.asarray(new_to_old, dtype=np.int64)
        ends = sub_index.endpoints
        host_ids = self._index.edge_ids(mapping[ends[:, 0]], mapping[ends[:, 1]])
        return CorrectionField.from_edge_values(
            sub_index,
            self._edge_values[host_ids],
            self._backend,
        )

    def violations(self, *, class_sums: bool = True) -> List[str]:
        """
        Describe every broken field invariant.

        :param class_sums: Also require Σ_{v ∈ V_i} z_v = 0 for every class.
        """
        g = self.graph
        sums = _class_sums(self._index, self._edge_values, self._backend)
        problems = []
        for v in range(g.order):
            own = v // g.n
            for i in range(g.r):
                if i == own:
                    continue
                if not self._backend.equal(sums[v, i], self._vertex_values[v]):
                    problems.append(
                        f"{g.vertex(v)}: sum into class {i} is {sums[v, i]}, "
                        f"z_v is {self._vertex_values[v]}",
                    )
        if class_sums:
            for i in range(g.r):
                total = self._vertex_values[i * g.n:(i + 1) * g.n].sum()
                if not self._backend.is_zero(total):
                    problems.append(f"class {i}: Σ z_v is {total}")
        return problems

    def check(self, *, class_sums: bool = True) -> None:
        """
        Raise if an invariant is broken.

        :raises DomainError: Describing the first violation.
        """
        problems = self.violations(class_sums=class_sums)
        if problems:
            raise DomainError(
                f"Correction field is not admissible "
                f"({len(problems)} violations): {problems[0]}",
            )

    def __repr__(self) -> str:
        return (
            f"CorrectionField(edges={len(self._edge_values)}, "
            f"backend={self._backend.name})"
        )


def _class_sums(
        index: CliqueIndex,
        edge_values: np.ndarray,
        backend: NumericBackend,
) -> np.ndarray:
    """``(order, r)`` matrix of Σ z_vu over u ∈ N(v) ∩ V_i."""
    g = index.graph
    ends = index.endpoints
    flat_u = ends[:, 0] * g.r + ends[:, 1] // g.n
    flat_v = ends[:, 1] * g.r + ends[:, 0] // g.n
    targets = np.concatenate([flat_u, flat_v])
    values = np.concatenate([edge_values, edge_values])
    return _sum_into(g.order * g.r, targets, values, backend).reshape(g.order, g.r)


def uniform_init(
        g: PartiteGraph,
        idx: CliqueIndex,
        backend: NumericBackend = EXACT_BACKEND,
) -> CliqueWeighting:
    """
    Weight every clique by e(G) / (C(r,2) k).

    :raises NoCliquesError: The graph has edges but no cliques.
    """
    e, k = g.edge_count(), idx.k_total
    if k == 0:
        if e:
            raise NoCliquesError(f"{g!r} has {e} edges but no transversal {g.r}-cliques")
        return CliqueWeighting.zeros(idx, backend)
    value = backend.scalar(Fraction(e, comb(g.r, 2) * k))
    return CliqueWeighting(idx, np.full(k, value, dtype=backend.dtype), backend)


def edge_effect(w: CliqueWeighting, e: EdgeLike) -> Scalar:
    """
    Σ_{K ∋ e} w[K].

    :raises DomainError: The edge is not in the host graph.
    """
    return w.edge_effect(e)


def is_zero_sum(w: Union[CliqueWeighting, SparseWeighting, WeightAccumulator]) -> bool:
    """Whether the weights sum to zero."""
    return w.backend.is_zero(w.total())


def corrections(
        g: PartiteGraph,
        idx: CliqueIndex,
        backend: NumericBackend = EXACT_BACKEND,
) -> CorrectionField:
    """
    The corrections that turn :func:`uniform_init` into a decomposition.

    z_e = z_e(cliques) · e(G)/(C(r,2) k) − 1 and
    z_v = (cliques through v) · e(G)/(C(r,2) k) − d(v, V_i) for any foreign i.

    :raises DivisibilityError: The host is not K_r-divisible.
    :raises NoCliquesError: The graph has edges but no cliques.
    """
    if not summarize(g).divisible:
        raise DivisibilityError(f"{g!r} is not K_{g.r}-divisible")
    e, k = g.edge_count(), idx.k_total
    if k == 0:
        if e:
            raise NoCliquesError(f"{g!r} has {e} edges but no transversal {g.r}-cliques")
        return CorrectionField.zeros(idx, backend)

    scale = Fraction(e, comb(g.r, 2) * k)
    edge_values = backend.array(
        z * scale - 1 for z in idx.edge_clique_counts().tolist()
    )
    vertex_values = backend.array(
        count * scale - g.degree_into(v, 1 if v // g.n == 0 else 0)
        for v, count in enumerate(idx.vertex_clique_counts().tolist())
    )
    return CorrectionField(idx, edge_values, vertex_values, backend)


def dump_weighting(w: CliqueWeighting) -> str:
    """
    Serialise the nonzero entries, one clique per line.

    Each line lists the clique's vertices as ``class:offset`` followed by
    the weight as ``num/den``. Float weights are written as the exact
    ratio of their binary value.
    """
    lines = []
    for cid, value in w.nonzero():
        frac = Fraction(EXACT_BACKEND.scalar(value))
        vertices = " ".join(str(v) for v in w.index.clique_vertices(cid))
        lines.append(f"{vertices} {frac.numerator}/{frac.denominator}")
    return "".join(f"{line}\n" for line in lines)


def load_weighting(
        text: str,
        index: CliqueIndex,
        backend: NumericBackend = EXACT_BACKEND,
) -> CliqueWeighting:
    """
    Parse a weighting file against a clique index.

    :raises WeightingFormatError: A line is malformed, names a vertex set
        that is not a clique of the index, or repeats a clique.
    """
    g = index.graph
    values = backend.zeros(index.k_total)
    seen = set()
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if len(fields) != g.r + 1:
            raise WeightingFormatError(
                f"line {number}: expected {g.r} vertices and a weight",
            )
        try:
            vertices = sorted(VertexId.parse(f) for f in fields[:-1])
            value = Fraction(fields[-1])
        except (GraphFormatError, ValueError, ZeroDivisionError):
            raise WeightingFormatError(
                f"line {number}: malformed entry {line!r}",
            ) from None
        if [v.class_index for v in vertices] != list(range(g.r)):
            raise WeightingFormatError(f"line {number}: not one vertex per class")
        try:
            row = np.array([g.index(v) for v in vertices], dtype=np.int64)
            cid = int(index.lookup(row)[0])
        except (DomainError, IndexMismatchError):
            raise WeightingFormatError(
                f"line {number}: {line!r} is not a clique of the graph",
            ) from None
        if cid in seen:
            raise WeightingFormatError(f"line {number}: clique listed twice")
        seen.add(cid)
        values[cid] = backend.scalar(value)
    return CliqueWeighting(index, values, backend)


def read_weighting(
        path: Union[str, Path],
        index: CliqueIndex,
        backend: NumericBackend = EXACT_BACKEND,
) -> CliqueWeighting:
    """
    Read a weighting file.

    :raises WeightingFormatError: The file is not UTF-8 text or not a
        weighting of the indexed graph.
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except UnicodeDecodeError as e:
        raise WeightingFormatError(f"{path} is not UTF-8 text: {e}") from None
    return load_weighting(text, index, backend)


def write_weighting(w: CliqueWeighting, path: Union[str, Path]) -> None:
    """Write a weighting file."""
    Path(path).write_text(dump_weighting(w), encoding="utf-8")
