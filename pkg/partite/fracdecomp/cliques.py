"""Transversal r-clique enumeration, incidence lists and clique counts."""

import logging
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from functools import partial
from itertools import combinations
from typing import (
    Dict,
    FrozenSet,
    Iterable,
    List,
    NamedTuple,
    Optional,
    Sequence,
    Tuple,
    Union,
)

import numpy as np

from .errors import DomainError, IndexMismatchError, SizeLimitError
from .graph import PartiteGraph, VertexId, VertexLike, iter_bits, popcount, summarize

LOGGER = logging.getLogger(__name__)

__all__ = [
    "BoundCheck",
    "BoundsReport",
    "CliqueIndex",
    "bounds_report",
    "count_partial",
    "count_transversals",
    "enumerate_cliques",
    "partial_counts",
]

EdgeLike = Union[int, Tuple[VertexLike, VertexLike]]


def _cliques_from(
        rows: Tuple[int, ...],
        n: int,
        r: int,
        first: int,
) -> List[Tuple[int, ...]]:
    """All transversal cliques whose class-0 vertex is ``first``, lexicographically."""
    found: List[Tuple[int, ...]] = []
    prefix = [first]

    def extend(common: int, depth: int) -> None:
        candidates = common & (((1 << n) - 1) << (depth * n))
        if depth == r - 1:
            stem = tuple(prefix)
            found.extend(stem + (x,) for x in iter_bits(candidates))
            return
        for x in iter_bits(candidates):
            prefix.append(x)
            extend(common & rows[x], depth + 1)
            prefix.pop()

    extend(rows[first], 1)
    return found


def _csr(keys: np.ndarray, size: int) -> Tuple[np.ndarray, np.ndarray]:
    """Group the row numbers of ``keys`` by key value, ascending within each key."""
    flat = keys.ravel()
    order = np.argsort(flat, kind="stable")
    pointers = np.zeros(size + 1, dtype=np.int64)
    np.cumsum(np.bincount(flat, minlength=size), out=pointers[1:])
    return pointers, (order // keys.shape[1]).astype(np.int64)


class CliqueIndex:
    """
    The transversal r-cliques of a graph with per-edge and per-vertex incidence.

    Cliques are rows of global vertex indices, one per class in class
    order, sorted lexicographically; a clique's id is its row number.
    Edges are numbered in the order of :meth:`PartiteGraph.edges`.
    The index is never mutated after construction.
    """

    def __init__(self, graph: PartiteGraph, cliques: np.ndarray) -> None:
        self._graph = graph
        r, order = graph.r, graph.order

        cliques = np.asarray(cliques, dtype=np.int64).reshape(-1, r)
        cliques.setflags(write=False)
        self._cliques = cliques

        self._edges = graph.edges()
        endpoints = np.array(self._edges, dtype=np.int64).reshape(-1, 2)
        endpoints.setflags(write=False)
        self._endpoints = endpoints

        lookup = np.full((order, order), -1, dtype=np.int64)
        ids = np.arange(len(self._edges), dtype=np.int64)
        lookup[endpoints[:, 0], endpoints[:, 1]] = ids
        lookup[endpoints[:, 1], endpoints[:, 0]] = ids
        lookup.setflags(write=False)
        self._edge_lookup = lookup

        pairs = list(combinations(range(r), 2))
        clique_edges = np.stack(
            [lookup[cliques[:, a], cliques[:, b]] for a, b in pairs],
            axis=1,
        ).reshape(-1, len(pairs))
        clique_edges.setflags(write=False)
        self._clique_edges = clique_edges

        self._edge_ptr, self._edge_members = _csr(clique_edges, len(self._edges))
        self._vertex_ptr, self._vertex_members = _csr(cliques, order)
        self._incidence_ptr, self._incidence_members = _csr(endpoints, order)
        self._keys: Optional[np.ndarray] = None

    @classmethod
    def build(cls, g: PartiteGraph, *, workers: int = 1) -> "CliqueIndex":
        """
        Enumerate the transversal r-cliques of g.

        :param workers: Processes to split the class-0 vertices over.
        """
        firsts = range(g.n)
        search = partial(_cliques_from, g.rows, g.n, g.r)
        if workers > 1 and g.n > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                chunks = list(pool.map(search, firsts))
        else:
            chunks = [search(first) for first in firsts]

        cliques = [clique for chunk in chunks for clique in chunk]
        LOGGER.debug(f"Enumerated {len(cliques)} cliques in {g!r}")
        return cls(g, np.array(cliques, dtype=np.int64).reshape(-1, g.r))

    @property
    def graph(self) -> PartiteGraph:
        """The host graph."""
        return self._graph

    @property
    def cliques(self) -> np.ndarray:
        """Read-only ``(k, r)`` array of global vertex indices."""
        return self._cliques

    @property
    def k_total(self) -> int:
        """Number of transversal r-cliques."""
        return int(self._cliques.shape[0])

    def __len__(self) -> int:
        return self.k_total

    @property
    def edges(self) -> Tuple[Tuple[int, int], ...]:
        """Edges in id order."""
        return self._edges

    @property
    def edge_count(self) -> int:
        """Number of edges."""
        return len(self._edges)

    @property
    def endpoints(self) -> np.ndarray:
        """Read-only ``(e, 2)`` array of edge endpoints, lower class first."""
        return self._endpoints

    @property
    def clique_edges(self) -> np.ndarray:
        """Read-only ``(k, C(r,2))`` array of the edge ids of each clique."""
        return self._clique_edges

    def edge_id(self, e: EdgeLike) -> int:
        """
        The id of an edge given as an id or as a pair of vertices.

        :raises DomainError: The edge is not in the graph.
        """
        if isinstance(e, (int, np.integer)):
            if not 0 <= int(e) < self.edge_count:
                raise DomainError(f"No edge with id {e}")
            return int(e)
        u, v = (self._graph.index(x) for x in e)
        found = int(self._edge_lookup[u, v])
        if found < 0:
            name = f"{self._graph.vertex(u)}-{self._graph.vertex(v)}"
            raise DomainError(f"{name} is not an edge")
        return found

    def edge_ids(self, us: np.ndarray, vs: np.ndarray) -> np.ndarray:
        """Vectorised :meth:`edge_id`; -1 where there is no edge."""
        return np.asarray(self._edge_lookup[us, vs])

    def cliques_on_edge(self, e: EdgeLike) -> np.ndarray:
        """Ids of the cliques containing an edge, ascending."""
        eid = self.edge_id(e)
        return self._edge_members[self._edge_ptr[eid]:self._edge_ptr[eid + 1]]

    def cliques_at(self, v: VertexLike) -> np.ndarray:
        """Ids of the cliques containing a vertex, ascending."""
        g = self._graph.index(v)
        return self._vertex_members[self._vertex_ptr[g]:self._vertex_ptr[g + 1]]

    def edges_at(self, v: VertexLike) -> np.ndarray:
        """Ids of the edges at a vertex, ascending."""
        g = self._graph.index(v)
        return self._incidence_members[self._incidence_ptr[g]:self._incidence_ptr[g + 1]]

    def z(self, e: EdgeLike) -> int:
        """Number of cliques containing an edge."""
        eid = self.edge_id(e)
        return int(self._edge_ptr[eid + 1] - self._edge_ptr[eid])

    def edge_clique_counts(self) -> np.ndarray:
        """z_e for every edge, in id order."""
        return np.diff(self._edge_ptr)

    def vertex_clique_counts(self) -> np.ndarray:
        """Number of cliques through each vertex, by global index."""
        return np.diff(self._vertex_ptr)

    def clique_vertices(self, cid: int) -> Tuple[VertexId, ...]:
        """The vertices of a clique."""
        return tuple(self._graph.vertex(int(g)) for g in self._cliques[cid])

    def _clique_keys(self) -> np.ndarray:
        if self._keys is None:
            order, r = self._graph.order, self._graph.r
            if order ** r >= 2 ** 62:
                raise SizeLimitError(
                    f"Clique keys overflow for {order} vertices and r={r}",
                )
            weights = np.array([order ** (r - 1 - c) for c in range(r)], dtype=np.int64)
            self._keys = self._cliques @ weights
        return self._keys

    def lookup(self, cliques: np.ndarray) -> np.ndarray:
        """
        Ids of cliques given as rows of global indices in class order.

        :raises IndexMismatchError: A row is not a clique of this index.
        """
        order, r = self._graph.order, self._graph.r
        rows = np.asarray(cliques, dtype=np.int64).reshape(-1, r)
        if rows.shape[0] == 0:
            return np.zeros(0, dtype=np.int64)
        keys = self._clique_keys()
        if len(keys) == 0:
            raise IndexMismatchError("This index has no cliques")
        weights = np.array([order ** (r - 1 - c) for c in range(r)], dtype=np.int64)
        wanted = rows @ weights
        positions = np.minimum(np.searchsorted(keys, wanted), len(keys) - 1)
        if not np.array_equal(keys[positions], wanted):
            raise IndexMismatchError("Some cliques are not in this index")
        return positions.astype(np.int64)


def enumerate_cliques(g: PartiteGraph, *, workers: int = 1) -> CliqueIndex:
    """Enumerate all transversal r-cliques of g with their incidence lists."""
    return CliqueIndex.build(g, workers=workers)


def count_transversals(g: PartiteGraph, masks: Sequence[int]) -> int:
    """
    Count the cliques with one vertex in each of the given vertex masks.

    An empty sequence of masks has exactly one (empty) clique.
    """
    if not masks:
        return 1
    rows = g.rows
    last = len(masks) - 1

    def count(depth: int, common: int) -> int:
        candidates = common & masks[depth]
        if depth == last:
            return popcount(candidates)
        return sum(count(depth + 1, common & rows[x]) for x in iter_bits(candidates))

    return count(0, (1 << g.order) - 1)


def count_partial(g: PartiteGraph, classes: Iterable[int]) -> int:
    """
    k_I: the number of cliques with one vertex in each class of I.

    :raises DomainError: I is empty or names a class that does not exist.
    """
    chosen = sorted(set(classes))
    if not chosen:
        raise DomainError("k_I needs a nonempty class set I")
    if chosen[0] < 0 or chosen[-1] >= g.r:
        raise DomainError(f"Class set {chosen} is out of range for r={g.r}")
    return count_transversals(g, [g.class_mask(c) for c in chosen])


def partial_counts(g: PartiteGraph) -> Dict[Tuple[int, ...], int]:
    """k_I for every nonempty class set I, keyed by sorted class tuple."""
    return {
        classes: count_partial(g, classes)
        for size in range(1, g.r + 1)
        for classes in combinations(range(g.r), size)
    }


class BoundCheck(NamedTuple):
    """Result of evaluating one inequality family."""

    name: str
    applicable: bool
    passed: Optional[bool]
    checked: int
    witnesses: Tuple[str, ...]

    @property
    def status(self) -> str:
        """``pass``, ``fail`` or ``not applicable``."""
        if not self.applicable:
            return "not applicable"
        return "pass" if self.passed else "fail"


class BoundsReport(NamedTuple):
    """Clique-count regularity diagnostics."""

    delta: Fraction
    partial_ratio: BoundCheck
    edge_cliques: BoundCheck

    @property
    def passed(self) -> bool:
        """Whether every applicable check passed."""
        return all(
            check.passed or not check.applicable
            for check in (self.partial_ratio, self.edge_cliques)
        )

    def to_text(self) -> str:
        """Render as ``key value`` lines."""
        lines = [f"delta {self.delta}"]
        for check in (self.partial_ratio, self.edge_cliques):
            lines.append(f"{check.name} {check.status} checked={check.checked}")
            lines.extend(f"{check.name}_witness {w}" for w in check.witnesses)
        return "\n".join(lines) + "\n"


_MAX_WITNESSES = 10


def _partial_ratio_check(g: PartiteGraph, delta: Fraction) -> BoundCheck:
    name = "partial_count_ratio"
    r, n = g.r, g.n
    if delta > Fraction(1, 2 * r):
        return BoundCheck(name, False, None, 0, ())

    counts: Dict[FrozenSet[int], int] = {frozenset(): 1}

    def k(classes: FrozenSet[int]) -> int:
        if classes not in counts:
            counts[classes] = count_partial(g, classes)
        return counts[classes]

    witnesses: List[str] = []
    checked = 0
    for size in range(max(1, r - 2), r + 1):
        for chosen in combinations(range(r), size):
            whole = frozenset(chosen)
            for i in chosen:
                smaller = k(whole - {i})
                lower = Fraction(k(whole), n)
                upper = (1 + 2 * delta * r) * lower
                checked += 1
                if not lower <= smaller <= upper:
                    witnesses.append(
                        f"I={sorted(whole)} i={i} k_I={k(whole)} k_I-i={smaller}",
                    )
    return BoundCheck(
        name,
        True,
        not witnesses,
        checked,
        tuple(witnesses[:_MAX_WITNESSES]),
    )


def _edge_clique_check(g: PartiteGraph, idx: CliqueIndex, delta: Fraction) -> BoundCheck:
    name = "edge_clique_count"
    r, n = g.r, g.n
    if delta > Fraction(1, 8 * r):
        return BoundCheck(name, False, None, 0, ())

    k = idx.k_total
    bound = 9 * delta * r * k
    witnesses = []
    for eid, z in enumerate(idx.edge_clique_counts().tolist()):
        if abs(z * n * n - k) > bound:
            u, v = idx.edges[eid]
            witnesses.append(f"{g.vertex(u)}-{g.vertex(v)} z={z}")
    return BoundCheck(
        name,
        True,
        not witnesses,
        idx.edge_count,
        tuple(witnesses[:_MAX_WITNESSES]),
    )


def bounds_report(g: PartiteGraph, idx: CliqueIndex) -> BoundsReport:
    """
    Check the clique-count regularity bounds that hold near completeness.

    For every class set I with |I| >= r − 2 and i ∈ I this checks
    k_I/n <= k_{I∖i} <= (1 + 2δr) k_I/n when δ <= 1/2r, and for every edge
    |z_e − k/n²| <= 9δr k/n² when δ <= 1/8r. Checks whose hypothesis
    fails are reported as not applicable.
    """
    delta = summarize(g).delta
    report = BoundsReport(
        delta,
        _partial_ratio_check(g, delta),
        _edge_clique_check(g, idx, delta),
    )
    for check in (report.partial_ratio, report.edge_cliques):
        if check.applicable and not check.passed:
            LOGGER.warning(f"Bound {check.name} failed: {check.witnesses[:1]}")
    return report
