"""
Balanced r-partite graphs.

Vertices are numbered globally, ``g = class_index * n + offset``, so the
numeric order of global indices is the lexicographic order of
:class:`VertexId`. Adjacency is stored as one integer bitmask per vertex.
"""

import logging
import math
import random
from enum import Enum
from fractions import Fraction
from functools import reduce
from itertools import combinations
from pathlib import Path
from typing import (
    Dict,
    Iterable,
    Iterator,
    List,
    NamedTuple,
    Optional,
    Sequence,
    Tuple,
    Union,
)

import numpy as np

from .errors import DomainError, GraphFormatError

LOGGER = logging.getLogger(__name__)

__all__ = [
    "GraphSummary",
    "NeighbourRichMode",
    "PartiteGraph",
    "VertexId",
    "check_neighbour_rich",
    "degree_into",
    "generate_divisible",
    "is_neighbour_rich",
    "read_graph",
    "summarize",
    "write_graph",
]


class VertexId(NamedTuple):
    """A vertex, named by its class and its offset within the class."""

    class_index: int
    offset: int

    def __str__(self) -> str:
        return f"{self.class_index}:{self.offset}"

    @classmethod
    def parse(cls, text: str) -> "VertexId":
        """
        Parse a vertex written as ``class:offset``.

        :raises GraphFormatError: The text is not two integers separated by a colon.
        """
        try:
            class_text, offset_text = text.split(":")
            return cls(int(class_text), int(offset_text))
        except ValueError:
            raise GraphFormatError(f"Malformed vertex {text!r}") from None


VertexLike = Union[VertexId, int]
Edge = Tuple[int, int]


def popcount(mask: int) -> int:
    """Number of set bits."""
    return bin(mask).count("1")


def iter_bits(mask: int) -> Iterator[int]:
    """Yield the positions of the set bits, lowest first."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


class PartiteGraph:
    """
    A balanced r-partite graph on classes V_0, ..., V_{r-1} of size n.

    Instances are immutable after construction.
    """

    def __init__(self, r: int, n: int, rows: Sequence[int]) -> None:
        """
        Build a graph from adjacency bitmasks.

        :param r: Number of classes, at least 3.
        :param n: Size of every class, at least 1.
        :param rows: One bitmask per global vertex index.
        :raises DomainError: The rows describe an intra-class edge, an
            out-of-range vertex, or an asymmetric adjacency.
        """
        if r < 3:
            raise DomainError(f"Need at least 3 classes, got r={r}")
        if n < 1:
            raise DomainError(f"Classes must be nonempty, got n={n}")
        if len(rows) != r * n:
            raise DomainError(f"Expected {r * n} adjacency rows, got {len(rows)}")

        self._r = r
        self._n = n
        self._rows = tuple(int(row) for row in rows)
        self._edges: Optional[Tuple[Edge, ...]] = None
        self._matrix: Optional[np.ndarray] = None

        everything = (1 << (r * n)) - 1
        for vertex, row in enumerate(self._rows):
            if row & ~everything:
                raise DomainError(
                    f"Vertex {self.vertex(vertex)} has an out-of-range neighbour",
                )
            if row & self.class_mask(vertex // n):
                raise DomainError(
                    f"Vertex {self.vertex(vertex)} has a neighbour in its own class",
                )
            for other in iter_bits(row):
                if not (self._rows[other] >> vertex) & 1:
                    raise DomainError(
                        f"Adjacency is not symmetric at "
                        f"{self.vertex(vertex)}-{self.vertex(other)}",
                    )

    @classmethod
    def complete(cls, r: int, n: int) -> "PartiteGraph":
        """The complete r-partite graph with classes of size n."""
        everything = (1 << (r * n)) - 1
        own = (1 << n) - 1
        return cls(r, n, [everything & ~(own << (n * (g // n))) for g in range(r * n)])

    @classmethod
    def from_edges(
            cls,
            r: int,
            n: int,
            edges: Iterable[Tuple[VertexLike, VertexLike]],
    ) -> "PartiteGraph":
        """
        Build a graph from an edge list.

        :raises DomainError: An edge is intra-class, repeated, or names an
            out-of-range vertex.
        """
        rows = [0] * (r * n)
        for a, b in edges:
            u = _global_index(r, n, a)
            v = _global_index(r, n, b)
            if u // n == v // n:
                raise DomainError(
                    f"Edge {_name(n, u)}-{_name(n, v)} joins a class to itself",
                )
            if (rows[u] >> v) & 1:
                raise DomainError(f"Duplicate edge {_name(n, u)}-{_name(n, v)}")
            rows[u] |= 1 << v
            rows[v] |= 1 << u
        return cls(r, n, rows)

    @property
    def r(self) -> int:
        """Number of classes."""
        return self._r

    @property
    def n(self) -> int:
        """Size of each class."""
        return self._n

    @property
    def order(self) -> int:
        """Total number of vertices."""
        return self._r * self._n

    @property
    def rows(self) -> Tuple[int, ...]:
        """Adjacency bitmasks indexed by global vertex index."""
        return self._rows

    def class_mask(self, j: int) -> int:
        """Bitmask of the vertices in class j."""
        return ((1 << self._n) - 1) << (j * self._n)

    def class_of(self, v: VertexLike) -> int:
        """Class of a vertex."""
        return self.index(v) // self._n

    def vertex(self, g: int) -> VertexId:
        """The :class:`VertexId` of a global index."""
        return VertexId(g // self._n, g % self._n)

    def index(self, v: VertexLike) -> int:
        """
        The global index of a vertex.

        :raises DomainError: The vertex does not exist.
        """
        return _global_index(self._r, self._n, v)

    def adjacent(self, u: VertexLike, v: VertexLike) -> bool:
        """Whether uv is an edge."""
        return bool((self._rows[self.index(u)] >> self.index(v)) & 1)

    def neighbour_mask(self, v: VertexLike, j: Optional[int] = None) -> int:
        """Bitmask of N(v), or of N(v) ∩ V_j when j is given."""
        row = self._rows[self.index(v)]
        return row if j is None else row & self.class_mask(j)

    def neighbours(self, v: VertexLike, j: Optional[int] = None) -> List[int]:
        """Global indices of N(v), or of N(v) ∩ V_j, ascending."""
        return list(iter_bits(self.neighbour_mask(v, j)))

    def degree_into(self, v: VertexLike, j: int) -> int:
        """
        The number of neighbours of v in class j.

        :raises DomainError: j is v's own class or not a class.
        """
        g = self.index(v)
        if not 0 <= j < self._r:
            raise DomainError(f"No class {j} in a graph with r={self._r}")
        if j == g // self._n:
            raise DomainError(f"Class {j} is the class of {self.vertex(g)}")
        return popcount(self._rows[g] & self.class_mask(j))

    def edges(self) -> Tuple[Edge, ...]:
        """All edges as ``(u, v)`` global index pairs with u < v, sorted."""
        if self._edges is None:
            self._edges = tuple(
                (u, v)
                for u, row in enumerate(self._rows)
                for v in iter_bits(row >> (u + 1) << (u + 1))
            )
        return self._edges

    def edge_count(self) -> int:
        """e(G)."""
        return len(self.edges())

    def adjacency_matrix(self) -> np.ndarray:
        """Dense boolean adjacency matrix, read-only."""
        if self._matrix is None:
            matrix = np.zeros((self.order, self.order), dtype=bool)
            for u, row in enumerate(self._rows):
                matrix[u, list(iter_bits(row))] = True
            matrix.setflags(write=False)
            self._matrix = matrix
        return self._matrix

    def induced(self, keep: Iterable[VertexLike]) -> Tuple["PartiteGraph", List[int]]:
        """
        The subgraph induced by a vertex set with the same size in every class.

        Vertices keep their relative order inside each class.

        :param keep: The vertices to keep.
        :returns: The subgraph and, for each of its global indices, the
            global index of the same vertex in this graph.
        :raises DomainError: The kept classes differ in size or are empty.
        """
        chosen = sorted({self.index(v) for v in keep})
        sizes = [0] * self._r
        for g in chosen:
            sizes[g // self._n] += 1
        size = sizes[0]
        if size == 0 or any(s != size for s in sizes):
            raise DomainError(f"Induced subgraph would be unbalanced: sizes {sizes}")

        old_to_new = {old: new for new, old in enumerate(chosen)}
        keep_mask = reduce(lambda acc, g: acc | (1 << g), chosen, 0)
        rows = [
            reduce(
                lambda acc, g: acc | (1 << old_to_new[g]),
                iter_bits(self._rows[old] & keep_mask),
                0,
            )
            for old in chosen
        ]
        return PartiteGraph(self._r, size, rows), chosen

    def dumps(self) -> str:
        """Serialise to the line-oriented graph format."""
        lines = [f"pg {self._r} {self._n}"]
        lines.extend(f"{self.vertex(u)} {self.vertex(v)}" for u, v in self.edges())
        return "\n".join(lines) + "\n"

    @classmethod
    def loads(cls, text: str) -> "PartiteGraph":
        """
        Parse the line-oriented graph format.

        Blank lines and lines starting with ``#`` are ignored.

        :raises GraphFormatError: The header or an edge line is malformed,
            or an edge is intra-class, duplicated or out of range.
        """
        lines = [
            (number, line.strip())
            for number, line in enumerate(text.splitlines(), start=1)
            if line.strip() and not line.strip().startswith("#")
        ]
        if not lines:
            raise GraphFormatError("Empty graph file")

        number, header = lines[0]
        fields = header.split()
        if len(fields) != 3 or fields[0] != "pg":
            raise GraphFormatError(
                f"line {number}: expected 'pg <r> <n>', got {header!r}",
            )
        try:
            r, n = int(fields[1]), int(fields[2])
        except ValueError:
            raise GraphFormatError(
                f"line {number}: non-integer header {header!r}",
            ) from None
        if r < 3 or n < 1:
            raise GraphFormatError(f"line {number}: need r >= 3 and n >= 1")

        rows = [0] * (r * n)
        for number, line in lines[1:]:
            fields = line.split()
            if len(fields) != 2:
                raise GraphFormatError(
                    f"line {number}: expected two vertices, got {line!r}",
                )
            a, b = (VertexId.parse(f) for f in fields)
            for vertex in (a, b):
                if not (0 <= vertex.class_index < r and 0 <= vertex.offset < n):
                    raise GraphFormatError(f"line {number}: vertex {vertex} out of range")
            if a.class_index == b.class_index:
                raise GraphFormatError(f"line {number}: intra-class edge {a} {b}")
            u = a.class_index * n + a.offset
            v = b.class_index * n + b.offset
            if (rows[u] >> v) & 1:
                raise GraphFormatError(f"line {number}: duplicate edge {a} {b}")
            rows[u] |= 1 << v
            rows[v] |= 1 << u
        return cls(r, n, rows)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PartiteGraph):
            return NotImplemented
        return (self._r, self._n, self._rows) == (other._r, other._n, other._rows)

    def __hash__(self) -> int:
        return hash((self._r, self._n, self._rows))

    def __repr__(self) -> str:
        return f"PartiteGraph(r={self._r}, n={self._n}, edges={self.edge_count()})"


def _global_index(r: int, n: int, v: VertexLike) -> int:
    if isinstance(v, VertexId):
        if not (0 <= v.class_index < r and 0 <= v.offset < n):
            raise DomainError(f"Vertex {v} is out of range for r={r}, n={n}")
        return v.class_index * n + v.offset
    g = int(v)
    if not 0 <= g < r * n:
        raise DomainError(f"Vertex index {g} is out of range for r={r}, n={n}")
    return g


def _name(n: int, g: int) -> str:
    return f"{g // n}:{g % n}"


class GraphSummary(NamedTuple):
    """Degree profile of a graph."""

    hat_delta: int
    delta: Fraction
    divisible: bool
    edges_between: Tuple[Tuple[int, ...], ...]

    def to_text(self) -> str:
        """Render as ``key value`` lines."""
        lines = [
            f"hat_delta {self.hat_delta}",
            f"delta {self.delta}",
            f"divisible {str(self.divisible).lower()}",
        ]
        lines.extend(
            f"edges_between {i} " + " ".join(str(count) for count in row)
            for i, row in enumerate(self.edges_between)
        )
        return "\n".join(lines) + "\n"


def degree_into(g: PartiteGraph, v: VertexLike, j: int) -> int:
    """
    Count the neighbours of v in class j.

    :raises DomainError: j is v's own class.
    """
    return g.degree_into(v, j)


def summarize(g: PartiteGraph) -> GraphSummary:
    """Compute the minimum foreign degree, divisibility and class-pair edge counts."""
    r, n = g.r, g.n
    masks = [g.class_mask(j) for j in range(r)]
    degrees = [[popcount(row & mask) for mask in masks] for row in g.rows]

    hat_delta = n
    divisible = True
    between = [[0] * r for _ in range(r)]
    for vertex, row_degrees in enumerate(degrees):
        own = vertex // n
        foreign = [d for j, d in enumerate(row_degrees) if j != own]
        hat_delta = min(hat_delta, min(foreign))
        if len(set(foreign)) > 1:
            divisible = False
        for j, d in enumerate(row_degrees):
            between[own][j] += d

    return GraphSummary(
        hat_delta=hat_delta,
        delta=1 - Fraction(hat_delta, n),
        divisible=divisible,
        edges_between=tuple(tuple(row) for row in between),
    )


class NeighbourRichMode(Enum):
    """How :func:`is_neighbour_rich` decides."""

    EXACT = "exact"
    CERTIFIED = "certified"


def _rich_target(
        g: PartiteGraph,
        j: int,
        s: Iterable[VertexLike],
) -> Tuple[int, int]:
    if not 0 <= j < g.r:
        raise DomainError(f"No class {j} in a graph with r={g.r}")
    s_mask = 0
    for v in s:
        index = g.index(v)
        if index // g.n != j:
            raise DomainError(f"Vertex {g.vertex(index)} is not in class {j}")
        s_mask |= 1 << index
    if not s_mask:
        raise DomainError("Neighbour-richness needs a nonempty set")
    return s_mask, popcount(s_mask)


def _foreign_misses(g: PartiteGraph, j: int, s_mask: int) -> Dict[int, int]:
    """For each foreign vertex missing part of s, the part of s it misses."""
    foreign = ((1 << g.order) - 1) & ~g.class_mask(j)
    misses = {}
    for u in iter_bits(foreign):
        missed = s_mask & ~g.rows[u]
        if missed:
            misses[u] = missed
    return misses


def _certified(g: PartiteGraph, misses: Dict[int, int], size: int) -> bool:
    worst = sorted((popcount(m) for m in misses.values()), reverse=True)[:g.r]
    return 2 * sum(worst) <= size


def _exact(g: PartiteGraph, s_mask: int, misses: Dict[int, int], size: int) -> bool:
    # Larger W only shrink the intersection, and W may skip vertices missing nothing.
    width = min(g.r, len(misses))
    rows = [s_mask & g.rows[u] for u in misses]
    for chosen in combinations(rows, width):
        common = reduce(lambda acc, row: acc & row, chosen, s_mask)
        if 2 * popcount(common) < size:
            return False
    return True


def is_neighbour_rich(
        g: PartiteGraph,
        j: int,
        s: Iterable[VertexLike],
        mode: NeighbourRichMode = NeighbourRichMode.CERTIFIED,
) -> bool:
    """
    Whether s ⊆ V_j is j-neighbour-rich.

    Every set W of at most r vertices outside V_j must have at least
    |s|/2 common neighbours in s. Certified mode is sound but
    incomplete: it compares the r largest per-vertex miss counts
    with |s|/2.

    :param g: The host graph.
    :param j: The class containing s.
    :param s: A nonempty subset of V_j.
    :param mode: Exact enumeration or the certified sufficient test.
    :raises DomainError: s is empty or has a vertex outside V_j.
    """
    s_mask, size = _rich_target(g, j, s)
    misses = _foreign_misses(g, j, s_mask)
    if mode is NeighbourRichMode.CERTIFIED:
        return _certified(g, misses, size)
    return _exact(g, s_mask, misses, size)


def check_neighbour_rich(
        g: PartiteGraph,
        j: int,
        s: Iterable[VertexLike],
        *,
        exact_limit: int = 200_000,
) -> Optional[NeighbourRichMode]:
    """
    Decide neighbour-richness, certified first and exact as a fallback.

    :param exact_limit: Largest number of sets W the exact search may visit.
    :returns: The mode that proved the set neighbour-rich, or None if it
        is not neighbour-rich or the exact search would be too large.
    """
    s_mask, size = _rich_target(g, j, s)
    misses = _foreign_misses(g, j, s_mask)
    if _certified(g, misses, size):
        return NeighbourRichMode.CERTIFIED
    searches = math.comb(len(misses), min(g.r, len(misses)))
    if searches > exact_limit:
        LOGGER.warning(
            f"Class {j} target set not certified and exact check needs "
            f"{searches} subsets, above the limit {exact_limit}",
        )
        return None
    if _exact(g, s_mask, misses, size):
        return NeighbourRichMode.EXACT
    return None


def generate_divisible(
        r: int,
        n: int,
        matchings_per_pair: int,
        seed: int,
) -> PartiteGraph:
    """
    Remove k disjoint perfect matchings between every pair of classes.

    The matchings between V_i and V_j are the cyclic shifts 0..k-1 of one
    pseudorandom bijection, so every vertex loses exactly k neighbours in
    every foreign class. The result is K_r-divisible with δ̂ = n − k.

    :param r: Number of classes.
    :param n: Class size.
    :param matchings_per_pair: k, with 0 <= k <= n.
    :param seed: Seed of the pseudorandom permutations.
    :raises DomainError: k is negative or larger than n.
    """
    k = matchings_per_pair
    if not 0 <= k <= n:
        raise DomainError(f"Cannot remove {k} perfect matchings from classes of size {n}")

    rng = random.Random(seed)
    rows = list(PartiteGraph.complete(r, n).rows)
    for i, j in combinations(range(r), 2):
        left = list(range(n))
        right = list(range(n))
        rng.shuffle(left)
        rng.shuffle(right)
        for shift in range(k):
            for x in range(n):
                a = i * n + left[x]
                b = j * n + right[(x + shift) % n]
                rows[a] &= ~(1 << b)
                rows[b] &= ~(1 << a)

    LOGGER.debug(f"Generated r={r} n={n}, {k} matchings removed per pair, seed {seed}")
    return PartiteGraph(r, n, rows)


def read_graph(path: Union[str, Path]) -> PartiteGraph:
    """
    Read a graph file.

    :raises GraphFormatError: The file is not UTF-8 text or not a graph.
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except UnicodeDecodeError as e:
        raise GraphFormatError(f"{path} is not UTF-8 text: {e}") from None
    return PartiteGraph.loads(text)


def write_graph(g: PartiteGraph, path: Union[str, Path]) -> None:
    """Write a graph file."""
    Path(path).write_text(g.dumps(), encoding="utf-8")
