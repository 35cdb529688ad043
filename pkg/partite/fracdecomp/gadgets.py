"""
Weight-moving gadgets and the splitter that plans them.

A star gadget moves one unit of edge effect from the edges v'u_i onto
the edges vu_i. A swap gadget exchanges one unit between the
cross pairs of v, v' and u_1, u_2. Both average a signed clique pattern
over a family of helper cliques, and both are computed in closed form
without materialising the family.
"""

import logging
from fractions import Fraction
from typing import Dict, List, Mapping, NamedTuple, Tuple, Union

import numpy as np

from .backend import EXACT_BACKEND, NumericBackend, Scalar
from .cliques import BoundCheck, CliqueIndex, count_transversals
from .errors import DomainError, GadgetInfeasible
from .graph import PartiteGraph, VertexId, VertexLike, iter_bits, summarize
from .logging import TRACE_LOGGER_NAME
from .weighting import SparseWeighting

LOGGER = logging.getLogger(__name__)
TRACE = logging.getLogger(TRACE_LOGGER_NAME)

__all__ = [
    "CorrectionPlan",
    "GadgetTerms",
    "StarGadgetSpec",
    "StarMove",
    "SwapGadgetSpec",
    "SwapMove",
    "magnitude_check",
    "split_corrections",
    "star_gadget",
    "star_terms",
    "swap_gadget",
    "swap_terms",
]

_MAX_WITNESSES = 10


class StarGadgetSpec(NamedTuple):
    """
    Move one unit from every v'u_i onto vu_i.

    ``targets`` holds one vertex u_i for every class i other than j,
    in class order, each adjacent to both v and v'.
    """

    j: int
    v: VertexId
    v_prime: VertexId
    targets: Tuple[VertexId, ...]

    def __str__(self) -> str:
        targets = ",".join(str(u) for u in self.targets)
        return f"star j={self.j} v={self.v} v'={self.v_prime} targets={targets}"

    def validate(self, g: PartiteGraph) -> None:
        """
        Check the structural preconditions.

        :raises DomainError: A vertex is in the wrong class or an
            adjacency is missing.
        """
        if self.v == self.v_prime:
            raise DomainError(f"{self}: v and v' must differ")
        for x in (self.v, self.v_prime):
            if g.class_of(x) != self.j:
                raise DomainError(f"{self}: {x} is not in class {self.j}")
        classes = [u.class_index for u in self.targets]
        if classes != [i for i in range(g.r) if i != self.j]:
            raise DomainError(
                f"{self}: need one target in each class other than {self.j}",
            )
        for u in self.targets:
            if not (g.adjacent(self.v, u) and g.adjacent(self.v_prime, u)):
                raise DomainError(f"{self}: {u} is not adjacent to both v and v'")


class SwapGadgetSpec(NamedTuple):
    """Add one unit to vu_1 and v'u_2 and remove one from vu_2 and v'u_1."""

    i: int
    j: int
    v: VertexId
    v_prime: VertexId
    u1: VertexId
    u2: VertexId

    def __str__(self) -> str:
        return (
            f"swap i={self.i} j={self.j} v={self.v} v'={self.v_prime} "
            f"u1={self.u1} u2={self.u2}"
        )

    def validate(self, g: PartiteGraph) -> None:
        """
        Check the structural preconditions.

        :raises DomainError: A vertex is in the wrong class or a cross
            edge is missing.
        """
        if self.i == self.j:
            raise DomainError(f"{self}: the two pairs must lie in different classes")
        if self.v == self.v_prime or self.u1 == self.u2:
            raise DomainError(f"{self}: the vertices of each pair must differ")
        placed = (
            (self.v, self.i),
            (self.v_prime, self.i),
            (self.u1, self.j),
            (self.u2, self.j),
        )
        for x, c in placed:
            if g.class_of(x) != c:
                raise DomainError(f"{self}: {x} is not in class {c}")
        for x in (self.v, self.v_prime):
            for u in (self.u1, self.u2):
                if not g.adjacent(x, u):
                    raise DomainError(f"{self}: {x}-{u} is not an edge")


GadgetSpec = Union[StarGadgetSpec, SwapGadgetSpec]


class GadgetTerms(NamedTuple):
    """
    A gadget as integer numerators over a common helper count.

    The gadget's value on clique ``cids[x]`` is
    ``numerators[x] / helpers``.
    """

    cids: np.ndarray
    numerators: np.ndarray
    helpers: int

    def to_weighting(
            self,
            index: CliqueIndex,
            backend: NumericBackend = EXACT_BACKEND,
    ) -> SparseWeighting:
        """Expand into a sparse weighting."""
        return SparseWeighting(
            index,
            {
                cid: backend.scalar(Fraction(num, self.helpers))
                for cid, num in zip(self.cids.tolist(), self.numerators.tolist())
            },
            backend,
        )


def _members(g: PartiteGraph, mask: int) -> np.ndarray:
    flags = np.zeros(g.order, dtype=bool)
    flags[list(iter_bits(mask))] = True
    return flags


def _collect(chunks: List[Tuple[np.ndarray, np.ndarray]], helpers: int) -> GadgetTerms:
    if not chunks:
        empty = np.zeros(0, dtype=np.int64)
        return GadgetTerms(empty, empty, helpers)
    cids = np.concatenate([c for c, _ in chunks])
    nums = np.concatenate([x for _, x in chunks])
    return GadgetTerms(cids.astype(np.int64), nums.astype(np.int64), helpers)


def star_terms(g: PartiteGraph, idx: CliqueIndex, spec: StarGadgetSpec) -> GadgetTerms:
    """
    The star gadget as integer terms.

    A helper clique A has one vertex a_i in every class i other than j,
    adjacent to v, to v' and to every target u_l with l != i, and
    different from u_i. For each helper, the cliques
    ``{x, u_i} ∪ A∖{a_i}`` get +1 and ``{x} ∪ A`` gets -(r-2) when
    x = v, with opposite signs when x = v'. Averaging over the helpers
    leaves α_K·φ(K)/|helpers|, where α_K counts the helpers producing K.

    :raises GadgetInfeasible: There is no helper clique.
    """
    r, j = g.r, spec.j
    rows = g.rows
    v, vp = g.index(spec.v), g.index(spec.v_prime)
    others = [c for c in range(r) if c != j]
    targets = {c: g.index(u) for c, u in zip(others, spec.targets)}

    base = rows[v] & rows[vp]
    helper_masks: Dict[int, int] = {}
    for i in others:
        mask = base & g.class_mask(i) & ~(1 << targets[i])
        for l in others:
            if l != i:
                mask &= rows[targets[l]]
        helper_masks[i] = mask

    helpers = count_transversals(g, [helper_masks[i] for i in others])
    if TRACE.isEnabledFor(logging.DEBUG):
        TRACE.debug(f"{spec} helpers={helpers}")
    if helpers == 0:
        raise GadgetInfeasible(f"{spec}: no helper cliques", spec)

    inside = _members(g, sum(helper_masks.values()))
    is_target = _members(g, sum(1 << u for u in targets.values()))
    adjacency = g.adjacency_matrix()
    candidates = {
        i: np.fromiter(iter_bits(helper_masks[i]), dtype=np.int64)
        for i in others
    }
    columns = np.array(others, dtype=np.int64)

    chunks = []
    for centre, sign in ((v, 1), (vp, -1)):
        cids = idx.cliques_at(centre)
        rest = idx.cliques[cids][:, columns]
        hit = is_target[rest]
        valid = (hit | inside[rest]).all(axis=1)
        hits = hit.sum(axis=1)
        nums = np.zeros(len(cids), dtype=np.int64)
        nums[valid & (hits == 0)] = -(r - 2) * sign

        single = valid & (hits == 1)
        if single.any():
            sub = rest[single]
            which = hit[single].argmax(axis=1)
            alpha = np.zeros(len(sub), dtype=np.int64)
            for pos, i in enumerate(others):
                chosen = which == pos
                if not chosen.any():
                    continue
                fixed = sub[chosen]
                ok = np.ones((len(fixed), len(candidates[i])), dtype=bool)
                for q, l in enumerate(others):
                    if l != i:
                        ok &= adjacency[fixed[:, q]][:, candidates[i]]
                alpha[chosen] = ok.sum(axis=1)
            nums[single] = sign * alpha

        keep = nums != 0
        chunks.append((cids[keep], nums[keep]))
    return _collect(chunks, helpers)


def swap_terms(g: PartiteGraph, idx: CliqueIndex, spec: SwapGadgetSpec) -> GadgetTerms:
    """
    The swap gadget as integer terms.

    A helper clique has one vertex in every class other than i and j,
    all common neighbours of v, v', u_1 and u_2. Each clique formed by
    a helper and one of the pairs vu_1, v'u_2 gets +1/|helpers|, and
    with vu_2 or v'u_1 gets -1/|helpers|.

    :raises GadgetInfeasible: There is no helper clique.
    """
    r = g.r
    rows = g.rows
    v, vp = g.index(spec.v), g.index(spec.v_prime)
    u1, u2 = g.index(spec.u1), g.index(spec.u2)
    others = [c for c in range(r) if c not in (spec.i, spec.j)]

    common = rows[v] & rows[vp] & rows[u1] & rows[u2]
    helpers = count_transversals(g, [common & g.class_mask(c) for c in others])
    if TRACE.isEnabledFor(logging.DEBUG):
        TRACE.debug(f"{spec} helpers={helpers}")
    if helpers == 0:
        raise GadgetInfeasible(f"{spec}: no helper cliques", spec)

    inside = _members(g, common)
    columns = np.array(others, dtype=np.int64)
    chunks = []
    for x, y, sign in ((v, u1, 1), (vp, u2, 1), (v, u2, -1), (vp, u1, -1)):
        cids = idx.cliques_on_edge((x, y))
        keep = inside[idx.cliques[cids][:, columns]].all(axis=1)
        chunks.append((cids[keep], np.full(int(keep.sum()), sign, dtype=np.int64)))
    return _collect(chunks, helpers)


def star_gadget(
        g: PartiteGraph,
        idx: CliqueIndex,
        spec: StarGadgetSpec,
        backend: NumericBackend = EXACT_BACKEND,
) -> SparseWeighting:
    """
    A zero-sum weighting with effect +1 on vu_i, -1 on v'u_i, 0 elsewhere.

    :raises DomainError: The spec's adjacencies do not hold.
    :raises GadgetInfeasible: There is no helper clique.
    """
    spec.validate(g)
    return star_terms(g, idx, spec).to_weighting(idx, backend)


def swap_gadget(
        g: PartiteGraph,
        idx: CliqueIndex,
        spec: SwapGadgetSpec,
        backend: NumericBackend = EXACT_BACKEND,
) -> SparseWeighting:
    """
    A zero-sum weighting with effect +1 on vu_1 and v'u_2, -1 on vu_2 and v'u_1.

    :raises DomainError: The spec's adjacencies do not hold.
    :raises GadgetInfeasible: There is no helper clique.
    """
    spec.validate(g)
    return swap_terms(g, idx, spec).to_weighting(idx, backend)


def magnitude_check(
        g: PartiteGraph,
        idx: CliqueIndex,
        spec: GadgetSpec,
        psi: SparseWeighting,
) -> BoundCheck:
    """
    Compare gadget values with their near-complete ceilings.

    With δ̂ >= (1 − 1/8r²)n, a star gadget has |ψ(K)| <= 2n²/k on
    cliques through a target and <= 2rn/k on the others, and a swap
    gadget has |ψ(K)| <= 2n²/k. Otherwise the check is not applicable.
    """
    r, n, k = g.r, g.n, idx.k_total
    name = "star_magnitude" if isinstance(spec, StarGadgetSpec) else "swap_magnitude"
    if summarize(g).hat_delta < (1 - Fraction(1, 8 * r * r)) * n or k == 0:
        return BoundCheck(name, False, None, 0, ())

    if isinstance(spec, StarGadgetSpec):
        targets = {g.index(u) for u in spec.targets}
    else:
        targets = set()
    witnesses = []
    for cid, value in psi.entries.items():
        members = set(idx.cliques[cid].tolist())
        if isinstance(spec, StarGadgetSpec) and not members & targets:
            ceiling = Fraction(2 * r * n, k)
        else:
            ceiling = Fraction(2 * n * n, k)
        if abs(Fraction(value)) > ceiling:
            witnesses.append(f"clique {cid} value {value} ceiling {ceiling}")
    return BoundCheck(
        name,
        True,
        not witnesses,
        len(psi),
        tuple(witnesses[:_MAX_WITNESSES]),
    )


class StarMove(NamedTuple):
    """Shift ``amount`` along every edge from v to a vertex of ``vertices``."""

    vertices: Tuple[VertexId, ...]
    amount: Scalar


class SwapMove(NamedTuple):
    """Shift ``amount`` from v's edge to u2 onto its edge to u1."""

    u1: VertexId
    u2: VertexId
    amount: Scalar


class CorrectionPlan(NamedTuple):
    """The moves that realise the corrections around one vertex."""

    vertex: VertexId
    star_moves: Tuple[StarMove, ...]
    swap_moves: Tuple[SwapMove, ...]

    @property
    def move_count(self) -> int:
        """Number of moves."""
        return len(self.star_moves) + len(self.swap_moves)

    def reconstruct(
            self,
            backend: NumericBackend = EXACT_BACKEND,
    ) -> Dict[VertexId, Scalar]:
        """Sum the moves back into per-neighbour corrections."""
        totals: Dict[VertexId, Scalar] = {}
        zero = backend.zero()
        for star in self.star_moves:
            for u in star.vertices:
                totals[u] = totals.get(u, zero) + star.amount
        for swap in self.swap_moves:
            totals[swap.u1] = totals.get(swap.u1, zero) + swap.amount
            totals[swap.u2] = totals.get(swap.u2, zero) - swap.amount
        return totals

    def to_text(self) -> str:
        """Render one move per line."""
        lines = [
            f"plan {self.vertex} star={len(self.star_moves)} "
            f"swap={len(self.swap_moves)}",
        ]
        lines.extend(
            "star " + " ".join(str(u) for u in move.vertices) + f" {move.amount}"
            for move in self.star_moves
        )
        lines.extend(
            f"swap {move.u1} {move.u2} {move.amount}" for move in self.swap_moves
        )
        return "\n".join(lines) + "\n"


def split_corrections(
        g: PartiteGraph,
        v: VertexLike,
        z: Mapping[VertexLike, Scalar],
        backend: NumericBackend = EXACT_BACKEND,
) -> CorrectionPlan:
    """
    Express the corrections at v as star and swap moves.

    Repeatedly take the nonzero entry of least absolute value, ties to
    the lowest vertex. If its class holds an entry of opposite sign,
    swap the smaller amount between the two (the positive one as u1).
    Otherwise every other class holds an entry of the same sign, and a
    star move through the lowest such entry of each class removes the
    amount from all of them. Every step zeroes at least one entry.

    :param z: Correction per neighbour of v; missing neighbours are 0.
    :raises DomainError: A key is not a neighbour of v, or the sums over
        the foreign classes differ.
    """
    centre = g.index(v)
    own = centre // g.n
    remaining: Dict[int, Scalar] = {}
    for u, value in z.items():
        gu = g.index(u)
        if not g.adjacent(centre, gu):
            raise DomainError(f"{g.vertex(gu)} is not a neighbour of {g.vertex(centre)}")
        value = backend.scalar(value)
        if not backend.is_zero(value):
            remaining[gu] = value

    foreign = [c for c in range(g.r) if c != own]
    sums = [
        sum((x for u, x in remaining.items() if u // g.n == c), backend.zero())
        for c in foreign
    ]
    if any(not backend.equal(s, sums[0]) for s in sums):
        raise DomainError(
            f"Corrections at {g.vertex(centre)} have unequal class sums: "
            + ", ".join(str(s) for s in sums),
        )

    stars: List[StarMove] = []
    swaps: List[SwapMove] = []

    def shift(u: int, amount: Scalar) -> None:
        value = remaining[u] - amount
        if backend.is_zero(value):
            del remaining[u]
        else:
            remaining[u] = value

    while remaining:
        low = min(remaining, key=lambda u: (abs(remaining[u]), u))
        amount = remaining[low]
        positive = amount > 0
        cls = low // g.n
        opposite = [
            u for u in sorted(remaining)
            if u // g.n == cls and (remaining[u] > 0) != positive
        ]
        if opposite:
            other = opposite[0]
            u1, u2 = (low, other) if positive else (other, low)
            size = abs(amount)
            swaps.append(SwapMove(g.vertex(u1), g.vertex(u2), size))
            shift(u1, size)
            shift(u2, -size)
            continue

        chosen = [low]
        for c in foreign:
            if c == cls:
                continue
            same = [
                u for u in sorted(remaining)
                if u // g.n == c and (remaining[u] > 0) == positive
            ]
            if not same:
                sign = "positive" if positive else "negative"
                raise DomainError(
                    f"Corrections at {g.vertex(centre)} have no {sign} entry "
                    f"in class {c}",
                )
            chosen.append(same[0])
        chosen.sort()
        stars.append(StarMove(tuple(g.vertex(u) for u in chosen), amount))
        for u in chosen:
            shift(u, amount)

    plan = CorrectionPlan(g.vertex(centre), tuple(stars), tuple(swaps))
    LOGGER.debug(
        f"Split corrections at {plan.vertex} into {len(stars)} star "
        f"and {len(swaps)} swap moves",
    )
    return plan
