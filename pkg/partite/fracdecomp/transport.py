"""
Weight transport: moving corrections into a set, then onto one clique.

The pipeline has three stages. A move realises the corrections around
one vertex using gadgets centred on a neighbour-rich set in its class.
A sweep moves every vertex outside a balanced set V, in two rounds, so
that only edges inside V keep a residue. Concentration sweeps into an
intermediate set around an anchor clique and then, inside the induced
subgraph, onto the anchor itself, where the residues cancel.
"""

import logging
import random
import time
from concurrent.futures import ProcessPoolExecutor
from enum import Enum
from fractions import Fraction
from typing import Any, Dict, List, Mapping, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .backend import EXACT_BACKEND, NumericBackend, Scalar, get_backend
from .cliques import BoundCheck, CliqueIndex
from .errors import (
    DivisibilityError,
    DomainError,
    EmptyIntersectionError,
    FracDecompError,
    IntermediateSetTooSmall,
    NoCliquesError,
    NotNeighbourRichError,
    TransportInvariantError,
)
from .gadgets import (
    CorrectionPlan,
    StarGadgetSpec,
    SwapGadgetSpec,
    split_corrections,
    star_terms,
    swap_terms,
)
from .graph import PartiteGraph, VertexLike, check_neighbour_rich, iter_bits, summarize
from .logging import TRACE_LOGGER_NAME
from .weighting import (
    CliqueWeighting,
    CorrectionField,
    WeightAccumulator,
    corrections,
    uniform_init,
)

LOGGER = logging.getLogger(__name__)
TRACE = logging.getLogger(TRACE_LOGGER_NAME)

__all__ = [
    "AnchorKind",
    "AnchorMode",
    "Certificate",
    "Decomposition",
    "TransportOptions",
    "TransportReport",
    "concentrate_on_clique",
    "decompose",
    "move_vertex_into_set",
    "stage_seconds",
    "sweep_into_set",
]

_MAX_WITNESSES = 10


class TransportOptions(NamedTuple):
    """
    Tuning for the transport stages.

    :param eligible_cap: Use at most this many choices of v' per move,
        lowest first. None uses every eligible vertex.
    :param exact_limit: Largest exact neighbour-richness search.
    :param size: Per-class size of the intermediate set; None picks
        floor(n(1 - 1/8r)) capped by the eligible pool.
    :param diagnostics: Evaluate the magnitude ceilings.
    """

    eligible_cap: Optional[int] = None
    exact_limit: int = 200_000
    size: Optional[int] = None
    diagnostics: bool = True


class TransportReport(NamedTuple):
    """What a transport stage left behind."""

    stage: str
    residual_edges: Dict[Tuple[int, int], Scalar]
    diagnostics: Tuple[BoundCheck, ...]
    gadgets: int
    denominator: Optional[int]
    timings: Tuple[Tuple[str, float], ...] = ()

    def to_text(self) -> str:
        """Render as ``key value`` lines."""
        lines = [
            f"stage {self.stage}",
            f"gadgets {self.gadgets}",
            f"residual_edges {len(self.residual_edges)}",
        ]
        if self.denominator is not None:
            lines.append(f"denominator_digits {len(str(self.denominator))}")
        lines.extend(
            f"diagnostic {check.name} {check.status} checked={check.checked}"
            for check in self.diagnostics
        )
        return "\n".join(lines) + "\n"


def _report(
        stage: str,
        acc: WeightAccumulator,
        *,
        residual: Optional[Dict[Tuple[int, int], Scalar]] = None,
        diagnostics: Sequence[BoundCheck] = (),
        gadgets: int = 0,
        timings: Sequence[Tuple[str, float]] = (),
) -> TransportReport:
    return TransportReport(
        stage=stage,
        residual_edges=residual or {},
        diagnostics=tuple(diagnostics),
        gadgets=gadgets,
        denominator=acc.denominator if acc.backend.exact else None,
        timings=tuple(timings),
    )


TRANSPORT_STAGES = ("move", "sweep", "concentrate")


def stage_seconds(reports: Sequence[TransportReport]) -> Dict[str, float]:
    """Seconds spent in each transport stage itself, summed over reports."""
    totals = dict.fromkeys(TRANSPORT_STAGES, 0.0)
    for report in reports:
        for name, seconds in report.timings:
            totals[name] += seconds
    return totals


def _require_unit_bound(largest: Scalar, backend: NumericBackend, what: str) -> None:
    excess = largest - 1
    if excess > 0 and not backend.is_zero(excess):
        raise DomainError(f"{what} must lie in [-1, 1], found magnitude {largest}")


def _ceiling_check(name: str, magnitudes: np.ndarray, ceilings: np.ndarray) -> BoundCheck:
    """Compare float magnitudes with per-entry ceilings."""
    over = np.flatnonzero(magnitudes > ceilings * (1 + 1e-9))
    witnesses = tuple(
        f"entry {int(x)} magnitude {magnitudes[x]:.6g} ceiling {ceilings[x]:.6g}"
        for x in over[:_MAX_WITNESSES]
    )
    return BoundCheck(name, True, not len(over), len(magnitudes), witnesses)


def _near_complete(g: PartiteGraph, denominator: int) -> bool:
    """n >= denominator and δ̂ >= (1 - 1/denominator)n."""
    if g.n < denominator:
        return False
    return summarize(g).hat_delta >= (1 - Fraction(1, denominator)) * g.n


def _membership(g: PartiteGraph, vertices: Sequence[int]) -> np.ndarray:
    flags = np.zeros(g.order, dtype=bool)
    flags[list(vertices)] = True
    return flags


def _require_rich(
        g: PartiteGraph,
        j: int,
        members: Sequence[int],
        options: TransportOptions,
) -> None:
    mode = check_neighbour_rich(g, j, members, exact_limit=options.exact_limit)
    if mode is None:
        raise NotNeighbourRichError(
            f"Target set of {len(members)} vertices in class {j} "
            f"is not {j}-neighbour-rich",
        )
    LOGGER.debug(f"Class {j} target set of {len(members)} is rich ({mode.value})")


def _eligible(
        g: PartiteGraph,
        s_mask: int,
        vertices: Sequence[int],
        options: TransportOptions,
) -> List[int]:
    mask = s_mask
    for u in vertices:
        mask &= g.rows[u]
    eligible = list(iter_bits(mask))
    if options.eligible_cap is not None:
        eligible = eligible[:options.eligible_cap]
    return eligible


def _apply_plan(
        g: PartiteGraph,
        idx: CliqueIndex,
        plan: CorrectionPlan,
        s_mask: int,
        acc: WeightAccumulator,
        options: TransportOptions,
) -> int:
    """Add the averaged gadgets of every move to ``acc``; returns the gadget count."""
    v = plan.vertex
    j = v.class_index
    gadgets = 0
    for star in plan.star_moves:
        eligible = _eligible(g, s_mask, [g.index(u) for u in star.vertices], options)
        if not eligible:
            raise EmptyIntersectionError(
                f"No target vertex for {v} is adjacent to all of "
                + " ".join(str(u) for u in star.vertices),
            )
        share = star.amount / len(eligible)
        for other in eligible:
            spec = StarGadgetSpec(j, v, g.vertex(other), star.vertices)
            terms = star_terms(g, idx, spec)
            acc.add_terms(terms.cids, terms.numerators, share / terms.helpers)
        gadgets += len(eligible)

    for swap in plan.swap_moves:
        eligible = _eligible(g, s_mask, [g.index(swap.u1), g.index(swap.u2)], options)
        if not eligible:
            raise EmptyIntersectionError(
                f"No target vertex for {v} is adjacent to both {swap.u1} and {swap.u2}",
            )
        share = swap.amount / len(eligible)
        i = swap.u1.class_index
        for other in eligible:
            spec = SwapGadgetSpec(j, i, v, g.vertex(other), swap.u1, swap.u2)
            terms = swap_terms(g, idx, spec)
            acc.add_terms(terms.cids, terms.numerators, share / terms.helpers)
        gadgets += len(eligible)
    return gadgets


def _move(
        g: PartiteGraph,
        idx: CliqueIndex,
        centre: int,
        z: Mapping[VertexLike, Scalar],
        s_mask: int,
        acc: WeightAccumulator,
        options: TransportOptions,
) -> int:
    plan = split_corrections(g, centre, z, acc.backend)
    if not plan.move_count:
        return 0
    if TRACE.isEnabledFor(logging.DEBUG):
        TRACE.debug(plan.to_text().rstrip("\n"))
    return _apply_plan(g, idx, plan, s_mask, acc, options)


def _move_checks(
        g: PartiteGraph,
        idx: CliqueIndex,
        centre: int,
        z: Dict[int, Scalar],
        members: Sequence[int],
        acc: WeightAccumulator,
) -> BoundCheck:
    """Per-clique ceilings of a single move."""
    name = "move_clique_magnitude"
    r, n, k = g.r, g.n, idx.k_total
    if not _near_complete(g, 8 * r * r) or k == 0:
        return BoundCheck(name, False, None, 0, ())

    weights = np.zeros(g.order, dtype=np.float64)
    for u, value in z.items():
        weights[u] = abs(float(value))
    cliques = idx.cliques
    c_values = n * weights[cliques].sum(axis=1) + 2 * weights.sum()
    at_centre = (cliques == centre).any(axis=1)
    meets = _membership(g, members)[cliques].any(axis=1)
    ceilings = np.where(
        at_centre,
        2 * n * c_values / k,
        np.where(meets, 4 * n * c_values / (len(members) * k), 0.0),
    )
    return _ceiling_check(name, acc.magnitudes(), ceilings)


def move_vertex_into_set(
        g: PartiteGraph,
        idx: CliqueIndex,
        v: VertexLike,
        z: Mapping[VertexLike, Scalar],
        target: Sequence[VertexLike],
        *,
        backend: NumericBackend = EXACT_BACKEND,
        options: TransportOptions = TransportOptions(),
        check_rich: bool = True,
) -> Tuple[CliqueWeighting, TransportReport]:
    """
    Realise the corrections around v at the expense of edges at a target set.

    The result has effect z_vu on every edge vu, no effect on an edge
    that misses both v and the target set or misses N(v), and effect at
    most 2|z_vw|/|S| on an edge from the target set S to w ∈ N(v).
    These three properties are checked exactly.

    :param z: Correction per neighbour of v, with equal sums over
        every foreign class and |z_u| <= 1.
    :param target: The set S, inside v's class and not containing v.
    :param check_rich: Verify that S is neighbour-rich first.
    :raises DomainError: S is empty, leaves v's class or contains v, some
        |z_u| exceeds 1, or z is not splittable.
    :raises NotNeighbourRichError: S is not neighbour-rich.
    :raises EmptyIntersectionError: Some move has no eligible v'.
    :raises TransportInvariantError: An exact post-condition failed.
    """
    centre = g.index(v)
    j = centre // g.n
    members = sorted({g.index(x) for x in target})
    if not members:
        raise DomainError("The target set is empty")
    if centre in members or any(x // g.n != j for x in members):
        raise DomainError(
            f"The target set must lie in class {j} and avoid {g.vertex(centre)}",
        )
    values = {g.index(u): backend.scalar(x) for u, x in z.items()}
    largest = max((abs(x) for x in values.values()), default=backend.zero())
    _require_unit_bound(largest, backend, f"Corrections at {g.vertex(centre)}")

    started = time.perf_counter()
    acc = WeightAccumulator(idx, backend)
    try:
        if check_rich:
            _require_rich(g, j, members, options)
        s_mask = sum(1 << x for x in members)
        gadgets = _move(g, idx, centre, values, s_mask, acc, options)
    except FracDecompError as err:
        raise err.add_stage("move")
    moving = time.perf_counter() - started

    effects = acc.edge_effects()
    ends = idx.endpoints
    neighbours = _membership(g, g.neighbours(centre))
    near = _membership(g, members + [centre])
    problems = []

    at_centre = np.flatnonzero((ends == centre).any(axis=1))
    for eid in at_centre.tolist():
        a, b = idx.edges[eid]
        other = b if a == centre else a
        if not backend.equal(effects[eid], values.get(other, backend.zero())):
            problems.append(f"edge {g.vertex(a)}-{g.vertex(b)} has effect {effects[eid]}")

    touches_near = near[ends[:, 0]] | near[ends[:, 1]]
    touches_neighbour = neighbours[ends[:, 0]] | neighbours[ends[:, 1]]
    untouched = ~touches_near | ~touches_neighbour
    stray = np.flatnonzero(untouched & ~backend.zero_mask(effects))
    problems.extend(
        f"edge {idx.edges[eid]} should be untouched"
        for eid in stray[:_MAX_WITNESSES].tolist()
    )

    if options.eligible_cap is None:
        in_s = _membership(g, members)
        bridging = (
            (in_s[ends[:, 0]] & neighbours[ends[:, 1]])
            | (in_s[ends[:, 1]] & neighbours[ends[:, 0]])
        )
        for eid in np.flatnonzero(bridging).tolist():
            a, b = idx.edges[eid]
            w = b if in_s[a] else a
            ceiling = 2 * abs(values.get(w, backend.zero())) / len(members)
            excess = abs(effects[eid]) - ceiling
            if excess > 0 and not backend.is_zero(excess):
                problems.append(
                    f"edge {g.vertex(a)}-{g.vertex(b)} effect {effects[eid]} "
                    f"above {ceiling}",
                )

    if problems:
        raise TransportInvariantError(
            f"Move at {g.vertex(centre)} broke {len(problems)} edge conditions: "
            f"{problems[0]}",
            stage="move",
        )

    diagnostics = []
    if options.diagnostics:
        diagnostics.append(_move_checks(g, idx, centre, values, members, acc))
    report = _report(
        "move",
        acc,
        diagnostics=diagnostics,
        gadgets=gadgets,
        timings=[("move", moving)],
    )
    return acc.to_weighting(), report


class _SweepResult(NamedTuple):
    delta: WeightAccumulator
    residual: CorrectionField
    report: TransportReport


def _sweep_checks(
        g: PartiteGraph,
        idx: CliqueIndex,
        delta: WeightAccumulator,
        edge_effects: np.ndarray,
        inside: np.ndarray,
        size: int,
) -> List[BoundCheck]:
    r, n, k = g.r, g.n, idx.k_total
    if not _near_complete(g, 8 * r * r) or k == 0:
        return [
            BoundCheck("sweep_inside_effect", False, None, 0, ()),
            BoundCheck("sweep_clique_magnitude", False, None, 0, ()),
        ]

    ends = idx.endpoints
    within = inside[ends[:, 0]] & inside[ends[:, 1]]
    effects = np.array([abs(float(x)) for x in edge_effects[within]], dtype=np.float64)
    checks = [
        _ceiling_check(
            "sweep_inside_effect",
            effects,
            np.full(len(effects), 12 * n * n * r * r / (size * size)),
        ),
    ]

    meets = inside[idx.cliques].sum(axis=1)
    if size >= n * r / 2:
        ceilings = np.full(k, 135 * n * n * r * r / k)
    elif size <= n:
        ceilings = np.where(
            meets == 0,
            15 * n * n * r * r / k,
            np.where(
                meets == 1,
                51 * n ** 3 * r * r / (k * size),
                45 * n ** 4 * r * r * meets.astype(np.float64) ** 2 / (k * size * size),
            ),
        )
    else:
        checks.append(BoundCheck("sweep_clique_magnitude", False, None, 0, ()))
        return checks
    checks.append(_ceiling_check("sweep_clique_magnitude", delta.magnitudes(), ceilings))
    return checks


def _sweep(
        g: PartiteGraph,
        idx: CliqueIndex,
        field: CorrectionField,
        members: Sequence[int],
        options: TransportOptions,
) -> _SweepResult:
    started = time.perf_counter()
    backend = field.backend
    r, n = g.r, g.n
    per_class = [[x for x in members if x // n == j] for j in range(r)]
    size = len(members)
    if not per_class[0] or any(len(part) != len(per_class[0]) for part in per_class):
        raise DomainError(
            "The sweep target needs the same positive number of vertices "
            "in every class, got "
            + ", ".join(str(len(part)) for part in per_class),
        )
    for j, part in enumerate(per_class):
        _require_rich(g, j, part, options)
    masks = [sum(1 << x for x in part) for part in per_class]
    inside = _membership(g, members)
    outside = [w for w in range(g.order) if not inside[w]]
    LOGGER.debug(f"Sweeping {len(outside)} vertices into a set of {size}")

    first = WeightAccumulator(idx, backend)
    gadgets = 0
    begun = time.perf_counter()
    try:
        for w in outside:
            gadgets += _move(g, idx, w, field.around(w), masks[w // n], first, options)
    except FracDecompError as err:
        raise err.add_stage("sweep:first")
    moving = time.perf_counter() - begun

    half = Fraction(1, 2)
    after_first = field.minus_effects(first.edge_effects(), first.vertex_effects(), half)
    rescale = Fraction(size, 3 * n * r)
    if TRACE.isEnabledFor(logging.DEBUG):
        TRACE.debug(f"sweep size={size} outside={len(outside)} rescale={rescale}")

    second = WeightAccumulator(idx, backend)
    factor = backend.scalar(rescale)
    begun = time.perf_counter()
    try:
        for w in outside:
            z = {u: x * factor for u, x in after_first.around(w).items()}
            gadgets += _move(g, idx, w, z, masks[w // n], second, options)
    except FracDecompError as err:
        raise err.add_stage("sweep:second")
    moving += time.perf_counter() - begun

    delta = WeightAccumulator(idx, backend)
    delta.add(first, half)
    delta.add(second, 1 / rescale)
    edge_effects = delta.edge_effects()
    residual = field.minus_effects(edge_effects, delta.vertex_effects())

    ends = idx.endpoints
    within = inside[ends[:, 0]] & inside[ends[:, 1]]
    left = ~backend.zero_mask(residual.edge_values)
    broken = np.flatnonzero(~within & left)
    if len(broken):
        a, b = idx.edges[int(broken[0])]
        raise TransportInvariantError(
            f"{len(broken)} edges leaving the target set keep a residue, "
            f"e.g. {g.vertex(a)}-{g.vertex(b)}",
            stage="sweep",
        )
    values = residual.edge_values
    residue = {
        idx.edges[eid]: values[eid]
        for eid in np.flatnonzero(within & left).tolist()
    }
    if TRACE.isEnabledFor(logging.DEBUG):
        TRACE.debug(f"sweep residual_edges={len(residue)} gadgets={gadgets}")

    diagnostics = []
    if options.diagnostics:
        diagnostics = _sweep_checks(g, idx, delta, edge_effects, inside, size)
    report = _report(
        "sweep",
        delta,
        residual=residue,
        diagnostics=diagnostics,
        gadgets=gadgets,
        timings=[("move", moving), ("sweep", time.perf_counter() - started - moving)],
    )
    return _SweepResult(delta, residual, report)


def sweep_into_set(
        g: PartiteGraph,
        idx: CliqueIndex,
        field: CorrectionField,
        target: Sequence[VertexLike],
        *,
        options: TransportOptions = TransportOptions(),
) -> Tuple[CliqueWeighting, TransportReport]:
    """
    Realise a correction field on every edge that leaves a target set.

    Every vertex w outside V moves its corrections into V ∩ V_j(w) at
    half strength, which settles the edges between two outside vertices.
    A second round moves what is left on the edges from outside into V,
    scaled by |V|/3nr and scaled back afterwards. Edges leaving V then
    carry exactly their correction, which is checked; the residues on
    edges inside V are reported.

    :param field: Corrections with |z_e| <= 1 on every edge.
    :param target: V, with |V ∩ V_j| = |V|/r and each V ∩ V_j
        j-neighbour-rich.
    :raises DomainError: V is not balanced or is empty, or some |z_e|
        exceeds 1.
    :raises NotNeighbourRichError: Some V ∩ V_j is not neighbour-rich.
    :raises TransportInvariantError: An edge leaving V keeps a residue.
    """
    _require_unit_bound(field.max_abs(), field.backend, "Edge corrections")
    members = sorted({g.index(x) for x in target})
    result = _sweep(g, idx, field, members, options)
    return result.delta.to_weighting(), result.report


def _intermediate_set(
        g: PartiteGraph,
        idx: CliqueIndex,
        anchor: int,
        size: Optional[int],
) -> List[int]:
    """
    The anchor's vertices plus, in each class, the lowest common neighbours
    of the other anchor vertices.

    :raises IntermediateSetTooSmall: The pools cannot supply ``size`` vertices
        per class, or fewer than two.
    """
    r, n = g.r, g.n
    vertices = idx.cliques[anchor].tolist()
    pools = []
    for i, own in enumerate(vertices):
        mask = g.class_mask(i)
        for other in vertices:
            if other != own:
                mask &= g.rows[other]
        pools.append([x for x in iter_bits(mask) if x != own])

    smallest = 1 + min(len(pool) for pool in pools)
    if size is None:
        chosen = min((n * (8 * r - 1)) // (8 * r), smallest)
    elif size > smallest:
        raise IntermediateSetTooSmall(
            f"Asked for {size} vertices per class but the smallest "
            f"eligible pool allows {smallest}",
        )
    else:
        chosen = size
    if chosen < 2:
        raise IntermediateSetTooSmall(
            f"Intermediate set would have {chosen} vertices per class",
        )

    members = []
    for own, pool in zip(vertices, pools):
        members.append(own)
        members.extend(pool[:chosen - 1])
    return sorted(members)


def _fri_checks(
        g: PartiteGraph,
        idx: CliqueIndex,
        phi: WeightAccumulator,
        anchor: int,
) -> BoundCheck:
    name = "anchor_clique_magnitude"
    r, n, k = g.r, g.n, idx.k_total
    if not _near_complete(g, 16 * r * r):
        return BoundCheck(name, False, None, 0, ())
    shared = np.isin(idx.cliques, idx.cliques[anchor]).sum(axis=1).astype(np.float64)
    ceilings = np.where(
        shared == 0,
        1e3 * n * n * r * r / k,
        np.where(shared == 1, 1e4 * n ** 3 * r / k, 1e4 * n ** 4 * shared ** 2 / (4 * k)),
    )
    return _ceiling_check(name, phi.magnitudes(), ceilings)


def _concentrate(
        g: PartiteGraph,
        idx: CliqueIndex,
        field: CorrectionField,
        anchor: int,
        options: TransportOptions,
) -> Tuple[WeightAccumulator, TransportReport]:
    backend = field.backend
    if not 0 <= anchor < idx.k_total:
        raise DomainError(f"No clique with id {anchor}")
    problems = field.violations(class_sums=True)
    if problems:
        raise DomainError(f"Correction field is not admissible: {problems[0]}")

    started = time.perf_counter()
    phi = WeightAccumulator(idx, backend)
    if field.is_zero():
        return phi, _report("concentrate", phi)

    members = _intermediate_set(g, idx, anchor, options.size)
    LOGGER.debug(f"Anchor {anchor}: intermediate set of {len(members) // g.r} per class")
    if TRACE.isEnabledFor(logging.DEBUG):
        TRACE.debug(f"concentrate anchor={anchor} size={len(members) // g.r}")

    try:
        outer = _sweep(g, idx, field, members, options)
    except FracDecompError as err:
        raise err.add_stage("concentrate:outer")

    sub, new_to_old = g.induced(members)
    sub_idx = CliqueIndex.build(sub)
    inner_field = outer.residual.restricted(sub_idx, new_to_old).scaled(Fraction(1, 25))
    position = {old: new for new, old in enumerate(new_to_old)}
    anchor_members = sorted(position[x] for x in idx.cliques[anchor].tolist())
    if TRACE.isEnabledFor(logging.DEBUG):
        TRACE.debug(f"concentrate inner order={sub.order} rescale=1/25")

    try:
        inner = _sweep(sub, sub_idx, inner_field, anchor_members, options)
    except FracDecompError as err:
        raise err.add_stage("concentrate:inner")

    id_map = idx.lookup(np.asarray(new_to_old, dtype=np.int64)[sub_idx.cliques])
    phi.add(outer.delta)
    phi.add(inner.delta, 25, id_map=id_map)

    mismatch = np.flatnonzero(~backend.zero_mask(field.edge_values - phi.edge_effects()))
    if len(mismatch):
        a, b = idx.edges[int(mismatch[0])]
        raise TransportInvariantError(
            f"{len(mismatch)} edges miss their correction after concentration, "
            f"e.g. {g.vertex(a)}-{g.vertex(b)}",
            stage="concentrate",
        )

    diagnostics = list(outer.report.diagnostics) + list(inner.report.diagnostics)
    if options.diagnostics:
        diagnostics.append(_fri_checks(g, idx, phi, anchor))
    timings = stage_seconds([outer.report, inner.report])
    nested = timings["move"] + timings["sweep"]
    timings["concentrate"] = time.perf_counter() - started - nested
    report = _report(
        "concentrate",
        phi,
        diagnostics=diagnostics,
        gadgets=outer.report.gadgets + inner.report.gadgets,
        timings=list(timings.items()),
    )
    return phi, report


def concentrate_on_clique(
        g: PartiteGraph,
        idx: CliqueIndex,
        field: CorrectionField,
        anchor: int,
        *,
        options: TransportOptions = TransportOptions(),
) -> Tuple[CliqueWeighting, TransportReport]:
    """
    Realise a whole correction field, routing all residues onto one clique.

    The field must have zero vertex sums in every class. The result's
    effect on every edge equals the field's value there, which is checked.

    :param anchor: Id of the anchor clique.
    :raises DomainError: The anchor does not exist or the field is not admissible.
    :raises IntermediateSetTooSmall: Too few common neighbours of the anchor.
    :raises TransportInvariantError: Some edge missed its correction.
    """
    phi, report = _concentrate(g, idx, field, anchor, options)
    return phi.to_weighting(), report


class AnchorKind(Enum):
    """Which cliques to concentrate on."""

    SINGLE = "single"
    SAMPLE = "sample"
    ALL = "all"


class AnchorMode(NamedTuple):
    """
    The set of anchor cliques averaged over.

    Written as ``single``, ``single:<id>``, ``sample:<count>:<seed>`` or ``all``.
    """

    kind: AnchorKind
    clique: Optional[int] = None
    samples: Optional[int] = None
    seed: Optional[int] = None

    @classmethod
    def single(cls, clique: Optional[int] = None) -> "AnchorMode":
        """One anchor, the first clique by default."""
        return cls(AnchorKind.SINGLE, clique=clique)

    @classmethod
    def sample(cls, count: int, seed: int) -> "AnchorMode":
        """``count`` pseudorandom anchors."""
        if count < 1:
            raise DomainError(f"Need at least one sampled anchor, got {count}")
        return cls(AnchorKind.SAMPLE, samples=count, seed=seed)

    @classmethod
    def all(cls) -> "AnchorMode":
        """Every clique."""
        return cls(AnchorKind.ALL)

    @classmethod
    def parse(cls, text: str) -> "AnchorMode":
        """
        Parse an anchor mode.

        :raises DomainError: The text is not a valid mode.
        """
        parts = text.strip().split(":")
        try:
            kind = AnchorKind(parts[0])
            if kind is AnchorKind.SINGLE and len(parts) <= 2:
                return cls.single(int(parts[1]) if len(parts) == 2 else None)
            if kind is AnchorKind.SAMPLE and len(parts) == 3:
                return cls.sample(int(parts[1]), int(parts[2]))
            if kind is AnchorKind.ALL and len(parts) == 1:
                return cls.all()
        except ValueError:
            pass
        raise DomainError(
            f"Malformed anchor mode {text!r}, "
            f"expected single[:id], sample:count:seed or all",
        )

    def __str__(self) -> str:
        if self.kind is AnchorKind.SINGLE:
            return "single" if self.clique is None else f"single:{self.clique}"
        if self.kind is AnchorKind.SAMPLE:
            return f"sample:{self.samples}:{self.seed}"
        return "all"

    def resolve(self, idx: CliqueIndex) -> List[int]:
        """
        The anchor clique ids, ascending.

        :raises DomainError: A named clique does not exist.
        """
        k = idx.k_total
        if self.kind is AnchorKind.SINGLE:
            clique = 0 if self.clique is None else self.clique
            if not 0 <= clique < k:
                raise DomainError(f"No clique with id {clique} among {k}")
            return [clique]
        if self.kind is AnchorKind.SAMPLE:
            assert self.samples is not None
            return sorted(random.Random(self.seed).sample(range(k), min(self.samples, k)))
        return list(range(k))


class Certificate(NamedTuple):
    """Summary of a decomposition run."""

    r: int
    n: int
    k: int
    e: int
    anchors: int
    anchor_mode: str
    backend: str
    max_abs_deviation: Scalar
    min_weight: Optional[Scalar]
    negative_count: int
    edge_sums_exact: bool
    verdict: bool
    denominator_digits: Optional[int]
    diagnostics: Tuple[Tuple[str, str], ...]
    timings: Tuple[Tuple[str, float], ...]

    def to_text(self, *, timings: bool = False) -> str:
        """
        Render as ``key value`` lines in a fixed order.

        :param timings: Include wall-clock timings, which vary between runs.
        """
        backend = get_backend(self.backend)
        minimum = "none" if self.min_weight is None else backend.format(self.min_weight)
        lines = [
            f"r {self.r}",
            f"n {self.n}",
            f"k {self.k}",
            f"e {self.e}",
            f"anchors {self.anchors}",
            f"anchor_mode {self.anchor_mode}",
            f"backend {self.backend}",
            f"max_abs_deviation {backend.format(self.max_abs_deviation)}",
            f"min_weight {minimum}",
            f"negative_count {self.negative_count}",
            f"edge_sums_exact {str(self.edge_sums_exact).lower()}",
        ]
        if self.denominator_digits is not None:
            lines.append(f"denominator_digits {self.denominator_digits}")
        lines.extend(f"diagnostic {name} {status}" for name, status in self.diagnostics)
        if timings:
            lines.extend(f"time_{name} {seconds:.3f}" for name, seconds in self.timings)
        lines.append(f"fractional_decomposition {str(self.verdict).lower()}")
        return "\n".join(lines) + "\n"


class Decomposition(NamedTuple):
    """A decomposition run: the weighting, its certificate and the stage reports."""

    weighting: CliqueWeighting
    certificate: Certificate
    reports: Tuple[TransportReport, ...]

    def transport_timings(self) -> Tuple[Tuple[str, float], ...]:
        """Seconds in the move, sweep and concentrate stages over all anchors."""
        return tuple(stage_seconds(self.reports).items())


# Per-process anchor loop state; cleared after a serial run
_WORKER: Dict[str, Any] = {}


def _init_worker(
        g: PartiteGraph,
        cliques: np.ndarray,
        edge_values: np.ndarray,
        vertex_values: np.ndarray,
        backend_name: str,
        options: TransportOptions,
) -> None:
    backend = get_backend(backend_name)
    idx = CliqueIndex(g, cliques)
    _WORKER["g"] = g
    _WORKER["idx"] = idx
    _WORKER["field"] = CorrectionField(idx, edge_values, vertex_values, backend)
    _WORKER["options"] = options


def _anchor_job(anchor: int) -> Tuple[np.ndarray, int, TransportReport]:
    try:
        phi, report = _concentrate(
            _WORKER["g"],
            _WORKER["idx"],
            _WORKER["field"],
            anchor,
            _WORKER["options"],
        )
    except FracDecompError as err:
        raise err.add_stage(f"anchor:{anchor}")
    numerators, denominator = phi.parts()
    return numerators, denominator, report


def _summarise_diagnostics(
        reports: Sequence[TransportReport],
) -> Tuple[Tuple[str, str], ...]:
    """Worst status per diagnostic name: fail over pass over not applicable."""
    rank = {"not applicable": 0, "pass": 1, "fail": 2}
    worst: Dict[str, str] = {}
    for report in reports:
        for check in report.diagnostics:
            current = worst.get(check.name, "not applicable")
            if rank[check.status] >= rank[current]:
                worst[check.name] = check.status
    return tuple(sorted(worst.items()))


def decompose(
        g: PartiteGraph,
        mode: AnchorMode = AnchorMode.single(),
        backend: NumericBackend = EXACT_BACKEND,
        *,
        idx: Optional[CliqueIndex] = None,
        workers: int = 1,
        options: TransportOptions = TransportOptions(),
) -> Decomposition:
    """
    Build a weighting whose effect on every edge is 1.

    Start from the uniform weighting e(G)/(C(r,2) k), realise its
    corrections by concentrating them on every anchor, and subtract the
    average of those weightings.

    :param mode: Anchors to average over.
    :param idx: A prebuilt clique index of g.
    :param workers: Processes for clique enumeration and the anchor loop.
    :raises DivisibilityError: g is not K_r-divisible.
    :raises NoCliquesError: g has edges but no cliques.
    """
    timings: List[Tuple[str, float]] = []
    started = time.perf_counter()
    if not summarize(g).divisible:
        raise DivisibilityError(f"{g!r} is not K_{g.r}-divisible")
    if idx is None:
        idx = CliqueIndex.build(g, workers=workers)
    timings.append(("enumerate", time.perf_counter() - started))
    k, e = idx.k_total, g.edge_count()
    if k == 0 and e:
        raise NoCliquesError(f"{g!r} has {e} edges but no transversal {g.r}-cliques")

    started = time.perf_counter()
    weighting = uniform_init(g, idx, backend)
    field = corrections(g, idx, backend)
    anchors = mode.resolve(idx) if k else []
    timings.append(("corrections", time.perf_counter() - started))
    LOGGER.info(
        f"Decomposing {g!r}: {k} cliques, {e} edges, {len(anchors)} anchors ({mode})",
    )

    started = time.perf_counter()
    reports: List[TransportReport] = []
    total = WeightAccumulator(idx, backend)
    if anchors and not field.is_zero():
        args = (
            g,
            idx.cliques,
            field.edge_values,
            field.vertex_values,
            backend.name,
            options,
        )
        if workers > 1 and len(anchors) > 1:
            with ProcessPoolExecutor(
                    max_workers=workers,
                    initializer=_init_worker,
                    initargs=args,
            ) as pool:
                results = list(pool.map(_anchor_job, anchors))
        else:
            _init_worker(*args)
            try:
                results = [_anchor_job(anchor) for anchor in anchors]
            finally:
                _WORKER.clear()
        for numerators, denominator, report in results:
            total.add_parts(numerators, denominator)
            reports.append(report)
        weighting = weighting.plus(total, Fraction(-1, len(anchors)))
    else:
        LOGGER.info("Corrections vanish, the uniform weighting is a decomposition")
    timings.append(("transport", time.perf_counter() - started))

    started = time.perf_counter()
    effects = weighting.edge_effects()
    deviation = [abs(x - 1) for x in effects.tolist()]
    max_deviation = max(deviation, default=backend.zero())
    exact = all(backend.is_zero(x, tolerance=backend.verify_tolerance) for x in deviation)
    min_weight = weighting.min_weight()
    negatives = weighting.negative_count()
    verdict = exact and negatives == 0
    digits = None
    if backend.exact:
        largest = max(
            (Fraction(x).denominator for x in weighting.values.tolist()),
            default=1,
        )
        digits = len(str(largest))
    timings.append(("verify", time.perf_counter() - started))

    certificate = Certificate(
        r=g.r,
        n=g.n,
        k=k,
        e=e,
        anchors=len(anchors),
        anchor_mode=str(mode),
        backend=backend.name,
        max_abs_deviation=backend.scalar(max_deviation),
        min_weight=min_weight,
        negative_count=negatives,
        edge_sums_exact=exact,
        verdict=verdict,
        denominator_digits=digits,
        diagnostics=_summarise_diagnostics(reports),
        timings=tuple(timings),
    )
    LOGGER.info(
        f"Decomposition verdict {verdict}: max deviation "
        f"{backend.format(certificate.max_abs_deviation)}, "
        f"{negatives} negative weights",
    )
    return Decomposition(weighting, certificate, tuple(reports))
