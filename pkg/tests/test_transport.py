"""Test moving corrections into a set, sweeping, and concentrating on a clique."""
import random
from fractions import Fraction
from typing import Dict, List, Tuple

import pytest

from partite.fracdecomp.backend import EXACT_BACKEND, FLOAT_BACKEND, NumericBackend
from partite.fracdecomp.cliques import CliqueIndex
from partite.fracdecomp.errors import (
    DomainError,
    EmptyIntersectionError,
    IntermediateSetTooSmall,
    NotNeighbourRichError,
)
from partite.fracdecomp.graph import PartiteGraph, VertexId
from partite.fracdecomp.transport import (
    AnchorKind,
    AnchorMode,
    TransportOptions,
    concentrate_on_clique,
    move_vertex_into_set,
    sweep_into_set,
)
from partite.fracdecomp.weighting import CorrectionField, corrections

QUIET = TransportOptions(diagnostics=False)


def sparse_corrections(
        g: PartiteGraph,
        v: int,
        rng: random.Random,
) -> Dict[int, Fraction]:
    """Three nonzero entries in [-1, 1] per foreign class, all classes summing alike."""
    total = Fraction(rng.randint(-1, 1), rng.randint(2, 4))
    z: Dict[int, Fraction] = {}
    for c in range(g.r):
        if c == v // g.n:
            continue
        chosen = rng.sample(g.neighbours(v, c), 3)
        for u in chosen[:2]:
            z[u] = Fraction(rng.choice([-1, 1]), rng.randint(4, 8))
        z[chosen[2]] = total - z[chosen[0]] - z[chosen[1]]
    return z


def first_per_class(g: PartiteGraph, size: int) -> List[int]:
    """The lowest ``size`` vertices of every class."""
    return [j * g.n + x for j in range(g.r) for x in range(size)]


def admissible_field(idx: CliqueIndex, rng: random.Random) -> CorrectionField:
    """
    A random field with zero class sums and every entry in [-1, 1].

    Alternating 4-cycles between two classes leave every z_v at 0. A
    clique raised by x and another lowered by x shift z_v on their
    vertices but keep every class sum at 0.
    """
    g = idx.graph
    n = g.n
    values = EXACT_BACKEND.zeros(idx.edge_count)
    for _ in range(8):
        i, j = rng.sample(range(g.r), 2)
        a, b = rng.sample(range(i * n, (i + 1) * n), 2)
        u, w = rng.sample(range(j * n, (j + 1) * n), 2)
        if not all(g.adjacent(x, y) for x in (a, b) for y in (u, w)):
            continue
        x = Fraction(rng.randint(1, 4), rng.randint(1, 4))
        for edge, sign in (((a, u), 1), ((b, w), 1), ((a, w), -1), ((b, u), -1)):
            values[idx.edge_id(edge)] += sign * x
    for _ in range(2):
        raised, lowered = rng.sample(range(idx.k_total), 2)
        x = Fraction(rng.randint(1, 4), rng.randint(1, 4))
        for eid in idx.clique_edges[raised].tolist():
            values[eid] += x
        for eid in idx.clique_edges[lowered].tolist():
            values[eid] -= x
    largest = max(abs(x) for x in values.tolist())
    if largest > 1:
        values = EXACT_BACKEND.array(x / largest for x in values.tolist())
    return CorrectionField.from_edge_values(idx, values)


def test_move_on_k333(k333: PartiteGraph) -> None:
    """Test one swap realised through two target vertices."""
    idx = CliqueIndex.build(k333)
    v = VertexId(0, 0)
    z = {VertexId(1, 0): Fraction(1), VertexId(1, 1): Fraction(-1)}
    target = [VertexId(0, 1), VertexId(0, 2)]

    w, report = move_vertex_into_set(k333, idx, v, z, target)

    assert w.edge_effect((v, VertexId(1, 0))) == 1
    assert w.edge_effect((v, VertexId(1, 1))) == -1
    assert w.edge_effect((v, VertexId(2, 0))) == 0
    assert w.edge_effect((VertexId(0, 1), VertexId(1, 0))) == Fraction(-1, 2)
    assert w.edge_effect((VertexId(0, 2), VertexId(1, 1))) == Fraction(1, 2)
    assert w.is_zero_sum()
    assert report.stage == "move"
    assert report.gadgets == 2
    assert report.residual_edges == {}
    assert [name for name, _ in report.timings] == ["move"]


def test_star_move_on_k333(k333: PartiteGraph) -> None:
    """Test one star realised through both other vertices of v's class."""
    idx = CliqueIndex.build(k333)
    v = VertexId(2, 0)
    star = [VertexId(0, 0), VertexId(1, 0)]
    target = [VertexId(2, 1), VertexId(2, 2)]

    w, report = move_vertex_into_set(k333, idx, v, {u: 1 for u in star}, target)

    for u in star:
        assert w.edge_effect((v, u)) == 1
        for other in target:
            assert w.edge_effect((other, u)) == Fraction(-1, 2)
    for u in (VertexId(0, 1), VertexId(1, 2)):
        assert w.edge_effect((v, u)) == 0
    assert w.edge_effect(tuple(star)) == 0
    assert w.is_zero_sum()
    assert report.gadgets == 2


@pytest.mark.parametrize("seed", range(50))
def test_move_edge_conditions(
        g12: PartiteGraph,
        g12_index: CliqueIndex,
        seed: int,
) -> None:
    """Test the three edge conditions of a move on random corrections."""
    rng = random.Random(seed)
    v = rng.randrange(g12.order)
    j = v // g12.n
    z = sparse_corrections(g12, v, rng)
    target = [x for x in range(j * 12, (j + 1) * 12) if x != v]

    w, _ = move_vertex_into_set(g12, g12_index, v, z, target, options=QUIET)

    effects = w.edge_effects()
    neighbours = set(g12.neighbours(v))
    near = set(target) | {v}
    for eid, (a, b) in enumerate(g12_index.edges):
        if v in (a, b):
            assert effects[eid] == z.get(b if a == v else a, 0)
        elif not ({a, b} & near and {a, b} & neighbours):
            assert effects[eid] == 0
        else:
            u = b if a in near else a
            assert abs(effects[eid]) <= 2 * abs(z.get(u, Fraction(0))) / len(target)
    assert w.is_zero_sum()


def test_move_float_backend(g12: PartiteGraph, g12_index: CliqueIndex) -> None:
    """Test that the float backend meets the edge conditions within tolerance."""
    rng = random.Random(99)
    z = sparse_corrections(g12, 5, rng)
    target = list(range(6, 12))
    w, report = move_vertex_into_set(
        g12,
        g12_index,
        5,
        z,
        target,
        backend=FLOAT_BACKEND,
        options=QUIET,
    )
    for u, value in z.items():
        assert w.edge_effect((5, u)) == pytest.approx(float(value), abs=1e-9)
    assert report.denominator is None


def test_move_target_errors(k333: PartiteGraph) -> None:
    """Test that bad target sets are refused."""
    idx = CliqueIndex.build(k333)
    v = VertexId(0, 0)
    with pytest.raises(DomainError):
        move_vertex_into_set(k333, idx, v, {}, [])
    with pytest.raises(DomainError):
        move_vertex_into_set(k333, idx, v, {}, [v, VertexId(0, 1)])
    with pytest.raises(DomainError):
        move_vertex_into_set(k333, idx, v, {}, [VertexId(1, 1)])


def test_move_not_rich(cycle: PartiteGraph) -> None:
    """Test that a target set that is not neighbour-rich is refused."""
    idx = CliqueIndex.build(cycle)
    with pytest.raises(NotNeighbourRichError) as info:
        move_vertex_into_set(cycle, idx, VertexId(0, 0), {}, [VertexId(0, 1)])
    assert info.value.stage == "move"
    assert str(info.value).startswith("[move] ")


def test_move_empty_intersection() -> None:
    """Test that a move without a usable v' fails when richness is not checked."""
    g = PartiteGraph.complete(3, 3)
    rows = list(g.rows)
    rows[1] &= ~(1 << 3)
    rows[3] &= ~(1 << 1)
    g = PartiteGraph(3, 3, rows)
    idx = CliqueIndex.build(g)
    z = {VertexId(1, 0): 1, VertexId(1, 1): -1}
    with pytest.raises(EmptyIntersectionError):
        move_vertex_into_set(
            g,
            idx,
            VertexId(0, 0),
            z,
            [VertexId(0, 1)],
            check_rich=False,
        )


def test_move_unsplittable(k333: PartiteGraph) -> None:
    """Test that corrections with unequal class sums are refused."""
    idx = CliqueIndex.build(k333)
    with pytest.raises(DomainError):
        move_vertex_into_set(
            k333,
            idx,
            VertexId(0, 0),
            {VertexId(1, 0): 1},
            [VertexId(0, 1), VertexId(0, 2)],
        )


@pytest.fixture(scope="module")
def k72() -> Tuple[PartiteGraph, CliqueIndex]:
    """K_{72,72,72}, the smallest complete host where the move ceilings apply."""
    g = PartiteGraph.complete(3, 72)
    return g, CliqueIndex.build(g)


def test_move_magnitudes_applicable(k72: Tuple[PartiteGraph, CliqueIndex]) -> None:
    """Test that a swap at n = 8r^2 meets every per-clique ceiling."""
    g, idx = k72
    v = VertexId(0, 0)
    z = {VertexId(1, 0): Fraction(1, 2), VertexId(1, 1): Fraction(-1, 2)}
    target = [VertexId(0, x) for x in range(1, 72)]

    w, report = move_vertex_into_set(g, idx, v, z, target)

    (check,) = report.diagnostics
    assert check.name == "move_clique_magnitude"
    assert check.applicable
    assert check.passed
    assert check.status == "pass"
    assert check.checked == idx.k_total
    assert check.witnesses == ()
    assert report.gadgets == 71
    assert w.edge_effect((v, VertexId(1, 0))) == Fraction(1, 2)
    assert w.edge_effect((VertexId(0, 5), VertexId(1, 1))) == Fraction(1, 142)


@pytest.mark.parametrize("backend", [EXACT_BACKEND, FLOAT_BACKEND])
def test_move_corrections_above_one(k333: PartiteGraph, backend: NumericBackend) -> None:
    """Test that a correction outside [-1, 1] is refused before any gadget runs."""
    idx = CliqueIndex.build(k333)
    z = {VertexId(1, 0): 5, VertexId(1, 1): -5}
    target = [VertexId(0, 1), VertexId(0, 2)]
    with pytest.raises(DomainError):
        move_vertex_into_set(k333, idx, VertexId(0, 0), z, target, backend=backend)

    z = {VertexId(1, 0): Fraction(11, 10), VertexId(1, 1): Fraction(-11, 10)}
    with pytest.raises(DomainError):
        move_vertex_into_set(k333, idx, VertexId(0, 0), z, target, backend=backend)


def test_move_float_tolerance(k333: PartiteGraph) -> None:
    """Test that the float backend accepts 1 plus rounding error."""
    idx = CliqueIndex.build(k333)
    z = {VertexId(1, 0): 1 + 1e-12, VertexId(1, 1): -1 - 1e-12}
    target = [VertexId(0, 1), VertexId(0, 2)]
    w, _ = move_vertex_into_set(
        k333,
        idx,
        VertexId(0, 0),
        z,
        target,
        backend=FLOAT_BACKEND,
        options=QUIET,
    )
    assert w.edge_effect((VertexId(0, 0), VertexId(1, 0))) == pytest.approx(1)


def test_sweep_corrections_above_one(g12: PartiteGraph, g12_index: CliqueIndex) -> None:
    """Test that a sweep refuses a field with an entry outside [-1, 1]."""
    field = corrections(g12, g12_index)
    field = field.scaled(Fraction(3, 2) / field.max_abs())
    with pytest.raises(DomainError):
        sweep_into_set(g12, g12_index, field, first_per_class(g12, 8), options=QUIET)


def test_sweep(g12: PartiteGraph, g12_index: CliqueIndex) -> None:
    """Test that a sweep settles every edge leaving the target set exactly."""
    field = corrections(g12, g12_index)
    target = first_per_class(g12, 8)
    inside = set(target)

    w, report = sweep_into_set(g12, g12_index, field, target, options=QUIET)

    effects = w.edge_effects()
    z = field.edge_values
    for eid, (a, b) in enumerate(g12_index.edges):
        residue = z[eid] - effects[eid]
        if a in inside and b in inside:
            assert report.residual_edges.get((a, b), 0) == residue
        else:
            assert residue == 0
    assert report.stage == "sweep"
    assert report.gadgets > 0
    assert report.denominator is not None
    assert w.is_zero_sum()


def test_sweep_unbalanced(g12: PartiteGraph, g12_index: CliqueIndex) -> None:
    """Test that a target with unequal class parts is refused."""
    field = corrections(g12, g12_index)
    target = first_per_class(g12, 8)[1:]
    with pytest.raises(DomainError):
        sweep_into_set(g12, g12_index, field, target)


def test_sweep_not_rich(g12: PartiteGraph, g12_index: CliqueIndex) -> None:
    """Test that one vertex per class is too small to be neighbour-rich."""
    field = corrections(g12, g12_index)
    target = first_per_class(g12, 1)
    with pytest.raises(NotNeighbourRichError):
        sweep_into_set(g12, g12_index, field, target)


def test_concentrate(g12: PartiteGraph, g12_index: CliqueIndex) -> None:
    """Test that concentration realises the whole field on every edge."""
    field = corrections(g12, g12_index)

    w, report = concentrate_on_clique(g12, g12_index, field, 0)

    assert w.edge_effects().tolist() == field.edge_values.tolist()
    assert w.is_zero_sum()
    assert report.stage == "concentrate"
    assert report.residual_edges == {}
    names = {check.name for check in report.diagnostics}
    assert "anchor_clique_magnitude" in names
    assert all(not check.applicable for check in report.diagnostics)
    assert [name for name, _ in report.timings] == ["move", "sweep", "concentrate"]
    assert all(seconds >= 0 for _, seconds in report.timings)


def test_concentrate_k444_synthetic_field() -> None:
    """Test concentration of a synthetic field on the complete K_{4,4,4}."""
    g = PartiteGraph.complete(3, 4)
    idx = CliqueIndex.build(g)
    field = admissible_field(idx, random.Random(444))
    assert not field.is_zero()
    assert field.max_abs() <= 1
    assert field.violations(class_sums=True) == []

    w, report = concentrate_on_clique(g, idx, field, 0, options=QUIET)

    assert w.edge_effects().tolist() == field.edge_values.tolist()
    assert w.is_zero_sum()
    assert report.residual_edges == {}


@pytest.mark.parametrize("seed", range(12))
@pytest.mark.parametrize("host", ["k444", "g12"])
def test_concentrate_random_fields(
        g12: PartiteGraph,
        g12_index: CliqueIndex,
        host: str,
        seed: int,
) -> None:
    """Test that random admissible fields are realised exactly on every edge."""
    if host == "g12":
        g, idx = g12, g12_index
    else:
        g = PartiteGraph.complete(3, 4)
        idx = CliqueIndex.build(g)
    rng = random.Random(seed)
    field = admissible_field(idx, rng)
    anchor = rng.randrange(idx.k_total)

    w, _ = concentrate_on_clique(g, idx, field, anchor, options=QUIET)

    effects = w.edge_effects().tolist()
    for eid, value in enumerate(field.edge_values.tolist()):
        assert effects[eid] == value, idx.edges[eid]


def test_concentrate_smaller_intermediate_set(
        g12: PartiteGraph,
        g12_index: CliqueIndex,
) -> None:
    """Test concentration through a six-per-class intermediate set and another anchor."""
    field = corrections(g12, g12_index)
    anchor = g12_index.k_total - 1
    w, _ = concentrate_on_clique(
        g12,
        g12_index,
        field,
        anchor,
        options=TransportOptions(size=6, diagnostics=False),
    )
    assert w.edge_effects().tolist() == field.edge_values.tolist()


@pytest.mark.parametrize("size", [1, 12])
def test_intermediate_set_size(
        g12: PartiteGraph,
        g12_index: CliqueIndex,
        size: int,
) -> None:
    """Test that intermediate sets below two or above the common pool are refused."""
    field = corrections(g12, g12_index)
    with pytest.raises(IntermediateSetTooSmall):
        options = TransportOptions(size=size)
        concentrate_on_clique(g12, g12_index, field, 0, options=options)


def test_concentrate_zero_field(k333: PartiteGraph) -> None:
    """Test that a zero field needs no gadgets."""
    idx = CliqueIndex.build(k333)
    w, report = concentrate_on_clique(k333, idx, CorrectionField.zeros(idx), 3)
    assert w.values.tolist() == [0] * 27
    assert report.gadgets == 0


def test_concentrate_errors(g12: PartiteGraph, g12_index: CliqueIndex) -> None:
    """Test that a missing anchor or an inadmissible field is refused."""
    field = corrections(g12, g12_index)
    with pytest.raises(DomainError):
        concentrate_on_clique(g12, g12_index, field, g12_index.k_total)
    values = field.edge_values
    values[0] += 1
    broken = CorrectionField(g12_index, values, field.vertex_values)
    with pytest.raises(DomainError):
        concentrate_on_clique(g12, g12_index, broken, 0)


@pytest.mark.parametrize("text,expected", [
    ("single", AnchorMode(AnchorKind.SINGLE)),
    ("single:7", AnchorMode(AnchorKind.SINGLE, clique=7)),
    ("sample:3:42", AnchorMode(AnchorKind.SAMPLE, samples=3, seed=42)),
    ("all", AnchorMode(AnchorKind.ALL)),
])
def test_anchor_mode_parse(text: str, expected: AnchorMode) -> None:
    """Test parsing anchor modes and writing them back."""
    mode = AnchorMode.parse(text)
    assert mode == expected
    assert str(mode) == text


@pytest.mark.parametrize(
    "text",
    ["", "one", "single:x", "sample:3", "sample:0:1", "all:2"],
)
def test_anchor_mode_errors(text: str) -> None:
    """Test that malformed anchor modes are refused."""
    with pytest.raises(DomainError):
        AnchorMode.parse(text)


def test_anchor_mode_resolve(k333: PartiteGraph) -> None:
    """Test which clique ids each mode picks."""
    idx = CliqueIndex.build(k333)
    assert AnchorMode.single().resolve(idx) == [0]
    assert AnchorMode.single(26).resolve(idx) == [26]
    assert AnchorMode.all().resolve(idx) == list(range(27))
    picked = AnchorMode.sample(5, seed=1).resolve(idx)
    assert picked == sorted(set(picked))
    assert len(picked) == 5
    assert picked == AnchorMode.sample(5, seed=1).resolve(idx)
    assert len(AnchorMode.sample(40, seed=1).resolve(idx)) == 27
    with pytest.raises(DomainError):
        AnchorMode.single(27).resolve(idx)


def test_transport_options_defaults() -> None:
    """Test that the defaults use every eligible vertex and run diagnostics."""
    options = TransportOptions()
    assert options.eligible_cap is None
    assert options.size is None
    assert options.diagnostics
    assert options.exact_limit == 200_000
