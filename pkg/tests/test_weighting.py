"""Test clique weightings and correction fields."""
import random
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from partite.fracdecomp.backend import EXACT_BACKEND, FLOAT_BACKEND
from partite.fracdecomp.cliques import CliqueIndex
from partite.fracdecomp.errors import (
    DivisibilityError,
    DomainError,
    IndexMismatchError,
    NoCliquesError,
    WeightingFormatError,
)
from partite.fracdecomp.graph import PartiteGraph, VertexId, generate_divisible
from partite.fracdecomp.weighting import (
    CliqueWeighting,
    CorrectionField,
    SparseWeighting,
    WeightAccumulator,
    corrections,
    dump_weighting,
    edge_effect,
    is_zero_sum,
    load_weighting,
    read_weighting,
    uniform_init,
    write_weighting,
)


def random_weighting(idx: CliqueIndex, seed: int) -> CliqueWeighting:
    """Small random rational weights."""
    rng = random.Random(seed)
    return CliqueWeighting(
        idx,
        EXACT_BACKEND.array(
            Fraction(rng.randint(-9, 9), rng.randint(1, 6)) for _ in range(idx.k_total)
        ),
    )


def test_uniform_on_k222(k222: PartiteGraph) -> None:
    """Test that K_{2,2,2} gets 1/2 per clique and total 4."""
    idx = CliqueIndex.build(k222)
    w = uniform_init(k222, idx)
    assert set(w.values.tolist()) == {Fraction(1, 2)}
    assert w.total() == 4
    assert not w.is_zero_sum()
    assert not is_zero_sum(w)
    assert all(x == 1 for x in w.edge_effects().tolist())
    assert edge_effect(w, (VertexId(0, 0), VertexId(2, 1))) == 1


def test_uniform_float(k222: PartiteGraph) -> None:
    """Test the float backend gives the same weights."""
    w = uniform_init(k222, CliqueIndex.build(k222), FLOAT_BACKEND)
    assert w.values.dtype == np.float64
    assert np.allclose(w.values, 0.5)
    assert w.min_weight() == 0.5


def test_uniform_triangle_free(cycle: PartiteGraph) -> None:
    """Test that edges without cliques are refused."""
    idx = CliqueIndex.build(cycle)
    with pytest.raises(NoCliquesError):
        uniform_init(cycle, idx)
    with pytest.raises(NoCliquesError):
        corrections(cycle, idx)


def test_edgeless() -> None:
    """Test that an edgeless graph gets the empty weighting and a zero field."""
    g = generate_divisible(3, 3, 3, seed=0)
    idx = CliqueIndex.build(g)
    assert len(uniform_init(g, idx)) == 0
    assert corrections(g, idx).is_zero()


def test_corrections_not_divisible() -> None:
    """Test that corrections need a divisible host."""
    g = PartiteGraph.from_edges(3, 1, [(0, 1), (1, 2)])
    with pytest.raises(DivisibilityError):
        corrections(g, CliqueIndex.build(g))


def test_corrections_complete(k333: PartiteGraph) -> None:
    """Test that the complete graph needs no correction."""
    field = corrections(k333, CliqueIndex.build(k333))
    assert field.is_zero()
    assert field.max_abs() == 0


def test_corrections_match_effects(g12: PartiteGraph, g12_index: CliqueIndex) -> None:
    """Test that z_e is the uniform edge effect minus one."""
    field = corrections(g12, g12_index)
    effects = uniform_init(g12, g12_index).edge_effects()
    assert (effects - 1).tolist() == field.edge_values.tolist()
    assert field.violations() == []
    field.check()


def test_corrections_vertex_sums(g12: PartiteGraph, g12_index: CliqueIndex) -> None:
    """Test that every class of z_v sums to zero and z_v matches every foreign class."""
    field = corrections(g12, g12_index)
    z_v = field.vertex_values
    for i in range(3):
        assert sum(z_v[i * 12:(i + 1) * 12].tolist()) == 0
    v = VertexId(2, 3)
    around = field.around(v)
    for j in (0, 1):
        into = sum(value for u, value in around.items() if u // 12 == j)
        assert into == field.per_vertex[g12.index(v)]


def test_field_violations(g12_index: CliqueIndex) -> None:
    """Test that a field with one bad entry is reported."""
    edge_values = EXACT_BACKEND.zeros(g12_index.edge_count)
    edge_values[0] = Fraction(1)
    field = CorrectionField(
        g12_index,
        edge_values,
        EXACT_BACKEND.zeros(g12_index.graph.order),
    )
    assert field.violations()
    with pytest.raises(DomainError):
        field.check()


def test_field_from_edge_values(g12: PartiteGraph, g12_index: CliqueIndex) -> None:
    """Test that rebuilding from edge values recovers z_v."""
    field = corrections(g12, g12_index)
    rebuilt = CorrectionField.from_edge_values(g12_index, field.edge_values)
    assert rebuilt.vertex_values.tolist() == field.vertex_values.tolist()


def test_field_restricted(g12: PartiteGraph, g12_index: CliqueIndex) -> None:
    """Test restricting a field to an induced subgraph keeps the edge values."""
    field = corrections(g12, g12_index)
    sub, new_to_old = g12.induced([0, 1, 12, 13, 24, 25])
    sub_index = CliqueIndex.build(sub)
    restricted = field.restricted(sub_index, new_to_old)
    for (a, b), value in restricted.per_edge.items():
        assert value == field.value(new_to_old[a], new_to_old[b])


def test_field_shape(g12_index: CliqueIndex) -> None:
    """Test that a field of the wrong length is refused."""
    with pytest.raises(IndexMismatchError):
        CorrectionField.from_edge_values(g12_index, EXACT_BACKEND.zeros(3))


@pytest.mark.parametrize("seed", range(5))
def test_linearity(g12_index: CliqueIndex, seed: int) -> None:
    """Test that edge and vertex effects are linear in the weighting."""
    a = random_weighting(g12_index, seed)
    b = random_weighting(g12_index, seed + 100)
    combined = a + 2 * b
    expected = a.edge_effects() + b.edge_effects() * 2
    assert combined.edge_effects().tolist() == expected.tolist()
    v = VertexId(0, 4)
    assert combined.vertex_effect(v) == a.vertex_effect(v) + 2 * b.vertex_effect(v)
    assert (a - a).is_zero_sum()
    assert (-a).total() == -a.total()


@pytest.mark.parametrize("seed", range(3))
def test_vertex_edge_consistency(
        g12: PartiteGraph,
        g12_index: CliqueIndex,
        seed: int,
) -> None:
    """Test that a vertex effect is the sum of its edge effects into any foreign class."""
    w = random_weighting(g12_index, seed)
    effects = w.edge_effects()
    for v in (0, 13, 30):
        for j in range(3):
            if j == v // 12:
                continue
            into = sum(
                effects[g12_index.edge_id((v, u))] for u in g12.neighbours(v, j)
            )
            assert into == w.vertex_effect(v)


def test_weighting_shape(g12_index: CliqueIndex) -> None:
    """Test that a weight vector of the wrong length is refused."""
    with pytest.raises(IndexMismatchError):
        CliqueWeighting(g12_index, EXACT_BACKEND.zeros(2))


def test_mismatched_indices(k222: PartiteGraph, k333: PartiteGraph) -> None:
    """Test that weightings over different graphs do not add."""
    a = CliqueWeighting.zeros(CliqueIndex.build(k222))
    b = CliqueWeighting.zeros(CliqueIndex.build(k333))
    with pytest.raises(IndexMismatchError):
        a + b


def test_accumulator(k333: PartiteGraph) -> None:
    """Test that deltas accumulate exactly over a common denominator."""
    idx = CliqueIndex.build(k333)
    acc = WeightAccumulator(idx)
    acc.add_terms(np.array([0, 1]), np.array([1, -1]), Fraction(1, 3))
    acc.add_terms(np.array([1, 2]), np.array([2, 2]), Fraction(1, 4))
    assert acc.denominator == 12
    w = acc.to_weighting()
    assert w[0] == Fraction(1, 3)
    assert w[1] == Fraction(1, 6)
    assert w[2] == Fraction(1, 2)
    assert acc.total() == 1
    assert acc.support().tolist() == [0, 1, 2]
    assert acc.edge_effects().tolist() == w.edge_effects().tolist()

    doubled = WeightAccumulator(idx)
    doubled.add(acc, Fraction(2))
    assert doubled.total() == 2
    assert CliqueWeighting.zeros(idx).plus(acc, -1).total() == -1


def test_accumulator_float(k333: PartiteGraph) -> None:
    """Test the float accumulator."""
    idx = CliqueIndex.build(k333)
    acc = WeightAccumulator(idx, FLOAT_BACKEND)
    acc.add_terms(np.array([3]), np.array([3]), 0.5)
    assert acc.total() == pytest.approx(1.5)
    assert acc.magnitudes()[3] == pytest.approx(1.5)


def test_sparse_weighting(k333: PartiteGraph) -> None:
    """Test the sparse form against its dense expansion."""
    idx = CliqueIndex.build(k333)
    sparse = SparseWeighting(idx, {0: Fraction(1, 2), 5: Fraction(-1, 2), 7: Fraction(0)})
    assert len(sparse) == 2
    assert sparse.is_zero_sum()
    dense = sparse.to_dense()
    for eid, value in sparse.edge_effects().items():
        assert dense.edge_effect(eid) == value


def test_dump_format(k222: PartiteGraph) -> None:
    """Test one clique per line with ``num/den`` weights."""
    w = uniform_init(k222, CliqueIndex.build(k222))
    lines = dump_weighting(w).splitlines()
    assert len(lines) == 8
    assert lines[0] == "0:0 1:0 2:0 1/2"


def test_dump_skips_zeros(k222: PartiteGraph) -> None:
    """Test that zero weights are not written."""
    assert dump_weighting(CliqueWeighting.zeros(CliqueIndex.build(k222))) == ""


def test_weighting_file(tmp_path: Path, g12_index: CliqueIndex) -> None:
    """Test writing and reading a weighting file."""
    w = random_weighting(g12_index, 3)
    path = tmp_path / "w.txt"
    write_weighting(w, path)
    assert read_weighting(path, g12_index) == w


def test_read_weighting_not_utf8(tmp_path: Path, k222: PartiteGraph) -> None:
    """Test that a weighting file that is not UTF-8 raises a format error."""
    path = tmp_path / "w.txt"
    path.write_bytes(b"0:0 1:0 2:0 \xe9\n")
    with pytest.raises(WeightingFormatError):
        read_weighting(path, CliqueIndex.build(k222))


def test_load_in_any_vertex_order(k222: PartiteGraph) -> None:
    """Test that a line may list its vertices in any order."""
    idx = CliqueIndex.build(k222)
    w = load_weighting("# comment\n2:1 0:0 1:1 -3/4\n", idx)
    assert w.total() == Fraction(-3, 4)
    assert w.edge_effect((VertexId(0, 0), VertexId(1, 1))) == Fraction(-3, 4)


@pytest.mark.parametrize("text", [
    "0:0 1:0 1/2\n",
    "0:0 1:0 2:0 x\n",
    "0:0 1:0 2:0 1/0\n",
    "0:0 0:1 2:0 1\n",
    "0:0 1:0 2:5 1\n",
    "0:0 1:0 2:0 1\n0:0 1:0 2:0 1\n",
])
def test_load_errors(k222: PartiteGraph, text: str) -> None:
    """Test that malformed weighting files are refused."""
    with pytest.raises(WeightingFormatError):
        load_weighting(text, CliqueIndex.build(k222))


def test_load_non_clique(g12: PartiteGraph, g12_index: CliqueIndex) -> None:
    """Test that a transversal that is not a clique is refused."""
    u, v = next(
        (u, v) for u in range(12) for v in range(12, 24) if not g12.adjacent(u, v)
    )
    text = f"{g12.vertex(u)} {g12.vertex(v)} 2:0 1\n"
    with pytest.raises(WeightingFormatError):
        load_weighting(text, g12_index)
