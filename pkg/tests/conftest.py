"""Graphs, clique indices and test options shared by the test modules."""
from typing import List

import pytest

from partite.fracdecomp.cliques import CliqueIndex
from partite.fracdecomp.graph import PartiteGraph, VertexId, generate_divisible


def pytest_addoption(parser: pytest.Parser) -> None:
    """Add the --runslow flag."""
    parser.addoption(
        "--runslow",
        action="store_true",
        default=False,
        help="run the slow scale tests",
    )


def pytest_collection_modifyitems(
        config: pytest.Config,
        items: List[pytest.Item],
) -> None:
    """Skip tests marked slow unless --runslow is given."""
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


def six_cycle() -> PartiteGraph:
    """The 6-cycle drawn through three classes of two: divisible, triangle-free."""
    order = [VertexId(x % 3, x // 3) for x in range(6)]
    return PartiteGraph.from_edges(
        3,
        2,
        [(order[x], order[(x + 1) % 6]) for x in range(6)],
    )


@pytest.fixture
def k222() -> PartiteGraph:
    """Complete tripartite graph with classes of two."""
    return PartiteGraph.complete(3, 2)


@pytest.fixture
def k333() -> PartiteGraph:
    """Complete tripartite graph with classes of three."""
    return PartiteGraph.complete(3, 3)


@pytest.fixture
def cycle() -> PartiteGraph:
    """The tripartite 6-cycle."""
    return six_cycle()


@pytest.fixture(scope="session")
def g12() -> PartiteGraph:
    """r=3, n=12 with one perfect matching removed between every pair of classes."""
    return generate_divisible(3, 12, 1, seed=7)


@pytest.fixture(scope="session")
def g12_index(g12: PartiteGraph) -> CliqueIndex:
    """Clique index of :func:`g12`."""
    return CliqueIndex.build(g12)


@pytest.fixture(scope="session")
def g24() -> PartiteGraph:
    """r=3, n=24 with one perfect matching removed between every pair of classes."""
    return generate_divisible(3, 24, 1, seed=7)
