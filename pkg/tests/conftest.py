import numpy as np
import pytest

from amrevent.graph import AmrEdge, AmrGraph, AmrNode
from amrevent.text_encoder import EncoderConfig, EncoderParams, Vocabulary


@pytest.fixture
def tiny_vocab():
    return Vocabulary.build(
        ["the", "attack", "today", "netanya", "soldier", "report", "a", "b", "c"],
        marker_pairs=4,
    )


@pytest.fixture
def tiny_config():
    return EncoderConfig(layers=2, dim=16, heads=2, max_len=32, marker_pairs=4)


@pytest.fixture
def tiny_params(tiny_config, tiny_vocab):
    return EncoderParams.init(tiny_config, tiny_vocab, np.random.default_rng(0))


def chain_graph():
    """t -ARG0-> a -ARG1-> b."""
    return AmrGraph(
        ["t", "a", "b"],
        [AmrNode(0, "t", (0, 1)), AmrNode(1, "a", (1, 2)), AmrNode(2, "b", (2, 3))],
        [AmrEdge(0, 1, "ARG0"), AmrEdge(1, 2, "ARG1")],
    )


def figure_graph():
    """attack with a time and a location argument plus an unrelated
    reporting node."""
    tokens = ["reports", "say", "the", "attack", "today", "in", "netanya"]
    nodes = [
        AmrNode(0, "report", (0, 1)),
        AmrNode(1, "attack", (3, 4)),
        AmrNode(2, "today", (4, 5)),
        AmrNode(3, "netanya", (6, 7)),
    ]
    edges = [
        AmrEdge(0, 1, "ARG1"),
        AmrEdge(1, 2, "time"),
        AmrEdge(1, 3, "location"),
    ]
    return AmrGraph(tokens, nodes, edges)


def random_dag(rng, max_nodes=30):
    """Random DAG over a random node count; edges always point from a
    lower to a higher topological position, so acyclicity holds by
    construction."""
    n = int(rng.integers(1, max_nodes + 1))
    nodes = [AmrNode(i, f"c{i}") for i in range(n)]
    rels = ["ARG0", "ARG1", "time", "location", "mod", "name", "op1"]
    edges = []
    seen = set()
    for dst in range(1, n):
        for _ in range(int(rng.integers(0, 3))):
            src = int(rng.integers(0, dst))
            rel = rels[int(rng.integers(len(rels)))]
            if (src, dst, rel) not in seen:
                seen.add((src, dst, rel))
                edges.append(AmrEdge(src, dst, rel))
    return AmrGraph([], nodes, edges)
