"""Subgraph sampling for structure pre-training: random walk with
restart from a root ego, induction of the visited set, and random
relabeling of node indices."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ValidationError
from .graph import AmrEdge, AmrGraph

DEFAULT_RESTART_PROBABILITY = 0.8
DEFAULT_MAX_STEPS = 128


@dataclass
class InducedSubgraph:
    """Nodes (original ids) plus every graph edge inside the set."""

    node_ids: list[int]
    edges: list[AmrEdge]


@dataclass
class SubgraphSample:
    """An ego-rooted induced subgraph with shuffled node indices.

    id_map sends original node ids to 0..n-1; edges use the new
    indices; features (when attached) travel with their nodes and are
    keyed by new index.
    """

    source_graph_id: object
    ego: int
    id_map: dict[int, int]
    edges: list[AmrEdge]
    features: dict[int, object] = field(default_factory=dict)

    @property
    def n_nodes(self) -> int:
        return len(self.id_map)


def pick_ego(g: AmrGraph, rng: np.random.Generator) -> int:
    """Uniform choice among root nodes (no incoming edges)."""
    roots = g.roots()
    if not roots:
        raise ValidationError("graph has no root node")
    return int(roots[int(rng.integers(len(roots)))])


def rwr(
    g: AmrGraph,
    ego: int,
    p_restart: float = DEFAULT_RESTART_PROBABILITY,
    max_steps: int = DEFAULT_MAX_STEPS,
    rng: Optional[np.random.Generator] = None,
) -> set[int]:
    """Random walk with restart over the undirected view of g.

    Each step jumps back to the ego with probability p_restart and
    moves to a uniform neighbor otherwise. The walk stops as soon as
    every neighbor of the node it currently occupies has been visited
    (checked before the first step too, so an isolated ego returns
    just itself), or after max_steps steps.
    """
    if not 0.0 <= p_restart <= 1.0:
        raise ValidationError("p_restart must lie in [0, 1]")
    rng = rng or np.random.default_rng()
    neighbors = {n.id: g.undirected_neighbors(n.id) for n in g.nodes}
    visited = {ego}
    current = ego
    steps = 0
    while steps < max_steps:
        if all(v in visited for v in neighbors[current]):
            break
        if rng.random() < p_restart:
            current = ego
        else:
            nbrs = neighbors[current]
            current = nbrs[int(rng.integers(len(nbrs)))]
        visited.add(current)
        steps += 1
    return visited


def induce(g: AmrGraph, nodes: set[int]) -> InducedSubgraph:
    """Exact induced subgraph: the given nodes and every edge of g
    with both endpoints inside, labels and directions kept."""
    known = {n.id for n in g.nodes}
    unknown = set(nodes) - known
    if unknown:
        raise ValidationError(f"unknown node ids: {sorted(unknown)}")
    node_ids = sorted(nodes)
    inside = set(node_ids)
    edges = [AmrEdge(e.src, e.dst, e.rel) for e in g.edges if e.src in inside and e.dst in inside]
    return InducedSubgraph(node_ids, edges)


def anonymize(
    sub: InducedSubgraph,
    rng: np.random.Generator,
    ego: int,
    source_graph_id: object = None,
    features: Optional[dict] = None,
) -> SubgraphSample:
    """Relabel node ids by a uniform random permutation of 0..n-1."""
    n = len(sub.node_ids)
    perm = rng.permutation(n)
    id_map = {orig: int(perm[i]) for i, orig in enumerate(sub.node_ids)}
    edges = [AmrEdge(id_map[e.src], id_map[e.dst], e.rel) for e in sub.edges]
    feats = {}
    if features is not None:
        feats = {id_map[orig]: features[orig] for orig in sub.node_ids}
    return SubgraphSample(source_graph_id, ego, id_map, edges, feats)


def sample_subgraph(
    g: AmrGraph,
    rng: np.random.Generator,
    p_restart: float = DEFAULT_RESTART_PROBABILITY,
    max_steps: int = DEFAULT_MAX_STEPS,
    source_graph_id: object = None,
    features: Optional[dict] = None,
) -> SubgraphSample:
    ego = pick_ego(g, rng)
    visited = rwr(g, ego, p_restart, max_steps, rng)
    sub = induce(g, visited)
    return anonymize(sub, rng, ego, source_graph_id, features)


def sample_positive_pair(
    g: AmrGraph,
    p_restart: float = DEFAULT_RESTART_PROBABILITY,
    max_steps: int = DEFAULT_MAX_STEPS,
    rng: Optional[np.random.Generator] = None,
    source_graph_id: object = None,
    features: Optional[dict] = None,
) -> tuple[SubgraphSample, SubgraphSample]:
    """Two independent draws from the same graph; the ego is re-picked
    for each."""
    if not g.nodes:
        raise ValidationError("cannot sample from an empty graph")
    rng = rng or np.random.default_rng()
    first = sample_subgraph(g, rng, p_restart, max_steps, source_graph_id, features)
    second = sample_subgraph(g, rng, p_restart, max_steps, source_graph_id, features)
    return first, second


def canonical_hash(n_nodes: int, edges: list[AmrEdge], rounds: int = 3) -> tuple:
    """Isomorphism-class fingerprint by iterative neighborhood
    refinement over (degree, sorted incident labels). Identical for
    any relabeling of the same graph."""
    colors = {i: (0,) for i in range(n_nodes)}
    incident: dict[int, list[tuple]] = {i: [] for i in range(n_nodes)}
    for e in edges:
        incident[e.src].append(("out", e.rel, e.dst))
        incident[e.dst].append(("in", e.rel, e.src))
    for _ in range(rounds):
        new = {}
        for i in range(n_nodes):
            signature = sorted((d, r, colors[j]) for d, r, j in incident[i])
            new[i] = (colors[i], tuple(signature))
        # compress to small ints for stable comparison
        palette = {c: k for k, c in enumerate(sorted(set(new.values()), key=repr))}
        colors = {i: (palette[new[i]],) for i in range(n_nodes)}
    return tuple(sorted(colors[i] for i in range(n_nodes)))
