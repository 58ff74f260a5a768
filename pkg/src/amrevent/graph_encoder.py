"""Graph isomorphism network over AMR (sub)graphs.

Message passing is undirected: every edge delivers the neighbor state
plus an embedding of its relation label in both directions, and each
round updates

    h_v <- MLP((1 + eps) * h_v + sum_{u ~ v} (h_u + e_rel(u,v)))

Initial node states are text-encoder span vectors pushed through a
linear projection. The graph embedding is the L2-normalized mean of
the final round (an all-zero readout stays zero by convention), which
keeps the dot products of the contrastive objective in a fixed range.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .autodiff import Tensor, l2_normalize, scatter_sum, stack
from .errors import ValidationError
from .graph import AmrGraph
from .sampler import SubgraphSample
from .text_encoder import EncoderParams, node_vectors

UNK_REL = "<unk-rel>"


class EdgeLabelVocab:
    """Relation label -> embedding row; row 0 is the unknown label."""

    def __init__(self, labels: list[str]):
        if not labels or labels[0] != UNK_REL:
            labels = [UNK_REL] + [l for l in labels if l != UNK_REL]
        self.labels = labels
        self._ids = {l: i for i, l in enumerate(labels)}

    def __len__(self):
        return len(self.labels)

    def id(self, label: str) -> int:
        return self._ids.get(label, 0)

    @classmethod
    def build(cls, graphs) -> "EdgeLabelVocab":
        seen = sorted({e.rel for g in graphs for e in g.edges})
        return cls([UNK_REL] + seen)

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for label in self.labels:
                fh.write(label + "\n")

    @classmethod
    def load(cls, path) -> "EdgeLabelVocab":
        with open(path, "r", encoding="utf-8") as fh:
            return cls([line.rstrip("\n") for line in fh if line.strip()])


@dataclass
class GraphEncoderConfig:
    layers: int = 5
    hidden_dim: int = 64
    in_dim: int = 64
    dropout: float = 0.5


class GraphEncoderParams:
    def __init__(self, config: GraphEncoderConfig, edge_labels: EdgeLabelVocab,
                 tensors: dict[str, Tensor]):
        self.config = config
        self.edge_labels = edge_labels
        self.tensors = tensors

    @classmethod
    def init(cls, config: GraphEncoderConfig, edge_labels: EdgeLabelVocab,
             rng: np.random.Generator, dtype=np.float32) -> "GraphEncoderParams":
        d = config.hidden_dim
        t: dict[str, Tensor] = {}

        def normal(shape, scale):
            return Tensor((rng.standard_normal(shape) * scale).astype(dtype), requires_grad=True)

        t["proj"] = normal((config.in_dim, d), (2.0 / config.in_dim) ** 0.5)
        t["edge_embed"] = normal((len(edge_labels), d), 0.1)
        for k in range(config.layers):
            t[f"layer{k}.eps"] = Tensor(np.zeros((), dtype=dtype), requires_grad=True)
            t[f"layer{k}.mlp.w1"] = normal((d, d), (2.0 / d) ** 0.5)
            t[f"layer{k}.mlp.b1"] = Tensor(np.zeros(d, dtype=dtype), requires_grad=True)
            t[f"layer{k}.mlp.w2"] = normal((d, d), (2.0 / d) ** 0.5)
            t[f"layer{k}.mlp.b2"] = Tensor(np.zeros(d, dtype=dtype), requires_grad=True)
        return cls(config, edge_labels, t)

    @classmethod
    def zeros(cls, config: GraphEncoderConfig, edge_labels: EdgeLabelVocab,
              dtype=np.float32) -> "GraphEncoderParams":
        p = cls.init(config, edge_labels, np.random.default_rng(0), dtype=dtype)
        for t in p.tensors.values():
            t.data = np.zeros_like(t.data)
        return p

    def named_tensors(self) -> dict[str, Tensor]:
        return dict(self.tensors)

    def copy_arrays(self) -> dict[str, np.ndarray]:
        return {k: t.data.copy() for k, t in self.tensors.items()}

    def load_arrays(self, arrays: dict[str, np.ndarray]) -> None:
        for k, t in self.tensors.items():
            t.data = arrays[k].copy()


@dataclass
class FeaturedGraph:
    """Dense-indexed graph ready for the encoder: nodes 0..n-1,
    labeled edges, and one input feature row per node."""

    n_nodes: int
    edges: list[tuple[int, int, str]]
    features: Tensor

    @classmethod
    def from_amr(cls, g: AmrGraph, feature_map: dict) -> "FeaturedGraph":
        ids = sorted(n.id for n in g.nodes)
        dense = {orig: i for i, orig in enumerate(ids)}
        edges = [(dense[e.src], dense[e.dst], e.rel) for e in g.edges]
        feats = stack([feature_map[i] for i in ids]) if ids else Tensor(np.zeros((0, 0)))
        return cls(len(ids), edges, feats)

    @classmethod
    def from_sample(cls, sample: SubgraphSample) -> "FeaturedGraph":
        n = sample.n_nodes
        edges = [(e.src, e.dst, e.rel) for e in sample.edges]
        feats = stack([sample.features[i] for i in range(n)])
        return cls(n, edges, feats)


def encode_graph(params: GraphEncoderParams, graph: FeaturedGraph, *,
                 training: bool = False, rng: Optional[np.random.Generator] = None,
                 normalize: bool = True) -> Tensor:
    """Run the GIN stack and read out the normalized mean node state.
    `normalize=False` returns the raw mean (diagnostics only)."""
    n = graph.n_nodes
    if n == 0:
        raise ValidationError("cannot encode an empty graph")
    t = params.tensors
    cfg = params.config
    h = graph.features @ t["proj"]

    srcs = np.fromiter(
        (e[0] for e in graph.edges) if graph.edges else (), dtype=np.intp, count=len(graph.edges)
    )
    dsts = np.fromiter(
        (e[1] for e in graph.edges) if graph.edges else (), dtype=np.intp, count=len(graph.edges)
    )
    rels = np.fromiter(
        (params.edge_labels.id(e[2]) for e in graph.edges) if graph.edges else (),
        dtype=np.intp,
        count=len(graph.edges),
    )
    # both directions carry the same label embedding
    from_idx = np.concatenate([srcs, dsts])
    to_idx = np.concatenate([dsts, srcs])
    rel_idx = np.concatenate([rels, rels])

    for k in range(cfg.layers):
        msgs = h[from_idx] + t["edge_embed"][rel_idx]
        agg = scatter_sum(msgs, to_idx, n)
        x = h * (t[f"layer{k}.eps"] + 1.0) + agg
        h = (x @ t[f"layer{k}.mlp.w1"] + t[f"layer{k}.mlp.b1"]).relu() @ t[f"layer{k}.mlp.w2"] + t[f"layer{k}.mlp.b2"]
        if training and cfg.dropout > 0.0:
            if rng is None:
                raise ValidationError("training-mode dropout needs an rng")
            keep = (rng.random(h.shape) >= cfg.dropout).astype(h.data.dtype)
            h = h * Tensor(keep / (1.0 - cfg.dropout))

    readout = h.mean(axis=0)
    return l2_normalize(readout) if normalize else readout


def text_node_features(g: AmrGraph, text_params: EncoderParams,
                       max_len: Optional[int] = None) -> dict:
    """Text-space span vector for every node (concept embedding when a
    node has no alignment), with the encoder's fitted feature center
    subtracted. These are what structure pre-training precomputes
    under a frozen text encoder."""
    spans = {n.id: n.token_span for n in g.nodes}
    concepts = {n.id: n.concept for n in g.nodes}
    feats = node_vectors(text_params, g.sentence_tokens, spans, concepts, max_len=max_len)
    center = text_params.feature_center
    if feats and np.any(center):
        offset = Tensor(center)
        feats = {i: v - offset for i, v in feats.items()}
    return feats


def fit_feature_center(text_params: EncoderParams, corpus,
                       max_len: Optional[int] = None) -> np.ndarray:
    """Fit the encoder's feature center: the mean raw span vector over
    every node of the corpus. Stored on the params and subtracted by
    text_node_features from then on."""
    text_params.feature_center = np.zeros(text_params.config.dim, dtype=np.float32)
    total = np.zeros(text_params.config.dim, dtype=np.float64)
    count = 0
    for g in corpus:
        for vec in text_node_features(g, text_params, max_len=max_len).values():
            total += np.asarray(vec.data, dtype=np.float64)
            count += 1
    if count:
        text_params.feature_center = (total / count).astype(np.float32)
    return text_params.feature_center


def init_node_features(g: AmrGraph, text_params: EncoderParams,
                       graph_params: GraphEncoderParams,
                       max_len: Optional[int] = None) -> dict:
    """Initial GIN node states: text features through the input
    projection, keyed by node id."""
    feats = text_node_features(g, text_params, max_len=max_len)
    proj = graph_params.tensors["proj"]
    return {i: v @ proj for i, v in feats.items()}


def one_hop_embedding(params: GraphEncoderParams, g: AmrGraph, center: int,
                      feature_map: dict, *, training: bool = False,
                      rng: Optional[np.random.Generator] = None) -> Tensor:
    """Encode the subgraph on the center node and its undirected
    neighbors. feature_map must hold text-space vectors for at least
    those nodes."""
    ids = {n.id for n in g.nodes}
    if center not in ids:
        raise ValidationError(f"unknown node id {center}")
    keep = {center} | set(g.undirected_neighbors(center))
    sub_nodes = sorted(keep)
    dense = {orig: i for i, orig in enumerate(sub_nodes)}
    edges = [
        (dense[e.src], dense[e.dst], e.rel)
        for e in g.edges
        if e.src in keep and e.dst in keep
    ]
    feats = stack([feature_map[i] for i in sub_nodes])
    return encode_graph(params, FeaturedGraph(len(sub_nodes), edges, feats),
                        training=training, rng=rng)
