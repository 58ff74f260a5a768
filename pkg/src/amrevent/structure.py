"""Subgraph discrimination pre-training for the graph encoder.

Each batch holds two subgraph samples per source graph, slotted so
that samples 2i and 2i+1 (0-indexed) form a positive pair. Every
anchor (even slot) must pick out its partner against all other
subgraphs in the batch under a temperature-scaled softmax. The text
encoder is frozen here; node features are precomputed once.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .autodiff import Tensor, as_tensor, logsumexp, stack, where
from .errors import ConfigError, NumericError, ValidationError
from .graph import AmrGraph
from .graph_encoder import (
    EdgeLabelVocab,
    FeaturedGraph,
    GraphEncoderConfig,
    GraphEncoderParams,
    encode_graph,
    text_node_features,
)
from .optim import Adam, warmup_lr
from .sampler import SubgraphSample, sample_positive_pair
from .text_encoder import EncoderParams


@dataclass
class StructureTrainConfig:
    batch_size: int = 1024
    restart_probability: float = 0.8
    temperature: float = 0.07
    warmup_steps: int = 7500
    weight_decay: float = 1e-5
    training_steps: int = 75000
    learning_rate: float = 0.005
    adam_eps: float = 1e-8
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    layers: int = 5
    dropout: float = 0.5
    hidden_dim: int = 64
    max_walk_steps: int = 128
    seed: int = 0

    def __post_init__(self):
        if self.temperature <= 0:
            raise ConfigError("temperature must be > 0")
        if self.batch_size < 1:
            raise ConfigError("batch_size must be >= 1")
        if not 0.0 <= self.restart_probability <= 1.0:
            raise ConfigError("restart_probability must lie in [0, 1]")


def infonce_loss(embeddings: Sequence, temperature: float) -> Tensor:
    """Contrastive loss over 2m pair-ordered embeddings.

    For each anchor a_2i the positive is a_{2i+1} and the denominator
    runs over every sample except the anchor itself (the positive
    included), all dot products divided by the temperature.
    """
    if temperature <= 0:
        raise ConfigError("temperature must be > 0")
    if len(embeddings) % 2 != 0 or len(embeddings) < 2:
        raise ValidationError("expected an even number (>= 2) of embeddings")
    m2 = len(embeddings)
    e = stack([as_tensor(x) for x in embeddings])  # (2m, d)
    anchor_idx = np.arange(0, m2, 2)
    scores = (e[anchor_idx] @ e.T) * (1.0 / temperature)  # (m, 2m)
    allowed = np.ones((len(anchor_idx), m2), dtype=bool)
    allowed[np.arange(len(anchor_idx)), anchor_idx] = False
    masked = where(allowed, scores, -np.inf)
    denom = logsumexp(masked, axis=1)
    pos = scores[np.arange(len(anchor_idx)), anchor_idx + 1]
    return (denom - pos).sum()


def build_structure_batch(
    graphs: Sequence[AmrGraph],
    feature_maps: Sequence[dict],
    rng: np.random.Generator,
    p_restart: float,
    max_steps: int,
    graph_ids: Optional[Sequence] = None,
) -> list[SubgraphSample]:
    """Two samples per graph; graph i fills slots 2i and 2i+1."""
    out: list[SubgraphSample] = []
    for i, (g, feats) in enumerate(zip(graphs, feature_maps)):
        gid = graph_ids[i] if graph_ids is not None else i
        a, b = sample_positive_pair(
            g, p_restart, max_steps, rng, source_graph_id=gid, features=feats
        )
        out.extend((a, b))
    return out


def train_structure(
    corpus: Sequence[AmrGraph],
    text_params: EncoderParams,
    config: StructureTrainConfig,
):
    """Adam + linear warmup + decoupled weight decay on the graph
    encoder. Returns (params, trace); trace rows are (step, loss)."""
    corpus = list(corpus)
    if not corpus:
        raise ValidationError("empty corpus")

    ss = np.random.SeedSequence(config.seed)
    init_rng, order_rng, walk_rng, drop_rng = (np.random.default_rng(s) for s in ss.spawn(4))

    edge_labels = EdgeLabelVocab.build(corpus)
    gcfg = GraphEncoderConfig(
        layers=config.layers,
        hidden_dim=config.hidden_dim,
        in_dim=text_params.config.dim,
        dropout=config.dropout,
    )
    params = GraphEncoderParams.init(gcfg, edge_labels, init_rng)

    # frozen text encoder: features are plain constants from here on
    feature_maps = []
    for g in corpus:
        feats = text_node_features(g, text_params)
        feature_maps.append({i: v.detach() for i, v in feats.items()})

    opt = Adam(
        list(params.tensors.values()),
        lr=config.learning_rate,
        beta1=config.adam_beta1,
        beta2=config.adam_beta2,
        eps=config.adam_eps,
        weight_decay=config.weight_decay,
    )

    trace: list[tuple[int, float]] = []
    queue: list[int] = []
    for step in range(1, config.training_steps + 1):
        while len(queue) < config.batch_size:
            queue.extend(int(i) for i in order_rng.permutation(len(corpus)))
        batch_idx, queue = queue[: config.batch_size], queue[config.batch_size :]
        samples = build_structure_batch(
            [corpus[i] for i in batch_idx],
            [feature_maps[i] for i in batch_idx],
            walk_rng,
            config.restart_probability,
            config.max_walk_steps,
            graph_ids=batch_idx,
        )
        embeddings = [
            encode_graph(params, FeaturedGraph.from_sample(s), training=True, rng=drop_rng)
            for s in samples
        ]
        loss = infonce_loss(embeddings, config.temperature)
        loss_val = float(loss.data)
        if not np.isfinite(loss_val):
            raise NumericError(f"non-finite training loss at step {step}")
        opt.zero_grad()
        loss.backward()
        opt.step(lr=warmup_lr(config.learning_rate, step, config.warmup_steps))
        trace.append((step, loss_val))
    return params, trace
