"""Trigger-argument pair discrimination.

The text encoder is trained to score true trigger-argument pairs
(nodes joined by a core relation) above corrupted ones. The score of
a pair is the bilinear form x_t' W x_a, and each positive pair incurs
the cross-entropy of picking it against its sampled negatives:

    L = -s+ + log(exp(s+) + sum_i exp(s_ti) + sum_j exp(s_aj))

computed with a max shift. Batch loss is the plain sum over sentences
and their positive pairs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .autodiff import Tensor, as_tensor, logsumexp, stack
from .errors import ConfigError, NumericError, ValidationError
from .graph import AmrGraph, NegativeSample, positive_pairs, sample_negatives
from .optim import Adam
from .text_encoder import EncoderConfig, EncoderParams, Vocabulary, node_vectors


@dataclass
class BilinearScorer:
    """Trainable similarity metric between span vectors."""

    W: Tensor

    @classmethod
    def init(cls, dim: int, rng: np.random.Generator, noise: float = 0.01,
             dtype=np.float32) -> "BilinearScorer":
        w = np.eye(dim) + rng.standard_normal((dim, dim)) * noise
        return cls(Tensor(w.astype(dtype), requires_grad=True))


@dataclass
class SemanticTrainConfig:
    batch_size: int = 40
    learning_rate: float = 1e-5
    adam_eps: float = 1e-8
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    m_t: int = 9
    m_a: int = 30
    max_seq_len: int = 128
    steps: int = 100
    seed: int = 0
    eval_every: Optional[int] = None
    encoder: EncoderConfig = field(default_factory=EncoderConfig)

    def __post_init__(self):
        if self.m_t < 0 or self.m_a < 0:
            raise ConfigError("negative sample counts must be >= 0")
        if self.learning_rate < 0:
            raise ConfigError("learning rate must be >= 0")
        if self.batch_size < 1 or self.steps < 1:
            raise ConfigError("batch_size and steps must be >= 1")


def pair_score(x_t, x_a, scorer: BilinearScorer) -> Tensor:
    x_t, x_a = as_tensor(x_t), as_tensor(x_a)
    if x_t.shape != x_a.shape or x_t.shape[0] != scorer.W.shape[0]:
        raise ValidationError(
            f"dimension mismatch: x_t {x_t.shape}, x_a {x_a.shape}, W {scorer.W.shape}"
        )
    return (x_t @ scorer.W) @ x_a


def pair_loss_from_scores(positive_score, negative_scores: Sequence) -> Tensor:
    """Cross-entropy of the positive against positive + negatives."""
    positive_score = as_tensor(positive_score)
    all_scores = stack([positive_score] + [as_tensor(s) for s in negative_scores])
    return logsumexp(all_scores, axis=0) - positive_score


def pair_loss(positive, neg_triggers, neg_args, scorer: BilinearScorer) -> Tensor:
    x_t, x_a = positive
    s_pos = pair_score(x_t, x_a, scorer)
    s_negs = [pair_score(xt, x_a, scorer) for xt in neg_triggers]
    s_negs += [pair_score(x_t, xa, scorer) for xa in neg_args]
    return pair_loss_from_scores(s_pos, s_negs)


@dataclass
class SentenceExample:
    """One sentence prepared for the batch objective: its positive
    pairs and the sampled corruptions of each."""

    graph: AmrGraph
    pairs: list[tuple[int, int]]
    negatives: dict[tuple[int, int], list[NegativeSample]]


def build_sentence_example(g: AmrGraph, m_t: int, m_a: int,
                           rng: np.random.Generator) -> SentenceExample:
    pairs = positive_pairs(g).positives
    negatives = {p: sample_negatives(g, p, m_t, m_a, rng) for p in pairs}
    return SentenceExample(g, pairs, negatives)


def batch_loss(batch: Sequence[SentenceExample], params: EncoderParams,
               scorer: BilinearScorer, max_len: Optional[int] = None,
               dropout_rng=None) -> Tensor:
    """Sum of pair losses over every positive pair of every sentence.
    Sentences without positive pairs contribute zero. `dropout_rng`
    enables encoder dropout (training only)."""
    total = Tensor(np.asarray(0.0, dtype=scorer.W.dtype))
    for ex in batch:
        if not ex.pairs:
            continue
        needed: set[int] = set()
        for t, a in ex.pairs:
            needed.update((t, a))
            for neg in ex.negatives[(t, a)]:
                needed.update(neg.pair)
        nodes = {n.id: n for n in ex.graph.nodes}
        spans = {i: nodes[i].token_span for i in needed}
        concepts = {i: nodes[i].concept for i in needed}
        vecs = node_vectors(params, ex.graph.sentence_tokens, spans, concepts,
                            max_len=max_len, dropout_rng=dropout_rng)
        for t, a in ex.pairs:
            neg_t = [vecs[n.pair[0]] for n in ex.negatives[(t, a)] if n.replaced == "trigger"]
            neg_a = [vecs[n.pair[1]] for n in ex.negatives[(t, a)] if n.replaced == "argument"]
            total = total + pair_loss((vecs[t], vecs[a]), neg_t, neg_a, scorer)
    return total


def validation_split(n: int) -> int:
    """Held-out size: 1000 sentences, scaled to 10% (min 1) for small
    corpora, and 0 when the corpus cannot spare a sentence."""
    if n < 2:
        return 0
    return min(1000, max(1, n // 10))


def train_semantic(corpus: Sequence[AmrGraph], config: SemanticTrainConfig):
    """Adam training of the text encoder and scorer.

    Returns (params, scorer, trace) where trace rows are
    (step, train_loss, val_loss_or_None) and params/scorer are the
    best-validation snapshot (final state when there is no holdout).
    """
    corpus = list(corpus)
    if not corpus:
        raise ValidationError("empty corpus")

    ss = np.random.SeedSequence(config.seed)
    init_rng, order_rng, neg_rng, val_rng, drop_rng = (
        np.random.default_rng(s) for s in ss.spawn(5)
    )

    tokens = (t for g in corpus for t in g.sentence_tokens)
    concepts = (n.concept for g in corpus for n in g.nodes)
    vocab = Vocabulary.build(
        list(tokens) + list(concepts), marker_pairs=config.encoder.marker_pairs
    )
    params = EncoderParams.init(config.encoder, vocab, init_rng)
    scorer = BilinearScorer.init(config.encoder.dim, init_rng)

    n_val = validation_split(len(corpus))
    order = order_rng.permutation(len(corpus))
    val_idx = [int(i) for i in order[:n_val]]
    train_idx = [int(i) for i in order[n_val:]]

    total_train_pairs = sum(len(positive_pairs(corpus[i]).positives) for i in train_idx)
    if total_train_pairs == 0:
        raise ValidationError("corpus has no positive trigger-argument pairs to train on")

    val_batch = [
        build_sentence_example(corpus[i], config.m_t, config.m_a, val_rng) for i in val_idx
    ]

    trainable = list(params.tensors.values()) + [scorer.W]
    opt = Adam(trainable, lr=config.learning_rate, beta1=config.adam_beta1,
               beta2=config.adam_beta2, eps=config.adam_eps)
    eval_every = config.eval_every or max(1, config.steps // 10)

    trace: list[tuple[int, float, Optional[float]]] = []
    best: Optional[tuple[float, dict, np.ndarray]] = None
    queue: list[int] = []
    for step in range(1, config.steps + 1):
        while len(queue) < config.batch_size:
            queue.extend(int(i) for i in order_rng.permutation(train_idx))
        batch_idx, queue = sorted(queue[: config.batch_size]), queue[config.batch_size :]
        batch = [
            build_sentence_example(corpus[i], config.m_t, config.m_a, neg_rng)
            for i in batch_idx
        ]
        loss = batch_loss(batch, params, scorer, max_len=config.max_seq_len,
                          dropout_rng=drop_rng)
        loss_val = float(loss.data)
        if not np.isfinite(loss_val):
            raise NumericError(f"non-finite training loss at step {step}")
        opt.zero_grad()
        loss.backward()
        opt.step()

        val_loss = None
        if val_batch and (step % eval_every == 0 or step == config.steps):
            val_loss = float(batch_loss(val_batch, params, scorer, max_len=config.max_seq_len).data)
            if best is None or val_loss < best[0]:
                best = (val_loss, params.copy_arrays(), scorer.W.data.copy())
        trace.append((step, loss_val, val_loss))

    if best is not None:
        params.load_arrays(best[1])
        scorer.W.data = best[2].copy()

    # fit the downstream feature normalizer on the training sentences
    from .graph_encoder import fit_feature_center

    fit_feature_center(params, [corpus[i] for i in train_idx], max_len=config.max_seq_len)
    return params, scorer, trace
