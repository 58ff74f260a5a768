"""Adaptation of the pre-trained encoders.

Supervised path: an instance is a sentence with a trigger span (and,
for role classification, an argument span). The semantic feature is
dynamic multi-pooling of the token vectors, markers inserted around
the candidates exactly as in pre-training but pooled over the
original-token rows only; the structure feature is the one-hop graph
embedding of the candidate's node. Both are concatenated and fed to a
small MLP head; everything is fine-tuned jointly.

Unsupervised path: identify trigger/argument candidates from the AMR
structure, read their span vectors and structure embeddings, and run
joint constraint clustering to produce event instances and schemata.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .autodiff import Tensor, concat, logsumexp, softmax, stack
from .clustering import (
    CandidateContext,
    ClusterAssignment,
    ClusteringConfig,
    JointClusteringResult,
    joint_cluster,
)
from .errors import ConfigError, NumericError, ParseError, ValidationError
from .graph import AmrGraph, core_relation, graph_from_obj, identify_candidates
from .graph_encoder import (
    FeaturedGraph,
    GraphEncoderParams,
    encode_graph,
    one_hop_embedding,
    text_node_features,
)
from .optim import Adam
from .text_encoder import EncoderParams, encode, insert_markers, span_representation

_MARKER_RE = re.compile(r"^\[/?E\d+\]$")


@dataclass
class SupervisedInstance:
    tokens: list[str]
    trigger: tuple[int, int]
    argument: Optional[tuple[int, int]]
    label: str
    graph: Optional[AmrGraph] = None

    def __post_init__(self):
        n = len(self.tokens)
        for span in (self.trigger, self.argument):
            if span is not None and not (0 <= span[0] < span[1] <= n):
                raise ValidationError(f"span {span} out of range for {n} tokens")


def read_instances_jsonl(path) -> list[SupervisedInstance]:
    """Instance JSONL: {"tokens": [...], "trigger": [s, e],
    "argument": [s, e] | null, "label": str} plus an optional "graph"
    object ({"nodes": [...], "edges": [...]}) that shares the
    instance's tokens and supplies the structure feature."""
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"malformed JSON: {exc.msg}", line=line_no) from exc
            try:
                graph = None
                if obj.get("graph") is not None:
                    gobj = dict(obj["graph"])
                    gobj.setdefault("tokens", obj["tokens"])
                    graph = graph_from_obj(gobj, line_no)
                    graph.validate(name=f"{path}:{line_no}")
                out.append(
                    SupervisedInstance(
                        tokens=[str(t) for t in obj["tokens"]],
                        trigger=(int(obj["trigger"][0]), int(obj["trigger"][1])),
                        argument=None
                        if obj.get("argument") is None
                        else (int(obj["argument"][0]), int(obj["argument"][1])),
                        label=str(obj["label"]),
                        graph=graph,
                    )
                )
            except (KeyError, TypeError, IndexError) as exc:
                raise ParseError(f"bad instance object: {exc}", line=line_no) from exc
    return out


def write_instances_jsonl(instances: Sequence[SupervisedInstance], path) -> None:
    from .graph import graph_to_obj

    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for ins in instances:
            obj = {
                "tokens": list(ins.tokens),
                "trigger": list(ins.trigger),
                "argument": None if ins.argument is None else list(ins.argument),
                "label": ins.label,
            }
            if ins.graph is not None:
                gobj = graph_to_obj(ins.graph)
                del gobj["tokens"]
                obj["graph"] = gobj
            fh.write(json.dumps(obj, ensure_ascii=False))
            fh.write("\n")


# -- feature construction ----------------------------------------------------


def dynamic_multi_pooling(token_vectors: Tensor, splits: Sequence[int]) -> Tensor:
    """Segment-wise max pooling: each split token closes its segment
    inclusively, k splits giving k+1 segments whose maxima are
    concatenated. Empty segments contribute zeros."""
    n, d = token_vectors.shape
    splits = list(splits)
    if len(splits) not in (1, 2):
        raise ValidationError("expected 1 or 2 split positions")
    if splits != sorted(splits):
        raise ValidationError("split positions must be sorted")
    for s in splits:
        if not 0 <= s < n:
            raise ValidationError(f"split {s} out of range for {n} tokens")
    bounds = [0] + [s + 1 for s in splits] + [n]
    dtype = token_vectors.dtype
    pieces = []
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        if hi <= lo:
            pieces.append(Tensor(np.zeros(d, dtype=dtype)))
        else:
            pieces.append(token_vectors[lo:hi].max(axis=0))
    return concat(pieces)


def instance_embedding(x_sem: Tensor, g_str: Optional[Tensor]) -> Tensor:
    """Concatenation, semantic part first. A missing structure vector
    (ablations) leaves the semantic part unchanged."""
    if g_str is None:
        return x_sem
    return concat([x_sem, g_str])


class ClassifierHead:
    def __init__(self, tensors: dict[str, Tensor], n_classes: int):
        self.tensors = tensors
        self.n_classes = n_classes

    @classmethod
    def init(cls, in_dim: int, hidden_dim: int, n_classes: int,
             rng: np.random.Generator, dtype=np.float32) -> "ClassifierHead":
        def normal(shape, scale):
            return Tensor((rng.standard_normal(shape) * scale).astype(dtype), requires_grad=True)

        t = {
            "w1": normal((in_dim, hidden_dim), (1.0 / in_dim) ** 0.5),
            "b1": Tensor(np.zeros(hidden_dim, dtype=dtype), requires_grad=True),
            "w2": normal((hidden_dim, n_classes), (1.0 / hidden_dim) ** 0.5),
            "b2": Tensor(np.zeros(n_classes, dtype=dtype), requires_grad=True),
        }
        return cls(t, n_classes)

    def named_tensors(self) -> dict[str, Tensor]:
        return dict(self.tensors)

    def copy_arrays(self) -> dict[str, np.ndarray]:
        return {k: t.data.copy() for k, t in self.tensors.items()}

    def load_arrays(self, arrays: dict[str, np.ndarray]) -> None:
        for k, t in self.tensors.items():
            t.data = arrays[k].copy()


def class_logits(head: ClassifierHead, embedding: Tensor) -> Tensor:
    t = head.tensors
    if embedding.shape[0] != t["w1"].shape[0]:
        raise ValidationError(
            f"embedding dim {embedding.shape[0]} does not match head input {t['w1'].shape[0]}"
        )
    return (embedding @ t["w1"] + t["b1"]).tanh() @ t["w2"] + t["b2"]


def classify(head: ClassifierHead, embedding: Tensor) -> Tensor:
    """Class probability vector (softmax over the MLP logits)."""
    return softmax(class_logits(head, embedding), axis=-1)


def semantic_feature(params: EncoderParams, instance: SupervisedInstance,
                     max_len: Optional[int] = None) -> Tensor:
    """Dynamic multi-pooled semantic vector: markers wrap the
    candidate spans, pooling runs over the original-token rows with
    splits at the last token of each candidate span."""
    spans = [instance.trigger] + ([instance.argument] if instance.argument else [])
    marked, _ = insert_markers(instance.tokens, spans)
    enc = encode(params, marked, max_len=max_len)
    rows = [i for i, tok in enumerate(enc.tokens) if _MARKER_RE.match(tok) is None]
    token_vectors = enc.outputs[np.array(rows, dtype=np.intp)]
    n_surviving = len(rows)
    splits = sorted(span[1] - 1 for span in spans)
    for s in splits:
        if s >= n_surviving:
            raise ValidationError("candidate span lost to truncation")
    return dynamic_multi_pooling(token_vectors, splits)


def _node_for_span(g: AmrGraph, span: tuple[int, int]):
    exact = [n for n in g.nodes if n.token_span == tuple(span)]
    if exact:
        return exact[0]
    covering = [
        n
        for n in g.nodes
        if n.token_span is not None
        and n.token_span[0] <= span[0]
        and span[1] <= n.token_span[1]
    ]
    if covering:
        return min(covering, key=lambda n: (n.token_span[1] - n.token_span[0], n.id))
    return None


def structure_feature(
    text_params: EncoderParams,
    graph_params: GraphEncoderParams,
    instance: SupervisedInstance,
    max_len: Optional[int] = None,
) -> Tensor:
    """One-hop graph embedding of the classified candidate's node.
    Instances without a graph (or without a matching node) fall back
    to a single-node graph over the candidate span."""
    span = instance.argument if instance.argument is not None else instance.trigger
    if instance.graph is not None:
        node = _node_for_span(instance.graph, span)
        if node is not None:
            feats = text_node_features(instance.graph, text_params, max_len=max_len)
            return one_hop_embedding(graph_params, instance.graph, node.id, feats)
    marked, _ = insert_markers(instance.tokens, [span])
    enc = encode(text_params, marked, max_len=max_len)
    vec = span_representation(enc, 1)
    return encode_graph(graph_params, FeaturedGraph(1, [], stack([vec])))


@dataclass
class FinetuneConfig:
    batch_size: int = 40
    epochs: int = 30
    learning_rate: float = 1e-5
    adam_eps: float = 1e-8
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    max_seq_len: int = 128
    hidden_dim: int = 64
    seed: int = 0
    feature_mode: str = "both"  # both | semantic | structure

    def __post_init__(self):
        if self.feature_mode not in ("both", "semantic", "structure"):
            raise ConfigError(f"unknown feature_mode {self.feature_mode!r}")
        if self.learning_rate < 0:
            raise ConfigError("learning rate must be >= 0")


def _instance_features(instance, text_params, graph_params, config) -> Tensor:
    if config.feature_mode == "structure":
        x_sem = Tensor(np.zeros(0, dtype=np.float32))
    else:
        x_sem = semantic_feature(text_params, instance, max_len=config.max_seq_len)
    if config.feature_mode == "semantic":
        g_str = None
    else:
        g_str = structure_feature(text_params, graph_params, instance, max_len=config.max_seq_len)
    return instance_embedding(x_sem, g_str)


def micro_f1(pred_labels: Sequence[int], gold_labels: Sequence[int]) -> float:
    """Single-label micro-F1, which equals plain accuracy."""
    pred = np.asarray(pred_labels)
    gold = np.asarray(gold_labels)
    if pred.shape != gold.shape or pred.size == 0:
        raise ValidationError("prediction/gold size mismatch")
    return float((pred == gold).mean())


def finetune(
    train_instances: Sequence[SupervisedInstance],
    val_instances: Sequence[SupervisedInstance],
    text_params: EncoderParams,
    graph_params: GraphEncoderParams,
    config: FinetuneConfig,
):
    """Joint fine-tuning of both encoders plus a fresh head.

    Returns (head, label_names, history) with history rows
    (epoch, train_loss, val_f1); encoder/head parameters are left at
    the best-validation epoch.
    """
    train_instances = list(train_instances)
    val_instances = list(val_instances)
    if not train_instances or not val_instances:
        raise ValidationError("need non-empty train and validation sets")
    labels = sorted({ins.label for ins in train_instances})
    if len(labels) < 2:
        raise ValidationError("fine-tuning needs at least two classes")
    label_id = {l: i for i, l in enumerate(labels)}
    for ins in val_instances:
        if ins.label not in label_id:
            raise ValidationError(f"validation label {ins.label!r} unseen in training data")

    ss = np.random.SeedSequence(config.seed)
    init_rng, order_rng = (np.random.default_rng(s) for s in ss.spawn(2))

    probe = _instance_features(train_instances[0], text_params, graph_params, config)
    head = ClassifierHead.init(probe.shape[0], config.hidden_dim, len(labels), init_rng)

    trainable = (
        list(text_params.tensors.values())
        + list(graph_params.tensors.values())
        + list(head.tensors.values())
    )
    opt = Adam(trainable, lr=config.learning_rate, beta1=config.adam_beta1,
               beta2=config.adam_beta2, eps=config.adam_eps)

    def predict(instances):
        out = []
        for ins in instances:
            emb = _instance_features(ins, text_params, graph_params, config)
            out.append(int(np.argmax(class_logits(head, emb).data)))
        return out

    history: list[tuple[int, float, float]] = []
    best = None
    for epoch in range(1, config.epochs + 1):
        order = order_rng.permutation(len(train_instances))
        epoch_loss = 0.0
        for start in range(0, len(order), config.batch_size):
            batch = [train_instances[int(i)] for i in order[start : start + config.batch_size]]
            total = Tensor(np.asarray(0.0, dtype=np.float32))
            for ins in batch:
                emb = _instance_features(ins, text_params, graph_params, config)
                logits = class_logits(head, emb)
                log_z = logsumexp(logits, axis=0)
                total = total + (log_z - logits[label_id[ins.label]])
            loss_val = float(total.data)
            if not np.isfinite(loss_val):
                raise NumericError(f"non-finite loss in epoch {epoch}")
            epoch_loss += loss_val
            opt.zero_grad()
            total.backward()
            opt.step()
        val_f1 = micro_f1(predict(val_instances), [label_id[i.label] for i in val_instances])
        history.append((epoch, epoch_loss / len(train_instances), val_f1))
        if best is None or val_f1 > best[0]:
            best = (
                val_f1,
                text_params.copy_arrays(),
                graph_params.copy_arrays(),
                head.copy_arrays(),
            )
    if best is not None:
        text_params.load_arrays(best[1])
        graph_params.load_arrays(best[2])
        head.load_arrays(best[3])
    return head, labels, history


# -- liberal event extraction -------------------------------------------------


@dataclass
class LiberalResult:
    clustering: JointClusteringResult
    trigger_contexts: list[CandidateContext]
    argument_contexts: list[CandidateContext]
    surfaces: dict  # item id -> surface string
    trigger_schema: list[dict]
    argument_schema: list[dict]


def candidate_id(sentence_index: int, node_id: int) -> str:
    return f"{sentence_index}:{node_id}"


def _surface(g: AmrGraph, node_id: int) -> str:
    node = g.node(node_id)
    if node.token_span is not None:
        s, e = node.token_span
        return " ".join(g.sentence_tokens[s:e])
    return node.concept


def _schema_summary(contexts: list[CandidateContext], assignment: ClusterAssignment,
                    surfaces: dict, top: int = 5) -> list[dict]:
    """Per-cluster exemplars: members nearest the semantic centroid,
    deduplicated by surface form."""
    by_cluster: dict[int, list[CandidateContext]] = {}
    for ctx in contexts:
        by_cluster.setdefault(assignment.assignment[ctx.item_id], []).append(ctx)
    out = []
    for cluster in sorted(by_cluster):
        members = by_cluster[cluster]
        centroid = np.mean([np.asarray(c.semantic, dtype=np.float64) for c in members], axis=0)
        ranked = sorted(
            members,
            key=lambda c: (float(np.linalg.norm(np.asarray(c.semantic) - centroid)), c.item_id),
        )
        exemplars: list[str] = []
        for c in ranked:
            surface = surfaces[c.item_id]
            if surface not in exemplars:
                exemplars.append(surface)
            if len(exemplars) >= top:
                break
        out.append({"id": int(cluster), "exemplars": exemplars})
    return out


def build_candidate_contexts(
    corpus: Sequence[AmrGraph],
    text_params: EncoderParams,
    graph_params: GraphEncoderParams,
    use_structure: bool = True,
    max_len: Optional[int] = None,
):
    """Identify candidates in every sentence and assemble their
    clustering contexts (semantic span vectors, per-relation and
    whole-graph structure vectors, counterpart edges)."""
    trigger_contexts: list[CandidateContext] = []
    argument_contexts: list[CandidateContext] = []
    surfaces: dict = {}
    for si, g in enumerate(corpus):
        triggers, arguments = identify_candidates(g)
        if not triggers and not arguments:
            continue
        feats = text_node_features(g, text_params, max_len=max_len)
        feats = {i: v.detach() for i, v in feats.items()}
        whole = None
        if use_structure and triggers:
            whole = encode_graph(graph_params, FeaturedGraph.from_amr(g, feats)).data.copy()
        core = [e for e in g.edges if core_relation(e.rel)]
        for t in triggers:
            iid = candidate_id(si, t)
            surfaces[iid] = _surface(g, t)
            edges = sorted((e.rel, candidate_id(si, e.dst)) for e in core if e.src == t)
            rel_structs = {}
            if use_structure:
                by_rel: dict[str, list[int]] = {}
                for e in core:
                    if e.src == t:
                        by_rel.setdefault(e.rel, []).append(e.dst)
                for rel, neighbors in by_rel.items():
                    vecs = [
                        one_hop_embedding(graph_params, g, nb, feats).data for nb in neighbors
                    ]
                    rel_structs[rel] = np.mean(vecs, axis=0)
            trigger_contexts.append(
                CandidateContext(
                    item_id=iid,
                    kind="trigger",
                    semantic=feats[t].data.copy(),
                    edges=edges,
                    rel_structs=rel_structs,
                    whole_struct=whole,
                )
            )
        for a in arguments:
            iid = candidate_id(si, a)
            surfaces[iid] = _surface(g, a)
            edges = sorted((e.rel, candidate_id(si, e.src)) for e in core if e.dst == a)
            argument_contexts.append(
                CandidateContext(
                    item_id=iid, kind="argument", semantic=feats[a].data.copy(), edges=edges
                )
            )
    return trigger_contexts, argument_contexts, surfaces


def liberal_pipeline(
    corpus: Sequence[AmrGraph],
    text_params: EncoderParams,
    graph_params: GraphEncoderParams,
    config: ClusteringConfig,
    max_len: Optional[int] = None,
) -> LiberalResult:
    """End-to-end unsupervised extraction: candidates, representations,
    joint clustering, schema summary."""
    corpus = list(corpus)
    if not corpus:
        raise ValidationError("empty corpus")
    trigger_contexts, argument_contexts, surfaces = build_candidate_contexts(
        corpus, text_params, graph_params, use_structure=config.use_structure, max_len=max_len
    )
    if not trigger_contexts or not argument_contexts:
        raise ValidationError("no trigger/argument candidates found in the corpus")
    clustering = joint_cluster(trigger_contexts, argument_contexts, config)
    trig_schema = _schema_summary(trigger_contexts, clustering.triggers, surfaces)
    arg_schema = _schema_summary(argument_contexts, clustering.arguments, surfaces)
    return LiberalResult(
        clustering, trigger_contexts, argument_contexts, surfaces, trig_schema, arg_schema
    )
