"""Synthetic corpora with known latent event classes.

Each trigger class owns a private vocabulary and a characteristic
pattern of (relation, argument-class) slots; each argument class owns
its own vocabulary too. Sentences are one trigger plus its sampled
arguments and a little filler, shuffled into random order, with the
matching AMR graph attached. Because the generative classes are known,
B-Cubed scores of any clustering of the candidates are well-defined,
which is what the end-to-end evaluations run against.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .downstream import SupervisedInstance, candidate_id
from .graph import AmrEdge, AmrGraph, AmrNode

_RELATIONS = ["ARG0", "ARG1", "time", "location"]


@dataclass
class SyntheticSpec:
    n_sentences: int = 300
    trigger_classes: int = 4
    argument_classes: int = 3
    words_per_trigger_class: int = 6
    words_per_argument_class: int = 6
    n_filler_words: int = 12
    max_filler: int = 2
    slot_keep_probability: float = 0.85
    seed: int = 0


def _trigger_vocab(spec: SyntheticSpec) -> list[list[str]]:
    return [
        [f"trig{k}{chr(ord('a') + j)}" for j in range(spec.words_per_trigger_class)]
        for k in range(spec.trigger_classes)
    ]


def _argument_vocab(spec: SyntheticSpec) -> list[list[str]]:
    return [
        [f"arg{c}{chr(ord('a') + j)}" for j in range(spec.words_per_argument_class)]
        for c in range(spec.argument_classes)
    ]


def _patterns(spec: SyntheticSpec) -> list[list[tuple[str, int]]]:
    """Per trigger class, its (relation, argument class) slots.

    Classes consume a running counter v, taking (relation v mod R,
    argument class v mod A) per slot. While the total slot count stays
    under lcm(R, A) this makes every (relation, argument-class) slot
    globally unique, so no two trigger classes share a slot; within a
    sentence relations and argument classes are distinct too, which
    matters because co-occurring same-class arguments would repel each
    other through the in-sentence negative sampling."""
    out = []
    v = 0
    for k in range(spec.trigger_classes):
        width = min(2 + (k % 2), spec.argument_classes, len(_RELATIONS))
        out.append(
            [
                (_RELATIONS[(v + i) % len(_RELATIONS)], (v + i) % spec.argument_classes)
                for i in range(width)
            ]
        )
        v += width
    return out


def _build_sentence(spec: SyntheticSpec, rng: np.random.Generator,
                    tvocab, avocab, patterns):
    k = int(rng.integers(spec.trigger_classes))
    trigger_word = tvocab[k][int(rng.integers(len(tvocab[k])))]
    slots = [s for s in patterns[k] if rng.random() < spec.slot_keep_probability]
    if not slots:
        slots = [patterns[k][0]]
    args = [
        (rel, c, avocab[c][int(rng.integers(len(avocab[c])))]) for rel, c in slots
    ]
    fillers = [
        f"filler{int(rng.integers(spec.n_filler_words))}"
        for _ in range(int(rng.integers(spec.max_filler + 1)))
    ]

    words = [("trigger", trigger_word)] + [("arg", i) for i in range(len(args))] + [
        ("filler", w) for w in fillers
    ]
    order = rng.permutation(len(words))
    tokens: list[str] = []
    position: dict = {}
    for slot_index in order:
        kind, payload = words[int(slot_index)]
        if kind == "arg":
            tokens.append(args[payload][2])
        else:
            tokens.append(payload)
        position[int(slot_index)] = len(tokens) - 1

    trig_pos = position[0]
    nodes = [AmrNode(0, trigger_word, (trig_pos, trig_pos + 1))]
    edges = []
    gold_args = {}
    for i, (rel, c, word) in enumerate(args):
        pos = position[1 + i]
        nid = 1 + i
        nodes.append(AmrNode(nid, word, (pos, pos + 1)))
        edges.append(AmrEdge(0, nid, rel))
        gold_args[nid] = f"A{c}"
    for j, w in enumerate(fillers):
        pos = position[1 + len(args) + j]
        nid = 1 + len(args) + j
        nodes.append(AmrNode(nid, w, (pos, pos + 1)))
        edges.append(AmrEdge(0, nid, "mod"))
    graph = AmrGraph(tokens, nodes, edges)
    return graph, k, gold_args, trig_pos


def generate_liberal_corpus(spec: SyntheticSpec):
    """(graphs, gold_triggers, gold_arguments): gold maps candidate
    ids ("<sentence>:<node>") to latent class names T<k> / A<c>."""
    rng = np.random.default_rng(spec.seed)
    tvocab, avocab, patterns = _trigger_vocab(spec), _argument_vocab(spec), _patterns(spec)
    graphs: list[AmrGraph] = []
    gold_triggers: dict = {}
    gold_arguments: dict = {}
    for si in range(spec.n_sentences):
        g, k, gold_args, _ = _build_sentence(spec, rng, tvocab, avocab, patterns)
        graphs.append(g)
        gold_triggers[candidate_id(si, 0)] = f"T{k}"
        for nid, label in gold_args.items():
            gold_arguments[candidate_id(si, nid)] = label
    return graphs, gold_triggers, gold_arguments


def generate_supervised_instances(spec: SyntheticSpec) -> list[SupervisedInstance]:
    """Trigger-classification instances (label = latent trigger class)
    with their AMR graphs attached, so both the semantic and the
    structure feature carry class signal."""
    rng = np.random.default_rng(spec.seed)
    tvocab, avocab, patterns = _trigger_vocab(spec), _argument_vocab(spec), _patterns(spec)
    out = []
    for _ in range(spec.n_sentences):
        g, k, _gold_args, trig_pos = _build_sentence(spec, rng, tvocab, avocab, patterns)
        out.append(
            SupervisedInstance(
                tokens=g.sentence_tokens,
                trigger=(trig_pos, trig_pos + 1),
                argument=None,
                label=f"T{k}",
                graph=g,
            )
        )
    return out


def split_train_val(items: Sequence, val_fraction: float, seed: int):
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(items))
    n_val = max(1, int(round(val_fraction * len(items))))
    val = [items[int(i)] for i in order[:n_val]]
    train = [items[int(i)] for i in order[n_val:]]
    return train, val
