"""AMR graph data model and the graph-level operations the training
objectives are built from.

Graphs are directed acyclic, with concept-labeled nodes optionally
aligned to half-open token spans of the sentence, and relation-labeled
edges. Multi-word entities arrive from parsers as chains of "name" /
"opN" edges; ``merge_entity_nodes`` collapses each such chain into a
single node before any pair extraction happens.

The canonical corpus format is JSON Lines, one sentence per line:

    {"tokens": ["..."],
     "nodes": [{"id": 0, "concept": "...", "span": [s, e] | null}, ...],
     "edges": [{"src": 0, "dst": 1, "rel": "ARG0"}, ...]}
"""

from __future__ import annotations

import json
import re
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .errors import ParseError, ValidationError

CORE_RELATION_RE = re.compile(r"^ARG\d*$")
MERGE_RELATION_RE = re.compile(r"^op\d+$")


@dataclass
class AmrNode:
    """A concept node, optionally aligned to tokens [start, end)."""

    id: int
    concept: str
    token_span: Optional[tuple[int, int]] = None
    merged_from: list[int] = field(default_factory=list)


@dataclass
class AmrEdge:
    """A labeled directed edge src -> dst."""

    src: int
    dst: int
    rel: str


@dataclass
class AmrGraph:
    sentence_tokens: list[str]
    nodes: list[AmrNode]
    edges: list[AmrEdge]

    def node_ids(self) -> list[int]:
        return [n.id for n in self.nodes]

    def node(self, node_id: int) -> AmrNode:
        for n in self.nodes:
            if n.id == node_id:
                return n
        raise ValidationError(f"unknown node id {node_id}")

    def roots(self) -> list[int]:
        """Node ids with no incoming edge, ascending."""
        has_incoming = {e.dst for e in self.edges}
        return sorted(n.id for n in self.nodes if n.id not in has_incoming)

    def undirected_neighbors(self, node_id: int) -> list[int]:
        out = set()
        for e in self.edges:
            if e.src == node_id:
                out.add(e.dst)
            elif e.dst == node_id:
                out.add(e.src)
        return sorted(out)

    def validate(self, name: str = "graph") -> "AmrGraph":
        """Check all structural invariants, raising ValidationError
        with `name` in the message on the first violation."""
        ids = [n.id for n in self.nodes]
        id_set = set(ids)
        if len(ids) != len(id_set):
            raise ValidationError(f"{name}: duplicate node ids")
        n_tok = len(self.sentence_tokens)
        for n in self.nodes:
            if n.token_span is not None:
                s, e = n.token_span
                if not (0 <= s < e <= n_tok):
                    raise ValidationError(
                        f"{name}: node {n.id} span [{s},{e}) outside sentence of {n_tok} tokens"
                    )
        for e in self.edges:
            if e.src not in id_set or e.dst not in id_set:
                raise ValidationError(f"{name}: dangling edge {e.src}->{e.dst}")
            if e.src == e.dst:
                raise ValidationError(f"{name}: self-loop on node {e.src}")
        if self._has_cycle():
            raise ValidationError(f"{name}: directed cycle detected")
        return self

    def _has_cycle(self) -> bool:
        succ: dict[int, list[int]] = {n.id: [] for n in self.nodes}
        indeg = {n.id: 0 for n in self.nodes}
        for e in self.edges:
            succ[e.src].append(e.dst)
            indeg[e.dst] += 1
        queue = [i for i, d in indeg.items() if d == 0]
        seen = 0
        while queue:
            u = queue.pop()
            seen += 1
            for v in succ[u]:
                indeg[v] -= 1
                if indeg[v] == 0:
                    queue.append(v)
        return seen != len(self.nodes)


@dataclass
class PairSet:
    """Positive trigger-argument pairs of one sentence."""

    positives: list[tuple[int, int]]


@dataclass
class NegativeSample:
    pair: tuple[int, int]
    replaced: str  # "trigger" | "argument"


# -- corpus I/O ----------------------------------------------------------


def _node_from_obj(obj: dict, line_no: int) -> AmrNode:
    try:
        span = obj.get("span")
        return AmrNode(
            id=int(obj["id"]),
            concept=str(obj["concept"]),
            token_span=None if span is None else (int(span[0]), int(span[1])),
            merged_from=[int(x) for x in obj.get("merged_from", [])],
        )
    except (KeyError, TypeError, IndexError) as exc:
        raise ParseError(f"bad node object: {exc}", line=line_no) from exc


def graph_from_obj(obj: dict, line_no: int = 0) -> AmrGraph:
    try:
        tokens = [str(t) for t in obj["tokens"]]
        nodes = [_node_from_obj(n, line_no) for n in obj["nodes"]]
        edges = [
            AmrEdge(int(e["src"]), int(e["dst"]), str(e["rel"])) for e in obj["edges"]
        ]
    except (KeyError, TypeError) as exc:
        raise ParseError(f"bad graph object: {exc}", line=line_no) from exc
    return AmrGraph(tokens, nodes, edges)


def graph_to_obj(g: AmrGraph) -> dict:
    nodes = []
    for n in g.nodes:
        obj = {
            "id": n.id,
            "concept": n.concept,
            "span": None if n.token_span is None else list(n.token_span),
        }
        if n.merged_from:
            obj["merged_from"] = list(n.merged_from)
        nodes.append(obj)
    return {
        "tokens": list(g.sentence_tokens),
        "nodes": nodes,
        "edges": [{"src": e.src, "dst": e.dst, "rel": e.rel} for e in g.edges],
    }


def read_corpus_jsonl(path) -> list[AmrGraph]:
    """Read and validate a whole JSONL corpus.

    Raises ParseError with the 1-based line number on malformed JSON
    and ValidationError naming the graph on invariant violations.
    """
    graphs = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"malformed JSON: {exc.msg}", line=line_no) from exc
            g = graph_from_obj(obj, line_no)
            g.validate(name=f"{path}:{line_no}")
            graphs.append(g)
    return graphs


def write_corpus_jsonl(graphs: Iterable[AmrGraph], path) -> None:
    """Write graphs in the canonical one-object-per-line form (UTF-8, LF)."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for g in graphs:
            fh.write(json.dumps(graph_to_obj(g), ensure_ascii=False))
            fh.write("\n")


# -- entity merging ------------------------------------------------------


def _is_merge_relation(rel: str) -> bool:
    return rel == "name" or MERGE_RELATION_RE.match(rel) is not None


def merge_entity_nodes(g: AmrGraph) -> AmrGraph:
    """Collapse every maximal component connected by "name"/"opN"
    edges into one node.

    The surviving node keeps the head's id and concept (head = the
    component member without an incoming merge edge from inside the
    component), its token span is the smallest range covering all
    member spans, and merged_from lists the absorbed ids. Edges into
    or out of absorbed members are re-targeted; parallel duplicates
    collapse; an edge that would become a self-loop is dropped with a
    warning. Idempotent.
    """
    merge_edges = [e for e in g.edges if _is_merge_relation(e.rel)]
    if not merge_edges:
        return AmrGraph(
            list(g.sentence_tokens),
            [AmrNode(n.id, n.concept, n.token_span, list(n.merged_from)) for n in g.nodes],
            [AmrEdge(e.src, e.dst, e.rel) for e in g.edges],
        )

    # union-find over merge edges
    parent = {n.id: n.id for n in g.nodes}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)

    for e in merge_edges:
        union(e.src, e.dst)

    components: dict[int, list[int]] = {}
    for n in g.nodes:
        components.setdefault(find(n.id), []).append(n.id)

    node_by_id = {n.id: n for n in g.nodes}
    replacement: dict[int, int] = {}
    new_nodes: list[AmrNode] = []
    merge_dst = {e.dst for e in merge_edges}
    for members in components.values():
        if len(members) == 1:
            n = node_by_id[members[0]]
            new_nodes.append(AmrNode(n.id, n.concept, n.token_span, list(n.merged_from)))
            continue
        heads = sorted(m for m in members if m not in merge_dst)
        head = heads[0] if heads else min(members)
        spans = [node_by_id[m].token_span for m in members if node_by_id[m].token_span]
        span = (min(s for s, _ in spans), max(e for _, e in spans)) if spans else None
        absorbed = sorted(m for m in members if m != head)
        prior = list(node_by_id[head].merged_from)
        new_nodes.append(AmrNode(head, node_by_id[head].concept, span, prior + absorbed))
        for m in members:
            replacement[m] = head

    new_nodes.sort(key=lambda n: n.id)
    new_edges: list[AmrEdge] = []
    seen: set[tuple[int, int, str]] = set()
    for e in g.edges:
        if _is_merge_relation(e.rel):
            continue
        src = replacement.get(e.src, e.src)
        dst = replacement.get(e.dst, e.dst)
        if src == dst:
            warnings.warn(
                f"dropping edge {e.src}->{e.dst} ({e.rel}): becomes a self-loop after merging"
            )
            continue
        key = (src, dst, e.rel)
        if key in seen:
            continue
        seen.add(key)
        new_edges.append(AmrEdge(src, dst, e.rel))

    merged = AmrGraph(list(g.sentence_tokens), new_nodes, new_edges)
    merged.validate(name="merged graph")
    return merged


# -- pair extraction -----------------------------------------------------


def core_relation(rel: str) -> bool:
    """True for the trigger-argument relation family: time, location,
    and ARG with any digits (ARG, ARG0..ARG9, ...)."""
    return rel in ("time", "location") or CORE_RELATION_RE.match(rel) is not None


def positive_pairs(g: AmrGraph) -> PairSet:
    """All (trigger, argument) node pairs connected by a core
    relation, deduplicated, ascending by (src, dst)."""
    pairs = {(e.src, e.dst) for e in g.edges if core_relation(e.rel)}
    return PairSet(sorted(pairs))


def sample_negatives(
    g: AmrGraph,
    pair: tuple[int, int],
    m_t: int,
    m_a: int,
    rng: np.random.Generator,
) -> list[NegativeSample]:
    """Corrupt one positive pair.

    Draws up to m_t replacement triggers and up to m_a replacement
    arguments, uniformly without replacement, from nodes outside the
    pair that have no core-relation edge to the kept endpoint. Fewer
    valid candidates than requested shortens the list; it is not an
    error.
    """
    t, a = pair
    core_edges = {(e.src, e.dst) for e in g.edges if core_relation(e.rel)}
    if (t, a) not in core_edges:
        raise ValidationError(f"({t},{a}) is not a positive pair of this graph")
    others = [n.id for n in g.nodes if n.id not in (t, a)]
    trig_pool = sorted(v for v in others if (v, a) not in core_edges)
    arg_pool = sorted(v for v in others if (t, v) not in core_edges)
    out: list[NegativeSample] = []
    if trig_pool and m_t > 0:
        picked = rng.choice(trig_pool, size=min(m_t, len(trig_pool)), replace=False)
        out.extend(NegativeSample((int(v), a), "trigger") for v in sorted(picked))
    if arg_pool and m_a > 0:
        picked = rng.choice(arg_pool, size=min(m_a, len(arg_pool)), replace=False)
        out.extend(NegativeSample((t, int(v)), "argument") for v in sorted(picked))
    return out


def identify_candidates(g: AmrGraph) -> tuple[list[int], list[int]]:
    """(triggers, arguments): nodes with an outgoing / incoming core
    edge, each list ascending. A node may appear in both."""
    triggers = sorted({e.src for e in g.edges if core_relation(e.rel)})
    arguments = sorted({e.dst for e in g.edges if core_relation(e.rel)})
    return triggers, arguments
