import json

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from amrevent.errors import ParseError, ValidationError
from amrevent.graph import (
    AmrEdge,
    AmrGraph,
    AmrNode,
    core_relation,
    identify_candidates,
    merge_entity_nodes,
    positive_pairs,
    read_corpus_jsonl,
    sample_negatives,
    write_corpus_jsonl,
)

from conftest import chain_graph, figure_graph, random_dag


class TestReadCorpus:
    def test_minimal_line(self, tmp_path):
        p = tmp_path / "c.jsonl"
        p.write_text('{"tokens":["a"],"nodes":[{"id":0,"concept":"a","span":[0,1]}],"edges":[]}\n')
        graphs = read_corpus_jsonl(p)
        assert len(graphs) == 1
        assert graphs[0].nodes[0].concept == "a"
        assert graphs[0].nodes[0].token_span == (0, 1)

    def test_dangling_edge_rejected(self, tmp_path):
        p = tmp_path / "c.jsonl"
        p.write_text(
            '{"tokens":["a"],"nodes":[{"id":0,"concept":"a","span":null}],'
            '"edges":[{"src":0,"dst":5,"rel":"ARG0"}]}\n'
        )
        with pytest.raises(ValidationError, match="dangling"):
            read_corpus_jsonl(p)

    def test_malformed_line_reports_line_number(self, tmp_path):
        good = '{"tokens":[],"nodes":[],"edges":[]}'
        p = tmp_path / "c.jsonl"
        p.write_text(f"{good}\nnot json at all\n{good}\n")
        with pytest.raises(ParseError, match="line 2"):
            read_corpus_jsonl(p)

    def test_cycle_rejected(self, tmp_path):
        p = tmp_path / "c.jsonl"
        obj = {
            "tokens": [],
            "nodes": [{"id": 0, "concept": "x", "span": None}, {"id": 1, "concept": "y", "span": None}],
            "edges": [{"src": 0, "dst": 1, "rel": "ARG0"}, {"src": 1, "dst": 0, "rel": "ARG1"}],
        }
        p.write_text(json.dumps(obj) + "\n")
        with pytest.raises(ValidationError, match="cycle"):
            read_corpus_jsonl(p)

    def test_roundtrip(self, tmp_path):
        g = figure_graph()
        p = tmp_path / "c.jsonl"
        write_corpus_jsonl([g], p)
        back = read_corpus_jsonl(p)[0]
        assert back == g


class TestMergeEntityNodes:
    def build_name_chain(self):
        # person -name-> n, n -op1-> Kelly, n -op2-> Wallace
        return AmrGraph(
            ["kelly", "wallace", "spoke"],
            [
                AmrNode(0, "person", (0, 1)),
                AmrNode(1, "name"),
                AmrNode(2, "Kelly", (0, 1)),
                AmrNode(3, "Wallace", (1, 2)),
                AmrNode(4, "speak", (2, 3)),
            ],
            [
                AmrEdge(0, 1, "name"),
                AmrEdge(1, 2, "op1"),
                AmrEdge(1, 3, "op2"),
                AmrEdge(4, 0, "ARG0"),
            ],
        )

    def test_collapse_and_span_union(self):
        merged = merge_entity_nodes(self.build_name_chain())
        entity = merged.node(0)
        assert entity.concept == "person"
        assert entity.token_span == (0, 2)
        assert entity.merged_from == [1, 2, 3]
        assert {n.id for n in merged.nodes} == {0, 4}
        assert [(e.src, e.dst, e.rel) for e in merged.edges] == [(4, 0, "ARG0")]

    def test_identity_without_merge_edges(self):
        g = figure_graph()
        merged = merge_entity_nodes(g)
        assert merged == g
        assert merged is not g

    def test_two_disjoint_chains(self):
        g = AmrGraph(
            ["a", "b"],
            [
                AmrNode(0, "person", (0, 1)),
                AmrNode(1, "City"),
                AmrNode(2, "meet"),
                AmrNode(3, "country", (1, 2)),
                AmrNode(4, "Town"),
            ],
            [
                AmrEdge(0, 1, "name"),
                AmrEdge(2, 0, "ARG0"),
                AmrEdge(2, 3, "location"),
                AmrEdge(3, 4, "op1"),
            ],
        )
        merged = merge_entity_nodes(g)
        assert {n.id for n in merged.nodes} == {0, 2, 3}
        assert merged.node(0).merged_from == [1]
        assert merged.node(3).merged_from == [4]
        assert merged.node(2).merged_from == []

    def test_idempotent(self):
        once = merge_entity_nodes(self.build_name_chain())
        twice = merge_entity_nodes(once)
        assert once == twice

    def test_parallel_edges_dedup(self):
        g = AmrGraph(
            [],
            [AmrNode(0, "x"), AmrNode(1, "name"), AmrNode(2, "y"), AmrNode(3, "z")],
            [
                AmrEdge(0, 1, "name"),
                AmrEdge(3, 0, "ARG0"),
                AmrEdge(3, 1, "ARG0"),
            ],
        )
        merged = merge_entity_nodes(g)
        assert [(e.src, e.dst, e.rel) for e in merged.edges] == [(3, 0, "ARG0")]

    def test_self_loop_dropped_with_warning(self):
        g = AmrGraph(
            [],
            [AmrNode(0, "x"), AmrNode(1, "name")],
            [AmrEdge(0, 1, "name"), AmrEdge(1, 0, "mod")],
        )
        with pytest.warns(UserWarning, match="self-loop"):
            merged = merge_entity_nodes(g)
        assert merged.edges == []

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 10_000))
    def test_idempotence_on_random_dags(self, seed):
        g = random_dag(np.random.default_rng(seed))
        try:
            once = merge_entity_nodes(g)
        except ValidationError:
            # random graphs can wire name/op chains so that collapsing
            # them creates a cycle; merge refuses those
            assume(False)
        assert merge_entity_nodes(once) == once


class TestCoreRelation:
    @pytest.mark.parametrize(
        "rel,expected",
        [
            ("ARG1", True),
            ("ARG0", True),
            ("ARG", True),
            ("ARG12", True),
            ("time", True),
            ("location", True),
            ("op1", False),
            ("mod", False),
            ("name", False),
            ("ARGx", False),
            ("Time", False),
        ],
    )
    def test_family(self, rel, expected):
        assert core_relation(rel) is expected


class TestPositivePairs:
    def test_figure_case(self):
        g = figure_graph()
        assert positive_pairs(g).positives == [(0, 1), (1, 2), (1, 3)]

    def test_non_core_only(self):
        g = AmrGraph(
            [],
            [AmrNode(0, "x"), AmrNode(1, "y")],
            [AmrEdge(0, 1, "op1")],
        )
        assert positive_pairs(g).positives == []

    def test_dedup_parallel_core_edges(self):
        g = AmrGraph(
            [],
            [AmrNode(0, "t"), AmrNode(1, "a")],
            [AmrEdge(0, 1, "ARG0"), AmrEdge(0, 1, "ARG1")],
        )
        assert positive_pairs(g).positives == [(0, 1)]

    def test_empty_graph(self):
        assert positive_pairs(AmrGraph([], [], [])).positives == []

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 10_000))
    def test_pairs_are_core_edges(self, seed):
        g = random_dag(np.random.default_rng(seed))
        edges = {(e.src, e.dst) for e in g.edges if core_relation(e.rel)}
        assert set(positive_pairs(g).positives) == edges


class TestSampleNegatives:
    def test_validity_rule(self):
        g = figure_graph()
        rng = np.random.default_rng(0)
        negs = sample_negatives(g, (1, 3), m_t=10, m_a=10, rng=rng)
        trig_replaced = [n for n in negs if n.replaced == "trigger"]
        arg_replaced = [n for n in negs if n.replaced == "argument"]
        # nodes 0 ("report") and 2 ("today") have no core edge to 3
        assert {n.pair for n in trig_replaced} == {(0, 3), (2, 3)}
        # node 2 ("today") is excluded as a replacement argument: (1, 2, time) exists
        assert {n.pair for n in arg_replaced} == {(1, 0)}

    def test_two_node_graph_has_no_candidates(self):
        g = AmrGraph([], [AmrNode(0, "t"), AmrNode(1, "a")], [AmrEdge(0, 1, "ARG0")])
        assert sample_negatives(g, (0, 1), 3, 3, np.random.default_rng(0)) == []

    def test_deterministic_given_seed(self):
        g = random_dag(np.random.default_rng(42), max_nodes=15)
        pairs = positive_pairs(g).positives
        if not pairs:
            pytest.skip("random graph without core edges")
        a = sample_negatives(g, pairs[0], 3, 3, np.random.default_rng(5))
        b = sample_negatives(g, pairs[0], 3, 3, np.random.default_rng(5))
        assert a == b

    def test_non_positive_pair_rejected(self):
        g = figure_graph()
        with pytest.raises(ValidationError):
            sample_negatives(g, (0, 3), 1, 1, np.random.default_rng(0))

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 10_000))
    def test_no_core_edge_constraint_always_holds(self, seed):
        rng = np.random.default_rng(seed)
        g = random_dag(rng, max_nodes=12)
        core = {(e.src, e.dst) for e in g.edges if core_relation(e.rel)}
        for pair in positive_pairs(g).positives:
            for neg in sample_negatives(g, pair, 4, 4, rng):
                assert neg.pair not in core
                assert neg.pair[0 if neg.replaced == "trigger" else 1] not in pair


class TestIdentifyCandidates:
    def test_figure_case(self):
        triggers, arguments = identify_candidates(figure_graph())
        assert triggers == [0, 1]  # both "report" and "attack" head core edges
        assert arguments == [1, 2, 3]

    def test_edgeless(self):
        g = AmrGraph([], [AmrNode(0, "x")], [])
        assert identify_candidates(g) == ([], [])

    def test_chain(self):
        triggers, arguments = identify_candidates(chain_graph())
        assert triggers == [0, 1]
        assert arguments == [1, 2]
