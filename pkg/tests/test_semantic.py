import math

import numpy as np
import pytest

from amrevent.autodiff import Tensor, check_gradients
from amrevent.errors import ValidationError
from amrevent.graph import AmrEdge, AmrGraph, AmrNode
from amrevent.semantic import (
    BilinearScorer,
    SemanticTrainConfig,
    batch_loss,
    build_sentence_example,
    pair_loss,
    pair_loss_from_scores,
    pair_score,
    train_semantic,
    validation_split,
)
from amrevent.text_encoder import EncoderConfig

from conftest import figure_graph


def scorer(matrix):
    return BilinearScorer(Tensor(np.asarray(matrix, dtype=np.float64), requires_grad=True))


class TestPairScore:
    def test_identity_metric_unit_vectors(self):
        e1 = np.array([1.0, 0.0])
        assert float(pair_score(e1, e1, scorer(np.eye(2)))) == 1.0

    def test_zero_metric(self):
        rng = np.random.default_rng(0)
        s = scorer(np.zeros((3, 3)))
        assert float(pair_score(rng.standard_normal(3), rng.standard_normal(3), s)) == 0.0

    def test_hand_value(self):
        assert float(pair_score([1.0, 2.0], [3.0, 4.0], scorer(np.eye(2)))) == 11.0

    def test_dimension_mismatch(self):
        with pytest.raises(ValidationError):
            pair_score([1.0, 2.0], [1.0, 2.0, 3.0], scorer(np.eye(2)))


class TestPairLoss:
    def test_all_zero_scores_full_negatives(self):
        zero = Tensor(np.asarray(0.0))
        loss = pair_loss_from_scores(zero, [zero] * 39)  # m_t=9 plus m_a=30
        assert abs(float(loss) - math.log(40.0)) < 1e-9

    def test_no_negatives_exactly_zero(self):
        loss = pair_loss_from_scores(Tensor(np.asarray(1.7)), [])
        assert float(loss) == 0.0

    def test_single_equal_negative(self):
        s = Tensor(np.asarray(0.3))
        assert abs(float(pair_loss_from_scores(s, [s])) - math.log(2.0)) < 1e-12

    def test_monotonic_in_positive_and_negative_scores(self):
        negs = [Tensor(np.asarray(v)) for v in (0.1, -0.2)]
        base = float(pair_loss_from_scores(Tensor(np.asarray(0.5)), negs))
        higher_pos = float(pair_loss_from_scores(Tensor(np.asarray(0.9)), negs))
        assert higher_pos < base
        worse_neg = float(
            pair_loss_from_scores(Tensor(np.asarray(0.5)), [Tensor(np.asarray(0.6)), negs[1]])
        )
        assert worse_neg > base

    def test_shift_invariance_at_score_level(self):
        rng = np.random.default_rng(3)
        pos = float(rng.standard_normal())
        negs = list(rng.standard_normal(7))
        for shift in (-3.0, 0.7, 42.0):
            a = float(pair_loss_from_scores(Tensor(np.asarray(pos)), [Tensor(np.asarray(v)) for v in negs]))
            b = float(
                pair_loss_from_scores(
                    Tensor(np.asarray(pos + shift)),
                    [Tensor(np.asarray(v + shift)) for v in negs],
                )
            )
            assert abs(a - b) < 1e-9

    def test_nonnegative_on_random_scores(self):
        rng = np.random.default_rng(4)
        for _ in range(200):
            pos = Tensor(rng.standard_normal())
            negs = [Tensor(v) for v in rng.standard_normal(int(rng.integers(0, 6)))]
            assert float(pair_loss_from_scores(pos, negs)) >= 0.0

    def test_gradcheck(self):
        rng = np.random.default_rng(5)
        x_t = Tensor(rng.standard_normal(6), requires_grad=True)
        x_a = Tensor(rng.standard_normal(6), requires_grad=True)
        w = Tensor(rng.standard_normal((6, 6)), requires_grad=True)
        neg_t = [Tensor(rng.standard_normal(6), requires_grad=True) for _ in range(3)]
        neg_a = [Tensor(rng.standard_normal(6), requires_grad=True) for _ in range(2)]

        def f():
            return pair_loss((x_t, x_a), neg_t, neg_a, BilinearScorer(w))

        worst = check_gradients(
            f, [x_t, x_a, w] + neg_t + neg_a, rng=np.random.default_rng(6), probes=4, rtol=1e-4
        )
        assert worst < 1e-4


class TestBatchLoss:
    def setup_params(self):
        cfg = SemanticTrainConfig(
            batch_size=4, steps=2, learning_rate=1e-3, m_t=2, m_a=2, max_seq_len=32,
            encoder=EncoderConfig(layers=1, dim=16, heads=2, max_len=32, marker_pairs=4),
        )
        return cfg

    def corpus(self, n=6):
        return [figure_graph() for _ in range(n)]

    def test_no_core_edges_zero(self, tiny_params):
        g = AmrGraph([], [AmrNode(0, "x"), AmrNode(1, "y")], [AmrEdge(0, 1, "op1")])
        ex = build_sentence_example(g, 2, 2, np.random.default_rng(0))
        s = BilinearScorer.init(16, np.random.default_rng(1))
        assert float(batch_loss([ex], tiny_params, s)) == 0.0

    def test_two_identical_sentences_double_the_loss(self, tiny_params):
        s = BilinearScorer.init(16, np.random.default_rng(1))
        ex = build_sentence_example(figure_graph(), 2, 2, np.random.default_rng(2))
        one = float(batch_loss([ex], tiny_params, s))
        two = float(batch_loss([ex, ex], tiny_params, s))
        assert abs(two - 2.0 * one) < 1e-4

    def test_permutation_invariant_over_sentences(self, tiny_params):
        s = BilinearScorer.init(16, np.random.default_rng(1))
        rng = np.random.default_rng(3)
        exs = [build_sentence_example(figure_graph(), 2, 2, rng) for _ in range(3)]
        a = float(batch_loss(exs, tiny_params, s))
        b = float(batch_loss(exs[::-1], tiny_params, s))
        assert abs(a - b) < 1e-5


class TestTrainSemantic:
    def small_corpus(self, n=30, seed=0):
        rng = np.random.default_rng(seed)
        graphs = []
        words = ["strike", "talk", "visit", "crash"]
        places = ["paris", "rome", "oslo", "cairo"]
        for _ in range(n):
            w = words[int(rng.integers(4))]
            p = places[int(rng.integers(4))]
            tokens = [w, p, "x"]
            graphs.append(
                AmrGraph(
                    tokens,
                    [
                        AmrNode(0, w, (0, 1)),
                        AmrNode(1, p, (1, 2)),
                        AmrNode(2, "x", (2, 3)),
                    ],
                    [AmrEdge(0, 1, "ARG0"), AmrEdge(0, 2, "mod")],
                )
            )
        return graphs

    def config(self, **kw):
        base = dict(
            batch_size=8, steps=12, learning_rate=2e-3, m_t=3, m_a=3, max_seq_len=32,
            seed=11,
            encoder=EncoderConfig(layers=1, dim=16, heads=2, max_len=32, marker_pairs=4,
                                  dropout=0.0),
        )
        base.update(kw)
        return SemanticTrainConfig(**base)

    def test_loss_decreases(self):
        corpus = self.small_corpus(40)
        params, scorer_, trace = train_semantic(corpus, self.config(steps=30))
        first = np.mean([r[1] for r in trace[:5]])
        last = np.mean([r[1] for r in trace[-5:]])
        assert last < first

    def test_same_seed_identical_traces(self):
        corpus = self.small_corpus(20)
        _, _, t1 = train_semantic(corpus, self.config())
        _, _, t2 = train_semantic(corpus, self.config())
        assert t1 == t2

    def test_zero_lr_keeps_parameters(self):
        corpus = self.small_corpus(10)
        cfg = self.config(learning_rate=0.0, steps=4, batch_size=9, m_t=99, m_a=99)
        params, scorer_, trace = train_semantic(corpus, cfg)
        cfg2 = self.config(learning_rate=0.0, steps=1, batch_size=9, m_t=99, m_a=99)
        params2, scorer2, _ = train_semantic(corpus, cfg2)
        for name in params.tensors:
            assert np.array_equal(params.tensors[name].data, params2.tensors[name].data)
        # saturated negatives make every step see the same batch: flat trace
        assert len({r[1] for r in trace}) == 1

    def test_no_positive_pairs_is_an_error(self):
        g = AmrGraph([], [AmrNode(0, "x"), AmrNode(1, "y")], [AmrEdge(0, 1, "op1")])
        with pytest.raises(ValidationError, match="positive"):
            train_semantic([g] * 8, self.config())

    def test_empty_corpus_is_an_error(self):
        with pytest.raises(ValidationError):
            train_semantic([], self.config())


class TestValidationSplit:
    @pytest.mark.parametrize(
        "n,expected", [(1, 0), (2, 1), (10, 1), (100, 10), (20_000, 1000), (5, 1)]
    )
    def test_sizes(self, n, expected):
        assert validation_split(n) == expected
