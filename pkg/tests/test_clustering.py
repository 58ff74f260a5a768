import math

import numpy as np
import pytest

from amrevent.clustering import (
    CandidateContext,
    ClusterAssignment,
    ClusteringConfig,
    argument_similarity,
    argument_similarity_matrix,
    constraint_f,
    joint_cluster,
    objective_O,
    spectral_cluster,
    trigger_similarity,
    trigger_similarity_matrix,
)
from amrevent.errors import NumericError, ValidationError

LOG2 = math.log(2.0)


def ctx(item_id, kind, semantic, edges=(), rel_structs=None):
    return CandidateContext(
        item_id=item_id,
        kind=kind,
        semantic=np.asarray(semantic, dtype=np.float64),
        edges=list(edges),
        rel_structs=dict(rel_structs or {}),
    )


class TestConstraintF:
    def test_identical_singletons(self):
        assert abs(constraint_f({("r", 0)}, {("r", 0)}) - LOG2) < 1e-9

    def test_disjoint_nonempty(self):
        assert constraint_f({("r", 0)}, {("q", 1)}) == 0.0

    def test_third_overlap(self):
        l1 = {("a", 0), ("b", 1)}
        l2 = {("a", 0), ("c", 2)}
        assert abs(constraint_f(l1, l2) - math.log(4.0 / 3.0)) < 1e-9

    def test_both_empty_is_zero(self):
        assert constraint_f(set(), set()) == 0.0

    def test_symmetric_nonnegative_bounded(self):
        rng = np.random.default_rng(0)
        universe = [(r, c) for r in "abcd" for c in range(3)]
        for _ in range(200):
            l1 = {universe[i] for i in rng.choice(len(universe), rng.integers(0, 6), replace=False)}
            l2 = {universe[i] for i in rng.choice(len(universe), rng.integers(0, 6), replace=False)}
            v = constraint_f(l1, l2)
            assert v == constraint_f(l2, l1)
            assert 0.0 <= v <= LOG2 + 1e-12


class TestSimilarities:
    def test_trigger_closed_form(self):
        # identical vectors, identical contexts, shared relation set
        e = {("ARG0", "a1")}
        structs = {"ARG0": np.array([1.0, 2.0])}
        t1 = ctx("t1", "trigger", [1.0, 1.0], e, structs)
        t2 = ctx("t2", "trigger", [1.0, 1.0], e, structs)
        sim = trigger_similarity(t1, t2, 0.5, {"a1": 0})
        assert abs(sim - (1.0 + LOG2)) < 1e-9

    def test_trigger_zero_case(self):
        t1 = ctx("t1", "trigger", [1.0, 0.0])
        t2 = ctx("t2", "trigger", [0.0, 1.0])
        assert trigger_similarity(t1, t2, 0.5, {}) == 0.0

    def test_trigger_mixed_case_term_by_term(self):
        rng = np.random.default_rng(1)
        v1, v2 = rng.standard_normal(4), rng.standard_normal(4)
        s_shared = {"ARG0": rng.standard_normal(3), "time": rng.standard_normal(3)}
        s_other = {"ARG0": rng.standard_normal(3), "time": rng.standard_normal(3)}
        t1 = ctx("t1", "trigger", v1, {("ARG0", "x"), ("time", "y")}, s_shared)
        t2 = ctx("t2", "trigger", v2, {("ARG0", "x"), ("time", "z")}, s_other)
        clusters = {"x": 0, "y": 1, "z": 1}
        lam = 0.3

        def cos(a, b):
            return float(a @ b / (np.linalg.norm(a) * np.linalg.norm(b)))

        # tuples: t1 -> {(ARG0,0),(time,1)}, t2 -> {(ARG0,0),(time,1)} -> Jaccard 1
        expected = (
            lam * cos(v1, v2)
            + math.log(2.0)
            + (1 - lam) * (cos(s_shared["ARG0"], s_other["ARG0"]) + cos(s_shared["time"], s_other["time"])) / 2.0
        )
        assert abs(trigger_similarity(t1, t2, lam, clusters) - expected) < 1e-9

    def test_no_shared_relations_drops_structure_term(self):
        t1 = ctx("t1", "trigger", [1.0, 0.0], rel_structs={"ARG0": np.ones(2)})
        t2 = ctx("t2", "trigger", [1.0, 0.0], rel_structs={"time": np.ones(2)})
        assert abs(trigger_similarity(t1, t2, 0.25, {}) - 0.25) < 1e-12

    def test_argument_closed_forms(self):
        e = {("ARG0", "t1")}
        a1 = ctx("a1", "argument", [2.0, 0.0], e)
        a2 = ctx("a2", "argument", [3.0, 0.0], e)
        assert abs(argument_similarity(a1, a2, {"t1": 0}) - (1.0 + LOG2)) < 1e-9
        b1 = ctx("b1", "argument", [1.0, 0.0])
        b2 = ctx("b2", "argument", [0.0, 1.0])
        assert argument_similarity(b1, b2, {}) == 0.0

    def test_argument_mixed_value(self):
        # cos = 0.5, Jaccard = 1/3
        a1 = ctx("a1", "argument", [1.0, 0.0], {("ARG0", "u"), ("time", "v")})
        a2 = ctx("a2", "argument", [0.5, math.sqrt(3) / 2.0], {("ARG0", "u"), ("time", "w")})
        clusters = {"u": 0, "v": 1, "w": 2}
        assert abs(argument_similarity(a1, a2, clusters) - (0.5 + math.log(4.0 / 3.0))) < 1e-9

    def test_symmetry(self):
        rng = np.random.default_rng(2)
        for _ in range(20):
            t1 = ctx("t1", "trigger", rng.standard_normal(3), {("ARG0", "x")},
                     {"ARG0": rng.standard_normal(3)})
            t2 = ctx("t2", "trigger", rng.standard_normal(3), {("time", "y")},
                     {"time": rng.standard_normal(3)})
            clusters = {"x": 0, "y": 0}
            assert abs(
                trigger_similarity(t1, t2, 0.4, clusters)
                - trigger_similarity(t2, t1, 0.4, clusters)
            ) < 1e-12

    def test_scale_invariance_of_semantic_vectors(self):
        rng = np.random.default_rng(3)
        t1 = ctx("t1", "trigger", rng.standard_normal(4))
        t2 = ctx("t2", "trigger", rng.standard_normal(4))
        base = trigger_similarity(t1, t2, 0.5, {})
        t1s = ctx("t1", "trigger", 37.0 * t1.semantic)
        t2s = ctx("t2", "trigger", 0.01 * t2.semantic)
        assert abs(trigger_similarity(t1s, t2s, 0.5, {}) - base) < 1e-9


def brute_force_objective(c_t, c_a, trigger_contexts, argument_contexts, lam):
    """Independent pair-enumeration oracle over the scalar similarity
    functions."""
    total = 0.0
    for contexts, labels, sim in (
        (trigger_contexts, c_t, "t"),
        (argument_contexts, c_a, "a"),
    ):
        n = len(contexts)
        for i in range(n):
            for j in range(i + 1, n):
                if sim == "t":
                    s = trigger_similarity(contexts[i], contexts[j], lam, c_a.assignment)
                else:
                    s = argument_similarity(contexts[i], contexts[j], c_t.assignment)
                same = labels.assignment[contexts[i].item_id] == labels.assignment[contexts[j].item_id]
                total += (1.0 - s) if same else s
    return total


def random_instance(rng, n_t, n_a, dim=4):
    rels = ["ARG0", "ARG1", "time"]
    arg_ids = [f"a{j}" for j in range(n_a)]
    triggers = []
    for i in range(n_t):
        edges = {
            (rels[int(rng.integers(3))], arg_ids[int(rng.integers(n_a))])
            for _ in range(int(rng.integers(0, 3)))
        }
        structs = {r: rng.standard_normal(dim) for r, _ in edges}
        triggers.append(ctx(f"t{i}", "trigger", rng.standard_normal(dim), edges, structs))
    trig_ids = [f"t{i}" for i in range(n_t)]
    arguments = []
    for j in range(n_a):
        edges = {
            (rels[int(rng.integers(3))], trig_ids[int(rng.integers(n_t))])
            for _ in range(int(rng.integers(0, 3)))
        }
        arguments.append(ctx(arg_ids[j], "argument", rng.standard_normal(dim), edges))
    c_t = ClusterAssignment({f"t{i}": int(rng.integers(1, n_t + 1) - 1) for i in range(n_t)}, n_t)
    c_a = ClusterAssignment({f"a{j}": int(rng.integers(1, n_a + 1) - 1) for j in range(n_a)}, n_a)
    return triggers, arguments, c_t, c_a


class TestObjective:
    def test_all_singletons_no_intra(self):
        rng = np.random.default_rng(4)
        triggers, arguments, _, _ = random_instance(rng, 3, 3)
        c_t = ClusterAssignment({f"t{i}": i for i in range(3)}, 3)
        c_a = ClusterAssignment({f"a{j}": j for j in range(3)}, 3)
        got = objective_O(c_t, c_a, triggers, arguments, 0.5)
        # singletons: every pair is cross-cluster, so O = sum of sims
        expected = brute_force_objective(c_t, c_a, triggers, arguments, 0.5)
        assert abs(got - expected) < 1e-9

    def test_one_big_cluster_no_inter(self):
        rng = np.random.default_rng(5)
        triggers, arguments, _, _ = random_instance(rng, 4, 3)
        c_t = ClusterAssignment({f"t{i}": 0 for i in range(4)}, 1)
        c_a = ClusterAssignment({f"a{j}": 0 for j in range(3)}, 1)
        got = objective_O(c_t, c_a, triggers, arguments, 0.5)
        expected = brute_force_objective(c_t, c_a, triggers, arguments, 0.5)
        assert abs(got - expected) < 1e-9

    def test_oracle_equivalence_random(self):
        rng = np.random.default_rng(6)
        for _ in range(50):
            n_t = int(rng.integers(2, 7))
            n_a = int(rng.integers(2, 7))
            triggers, arguments, c_t, c_a = random_instance(rng, n_t, n_a)
            got = objective_O(c_t, c_a, triggers, arguments, 0.5)
            expected = brute_force_objective(c_t, c_a, triggers, arguments, 0.5)
            assert abs(got - expected) < 1e-9


class TestSpectralCluster:
    def block_affinity(self, sizes, rng=None, noise=0.0):
        n = sum(sizes)
        a = np.zeros((n, n))
        labels = []
        start = 0
        for b, size in enumerate(sizes):
            a[start : start + size, start : start + size] = 1.0
            labels.extend([b] * size)
            start += size
        if rng is not None and noise:
            a += noise * rng.random((n, n))
        return a, np.array(labels)

    @staticmethod
    def as_partition(assignment):
        groups = {}
        for item, c in assignment.assignment.items():
            groups.setdefault(c, frozenset())
        out = {}
        for item, c in assignment.assignment.items():
            out.setdefault(c, set()).add(item)
        return frozenset(frozenset(v) for v in out.values())

    def test_two_blocks_exact(self):
        a, labels = self.block_affinity([4, 3])
        got = spectral_cluster(a, 2, seed=0)
        partition = self.as_partition(got)
        expected = frozenset(
            (frozenset(np.flatnonzero(labels == b).tolist()) for b in (0, 1))
        )
        assert partition == expected

    def test_k_equals_n_all_singletons(self):
        rng = np.random.default_rng(7)
        a = rng.random((5, 5))
        got = spectral_cluster(a, 5, seed=1)
        sizes = np.bincount(list(got.assignment.values()), minlength=5)
        assert np.all(sizes == 1)

    def test_k_one_single_cluster(self):
        rng = np.random.default_rng(8)
        a = rng.random((6, 6))
        got = spectral_cluster(a, 1, seed=2)
        assert set(got.assignment.values()) == {0}

    def test_negative_affinities_clamped_not_fatal(self):
        a, _ = self.block_affinity([3, 3])
        a -= 0.5  # negatives everywhere off the blocks
        got = spectral_cluster(a, 2, seed=3)
        assert got.k == 2

    def test_disconnected_components_recovered(self):
        for k in (2, 3, 4):
            rng = np.random.default_rng(k)
            sizes = [int(rng.integers(2, 5)) for _ in range(k)]
            a, labels = self.block_affinity(sizes)
            got = spectral_cluster(a, k, seed=4)
            expected = frozenset(
                frozenset(np.flatnonzero(labels == b).tolist()) for b in range(k)
            )
            assert self.as_partition(got) == expected

    def test_n_smaller_than_k_rejected(self):
        with pytest.raises(ValidationError):
            spectral_cluster(np.ones((2, 2)), 3, seed=0)

    def test_nonfinite_rejected(self):
        a = np.ones((3, 3))
        a[0, 1] = np.nan
        with pytest.raises(NumericError):
            spectral_cluster(a, 2, seed=0)

    def test_deterministic(self):
        rng = np.random.default_rng(9)
        a = rng.random((8, 8))
        r1 = spectral_cluster(a, 3, seed=5)
        r2 = spectral_cluster(a, 3, seed=5)
        assert r1.assignment == r2.assignment


def separable_instance(rng, t_groups=2, a_groups=2, per_group=4, dim=8):
    """Well-separated trigger and argument groups with consistent
    cross-links: trigger group g points (ARG0) only at argument group
    g, so constraints and cosines agree."""
    t_dirs = [np.eye(dim)[i] for i in range(t_groups)]
    a_dirs = [np.eye(dim)[t_groups + i] for i in range(a_groups)]
    triggers, arguments = [], []
    gold_t, gold_a = {}, {}
    for g in range(a_groups):
        for j in range(per_group):
            iid = f"a{g}_{j}"
            vec = a_dirs[g] + 0.05 * rng.standard_normal(dim)
            arguments.append(ctx(iid, "argument", vec, {("ARG0", f"t{g % t_groups}_{j % per_group}")}))
            gold_a[iid] = g
    for g in range(t_groups):
        for j in range(per_group):
            iid = f"t{g}_{j}"
            vec = t_dirs[g] + 0.05 * rng.standard_normal(dim)
            edges = {("ARG0", f"a{g % a_groups}_{j % per_group}")}
            structs = {"ARG0": t_dirs[g]}
            triggers.append(ctx(iid, "trigger", vec, edges, structs))
            gold_t[iid] = g
    return triggers, arguments, gold_t, gold_a


class TestJointCluster:
    def config(self, **kw):
        base = dict(k_t_range=(2, 2), k_a_range=(2, 2), lam=0.5, seed=0)
        base.update(kw)
        return ClusteringConfig(**base)

    def test_exact_recovery_on_separable_data(self):
        from amrevent.evaluation import GoldLabeling, b_cubed

        rng = np.random.default_rng(10)
        triggers, arguments, gold_t, gold_a = separable_instance(rng)
        result = joint_cluster(triggers, arguments, self.config())
        _, _, f1_t = b_cubed(result.triggers, GoldLabeling(gold_t))
        _, _, f1_a = b_cubed(result.arguments, GoldLabeling(gold_a))
        assert f1_t == 1.0
        assert f1_a == 1.0

    def test_o_min_not_above_initialization(self):
        rng = np.random.default_rng(11)
        triggers, arguments, _, _ = separable_instance(rng, per_group=3)
        cfg = self.config(k_t_range=(2, 3), k_a_range=(2, 3))
        result = joint_cluster(triggers, arguments, cfg)
        # rerun the initialization for the winning grid point by hand
        singleton_t = {c.item_id: i for i, c in enumerate(triggers)}
        a_sims = argument_similarity_matrix(arguments, singleton_t)
        init_a = spectral_cluster(a_sims, result.k_a,
                                  seed=(cfg.seed * 1000003 + result.k_t * 101 + result.k_a + 1) % 2**31)
        init_a = ClusterAssignment(
            {arguments[i].item_id: c for i, c in init_a.assignment.items()}, result.k_a
        )
        t_sims = trigger_similarity_matrix(triggers, init_a.assignment, cfg.lam)
        init_t = spectral_cluster(t_sims, result.k_t,
                                  seed=(cfg.seed * 1000003 + result.k_t * 101 + result.k_a) % 2**31)
        init_t = ClusterAssignment(
            {triggers[i].item_id: c for i, c in init_t.assignment.items()}, result.k_t
        )
        o_init = objective_O(init_t, init_a, triggers, arguments, cfg.lam)
        assert result.o_min <= o_init + 1e-9

    def test_deterministic(self):
        rng = np.random.default_rng(12)
        triggers, arguments, _, _ = separable_instance(rng, per_group=3)
        r1 = joint_cluster(triggers, arguments, self.config())
        r2 = joint_cluster(triggers, arguments, self.config())
        assert r1.triggers.assignment == r2.triggers.assignment
        assert r1.arguments.assignment == r2.arguments.assignment
        assert r1.o_min == r2.o_min

    def test_threads_do_not_change_result(self):
        rng = np.random.default_rng(13)
        triggers, arguments, _, _ = separable_instance(rng, per_group=3)
        cfg_grid = dict(k_t_range=(2, 3), k_a_range=(2, 3), lam=0.5, seed=0)
        serial = joint_cluster(triggers, arguments, ClusteringConfig(**cfg_grid, threads=1))
        parallel = joint_cluster(triggers, arguments, ClusteringConfig(**cfg_grid, threads=4))
        assert serial.o_min == parallel.o_min
        assert serial.triggers.assignment == parallel.triggers.assignment

    def test_empty_sides_rejected(self):
        rng = np.random.default_rng(14)
        triggers, arguments, _, _ = separable_instance(rng)
        with pytest.raises(ValidationError):
            joint_cluster([], arguments, self.config())
        with pytest.raises(ValidationError):
            joint_cluster(triggers, [], self.config())

    def test_range_exceeding_candidates_rejected(self):
        rng = np.random.default_rng(15)
        triggers, arguments, _, _ = separable_instance(rng, per_group=1)
        with pytest.raises(ValidationError):
            joint_cluster(triggers, arguments, self.config(k_t_range=(2, 50)))
