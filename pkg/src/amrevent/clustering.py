"""Joint constraint clustering of trigger and argument candidates.

Similarities combine three signals: cosine similarity of semantic
vectors, a Jaccard-style constraint over how each candidate's
counterparts are currently clustered,

    f(L1, L2) = log(1 + |L1 n L2| / |L1 u L2|)      (0 when both empty)

with tuples (relation, cluster-of-counterpart), and, for triggers, the
mean cosine of per-relation structure vectors over shared relations.

Triggers and arguments are clustered alternately with spectral
clustering; because each side's constraint terms depend on the other
side's current assignment, the two clusterings are refined together,
keeping whichever pair of assignments minimizes the objective

    O = D_inter(C_T) + D_intra(C_T) + D_inter(C_A) + D_intra(C_A)

where D_inter sums similarities over unordered cross-cluster pairs
and D_intra sums (1 - sim) over unordered within-cluster pairs.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigError, NumericError, ValidationError


@dataclass
class CandidateContext:
    """Everything clustering needs to know about one candidate.

    edges lists (relation, counterpart item id): argument candidates
    reached from a trigger, or trigger candidates pointing at an
    argument. rel_structs/whole_struct are trigger-side structure
    vectors (one per outgoing relation / the whole sentence graph).
    """

    item_id: str
    kind: str  # "trigger" | "argument"
    semantic: np.ndarray
    edges: list[tuple[str, str]] = field(default_factory=list)
    rel_structs: dict[str, np.ndarray] = field(default_factory=dict)
    whole_struct: Optional[np.ndarray] = None


@dataclass
class ClusterAssignment:
    """item id -> cluster index in 0..k-1."""

    assignment: dict
    k: int

    def labels_for(self, items: Sequence) -> np.ndarray:
        return np.array([self.assignment[i] for i in items], dtype=np.intp)


@dataclass
class ClusteringConfig:
    k_t_range: tuple[int, int]
    k_a_range: tuple[int, int]
    lam: float = 0.5
    max_iterations: int = 10
    seed: int = 0
    kmeans_restarts: int = 5
    kmeans_iters: int = 100
    use_structure: bool = True
    threads: int = 1

    def __post_init__(self):
        if not 0.0 <= self.lam <= 1.0:
            raise ConfigError("lambda must lie in [0, 1]")
        for lo, hi in (self.k_t_range, self.k_a_range):
            if not (1 <= lo <= hi):
                raise ConfigError(f"bad cluster-count range [{lo}, {hi}]")


# -- similarity functions --------------------------------------------------


def constraint_f(l1, l2) -> float:
    """log(1 + Jaccard) over two tuple sets; 0 when both are empty."""
    s1, s2 = set(l1), set(l2)
    union = s1 | s2
    if not union:
        return 0.0
    return math.log(1.0 + len(s1 & s2) / len(union))


def _cosine(a: np.ndarray, b: np.ndarray) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValidationError(f"dimension mismatch: {a.shape} vs {b.shape}")
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(a @ b / (na * nb))


def _constraint_tuples(ctx: CandidateContext, counterpart_clusters: dict) -> frozenset:
    return frozenset((rel, counterpart_clusters[cid]) for rel, cid in ctx.edges)


def trigger_similarity(
    t1: CandidateContext,
    t2: CandidateContext,
    lam: float,
    argument_clusters: dict,
    use_structure: bool = True,
) -> float:
    """lam*cos(semantic) + f + (1-lam)*mean cos(E_r) over shared
    relations. Without structure the cosine term's weight is
    renormalized to 1 and the relation term is dropped."""
    cos_sem = _cosine(t1.semantic, t2.semantic)
    f_term = constraint_f(
        _constraint_tuples(t1, argument_clusters), _constraint_tuples(t2, argument_clusters)
    )
    if not use_structure:
        return cos_sem + f_term
    shared = sorted(set(t1.rel_structs) & set(t2.rel_structs))
    if shared:
        struct = sum(_cosine(t1.rel_structs[r], t2.rel_structs[r]) for r in shared) / len(shared)
    else:
        struct = 0.0
    return lam * cos_sem + f_term + (1.0 - lam) * struct


def argument_similarity(
    a1: CandidateContext, a2: CandidateContext, trigger_clusters: dict
) -> float:
    """cos(semantic) + f over (relation, trigger-cluster) tuples."""
    return _cosine(a1.semantic, a2.semantic) + constraint_f(
        _constraint_tuples(a1, trigger_clusters), _constraint_tuples(a2, trigger_clusters)
    )


# -- vectorized similarity matrices ----------------------------------------


def _unit_rows(vectors: list[np.ndarray]) -> np.ndarray:
    m = np.asarray(np.stack(vectors), dtype=np.float64)
    norms = np.linalg.norm(m, axis=1, keepdims=True)
    norms[norms == 0.0] = 1.0
    return m / norms


def _f_matrix(contexts: Sequence[CandidateContext], counterpart_clusters: dict) -> np.ndarray:
    n = len(contexts)
    tuples = [_constraint_tuples(c, counterpart_clusters) for c in contexts]
    out = np.zeros((n, n))
    for i in range(n):
        ti = tuples[i]
        for j in range(i, n):
            tj = tuples[j]
            union = len(ti | tj)
            if union:
                v = math.log(1.0 + len(ti & tj) / union)
                out[i, j] = v
                out[j, i] = v
    return out


def trigger_similarity_matrix(
    contexts: Sequence[CandidateContext],
    argument_clusters: dict,
    lam: float,
    use_structure: bool = True,
) -> np.ndarray:
    n = len(contexts)
    cos = _unit_rows([c.semantic for c in contexts])
    cos = cos @ cos.T
    f = _f_matrix(contexts, argument_clusters)
    if not use_structure:
        return cos + f
    rel_names = sorted({r for c in contexts for r in c.rel_structs})
    struct_sum = np.zeros((n, n))
    struct_cnt = np.zeros((n, n))
    for r in rel_names:
        idx = [i for i, c in enumerate(contexts) if r in c.rel_structs]
        if len(idx) < 1:
            continue
        unit = _unit_rows([contexts[i].rel_structs[r] for i in idx])
        block = unit @ unit.T
        ii = np.ix_(idx, idx)
        struct_sum[ii] += block
        struct_cnt[ii] += 1.0
    struct = np.divide(struct_sum, struct_cnt, out=np.zeros((n, n)), where=struct_cnt > 0)
    return lam * cos + f + (1.0 - lam) * struct


def argument_similarity_matrix(
    contexts: Sequence[CandidateContext], trigger_clusters: dict
) -> np.ndarray:
    cos = _unit_rows([c.semantic for c in contexts])
    return cos @ cos.T + _f_matrix(contexts, trigger_clusters)


# -- objective ---------------------------------------------------------------


def _pair_objective(sims: np.ndarray, labels: np.ndarray) -> float:
    n = sims.shape[0]
    if n < 2:
        return 0.0
    iu, iv = np.triu_indices(n, 1)
    s = sims[iu, iv]
    same = labels[iu] == labels[iv]
    return float(np.where(same, 1.0 - s, s).sum())


def objective_O(
    c_t: ClusterAssignment,
    c_a: ClusterAssignment,
    trigger_contexts: Sequence[CandidateContext],
    argument_contexts: Sequence[CandidateContext],
    lam: float,
    use_structure: bool = True,
) -> float:
    """Cross-cluster agreement plus within-cluster disagreement,
    summed over both candidate sets, with the given assignments
    feeding the constraint terms of both similarity functions."""
    t_sims = trigger_similarity_matrix(trigger_contexts, c_a.assignment, lam, use_structure)
    a_sims = argument_similarity_matrix(argument_contexts, c_t.assignment)
    t_labels = c_t.labels_for([c.item_id for c in trigger_contexts])
    a_labels = c_a.labels_for([c.item_id for c in argument_contexts])
    return _pair_objective(t_sims, t_labels) + _pair_objective(a_sims, a_labels)


# -- spectral clustering -----------------------------------------------------


def _kmeans_pp_init(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = points.shape[0]
    centers = np.empty((k, points.shape[1]))
    first = int(rng.integers(n))
    centers[0] = points[first]
    d2 = ((points - centers[0]) ** 2).sum(axis=1)
    for c in range(1, k):
        total = d2.sum()
        if total <= 0.0:
            pick = int(rng.integers(n))
        else:
            pick = int(rng.choice(n, p=d2 / total))
        centers[c] = points[pick]
        d2 = np.minimum(d2, ((points - centers[c]) ** 2).sum(axis=1))
    return centers


def _kmeans(points: np.ndarray, k: int, rng: np.random.Generator,
            iters: int, restarts: int) -> np.ndarray:
    n = points.shape[0]
    best_labels = None
    best_wcss = np.inf
    for _restart in range(restarts):
        centers = _kmeans_pp_init(points, k, rng)
        labels = None
        for _step in range(iters):
            d2 = ((points[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
            new_labels = d2.argmin(axis=1)
            if labels is not None and np.array_equal(new_labels, labels):
                break
            labels = new_labels
            for c in range(k):
                members = points[labels == c]
                if len(members):
                    centers[c] = members.mean(axis=0)
        d2 = ((points[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        wcss = float(d2[np.arange(n), labels].sum())
        if wcss < best_wcss:
            best_wcss = wcss
            best_labels = labels.copy()
    return best_labels


def _repair_empty(labels: np.ndarray, points: np.ndarray, k: int) -> np.ndarray:
    """Fill empty clusters by moving the farthest-from-centroid point
    of the largest cluster into them."""
    labels = labels.copy()
    while True:
        sizes = np.bincount(labels, minlength=k)
        empty = np.flatnonzero(sizes == 0)
        if len(empty) == 0:
            return labels
        target = int(empty[0])
        donor = int(sizes.argmax())
        members = np.flatnonzero(labels == donor)
        centroid = points[members].mean(axis=0)
        dists = ((points[members] - centroid) ** 2).sum(axis=1)
        labels[members[int(dists.argmax())]] = target


def spectral_cluster(similarity: np.ndarray, k: int, seed: int = 0,
                     kmeans_iters: int = 100, kmeans_restarts: int = 5) -> ClusterAssignment:
    """Normalized spectral clustering of a similarity matrix.

    The matrix is symmetrized by averaging, negative affinities are
    clamped to zero and the diagonal is ignored; the k eigenvectors of
    L = I - D^-1/2 A D^-1/2 with smallest eigenvalues are
    row-normalized and clustered with seeded k-means (k-means++ init,
    best of `kmeans_restarts` by within-cluster sum of squares).
    Empty clusters are repaired, so all k clusters are non-empty.
    """
    a = np.asarray(similarity, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError("similarity matrix must be square")
    if not np.all(np.isfinite(a)):
        raise NumericError("similarity matrix contains non-finite entries")
    n = a.shape[0]
    if n < k:
        raise ValidationError(f"cannot form {k} clusters from {n} items")

    a = (a + a.T) / 2.0
    a = np.clip(a, 0.0, None)
    np.fill_diagonal(a, 0.0)
    deg = a.sum(axis=1)
    deg[deg == 0.0] = 1.0
    inv_sqrt = 1.0 / np.sqrt(deg)
    lap = np.eye(n) - inv_sqrt[:, None] * a * inv_sqrt[None, :]
    _eigvals, eigvecs = np.linalg.eigh(lap)
    u = eigvecs[:, :k]
    norms = np.linalg.norm(u, axis=1, keepdims=True)
    norms[norms == 0.0] = 1.0
    u = u / norms

    rng = np.random.default_rng(seed)
    labels = _kmeans(u, k, rng, iters=kmeans_iters, restarts=kmeans_restarts)
    labels = _repair_empty(labels, u, k)
    return ClusterAssignment({i: int(l) for i, l in enumerate(labels)}, k)


# -- the joint driver --------------------------------------------------------


@dataclass
class JointClusteringResult:
    triggers: ClusterAssignment
    arguments: ClusterAssignment
    o_min: float
    k_t: int
    k_a: int


def _spectral_by_id(sims: np.ndarray, items: list, k: int, seed: int,
                    config: ClusteringConfig) -> ClusterAssignment:
    raw = spectral_cluster(sims, k, seed=seed, kmeans_iters=config.kmeans_iters,
                           kmeans_restarts=config.kmeans_restarts)
    return ClusterAssignment({items[i]: c for i, c in raw.assignment.items()}, k)


def _run_grid_point(trigger_contexts, argument_contexts, config: ClusteringConfig,
                    k_t: int, k_a: int):
    """Alternating refinement for one (k_t, k_a) cell. Returns the
    best (O, C_T, C_A) seen, including the initialization."""
    t_items = [c.item_id for c in trigger_contexts]
    a_items = [c.item_id for c in argument_contexts]
    seed_t = (config.seed * 1000003 + k_t * 101 + k_a) % (2**31)
    seed_a = (config.seed * 1000003 + k_t * 101 + k_a + 1) % (2**31)

    # arguments first: their initial constraint terms use singleton
    # trigger ids, then triggers use the fresh argument clusters
    singleton_t = {tid: i for i, tid in enumerate(t_items)}
    a_sims = argument_similarity_matrix(argument_contexts, singleton_t)
    c_a = _spectral_by_id(a_sims, a_items, k_a, seed_a, config)
    t_sims = trigger_similarity_matrix(trigger_contexts, c_a.assignment,
                                       config.lam, config.use_structure)
    c_t = _spectral_by_id(t_sims, t_items, k_t, seed_t, config)

    best_o = objective_O(c_t, c_a, trigger_contexts, argument_contexts,
                         config.lam, config.use_structure)
    best = (best_o, c_t, c_a)

    prev = None
    for _ in range(config.max_iterations):
        t_sims = trigger_similarity_matrix(trigger_contexts, c_a.assignment,
                                           config.lam, config.use_structure)
        c_t = _spectral_by_id(t_sims, t_items, k_t, seed_t, config)
        a_sims = argument_similarity_matrix(argument_contexts, c_t.assignment)
        c_a = _spectral_by_id(a_sims, a_items, k_a, seed_a, config)
        o = objective_O(c_t, c_a, trigger_contexts, argument_contexts,
                        config.lam, config.use_structure)
        if o < best[0]:
            best = (o, c_t, c_a)
        state = (tuple(sorted(c_t.assignment.items())), tuple(sorted(c_a.assignment.items())))
        if state == prev:
            break  # fixpoint: every further iteration would repeat
        prev = state
    return best


def joint_cluster(
    trigger_contexts: Sequence[CandidateContext],
    argument_contexts: Sequence[CandidateContext],
    config: ClusteringConfig,
) -> JointClusteringResult:
    """Search the (K_T, K_A) grid, refining alternately inside each
    cell, and return the assignments with the smallest objective (ties
    broken by first-seen in grid order)."""
    if not trigger_contexts or not argument_contexts:
        raise ValidationError("joint clustering needs at least one trigger and one argument")
    for lo, hi, n, side in (
        (*config.k_t_range, len(trigger_contexts), "trigger"),
        (*config.k_a_range, len(argument_contexts), "argument"),
    ):
        if hi > n:
            raise ValidationError(f"{side} cluster range [{lo},{hi}] exceeds {n} candidates")

    grid = [
        (k_t, k_a)
        for k_t in range(config.k_t_range[0], config.k_t_range[1] + 1)
        for k_a in range(config.k_a_range[0], config.k_a_range[1] + 1)
    ]
    if config.threads > 1 and len(grid) > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            results = list(
                pool.map(
                    lambda cell: _run_grid_point(
                        trigger_contexts, argument_contexts, config, *cell
                    ),
                    grid,
                )
            )
    else:
        results = [
            _run_grid_point(trigger_contexts, argument_contexts, config, k_t, k_a)
            for k_t, k_a in grid
        ]

    best_idx = None
    for i, (o, _, _) in enumerate(results):
        if best_idx is None or o < results[best_idx][0]:
            best_idx = i
    o_min, c_t, c_a = results[best_idx]
    k_t, k_a = grid[best_idx]
    return JointClusteringResult(c_t, c_a, o_min, k_t, k_a)
