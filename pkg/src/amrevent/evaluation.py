"""B-Cubed clustering metrics against gold class labels.

Item-weighted form: for item i in predicted cluster C(i) with gold
class G(i),

    p_i = |C(i) n G(i)| / |C(i)|       r_i = |C(i) n G(i)| / |G(i)|

precision and recall are plain means over items, F1 their harmonic
mean. Internally computed with exact rational arithmetic so equal
partitions score exactly 1.0 and oracle comparisons are exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from .clustering import ClusterAssignment
from .errors import ValidationError


@dataclass
class GoldLabeling:
    labels: dict

    @classmethod
    def from_mapping(cls, mapping: Mapping) -> "GoldLabeling":
        return cls(dict(mapping))


def b_cubed(pred: ClusterAssignment | Mapping, gold: GoldLabeling | Mapping):
    """(precision, recall, f1) of a predicted clustering.

    pred and gold must cover exactly the same items; a mismatch is an
    error, not a silent intersection.
    """
    pred_map = pred.assignment if isinstance(pred, ClusterAssignment) else dict(pred)
    gold_map = gold.labels if isinstance(gold, GoldLabeling) else dict(gold)
    if set(pred_map) != set(gold_map):
        missing = set(gold_map) - set(pred_map)
        extra = set(pred_map) - set(gold_map)
        raise ValidationError(
            f"item sets differ: {len(missing)} missing from prediction, {len(extra)} extra"
        )
    if not pred_map:
        raise ValidationError("cannot evaluate an empty item set")

    clusters: dict = {}
    classes: dict = {}
    for item, c in pred_map.items():
        clusters.setdefault(c, set()).add(item)
    for item, g in gold_map.items():
        classes.setdefault(g, set()).add(item)

    p_sum = Fraction(0)
    r_sum = Fraction(0)
    n = len(pred_map)
    for item in pred_map:
        cluster = clusters[pred_map[item]]
        klass = classes[gold_map[item]]
        overlap = len(cluster & klass)
        p_sum += Fraction(overlap, len(cluster))
        r_sum += Fraction(overlap, len(klass))
    precision = p_sum / n
    recall = r_sum / n
    denom = precision + recall
    f1 = Fraction(0) if denom == 0 else 2 * precision * recall / denom
    return float(precision), float(recall), float(f1)
