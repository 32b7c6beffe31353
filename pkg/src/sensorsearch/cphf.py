"""Comparative priority-based heuristic filtering (CPHF).

Before indexing, the candidate set is pruned one property at a time in
descending weight order: sort the survivors by that property (best first),
drop a weight-proportional share of the removable tail, move on. Only the
kept pool is normalized, indexed and ranked, trading a margin-of-error
parameter M for speed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import PlanMismatch
from .ranking import RankedResult, WeightVector
from .registry import CandidateSet, Polarity, PropertySchema

__all__ = ["CphfPlan", "build_plan", "heuristic_filter", "cphf_accuracy"]


@dataclass(frozen=True)
class CphfPlan:
    """Pruning schedule: per-property removal counts plus the kept-pool size."""

    stages: tuple[tuple[str, int], ...]
    n_keep: int
    n_removable: int
    margin_percent: float

    def __post_init__(self):
        if sum(count for _, count in self.stages) != self.n_removable:
            raise ValueError("stage removals must sum to n_removable")
        if self.n_keep < 1 or self.n_removable < 0:
            raise ValueError("n_keep must be >= 1 and n_removable >= 0")


def build_plan(
    candidate_count: int,
    weights: WeightVector,
    n_requested: int,
    margin_percent: float = 0.0,
) -> CphfPlan:
    """Derive the pruning schedule for a candidate set.

    The kept pool is n_requested inflated by the margin percentage, capped
    at the candidate count. Each property removes a share of the removable
    tail proportional to its weight (floored); the rounding remainder goes
    to the highest-weighted property. Zero removable sensors means every
    stage is a no-op and the pipeline stays exact.
    """
    if candidate_count < 1:
        raise ValueError("candidate_count must be >= 1")
    if n_requested < 1:
        raise ValueError("n_requested must be >= 1")
    if margin_percent < 0:
        raise ValueError("margin_percent must be >= 0")
    n_keep = min(
        candidate_count,
        math.ceil(n_requested * (100.0 + margin_percent) / 100.0),
    )
    n_removable = candidate_count - n_keep

    ordered = sorted(weights.weights.items(), key=lambda kv: (-kv[1], kv[0]))
    removals = [math.floor(w * n_removable) for _, w in ordered]
    removals[0] += n_removable - sum(removals)
    stages = tuple((name, removals[i]) for i, (name, _) in enumerate(ordered))
    return CphfPlan(
        stages=stages,
        n_keep=n_keep,
        n_removable=n_removable,
        margin_percent=margin_percent,
    )


def _keep_best(keys: np.ndarray, id_rank: np.ndarray, m: int) -> np.ndarray:
    """Positions of the m best entries by (key ascending, id rank ascending).

    Equivalent to fully sorting and keeping the first m, but O(n) via
    partition selection; boundary ties resolve by id rank exactly as the
    full sort would.
    """
    n = len(keys)
    if m >= n:
        return np.arange(n, dtype=np.int64)
    kth = np.partition(keys, m - 1)[m - 1]
    less = keys < kth
    keep = np.nonzero(less)[0]
    need = m - len(keep)
    if need > 0:
        eq = np.nonzero(keys == kth)[0]
        eq = eq[np.argsort(id_rank[eq], kind="stable")]
        keep = np.concatenate([keep, eq[:need]])
    return keep


def heuristic_filter(
    candidates: CandidateSet,
    schema: PropertySchema,
    checked: Sequence[str],
    weights: WeightVector,
    plan: CphfPlan,
) -> CandidateSet:
    """Apply the pruning cascade; returns the n_keep survivors.

    Each stage orders the current survivors by its property's raw values
    (best first; missing values last; ties by sensor id ascending) and drops
    the stage's removal count from the bottom. Sorting on raw values is
    safe because min-max normalization is monotone.
    """
    if plan.n_keep + plan.n_removable != len(candidates):
        raise PlanMismatch(
            f"plan covers {plan.n_keep + plan.n_removable} candidates, "
            f"got {len(candidates)}"
        )
    if {name for name, _ in plan.stages} != set(weights.properties()):
        raise PlanMismatch("plan stages do not match the weight vector")

    survivors = np.arange(len(candidates), dtype=np.int64)
    id_rank = candidates.id_rank()
    for prop_name, remove_count in plan.stages:
        if remove_count == 0:
            continue
        raw = candidates.column(prop_name)[survivors]
        if schema.get(prop_name).polarity is Polarity.HIGHER_IS_BETTER:
            keys = -raw
        else:
            keys = raw.copy()
        keys[np.isnan(raw)] = np.inf  # missing values prune first
        keep = _keep_best(keys, id_rank[survivors], len(survivors) - remove_count)
        survivors = survivors[keep]
    return candidates.subset(survivors)


def cphf_accuracy(heuristic_topn: RankedResult, exact_topn: RankedResult) -> float:
    """Fraction of the exact top-N recovered by the heuristic top-N."""
    exact_ids = set(exact_topn.ids())
    if not exact_ids:
        return 1.0
    return len(set(heuristic_topn.ids()) & exact_ids) / len(exact_ids)
