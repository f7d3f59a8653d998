"""Leave-one-out retrieval experiment: P@1, MRR, MAP, ROC and AUC."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Hashable, List, Sequence, Tuple

import numpy as np

from .errors import ConfigurationError, DegenerateLabelsError, IncompatibleError


@dataclass
class DatasetLayout:
    """``C`` classes with ``S`` samples each.

    ``entries`` holds ``(class_id, sample_id, reference)`` triples in
    dataset order; the reference is typically a file name.
    """

    entries: List[Tuple[Hashable, Hashable, object]]

    def __post_init__(self):
        if not self.entries:
            raise ConfigurationError("dataset is empty")
        counts = Counter(cls for cls, _, _ in self.entries)
        sizes = set(counts.values())
        if len(sizes) != 1:
            raise ConfigurationError(f"classes have unequal sample counts: {sorted(sizes)}")

    @classmethod
    def from_labels(cls, labels: Sequence[Hashable]) -> "DatasetLayout":
        seen: Counter = Counter()
        entries = []
        for i, label in enumerate(labels):
            entries.append((label, seen[label], i))
            seen[label] += 1
        return cls(entries)

    @property
    def labels(self) -> List[Hashable]:
        return [cls for cls, _, _ in self.entries]

    @property
    def class_count(self) -> int:
        return len(set(self.labels))

    @property
    def samples_per_class(self) -> int:
        return len(self.entries) // self.class_count

    def __len__(self) -> int:
        return len(self.entries)


@dataclass
class RankedRetrieval:
    """All other items ranked for one query, best first."""

    query: int
    ranking: np.ndarray
    relevant: np.ndarray

    def relevant_ranks(self) -> np.ndarray:
        """1-based ranks of the relevant items, ascending."""
        return np.flatnonzero(self.relevant) + 1


def _label_codes(labels: Sequence[Hashable]) -> np.ndarray:
    index = {}
    return np.array([index.setdefault(lab, len(index)) for lab in labels])


def rank_queries(
    scores: np.ndarray, labels: Sequence[Hashable], higher_is_better: bool = True
) -> List[RankedRetrieval]:
    """Rank every item against every other from a full score matrix.

    Ties are broken by ascending dataset index.
    """
    scores = np.asarray(scores, dtype=float)
    n = scores.shape[0]
    if scores.shape != (n, n) or len(labels) != n:
        raise IncompatibleError(f"score matrix {scores.shape} does not match {len(labels)} labels")
    codes = _label_codes(labels)
    out = []
    for i in range(n):
        others = np.delete(np.arange(n), i)
        key = scores[i, others]
        order = np.argsort(-key if higher_is_better else key, kind="stable")
        ranking = others[order]
        out.append(RankedRetrieval(i, ranking, codes[ranking] == codes[i]))
    return out


def score_matrix(items: Sequence, measure: Callable, symmetric: bool = True) -> Tuple[np.ndarray, bool]:
    """Fill a pairwise score matrix with ``measure(a, b)``.

    ``measure`` returns a :class:`~texsim.similarity.SimilarityScore` or a
    plain float (treated as a similarity).  Returns the matrix and whether
    larger scores mean more similar.
    """
    n = len(items)
    scores = np.zeros((n, n))
    higher = True
    for i in range(n):
        for j in range(i + 1 if symmetric else 0, n):
            if i == j:
                continue
            s = measure(items[i], items[j])
            higher = getattr(s, "higher_is_better", True)
            scores[i, j] = float(s)
            if symmetric:
                scores[j, i] = scores[i, j]
    return scores, higher


def run_experiment(
    items: Sequence, layout: DatasetLayout, measure: Callable
) -> List[RankedRetrieval]:
    """Leave-one-out retrieval over ``items`` (features or images)."""
    if len(items) != len(layout):
        raise IncompatibleError(f"{len(items)} items but layout has {len(layout)} entries")
    scores, higher = score_matrix(items, measure)
    return rank_queries(scores, layout.labels, higher)


def precision_at_1(retrievals: Sequence[RankedRetrieval]) -> float:
    if not retrievals:
        raise ConfigurationError("no queries")
    return float(np.mean([bool(r.relevant[0]) for r in retrievals]))


def reciprocal_rank(first_relevant_rank: int) -> float:
    return 1.0 / first_relevant_rank


def mean_reciprocal_rank(retrievals: Sequence[RankedRetrieval]) -> float:
    if not retrievals:
        raise ConfigurationError("no queries")
    total = 0.0
    for r in retrievals:
        ranks = r.relevant_ranks()
        if ranks.size == 0:
            raise ConfigurationError(f"query {r.query} has no relevant candidates")
        total += reciprocal_rank(int(ranks[0]))
    return total / len(retrievals)


def average_precision(relevant_ranks: Sequence[int], samples_per_class: int) -> float:
    """``(1/(S-1)) * sum_m m / rank(m)`` over the S-1 relevant ranks."""
    ranks = np.sort(np.asarray(relevant_ranks, dtype=float))
    if ranks.size != samples_per_class - 1:
        raise ConfigurationError(
            f"expected {samples_per_class - 1} relevant items, found {ranks.size}"
        )
    m = np.arange(1, ranks.size + 1)
    return float(np.sum(m / ranks) / ranks.size)


def mean_average_precision(
    retrievals: Sequence[RankedRetrieval], samples_per_class: int
) -> Tuple[float, List[float]]:
    """MAP and the per-query AP values."""
    if samples_per_class < 2:
        raise ConfigurationError("need at least 2 samples per class")
    aps = [average_precision(r.relevant_ranks(), samples_per_class) for r in retrievals]
    return float(np.mean(aps)), aps


def pair_scores(scores: np.ndarray, labels: Sequence[Hashable]) -> Tuple[np.ndarray, np.ndarray]:
    """Scores and same-class flags over unordered pairs ``i < j``."""
    scores = np.asarray(scores, dtype=float)
    codes = _label_codes(labels)
    iu, ju = np.triu_indices(len(codes), k=1)
    return scores[iu, ju], codes[iu] == codes[ju]


def roc_from_scores(scores: np.ndarray, positive: np.ndarray) -> Tuple[np.ndarray, float]:
    """ROC points (FPR, TPR) over all thresholds and the trapezoid AUC.

    An item is called positive when its score is at or above the threshold;
    thresholds sweep the distinct scores from high to low.
    """
    scores = np.asarray(scores, dtype=float)
    positive = np.asarray(positive, dtype=bool)
    n_pos = int(positive.sum())
    n_neg = positive.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise DegenerateLabelsError("ROC needs both positive and negative pairs")
    order = np.argsort(-scores, kind="stable")
    s, pos = scores[order], positive[order]
    tp = np.cumsum(pos)
    fp = np.cumsum(~pos)
    # last index of each run of equal scores
    ends = np.r_[np.flatnonzero(s[1:] != s[:-1]), s.size - 1]
    fpr = np.r_[0.0, fp[ends] / n_neg]
    tpr = np.r_[0.0, tp[ends] / n_pos]
    points = np.column_stack([fpr, tpr])
    auc = float(np.sum(np.diff(fpr) * (tpr[1:] + tpr[:-1]) / 2.0))
    return points, auc


def roc_curve(
    scores: np.ndarray, labels: Sequence[Hashable], higher_is_better: bool = True
) -> Tuple[np.ndarray, float]:
    """ROC over unordered pairs of a symmetric score matrix.

    Distances (``higher_is_better=False``) are negated first.
    """
    values, positive = pair_scores(scores, labels)
    if not higher_is_better:
        values = -values
    return roc_from_scores(values, positive)


def brute_force_auc(scores: np.ndarray, positive: np.ndarray) -> float:
    """Fraction of (positive, negative) pairs ordered correctly; ties count 1/2."""
    scores = np.asarray(scores, dtype=float)
    positive = np.asarray(positive, dtype=bool)
    pos, neg = scores[positive], scores[~positive]
    wins = 0.0
    for p in pos:
        for q in neg:
            wins += 1.0 if p > q else 0.5 if p == q else 0.0
    return wins / (pos.size * neg.size)


@dataclass
class RetrievalReport:
    p_at_1: float
    mrr: float
    map: float
    auc: float
    per_query_ap: List[float] = field(default_factory=list)
    roc_points: np.ndarray = field(default_factory=lambda: np.zeros((0, 2)))

    def summary(self) -> str:
        return (
            f"P@1={self.p_at_1:.4f}  MRR={self.mrr:.4f}  "
            f"MAP={self.map:.4f}  AUC={self.auc:.4f}"
        )

    def to_dict(self) -> dict:
        return {
            "p_at_1": self.p_at_1,
            "mrr": self.mrr,
            "map": self.map,
            "auc": self.auc,
            "per_query_ap": list(self.per_query_ap),
        }


def evaluate(
    scores: np.ndarray, labels: Sequence[Hashable], higher_is_better: bool = True
) -> RetrievalReport:
    """All retrieval metrics from a full pairwise score matrix."""
    counts = Counter(labels)
    if len(counts) < 2:
        raise ConfigurationError("need at least 2 classes")
    sizes = set(counts.values())
    if len(sizes) != 1:
        raise ConfigurationError(f"classes have unequal sample counts: {sorted(sizes)}")
    samples = sizes.pop()
    if samples < 2:
        raise ConfigurationError("need at least 2 samples per class")
    retrievals = rank_queries(scores, labels, higher_is_better)
    map_, aps = mean_average_precision(retrievals, samples)
    points, auc = roc_curve(scores, labels, higher_is_better)
    return RetrievalReport(
        p_at_1=precision_at_1(retrievals),
        mrr=mean_reciprocal_rank(retrievals),
        map=map_,
        auc=auc,
        per_query_ap=aps,
        roc_points=points,
    )
