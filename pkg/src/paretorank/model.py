"""Latent factor model: scoring, rating-scale mapping, top-K recommendation.

Every algorithm in the package exposes the same scorer surface — ``n_users``,
``n_items``, ``score(user, item)`` and ``score_row(user)`` — so evaluation
flows through one path regardless of how scores are produced.
"""

from dataclasses import dataclass

import numpy as np

from .dataio import RatingMatrix


@dataclass
class FactorModel:
    """User factors U (n_users x d) and item factors V (n_items x d)."""

    U: np.ndarray
    V: np.ndarray

    @property
    def n_users(self) -> int:
        return self.U.shape[0]

    @property
    def n_items(self) -> int:
        return self.V.shape[0]

    @property
    def n_factors(self) -> int:
        return self.U.shape[1]

    def _check(self, user: int, item: int):
        if not 0 <= user < self.n_users:
            raise IndexError(f"user index {user} out of range [0, {self.n_users})")
        if not 0 <= item < self.n_items:
            raise IndexError(f"item index {item} out of range [0, {self.n_items})")

    def score(self, user: int, item: int) -> float:
        """Raw affinity: the dot product of the user and item factor rows."""
        self._check(user, item)
        return float(self.U[user] @ self.V[item])

    def score_row(self, user: int) -> np.ndarray:
        """Raw scores for one user against every item."""
        self._check(user, 0)
        return self.U[user] @ self.V.T


@dataclass
class RecommendationSet:
    """Per-user top-K lists: item indices in descending score order."""

    k: int
    items: list[np.ndarray]
    scores: list[np.ndarray]


def init_model(n_users: int, n_items: int, n_factors: int, seed: int) -> FactorModel:
    """Fresh model with every factor drawn i.i.d. Uniform(0, 1), seeded."""
    if n_users < 1 or n_items < 1:
        raise ValueError(f"need at least one user and one item, got {n_users} x {n_items}")
    if n_factors < 1:
        raise ValueError(f"n_factors must be >= 1, got {n_factors}")
    rng = np.random.default_rng(seed)
    return FactorModel(U=rng.random((n_users, n_factors)), V=rng.random((n_items, n_factors)))


def scale_scores(scores, scale: tuple[float, float]) -> np.ndarray:
    """Affine min-max map of a score batch onto the rating scale.

    The batch minimum lands on r_min and the maximum on r_max; a constant
    batch maps every score to the scale midpoint. Ordering is preserved.
    """
    r_min, r_max = scale
    if r_min >= r_max:
        raise ValueError(f"need r_min < r_max, got ({r_min}, {r_max})")
    arr = np.asarray(scores, dtype=float)
    if arr.size == 0:
        raise ValueError("cannot scale an empty score batch")
    lo = arr.min()
    hi = arr.max()
    if lo == hi:
        return np.full_like(arr, (r_min + r_max) / 2.0)
    return r_min + (arr - lo) * ((r_max - r_min) / (hi - lo))


def top_k(scorer, train: RatingMatrix, k: int) -> RecommendationSet:
    """Per-user k best-scoring items not rated in train.

    Ordering is descending score with ascending item index as the tie-break,
    which makes the output fully deterministic. Users with fewer than k
    unrated items get shorter lists.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    n_items = scorer.n_items
    items = []
    scores = []
    for u in range(scorer.n_users):
        unrated = np.ones(n_items, dtype=bool)
        rated = train.items_of(u)
        if rated:
            unrated[list(rated)] = False
        cand = np.flatnonzero(unrated)
        s = scorer.score_row(u)[cand]
        order = np.lexsort((cand, -s))[:k]
        items.append(cand[order])
        scores.append(s[order])
    return RecommendationSet(k=k, items=items, scores=scores)


def score_entries(scorer, matrix: RatingMatrix) -> np.ndarray:
    """Raw scores for every entry of a matrix, in entry-iteration order."""
    out = np.empty(matrix.n_entries)
    pos = 0
    for u in range(matrix.n_users):
        rated = matrix.items_of(u)
        if not rated:
            continue
        row = scorer.score_row(u)
        for i in rated:
            out[pos] = row[i]
            pos += 1
    return out
