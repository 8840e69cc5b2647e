"""Sequential forward floating selection over named feature groups."""

from __future__ import annotations

from typing import Callable, Sequence


def sffs(features: Sequence[str], target_size: int,
         score: Callable[[list[str]], float]) -> list[str]:
    """Greedy forward selection with conditional backward exclusion.

    Grows the subset one best-scoring feature at a time; after each
    inclusion, drops any feature whose removal improves the score (never
    the one just added), as long as the subset keeps at least two features.
    Returns the first subset reaching target_size.
    """
    selected: list[str] = []
    best_at_size: dict[int, float] = {}
    while len(selected) < target_size:
        remaining = [f for f in features if f not in selected]
        gains = [(score(selected + [f]), f) for f in remaining]
        best_score, best_feature = max(gains)
        selected.append(best_feature)
        best_at_size[len(selected)] = best_score

        # floating step: drop the least useful feature while that helps
        improved = True
        while improved and len(selected) > 2:
            improved = False
            candidates = [f for f in selected if f != best_feature]
            drops = [(score([g for g in selected if g != f]), f) for f in candidates]
            drop_score, drop_feature = max(drops)
            if drop_score > best_at_size.get(len(selected) - 1, float("-inf")):
                selected.remove(drop_feature)
                best_at_size[len(selected)] = drop_score
                improved = True
    return selected
