"""Ordered boosting with one model per permutation prefix.

Quadratic in the number of rows; meant as a reference on small numerical
datasets, not for real training.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..dataset import Dataset, Permutation, gen_permutations, quantize
from ..tree import NUM, ArrayView, ObliviousTree, SplitAttribute, get_leaf
from .losses import calc_gradient
from .params import MSE

MAX_ROWS = 200


def fit_least_squares_tree(X, residuals, depth: int, borders) -> tuple[ObliviousTree, np.ndarray]:
    """Oblivious tree minimizing squared error to ``residuals`` level by level;
    leaf values are residual means (0 for empty leaves)."""
    X = np.asarray(X, dtype=np.float64)
    residuals = np.asarray(residuals, dtype=np.float64)
    tree = ObliviousTree()
    leaf = np.zeros(len(X), dtype=np.int64)
    for level in range(depth):
        n_leaves = 2 << level
        best = None
        for f, bs in enumerate(borders):
            for t in bs:
                child = leaf | ((X[:, f] > t).astype(np.int64) << level)
                s = np.bincount(child, weights=residuals, minlength=n_leaves)
                c = np.bincount(child, minlength=n_leaves)
                gain = float(np.sum(s[c > 0] ** 2 / c[c > 0]))
                if best is None or gain > best[0]:
                    best = (gain, f, float(t), child)
        if best is None:
            break
        _, f, t, leaf = best
        tree = tree.add(SplitAttribute(NUM, (f,), t))
    s = np.bincount(leaf, weights=residuals, minlength=tree.n_leaves)
    c = np.bincount(leaf, minlength=tree.n_leaves)
    values = np.zeros(tree.n_leaves)
    values[c > 0] = s[c > 0] / c[c > 0]
    return tree, values


@dataclass(frozen=True, eq=False)
class PrefixModels:
    """``models[m]`` lists the (tree, scaled leaf values) of the model fitted
    on the first ``m`` positions of ``perm``; ``models[0]`` is empty."""

    models: list
    perm: Permutation
    train_predictions: np.ndarray  # [m, row] = models[m](x_row)

    def predict(self, X, m: int | None = None) -> np.ndarray:
        view = ArrayView(X)
        out = np.zeros(view.n_rows)
        for tree, values in self.models[len(self.models) - 1 if m is None else m]:
            out += values[get_leaf(view, tree)]
        return out


def train_ordered_naive(data: Dataset, iterations: int, learning_rate: float, loss: str = MSE,
                        seed=0, depth: int = 1, border_count: int = 255) -> PrefixModels:
    """Keep ``n`` models; the residual of a row always comes from the model
    fitted on the rows strictly before it in the permutation."""
    if data.n_cat:
        raise ValueError("the prefix-model reference handles numerical features only")
    n = data.n_rows
    if not 1 <= n <= MAX_ROWS:
        raise ValueError(f"the prefix-model reference needs 1 <= n <= {MAX_ROWS}")
    X = np.asarray(data.num)
    y = np.asarray(data.y)
    perm = gen_permutations(n, 1, seed)[0]
    borders = [quantize(X[:, f], border_count) for f in range(X.shape[1])]
    view = ArrayView(X)
    models = [[] for _ in range(n + 1)]
    pred = np.zeros((n + 1, n))
    pos = perm.position
    for _ in range(iterations):
        # residual of row i from the model over positions < pos[i]
        residuals = -calc_gradient(loss, pred[pos, np.arange(n)], y)
        for m in range(1, n + 1):
            rows = perm.order[:m]
            tree, values = fit_least_squares_tree(X[rows], residuals[rows], depth, borders)
            scaled = learning_rate * values
            models[m].append((tree, scaled))
            pred[m] += scaled[get_leaf(view, tree)]
    return PrefixModels(models, perm, pred)
