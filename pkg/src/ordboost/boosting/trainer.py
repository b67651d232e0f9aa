"""The boosting loop: structure search on a sampled permutation, supporting
model updates for every permutation, then leaf values on the extra
permutation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..dataset import Dataset, gen_permutations
from ..target_stats import HOLDOUT, TSConfig, holdout_partition
from ..tree import TS, ObliviousTree, SplitAttribute, get_leaf
from .bootstrap import bootstrap_weights
from .features import FeatureStore, build_combinations
from .losses import calc_gradient, loss_value
from .model import TrainedModel, used_ts_features
from .params import ORDERED_MODE, PLAIN, BoostParams
from .scoring import ordered_scores, plain_scores
from .supporting import OrderedSupport, PlainSupport, leaf_averages


def discard_count(n: int, fraction: float) -> int:
    """Earliest positions left out of the cosine: at least one when enabled."""
    if fraction <= 0:
        return 0
    return max(1, int(fraction * n))


@dataclass(frozen=True, eq=False)
class IterationRecord:
    iteration: int
    r: int
    tree: ObliviousTree
    leaf_values: np.ndarray
    train_loss: float
    n_maintained: int
    level_scores: tuple[float, ...]
    weights: np.ndarray | None = None


class Trainer:
    """Step-by-step training. ``iterate()`` adds one tree; ``model()``
    packages the ensemble built so far.

    Permutation ``0`` fixes leaf values; permutations ``1..s`` drive the
    structure search and the supporting models.
    """

    def __init__(self, data: Dataset, params: BoostParams, keep_weights: bool = False):
        if data.n_rows < 1:
            raise ValueError("training data is empty")
        if data.y is None:
            raise ValueError("training data needs a target")
        self.params = params
        self.keep_weights = keep_weights
        self.layout = data.layout()
        streams = np.random.SeedSequence(params.seed).spawn(5)
        perm_seq, cat_seq, r_seq, boot_seq, holdout_seq = streams
        self._r_rng = np.random.default_rng(r_seq)
        self._boot_rng = np.random.default_rng(boot_seq)

        ts = TSConfig(params.prior_weight, params.prior, params.ts_mode)
        mask = None
        if params.ts_mode == HOLDOUT and data.n_cat:
            mask = holdout_partition(data.n_rows, holdout_seq)
        n_cat_perm = data.n_rows
        cat_perms = None
        if not params.couple_permutations:
            cat_perms = gen_permutations(n_cat_perm, params.permutations, cat_seq)
        self.store = FeatureStore(data, ts, params.border_count, cat_perms, holdout_mask=mask)
        self.n = self.store.n_rows
        self.y = self.store.y
        self.perms = gen_permutations(self.n, params.permutations, perm_seq)
        if params.couple_permutations:
            self.store.cat_perms = self.perms

        s = params.permutations
        if params.mode == PLAIN:
            self.support = PlainSupport(self.n, s)
        else:
            self.support = OrderedSupport(self.perms[1:])
        self.m0 = np.zeros(self.n)
        self.discard = discard_count(self.n, params.discard_fraction)
        self.registry: list[tuple[int, ...]] = []
        self.trees: list[ObliviousTree] = []
        self.leaf_values: list[np.ndarray] = []
        self.trace: list[IterationRecord] = []

    @property
    def n_maintained(self) -> int:
        """Supporting predictions kept in memory, including the leaf-value model."""
        return self.support.n_maintained + len(self.m0)

    # -- structure search ----------------------------------------------------
    def _search(self, r: int, score_column) -> tuple[ObliviousTree, tuple]:
        p = self.params
        tree = ObliviousTree()
        leaf = np.zeros(self.n, dtype=np.int64)
        base = self.store.base_keys()
        cat_features = range(self.store.data.n_cat)
        level_scores = []
        for level in range(p.depth):
            combos = build_combinations(tree.splits, cat_features, p.max_combination, self.registry)
            best = None
            for key in base + [(TS, c) for c in combos]:
                borders = self.store.borders(key, r)
                if len(borders) == 0:
                    continue
                bins = self.store.bins(key, r)
                scores = score_column(bins, len(borders), leaf, 1 << level)
                if np.all(np.isnan(scores)):
                    continue
                b = int(np.nanargmax(scores))
                if best is None or scores[b] > best[0]:
                    best = (float(scores[b]), key, b, bins, float(borders[b]))
            if best is None:
                break
            score, key, b, bins, threshold = best
            tree = tree.add(SplitAttribute(key[0], key[1], threshold))
            leaf |= (bins > b).astype(np.int64) << level
            level_scores.append(score)
        return tree, tuple(level_scores)

    def _plain_scorer(self, r: int, weights):
        grad = self.support.gradients(r - 1, self.params.loss, self.y)
        target = weights * grad
        kept = self.perms[r].position >= self.discard

        def score(bins, n_borders, leaf, n_leaves):
            return plain_scores(bins, n_borders, leaf, n_leaves, target, kept)

        return score

    def _ordered_scorer(self, r: int, weights):
        sup = self.support
        order = self.perms[r].order
        grads = sup.gradients(r - 1, self.params.loss, self.y)
        w_pos = weights[order]
        block = [w_pos[: len(g)] * g for g in grads]
        target = w_pos * sup.target(r - 1, self.params.loss, self.y, grads)
        kept_pos = np.arange(self.n) >= self.discard

        def score(bins, n_borders, leaf, n_leaves):
            return ordered_scores(bins, n_borders, leaf, order, block, target, kept_pos)

        return score

    # -- one boosting step ------------------------------------------------------
    def iterate(self, forced_tree: ObliviousTree | None = None) -> IterationRecord:
        p = self.params
        r = int(self._r_rng.integers(1, p.permutations + 1))
        weights = bootstrap_weights(self.n, p.bootstrap_temperature, self._boot_rng)
        if forced_tree is not None:
            tree, level_scores = forced_tree, ()
        elif p.mode == PLAIN:
            tree, level_scores = self._search(r, self._plain_scorer(r, weights))
        else:
            tree, level_scores = self._search(r, self._ordered_scorer(r, weights))

        n_leaves = tree.n_leaves
        for rr in range(1, p.permutations + 1):
            leaf = get_leaf(self.store.view(rr), tree)
            grads = self.support.gradients(rr - 1, p.loss, self.y)
            self.support.update(rr - 1, leaf, weights, grads, n_leaves, p.learning_rate)

        leaf0 = get_leaf(self.store.view(0), tree)
        g0 = calc_gradient(p.loss, self.m0, self.y)
        values = -leaf_averages(leaf0, weights * g0, n_leaves)
        self.m0 += p.learning_rate * values[leaf0]

        self.trees.append(tree)
        self.leaf_values.append(values)
        record = IterationRecord(
            iteration=len(self.trees) - 1,
            r=r,
            tree=tree,
            leaf_values=values,
            train_loss=loss_value(p.loss, self.m0, self.y),
            n_maintained=self.n_maintained,
            level_scores=level_scores,
            weights=weights if self.keep_weights else None,
        )
        self.trace.append(record)
        return record

    def run(self) -> TrainedModel:
        while len(self.trees) < self.params.iterations:
            self.iterate()
        return self.model()

    def model(self) -> TrainedModel:
        tables = {f: self.store.apply_table(f) for f in used_ts_features(self.trees)}
        return TrainedModel(
            params=self.params,
            layout=self.layout,
            trees=tuple(self.trees),
            leaf_values=tuple(self.leaf_values),
            tables=tables,
            prior=self.store.prior,
            combinations=tuple(self.registry),
        )


def train(data: Dataset, params: BoostParams) -> TrainedModel:
    return Trainer(data, params).run()


def build_tree(trainer: Trainer) -> IterationRecord:
    """Build one tree and update all supporting models and the leaf-value model."""
    return trainer.iterate()


__all__ = ["Trainer", "IterationRecord", "train", "build_tree", "discard_count", "ORDERED_MODE", "PLAIN"]
