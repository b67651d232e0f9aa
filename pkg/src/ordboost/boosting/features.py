"""Feature columns seen by the tree learner.

A TS column is resolved through a context: a training permutation index
``ctx`` (ordered TS over that permutation's prefixes) or apply mode (tables
over the full training data). Columns, their borders and their bin indices
are cached per (key, ctx).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..dataset import Dataset, Permutation, UNSEEN, binarize, quantize
from ..target_stats import (
    GREEDY, HOLDOUT, LEAVE_ONE_OUT, ORDERED, TSConfig, TSTable, build_table, greedy_ts,
    leave_one_out_ts, ordered_ts,
)
from ..tree import NUM, TS, ColumnKey


class CombinationIndex:
    """Dense ids for tuples of category ids over several features."""

    def __init__(self, features: tuple[int, ...], cat: np.ndarray):
        self.features = tuple(features)
        keys, ids = np.unique(cat[:, list(self.features)], axis=0, return_inverse=True)
        self.keys = keys
        self.train_ids = ids.ravel().astype(np.int64)
        self._lookup = {tuple(k): i for i, k in enumerate(keys.tolist())}

    @classmethod
    def from_keys(cls, features, keys) -> "CombinationIndex":
        obj = cls.__new__(cls)
        obj.features = tuple(features)
        obj.keys = np.asarray(keys, dtype=np.int64).reshape(len(keys), len(obj.features))
        obj.train_ids = None
        obj._lookup = {tuple(k): i for i, k in enumerate(obj.keys.tolist())}
        return obj

    @property
    def n_categories(self) -> int:
        return len(self.keys)

    def ids(self, cat: np.ndarray) -> np.ndarray:
        """Ids for new rows; a tuple with an unseen member or never seen as a
        whole maps to ``UNSEEN``."""
        rows = cat[:, list(self.features)].tolist()
        return np.fromiter((self._lookup.get(tuple(r), UNSEEN) for r in rows), dtype=np.int64, count=len(rows))


def build_combinations(splits, categorical_features, c_max: int, registry: list | None = None) -> list:
    """Combinations available to the next level of the tree being built.

    Every TS split already in the tree (single feature or combination) is
    joined with every categorical feature it does not contain; joins larger
    than ``c_max`` features are dropped. New combinations are appended to
    ``registry`` (shared across trees, so it only grows).
    """
    out = []
    for split in splits:
        if split.kind != TS:
            continue
        for f in categorical_features:
            if f in split.features:
                continue
            combo = tuple(sorted(set(split.features) | {f}))
            if len(combo) > c_max or combo in out:
                continue
            out.append(combo)
            if registry is not None and combo not in registry:
                registry.append(combo)
    return out


@dataclass(frozen=True, eq=False)
class ApplyTable:
    """Apply-time TS for one categorical feature or combination."""

    features: tuple[int, ...]
    table: TSTable
    combination: CombinationIndex | None = None

    def values(self, cat: np.ndarray) -> np.ndarray:
        if self.combination is None:
            ids = cat[:, self.features[0]]
        else:
            ids = self.combination.ids(cat)
        return self.table.lookup(ids)

    def to_dict(self) -> dict:
        d = {
            "features": list(self.features),
            "sums": self.table.sums.tolist(),
            "counts": self.table.counts.tolist(),
            "a": self.table.a,
            "p": self.table.p,
            "scope": self.table.scope,
        }
        if self.combination is not None:
            d["keys"] = self.combination.keys.tolist()
        return d

    @classmethod
    def from_dict(cls, d) -> "ApplyTable":
        table = TSTable(np.asarray(d["sums"], dtype=np.float64), np.asarray(d["counts"], dtype=np.int64),
                        float(d["a"]), float(d["p"]), d.get("scope", "full"))
        features = tuple(int(f) for f in d["features"])
        combo = CombinationIndex.from_keys(features, d["keys"]) if "keys" in d else None
        return cls(features, table, combo)


class FeatureStore:
    """Train-time columns for every permutation context.

    ``cat_perms[ctx]`` is the permutation used for ordered TS in context
    ``ctx``. For greedy and leave-one-out TS the context is irrelevant. For
    holdout TS, statistics come from the rows where ``holdout_mask`` is True
    and only the remaining rows are exposed for training.
    """

    def __init__(self, data: Dataset, ts: TSConfig, border_count: int,
                 cat_perms: list[Permutation] | None = None, holdout_mask=None):
        if data.y is None:
            raise ValueError("training data needs a target")
        self.data = data
        self.ts = ts
        self.border_count = border_count
        self.cat_perms = cat_perms
        self.prior = ts.prior(data.y)
        if ts.mode == HOLDOUT and data.n_cat:
            mask = np.asarray(holdout_mask, dtype=bool)
            if mask.all() or not mask.any():
                raise ValueError("holdout partition has an empty part")
            self.stat_rows = np.flatnonzero(mask)
            self.rows = np.flatnonzero(~mask)
        else:
            self.stat_rows = np.arange(data.n_rows)
            self.rows = np.arange(data.n_rows)
        self.y = np.asarray(data.y[self.rows])
        self.num = data.num[self.rows]
        self.n_rows = len(self.rows)
        self._combos: dict[tuple, CombinationIndex] = {}
        self._values: dict = {}
        self._borders: dict = {}
        self._bins: dict = {}
        self.n_ts_computed = 0

    # -- categorical ids ---------------------------------------------------
    def combination(self, features: tuple[int, ...]) -> CombinationIndex:
        if features not in self._combos:
            self._combos[features] = CombinationIndex(features, self.data.cat)
        return self._combos[features]

    def _ids(self, features: tuple[int, ...]) -> tuple[np.ndarray, int]:
        """Category ids over all input rows and the id count."""
        if len(features) == 1:
            f = features[0]
            return self.data.cat[:, f], self.data.n_categories(f)
        combo = self.combination(features)
        return combo.train_ids, combo.n_categories

    def _ts(self, features, ctx) -> np.ndarray:
        ids, k = self._ids(features)
        y = self.data.y
        mode = self.ts.mode
        cfg = TSConfig(self.ts.a, self.prior, mode)
        self.n_ts_computed += 1
        if mode == ORDERED:
            return ordered_ts(ids, y, cfg, self.cat_perms[ctx], k).values
        if mode == GREEDY:
            return greedy_ts(ids, y, cfg, k).values
        if mode == LEAVE_ONE_OUT:
            return leave_one_out_ts(ids, y, cfg, k).values
        table = build_table(ids[self.stat_rows], y[self.stat_rows], cfg.a, self.prior, k, scope="holdout")
        return table.lookup(ids[self.rows])

    def _ctx_key(self, key: ColumnKey, ctx):
        # only ordered TS depends on the permutation
        if key[0] == NUM or self.ts.mode != ORDERED:
            return (key, None)
        return (key, ctx)

    # -- columns -----------------------------------------------------------
    def values(self, key: ColumnKey, ctx) -> np.ndarray:
        ck = self._ctx_key(key, ctx)
        if ck not in self._values:
            kind, features = key
            if kind == NUM:
                v = self.num[:, features[0]]
            else:
                v = self._ts(tuple(features), ctx)
            self._values[ck] = v
        return self._values[ck]

    def borders(self, key: ColumnKey, ctx) -> np.ndarray:
        ck = self._ctx_key(key, ctx)
        if ck not in self._borders:
            self._borders[ck] = quantize(self.values(key, ctx), self.border_count)
        return self._borders[ck]

    def bins(self, key: ColumnKey, ctx) -> np.ndarray:
        ck = self._ctx_key(key, ctx)
        if ck not in self._bins:
            self._bins[ck] = binarize(self.values(key, ctx), self.borders(key, ctx))
        return self._bins[ck]

    def base_keys(self) -> list:
        """Numerical columns, then one TS column per categorical feature."""
        keys = [(NUM, (f,)) for f in range(self.data.n_num)]
        keys += [(TS, (f,)) for f in range(self.data.n_cat)]
        return keys

    def view(self, ctx) -> "TrainView":
        return TrainView(self, ctx)

    # -- apply mode --------------------------------------------------------
    def apply_table(self, features: tuple[int, ...]) -> ApplyTable:
        ids, k = self._ids(features)
        scope = "holdout" if self.ts.mode == HOLDOUT else "full"
        rows = self.stat_rows
        table = build_table(ids[rows], self.data.y[rows], self.ts.a, self.prior, k, scope=scope)
        combo = self.combination(features) if len(features) > 1 else None
        return ApplyTable(tuple(features), table, combo)


class TrainView:
    def __init__(self, store: FeatureStore, ctx):
        self.store = store
        self.ctx = ctx
        self.n_rows = store.n_rows

    def values(self, key: ColumnKey) -> np.ndarray:
        return self.store.values(key, self.ctx)


class ApplyView:
    """Columns of new rows with TS resolved through apply-time tables."""

    def __init__(self, data: Dataset, tables: dict):
        self.data = data
        self.tables = tables
        self.n_rows = data.n_rows
        self._cache: dict = {}

    def values(self, key: ColumnKey) -> np.ndarray:
        kind, features = key
        if kind == NUM:
            return self.data.num[:, features[0]]
        features = tuple(features)
        if features not in self._cache:
            self._cache[features] = self.tables[features].values(self.data.cat)
        return self._cache[features]
