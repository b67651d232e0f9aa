"""Oblivious decision trees: one split predicate per level, leaves indexed by
the bit-vector of level predicates."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Protocol, Sequence

import numpy as np

NUM = "num"  # raw numerical feature
TS = "ts"  # target statistic of a categorical feature or combination

DEFAULT_DEPTH = 6

ColumnKey = tuple  # (kind, features)


@dataclass(frozen=True)
class SplitAttribute:
    """Predicate ``value(x) > threshold`` on a numerical column, or on the
    target statistic of the categorical features ``features`` (one feature,
    or several for a combination)."""

    kind: str
    features: tuple[int, ...]
    threshold: float

    def __post_init__(self):
        if self.kind not in (NUM, TS):
            raise ValueError(f"unknown split kind {self.kind!r}")
        if self.kind == NUM and len(self.features) != 1:
            raise ValueError("a numerical split uses exactly one feature")
        if not self.features:
            raise ValueError("a split needs at least one feature")

    @property
    def key(self) -> ColumnKey:
        return (self.kind, self.features)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "features": list(self.features), "threshold": self.threshold}

    @classmethod
    def from_dict(cls, d: Mapping) -> "SplitAttribute":
        return cls(d["kind"], tuple(int(f) for f in d["features"]), float(d["threshold"]))


@dataclass(frozen=True)
class ObliviousTree:
    splits: tuple[SplitAttribute, ...] = ()

    @property
    def depth(self) -> int:
        return len(self.splits)

    @property
    def n_leaves(self) -> int:
        return 1 << len(self.splits)

    def add(self, split: SplitAttribute) -> "ObliviousTree":
        return ObliviousTree(self.splits + (split,))


@dataclass(frozen=True)
class Candidate:
    key: ColumnKey
    border_index: int
    threshold: float

    def split(self) -> SplitAttribute:
        return SplitAttribute(self.key[0], self.key[1], self.threshold)


def enumerate_candidates(borders: Mapping[ColumnKey, Sequence[float]],
                         active_combinations=None) -> list[Candidate]:
    """One candidate per (column, border), in column then border order.

    Combination columns (TS keys over several features) are included only if
    listed in ``active_combinations`` when that argument is given.
    """
    allowed = None if active_combinations is None else {tuple(c) for c in active_combinations}
    out = []
    for key, bs in borders.items():
        kind, features = key
        if allowed is not None and kind == TS and len(features) > 1 and tuple(features) not in allowed:
            continue
        out.extend(Candidate(key, k, float(t)) for k, t in enumerate(bs))
    return out


class FeatureView(Protocol):
    """Column access for a block of rows. The view decides how TS columns
    are computed: from a training permutation or from apply-time tables."""

    n_rows: int

    def values(self, key: ColumnKey) -> np.ndarray: ...


class ArrayView:
    """Numerical-only view over a 2-d array."""

    def __init__(self, X):
        self.X = np.asarray(X, dtype=np.float64).reshape(len(X), -1)
        self.n_rows = self.X.shape[0]

    def values(self, key: ColumnKey) -> np.ndarray:
        kind, features = key
        if kind != NUM:
            raise KeyError(f"ArrayView has no TS column {key}")
        return self.X[:, features[0]]


def get_leaf(view: FeatureView, tree: ObliviousTree) -> np.ndarray:
    """Leaf index of every row: sum over levels of ``2**level * predicate``."""
    leaf = np.zeros(view.n_rows, dtype=np.int64)
    for level, split in enumerate(tree.splits):
        leaf |= (view.values(split.key) > split.threshold).astype(np.int64) << level
    return leaf


def apply(tree: ObliviousTree, leaf_values, view: FeatureView) -> np.ndarray:
    leaf_values = np.asarray(leaf_values, dtype=np.float64)
    if len(leaf_values) != tree.n_leaves:
        raise ValueError(f"tree has {tree.n_leaves} leaves, got {len(leaf_values)} values")
    return leaf_values[get_leaf(view, tree)]
