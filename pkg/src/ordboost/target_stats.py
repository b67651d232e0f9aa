"""Target statistics (TS) for categorical features.

Every encoder replaces a category by a smoothed average of targets,

    (sum of y over a reference set + a * p) / (count in reference set + a),

and they differ only in the reference set used for a training row: all rows
(greedy), a disjoint holdout part, all rows but itself (leave-one-out), or
the rows preceding it in a random permutation (ordered). At apply time every
encoder uses its full reference data.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .dataset import Permutation

GREEDY = "greedy"
HOLDOUT = "holdout"
LEAVE_ONE_OUT = "leave_one_out"
ORDERED = "ordered"
TS_MODES = (GREEDY, HOLDOUT, LEAVE_ONE_OUT, ORDERED)


@dataclass(frozen=True)
class TSConfig:
    """Prior weight ``a``, prior value ``p`` (None: mean target of the
    training rows) and the encoder kind."""

    a: float = 1.0
    p: float | None = None
    mode: str = ORDERED

    def __post_init__(self):
        if self.a < 0:
            raise ValueError("prior weight a must be non-negative")
        if self.mode not in TS_MODES:
            raise ValueError(f"unknown TS mode {self.mode!r}")

    def prior(self, y) -> float:
        return float(np.mean(y)) if self.p is None else float(self.p)


def _smooth(sums, counts, a: float, p: float):
    sums = np.asarray(sums, dtype=np.float64)
    counts = np.asarray(counts, dtype=np.float64)
    denom = counts + a
    with np.errstate(invalid="ignore", divide="ignore"):
        value = (sums + a * p) / denom
    # a == 0 with no history: fall back to the prior
    return np.where(denom > 0, value, p)


@dataclass(frozen=True, eq=False)
class TSTable:
    """Per-category (target sum, count) over a reference scope."""

    sums: np.ndarray
    counts: np.ndarray
    a: float
    p: float
    scope: str = "full"

    def __post_init__(self):
        if len(self.sums) != len(self.counts):
            raise ValueError("sums and counts must align")
        if np.any(np.asarray(self.counts) < 0):
            raise ValueError("counts must be non-negative")

    @property
    def n_categories(self) -> int:
        return len(self.counts)

    def lookup(self, ids) -> np.ndarray:
        """Encoded values; ids outside the table (e.g. unseen, ``-1``) get the prior."""
        ids = np.asarray(ids, dtype=np.int64)
        known = (ids >= 0) & (ids < self.n_categories)
        safe = np.where(known, ids, 0)
        if self.n_categories == 0:
            return np.full(ids.shape, self.p)
        values = _smooth(self.sums[safe], self.counts[safe], self.a, self.p)
        return np.where(known, values, self.p)


@dataclass(frozen=True, eq=False)
class TSResult:
    """Train-time encodings for ``rows`` plus the apply-time table."""

    values: np.ndarray
    table: TSTable
    rows: np.ndarray


def _check(ids, y):
    ids = np.asarray(ids, dtype=np.int64)
    y = np.asarray(y, dtype=np.float64)
    if ids.shape != y.shape or ids.ndim != 1:
        raise ValueError("ids and y must be 1-d arrays of equal length")
    if len(ids) and ids.min() < 0:
        raise ValueError("training category ids must be non-negative")
    return ids, y


def build_table(ids, y, a: float, p: float, n_categories: int | None = None, scope: str = "full") -> TSTable:
    ids, y = _check(ids, y)
    k = int(ids.max()) + 1 if len(ids) else 0
    k = max(k, n_categories or 0)
    return TSTable(np.bincount(ids, weights=y, minlength=k), np.bincount(ids, minlength=k), a, p, scope)


def greedy_ts(ids, y, cfg: TSConfig, n_categories: int | None = None) -> TSResult:
    """Each row is encoded with statistics over all rows, itself included."""
    ids, y = _check(ids, y)
    table = build_table(ids, y, cfg.a, cfg.prior(y), n_categories)
    return TSResult(table.lookup(ids), table, np.arange(len(ids)))


def leave_one_out_ts(ids, y, cfg: TSConfig, n_categories: int | None = None) -> TSResult:
    """Each row is encoded with statistics over all other rows."""
    ids, y = _check(ids, y)
    table = build_table(ids, y, cfg.a, cfg.prior(y), n_categories)
    values = _smooth(table.sums[ids] - y, table.counts[ids] - 1, table.a, table.p)
    return TSResult(values, table, np.arange(len(ids)))


loo_ts = leave_one_out_ts


def holdout_partition(n: int, seed) -> np.ndarray:
    """Boolean mask of the statistics part; a random half of the rows."""
    if n < 2:
        raise ValueError("holdout TS needs at least two rows")
    mask = np.zeros(n, dtype=bool)
    mask[np.random.default_rng(seed).permutation(n)[: n // 2]] = True
    return mask


def holdout_ts(ids, y, cfg: TSConfig, partition_seed=None, n_categories: int | None = None,
               holdout_mask=None) -> TSResult:
    """Statistics come from one part of the data; the other part is encoded
    and is the only part usable for training.

    ``holdout_mask`` (True = statistics part) overrides the random 50/50
    partition drawn from ``partition_seed``.
    """
    ids, y = _check(ids, y)
    if holdout_mask is None:
        mask = holdout_partition(len(ids), partition_seed)
    else:
        mask = np.asarray(holdout_mask, dtype=bool)
    if mask.all() or not mask.any():
        raise ValueError("holdout partition has an empty part")
    table = build_table(ids[mask], y[mask], cfg.a, cfg.prior(y), n_categories, scope="holdout")
    rows = np.flatnonzero(~mask)
    return TSResult(table.lookup(ids[rows]), table, rows)


def ordered_ts(ids, y, cfg: TSConfig, perm: Permutation, n_categories: int | None = None) -> TSResult:
    """Each row is encoded with statistics over the rows that precede it in
    ``perm``; the first occurrence of a category gets the prior."""
    ids, y = _check(ids, y)
    if len(perm) != len(ids):
        raise ValueError("permutation length does not match the data")
    p = cfg.prior(y)
    table = build_table(ids, y, cfg.a, p, n_categories)
    k = table.n_categories
    sums = [0.0] * k
    counts = [0] * k
    a = cfg.a
    ap = a * p
    values = np.empty(len(ids))
    id_list = ids.tolist()
    y_list = y.tolist()
    for row in perm.order.tolist():
        c = id_list[row]
        denom = counts[c] + a
        values[row] = (sums[c] + ap) / denom if denom > 0 else p
        sums[c] += y_list[row]
        counts[c] += 1
    return TSResult(values, table, np.arange(len(ids)))


def encode(ids, y, cfg: TSConfig, perm: Permutation | None = None, partition_seed=None,
           n_categories: int | None = None) -> TSResult:
    """Dispatch on ``cfg.mode``."""
    if cfg.mode == GREEDY:
        return greedy_ts(ids, y, cfg, n_categories)
    if cfg.mode == LEAVE_ONE_OUT:
        return leave_one_out_ts(ids, y, cfg, n_categories)
    if cfg.mode == HOLDOUT:
        return holdout_ts(ids, y, cfg, partition_seed, n_categories)
    if perm is None:
        raise ValueError("ordered TS needs a permutation")
    return ordered_ts(ids, y, cfg, perm, n_categories)


@dataclass(frozen=True)
class P1Result:
    holds: bool
    pvalues: dict

    @property
    def rejected(self) -> bool:
        return not self.holds


def p1_test(train_values, train_y, test_values, test_y, significance: float = 0.01) -> P1Result:
    """Check E(x | y=v) on training rows against fresh test rows, per class.

    Welch's two-sample t-test per target class; the two per-class tests are
    Bonferroni-combined, so the property is rejected when either p-value is
    below ``significance / 2``.
    """
    train_values = np.asarray(train_values, dtype=np.float64)
    test_values = np.asarray(test_values, dtype=np.float64)
    train_y = np.asarray(train_y)
    test_y = np.asarray(test_y)
    pvalues = {}
    for v in (0, 1):
        a = train_values[train_y == v]
        b = test_values[test_y == v]
        if len(a) < 2 or len(b) < 2:
            raise ValueError(f"target class {v} is absent (or a singleton) in train or test")
        if a.mean() == b.mean():
            pvalues[v] = 1.0
            continue
        with warnings.catch_warnings():
            # near-constant samples trigger a precision warning; the p-value is still usable
            warnings.simplefilter("ignore", RuntimeWarning)
            res = stats.ttest_ind(a, b, equal_var=False)
        # both samples constant but different means: degenerate, clearly unequal
        pvalues[v] = 0.0 if np.isnan(res.pvalue) else float(res.pvalue)
    return P1Result(min(pvalues.values()) >= significance / 2, pvalues)
