"""Split scoring by cosine similarity between per-example leaf estimates
``delta`` and the (weighted) gradient vector ``G``.

All borders of one column are scored in a single pass. Only rows in ``kept``
enter the cosine; leaf estimates still average over every eligible row.
"""

from __future__ import annotations

import numpy as np


def _safe_div(s, c):
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(c > 0, s / np.where(c > 0, c, 1), 0.0)


def _suffix(a):
    """``out[..., b] = sum(a[..., b:])``."""
    return np.flip(np.cumsum(np.flip(a, axis=-1), axis=-1), axis=-1)


def _cosine(num, den, g_norm2):
    with np.errstate(invalid="ignore", divide="ignore"):
        cos = num / np.sqrt(den * g_norm2)
    return np.where((den > 0) & (g_norm2 > 0), cos, np.nan)


def plain_scores(bins, n_borders: int, leaf, n_leaves: int, grad, kept) -> np.ndarray:
    """Cosine for every border of one column; NaN marks an invalid candidate.

    ``leaf`` is the current leaf of each row, ``grad`` the weighted gradient
    (also the target vector ``G``), ``kept`` the rows entering the cosine.
    A candidate at border ``b`` sends a row right iff ``bins > b``.
    """
    if n_borders == 0:
        return np.empty(0)
    nb1 = n_borders + 1
    idx = leaf * nb1 + bins
    size = n_leaves * nb1
    s = np.bincount(idx, weights=grad, minlength=size).reshape(n_leaves, nb1)
    c = np.bincount(idx, minlength=size).reshape(n_leaves, nb1).astype(np.float64)
    sk = np.bincount(idx[kept], weights=grad[kept], minlength=size).reshape(n_leaves, nb1)
    ck = np.bincount(idx[kept], minlength=size).reshape(n_leaves, nb1).astype(np.float64)

    num = np.zeros(n_borders)
    den = np.zeros(n_borders)
    for all_s, all_c, kept_s, kept_c in (
        (np.cumsum(s, 1)[:, :-1], np.cumsum(c, 1)[:, :-1], np.cumsum(sk, 1)[:, :-1], np.cumsum(ck, 1)[:, :-1]),
        (_suffix(s)[:, 1:], _suffix(c)[:, 1:], _suffix(sk)[:, 1:], _suffix(ck)[:, 1:]),
    ):
        delta = _safe_div(all_s, all_c)
        num += (delta * kept_s).sum(axis=0)
        den += (delta * delta * kept_c).sum(axis=0)
    g_norm2 = float(np.dot(grad[kept], grad[kept]))
    return _cosine(num, den, g_norm2)


def block_of(position: int) -> int:
    """Supporting-model block read by the row at a (0-based) position >= 1:
    the model fitted on the first ``2**j <= position`` rows."""
    return position.bit_length() - 1


def block_bounds(n: int) -> list[tuple[int, int]]:
    """``(lo, hi)`` query position ranges per block: ``[2**j, min(2**(j+1), n))``."""
    out = []
    j = 0
    while (1 << j) < n:
        out.append(((1 << j), min(1 << (j + 1), n)))
        j += 1
    return out


def ordered_scores(bins, n_borders: int, leaf, order, block_grads, target, kept_pos) -> np.ndarray:
    """Cosine for every border of one column in ordered mode.

    The estimate for the row at position ``k`` averages the block gradients
    ``block_grads[j]`` (``j = block_of(k)``, arrays in position order) of the
    earlier positions that share its candidate leaf; it is 0 without such
    rows. ``target`` is ``G`` and ``kept_pos`` the cosine mask, both in
    position order.
    """
    if n_borders == 0:
        return np.empty(0)
    nb1 = n_borders + 1
    n = len(order)
    leaf_pos = leaf[order]
    bins_pos = bins[order]
    num = np.zeros(n_borders)
    den = np.zeros(n_borders)
    border_ids = np.arange(n_borders)
    for j, (lo, hi) in enumerate(block_bounds(n)):
        v = np.asarray(block_grads[j][:hi], dtype=np.float64)
        srt = np.argsort(leaf_pos[:hi], kind="stable")
        ls, bs, vs = leaf_pos[:hi][srt], bins_pos[:hi][srt], v[srt]
        a = np.zeros((hi, nb1))
        a[np.arange(hi), bs] = vs
        cnt = np.zeros((hi, nb1))
        cnt[np.arange(hi), bs] = 1.0
        # exclusive running sums within each leaf group
        first = np.searchsorted(ls, ls, side="left")
        run = np.cumsum(a, axis=0) - a
        run_c = np.cumsum(cnt, axis=0) - cnt
        run = run - run[first]
        run_c = run_c - run_c[first]
        q = (srt >= lo) & kept_pos[srt]
        if not q.any():
            continue
        run, run_c, bq = run[q], run_c[q], bs[q]
        g = target[srt[q]]
        cum_s, cum_c = np.cumsum(run, 1), np.cumsum(run_c, 1)
        left_s, left_c = cum_s[:, :-1], cum_c[:, :-1]
        go_right = bq[:, None] > border_ids[None, :]
        same_s = np.where(go_right, cum_s[:, -1:] - left_s, left_s)
        same_c = np.where(go_right, cum_c[:, -1:] - left_c, left_c)
        delta = _safe_div(same_s, same_c)
        num += (delta * g[:, None]).sum(axis=0)
        den += (delta * delta).sum(axis=0)
    g_norm2 = float(np.dot(target[kept_pos], target[kept_pos]))
    return _cosine(num, den, g_norm2)


def ordered_leaf_deltas(leaf, order, block_grads) -> np.ndarray:
    """Per-position ordered estimates by direct summation (reference path).

    Position 0 gets 0; position ``k`` averages ``block_grads[block_of(k)][p]``
    over ``p < k`` with the same leaf, summed in position order.
    """
    leaf_pos = np.asarray(leaf)[np.asarray(order)].tolist()
    out = np.zeros(len(leaf_pos))
    for k in range(1, len(leaf_pos)):
        g = block_grads[block_of(k)]
        total, count = 0.0, 0
        for p in range(k):
            if leaf_pos[p] == leaf_pos[k]:
                total += float(g[p])
                count += 1
        out[k] = total / count if count else 0.0
    return out
