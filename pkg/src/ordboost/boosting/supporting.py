"""Supporting models whose predictions feed the split search.

Plain mode keeps one prediction per row for each structure permutation.
Ordered mode keeps, per permutation ``r`` and block ``j``, the predictions
of the model fitted on the first ``2**j`` positions, stored only for the
first ``2**(j+1)`` positions (arrays are in position order).
"""

from __future__ import annotations

import math

import numpy as np

from ..dataset import Permutation
from .losses import calc_gradient
from .scoring import block_bounds


def leaf_averages(leaf, values, n_leaves: int) -> np.ndarray:
    """Per-leaf average of ``values`` summed in input order; 0 for empty leaves."""
    sums = np.bincount(leaf, weights=values, minlength=n_leaves)
    counts = np.bincount(leaf, minlength=n_leaves)
    out = np.zeros(n_leaves)
    nz = counts > 0
    out[nz] = sums[nz] / counts[nz]
    return out


def n_blocks(n: int) -> int:
    """Number of ordered blocks, ``ceil(log2 n) + 1`` (blocks ``0..ceil(log2 n)``)."""
    return (math.ceil(math.log2(n)) if n > 1 else 0) + 1


def block_sizes(n: int) -> list[int]:
    return [min(1 << (j + 1), n) for j in range(n_blocks(n))]


class PlainSupport:
    def __init__(self, n: int, s: int):
        self.n = n
        self.models = [np.zeros(n) for _ in range(s)]

    @property
    def n_maintained(self) -> int:
        return sum(len(m) for m in self.models)

    def gradients(self, r: int, loss: str, y) -> np.ndarray:
        return calc_gradient(loss, self.models[r], y)

    def update(self, r: int, leaf, weights, grad, n_leaves: int, learning_rate: float):
        """Subtract ``learning_rate`` times the in-leaf average of ``weights * grad``."""
        avg = leaf_averages(leaf, weights * grad, n_leaves)
        self.models[r] -= learning_rate * avg[leaf]


class OrderedSupport:
    def __init__(self, perms: list[Permutation]):
        self.perms = perms
        self.n = len(perms[0])
        self.sizes = block_sizes(self.n)
        self.models = [[np.zeros(m) for m in self.sizes] for _ in perms]

    @property
    def n_maintained(self) -> int:
        return sum(len(m) for blocks in self.models for m in blocks)

    def gradients(self, r: int, loss: str, y) -> list[np.ndarray]:
        """Gradients of every block of permutation ``r``, in position order."""
        y_pos = np.asarray(y)[self.perms[r].order]
        return [calc_gradient(loss, m, y_pos[: len(m)]) for m in self.models[r]]

    def target(self, r: int, loss: str, y, block_grads) -> np.ndarray:
        """Per-position gradient read by each row: the zero model for position
        0, else block ``j = floor(log2 k)``. Unweighted, position order."""
        y_pos = np.asarray(y)[self.perms[r].order]
        out = np.empty(self.n)
        out[0] = calc_gradient(loss, np.zeros(1), y_pos[:1])[0]
        for j, (lo, hi) in enumerate(block_bounds(self.n)):
            out[lo:hi] = block_grads[j][lo:hi]
        return out

    def update(self, r: int, leaf, weights, block_grads, n_leaves: int, learning_rate: float):
        """Block ``j`` moves by the in-leaf average of weighted block-``j``
        gradients over its first ``2**j`` positions."""
        order = self.perms[r].order
        leaf_pos = leaf[order]
        w_pos = weights[order]
        for j, m in enumerate(self.models[r]):
            fit = min(1 << j, self.n)
            avg = leaf_averages(leaf_pos[:fit], w_pos[:fit] * block_grads[j][:fit], n_leaves)
            m -= learning_rate * avg[leaf_pos[: len(m)]]

