"""Prediction shift of two-step boosting with stumps on two binary features.

Setup: ``x = (x1, x2)`` with independent fair-coin coordinates, target
``y = c1*x1 + c2*x2`` without noise, two boosting steps with step size 1 and
squared loss. The first stump is fitted on ``x1``, the second on ``x2`` to
the residuals of the first. Fits are conditioned on every stump leaf being
non-empty (rejection sampling here, explicit filtering in the exact
enumeration).

The exact routines work in rational arithmetic over the multinomial counts
``xi[s, t]`` of examples equal to ``(s, t)``.
"""

from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass
from fractions import Fraction
from math import comb

import numpy as np

from .dataset import Permutation
from .target_stats import GREEDY, HOLDOUT, LEAVE_ONE_OUT, ORDERED, TSConfig, encode, holdout_ts, p1_test

POINTS = ((0, 0), (0, 1), (1, 0), (1, 1))
MAX_ENUMERATION_N = 9
MAX_LEMMA_N = 12


@dataclass(frozen=True)
class TwoStumpConfig:
    """``replicates`` is the number of accepted (all leaves non-empty) draws."""

    n: int = 10
    c1: float = 2.0
    c2: float = 1.0
    shared_data: bool = True
    replicates: int = 200_000
    seed: int = 0

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("n must be >= 2")
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        if not abs(self.c1) > abs(self.c2):
            raise ValueError("the first stump must use x1: need |c1| > |c2|")


@dataclass(frozen=True)
class BiasReport:
    """Per test point ``(s, t)``: mean of ``F(x) - f*(x)``, its standard error
    and the number of accepted draws. ``rejected`` counts discarded draws."""

    config: TwoStumpConfig
    bias: dict
    stderr: dict
    count: int
    rejected: int
    seconds: float = 0.0

    def theory(self) -> dict:
        """Leading-order bias: ``-c2 (t - 1/2) / (n - 1)`` with shared data, 0 otherwise."""
        c = self.config
        if not c.shared_data:
            return {x: 0.0 for x in POINTS}
        return {(s, t): -c.c2 * (t - 0.5) / (c.n - 1) for s, t in POINTS}

    def rows(self) -> list[dict]:
        th = self.theory()
        return [
            {"s": s, "t": t, "bias": self.bias[(s, t)], "stderr": self.stderr[(s, t)],
             "theory": th[(s, t)], "count": self.count, "rejected": self.rejected}
            for s, t in POINTS
        ]

    def to_csv(self) -> str:
        buf = io.StringIO()
        rows = self.rows()
        w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in r.items()})
        return buf.getvalue()


def _fit_stumps(x1, x2, y, x1_b=None, x2_b=None, y_b=None):
    """Leaf means of both stumps for a batch of datasets (rows = replicates).

    With a second batch ``*_b`` the second stump is fitted on it.
    """
    n1 = x1.sum(axis=1)
    n0 = x1.shape[1] - n1
    h1_1 = (y * x1).sum(axis=1) / np.maximum(n1, 1)
    h1_0 = (y * (1 - x1)).sum(axis=1) / np.maximum(n0, 1)
    if x1_b is None:
        x1_b, x2_b, y_b = x1, x2, y
    resid = y_b - np.where(x1_b == 1, h1_1[:, None], h1_0[:, None])
    m1 = x2_b.sum(axis=1)
    m0 = x2_b.shape[1] - m1
    h2_1 = (resid * x2_b).sum(axis=1) / np.maximum(m1, 1)
    h2_0 = (resid * (1 - x2_b)).sum(axis=1) / np.maximum(m0, 1)
    ok = (n1 > 0) & (n0 > 0) & (m1 > 0) & (m0 > 0)
    return (h1_0, h1_1), (h2_0, h2_1), ok


def simulate_two_stumps(cfg: TwoStumpConfig, chunk: int = 50_000) -> BiasReport:
    """Monte Carlo estimate of ``E F(x) - f*(x)`` for the four test points."""
    start = time.perf_counter()
    rng = np.random.default_rng(cfg.seed)
    n = cfg.n
    sums = {x: 0.0 for x in POINTS}
    sq = {x: 0.0 for x in POINTS}
    accepted = rejected = 0
    max_draws = 1000 * cfg.replicates
    while accepted < cfg.replicates:
        if accepted + rejected >= max_draws:
            break
        k = min(chunk, max(1, int((cfg.replicates - accepted) * 1.1) + 16))
        x1 = rng.integers(0, 2, size=(k, n)).astype(np.float64)
        x2 = rng.integers(0, 2, size=(k, n)).astype(np.float64)
        y = cfg.c1 * x1 + cfg.c2 * x2
        if cfg.shared_data:
            h1, h2, ok = _fit_stumps(x1, x2, y)
        else:
            x1b = rng.integers(0, 2, size=(k, n)).astype(np.float64)
            x2b = rng.integers(0, 2, size=(k, n)).astype(np.float64)
            h1, h2, ok = _fit_stumps(x1, x2, y, x1b, x2b, cfg.c1 * x1b + cfg.c2 * x2b)
        idx = np.flatnonzero(ok)
        need = cfg.replicates - accepted
        if len(idx) > need:
            # keep draws in generation order so the result does not depend on chunking tails
            rejected += int(np.count_nonzero(~ok[: idx[need]]))
            idx = idx[:need]
        else:
            rejected += int(np.count_nonzero(~ok))
        accepted += len(idx)
        for s, t in POINTS:
            err = h1[s][idx] + h2[t][idx] - (cfg.c1 * s + cfg.c2 * t)
            sums[(s, t)] += float(err.sum())
            sq[(s, t)] += float(np.dot(err, err))
    if accepted == 0:
        raise RuntimeError("no draw satisfied the non-empty-leaf condition")
    bias, stderr = {}, {}
    for x in POINTS:
        mean = sums[x] / accepted
        var = (sq[x] - accepted * mean * mean) / (accepted - 1) if accepted > 1 else 0.0
        bias[x] = mean
        stderr[x] = float(np.sqrt(max(var, 0.0) / accepted))
    return BiasReport(cfg, bias, stderr, accepted, rejected, time.perf_counter() - start)


# -- exact enumeration -------------------------------------------------------

def compositions(n: int):
    """Counts ``(xi00, xi01, xi10, xi11)`` summing to ``n`` with their
    multinomial probability under uniform cells."""
    total = Fraction(1, 4 ** n)
    for a in range(n + 1):
        for b in range(n + 1 - a):
            for c in range(n + 1 - a - b):
                d = n - a - b - c
                yield (a, b, c, d), comb(n, a) * comb(n - a, b) * comb(n - a - b, c) * total


def _xi(counts):
    a, b, c, d = counts
    return {(0, 0): a, (0, 1): b, (1, 0): c, (1, 1): d}


def _first_stump(xi, c1, c2):
    return {s: c1 * s + Fraction(c2 * xi[(s, 1)], xi[(s, 0)] + xi[(s, 1)]) for s in (0, 1)}


def _second_stump(xi, h1, c1, c2):
    return {
        t: sum(xi[(s, t)] * (c1 * s + c2 * t - h1[s]) for s in (0, 1)) / (xi[(0, t)] + xi[(1, t)])
        for t in (0, 1)
    }


def _x1_leaves_ok(xi):
    return xi[(0, 0)] + xi[(0, 1)] > 0 and xi[(1, 0)] + xi[(1, 1)] > 0


def _x2_leaves_ok(xi):
    return xi[(0, 0)] + xi[(1, 0)] > 0 and xi[(0, 1)] + xi[(1, 1)] > 0


@dataclass(frozen=True)
class ExactBias:
    n: int
    bias: dict  # (s, t) -> Fraction
    p_accept: Fraction
    total_probability: Fraction
    shared_data: bool = True

    def deviation(self, c2) -> dict:
        """Distance from the leading-order shared-data bias ``-c2 (t-1/2)/(n-1)``."""
        c2 = Fraction(c2)
        return {(s, t): self.bias[(s, t)] + c2 * (Fraction(t) - Fraction(1, 2)) / (self.n - 1) for s, t in POINTS}


def brute_force_bias(n: int, c1=2, c2=1, shared_data: bool = True) -> ExactBias:
    """Exact conditional expectation of ``F(x) - f*(x)`` by enumerating all
    datasets (grouped by cell counts) in rational arithmetic."""
    if n < 2:
        raise ValueError("n must be >= 2")
    if n > MAX_ENUMERATION_N:
        raise ValueError(f"enumeration is limited to n <= {MAX_ENUMERATION_N}")
    c1, c2 = Fraction(c1), Fraction(c2)
    comps = list(compositions(n))
    total = sum(w for _, w in comps)
    acc = {x: Fraction(0) for x in POINTS}
    p_accept = Fraction(0)
    if shared_data:
        for counts, w in comps:
            xi = _xi(counts)
            if not (_x1_leaves_ok(xi) and _x2_leaves_ok(xi)):
                continue
            p_accept += w
            h1 = _first_stump(xi, c1, c2)
            h2 = _second_stump(xi, h1, c1, c2)
            for s, t in POINTS:
                acc[(s, t)] += w * (h1[s] + h2[t] - c1 * s - c2 * t)
    else:
        first = [(_xi(c), w) for c, w in comps if _x1_leaves_ok(_xi(c))]
        second = [(_xi(c), w) for c, w in comps if _x2_leaves_ok(_xi(c))]
        for xi, w in first:
            h1 = _first_stump(xi, c1, c2)
            for xi2, w2 in second:
                h2 = _second_stump(xi2, h1, c1, c2)
                ww = w * w2
                for s, t in POINTS:
                    acc[(s, t)] += ww * (h1[s] + h2[t] - c1 * s - c2 * t)
        p_accept = sum(w for _, w in first) * sum(w for _, w in second)
    bias = {x: v / p_accept for x, v in acc.items()}
    return ExactBias(n, bias, p_accept, total, shared_data)


# -- lemma checks ------------------------------------------------------------

@dataclass(frozen=True)
class LemmaCheck:
    name: str
    exact: Fraction
    closed_form: Fraction

    @property
    def difference(self) -> Fraction:
        return self.exact - self.closed_form


def _conditional_mean(n: int, fixed, value, need_a: bool = True) -> Fraction:
    """``E[value(xi) | first examples = fixed (, A)]`` by enumerating the
    cell counts of the remaining ``n - len(fixed)`` examples."""
    num = den = Fraction(0)
    for counts, w in compositions(n - len(fixed)):
        xi = _xi(counts)
        for cell in fixed:
            xi[cell] += 1
        if need_a and not (_x1_leaves_ok(xi) and _x2_leaves_ok(xi)):
            continue
        num += w * value(xi)
        den += w
    return num / den


def lemma_expectations(n: int, c1=2, c2=1) -> list[LemmaCheck]:
    """Exact enumerated expectations next to their closed forms.

    * inverse x1-leaf size given one example in that leaf: ``2/n``
    * the same given two examples in that leaf (every pair of x2 values)
    * inverse size of the ``x2 = 1`` leaf given examples ``(0,0)`` and
      ``(0,1)``, unconditioned: ``2/(n-1) - 1/(2**(n-2) (n-1))``
    * first-stump prediction on its own training example ``(s, t)``:
      ``c1 s + c2/2 + c2 (2t-1)/n`` up to ``O(2**-n)``
    """
    if not 3 <= n <= MAX_LEMMA_N:
        raise ValueError(f"lemma checks need 3 <= n <= {MAX_LEMMA_N}")
    out = []
    s = 0
    inv_leaf = lambda xi: Fraction(1, xi[(s, 0)] + xi[(s, 1)])  # noqa: E731
    for t in (0, 1):
        out.append(LemmaCheck(f"inverse_leaf_one_example[t={t}]",
                              _conditional_mean(n, [(s, t)], inv_leaf), Fraction(2, n)))
    closed2 = Fraction(2, n) * (1 - Fraction(1, n - 1) + Fraction(n - 2, (2 ** (n - 1) - 2) * (n - 1)))
    for t1 in (0, 1):
        for t2 in (0, 1):
            out.append(LemmaCheck(f"inverse_leaf_two_examples[t1={t1},t2={t2}]",
                                  _conditional_mean(n, [(s, t1), (s, t2)], inv_leaf), closed2))
    closed4 = Fraction(2, n - 1) - Fraction(1, 2 ** (n - 2) * (n - 1))
    out.append(LemmaCheck(
        "inverse_x2_leaf_given_00_01",
        _conditional_mean(n, [(0, 0), (0, 1)], lambda xi: Fraction(1, xi[(0, 1)] + xi[(1, 1)]), need_a=False),
        closed4,
    ))
    c1, c2 = Fraction(c1), Fraction(c2)
    for ss, t in POINTS:
        exact = _conditional_mean(n, [(ss, t)], lambda xi, ss=ss: _first_stump(xi, c1, c2)[ss])
        # the leaf holds the example itself, so the prediction leans toward its label
        closed = c1 * ss + c2 / 2 + c2 * Fraction(2 * t - 1, n)
        out.append(LemmaCheck(f"first_stump_on_training_example[s={ss},t={t}]", exact, closed))
    return out


# -- target-statistic leakage -------------------------------------------------

@dataclass(frozen=True)
class LeakageReport:
    greedy_threshold: float
    greedy_train_accuracy: float
    greedy_test_accuracy: float
    loo_threshold: float
    loo_train_accuracy: float
    loo_test_accuracy: float
    n_train: int
    n_test: int


def ts_leakage_demo(n_train: int, n_test: int, a: float = 1.0, p: float | None = None, seed=0) -> LeakageReport:
    """Two constructions where a single threshold on a leaky TS classifies the
    training rows perfectly.

    Greedy TS on a feature with a distinct category per row: rows with
    ``y = 1`` encode above ``(0.5 + a p)/(1 + a)`` and rows with ``y = 0``
    below it, while test rows (unseen categories) all encode to ``p``.
    Leave-one-out TS on a constant feature: rows with ``y = 1`` encode below
    ``(n_pos - 0.5 + a p)/(n - 1 + a)`` and rows with ``y = 0`` above.
    """
    if n_train < 100 or n_test < 100:
        raise ValueError("n_train and n_test must be >= 100")
    rng = np.random.default_rng(seed)
    y = rng.integers(0, 2, n_train).astype(np.float64)
    y_test = rng.integers(0, 2, n_test).astype(np.float64)
    prior = float(y.mean()) if p is None else float(p)
    cfg_g = TSConfig(a, prior, GREEDY)

    unique_ids = np.arange(n_train)
    greedy = encode(unique_ids, y, cfg_g)
    t_g = (0.5 + a * prior) / (1 + a)
    test_g = greedy.table.lookup(np.full(n_test, -1))
    acc_train_g = float(np.mean((greedy.values > t_g) == (y == 1)))
    acc_test_g = float(np.mean((test_g > t_g) == (y_test == 1)))

    const_ids = np.zeros(n_train, dtype=np.int64)
    loo = encode(const_ids, y, TSConfig(a, prior, LEAVE_ONE_OUT))
    n_pos = float(y.sum())
    t_l = (n_pos - 0.5 + a * prior) / (n_train - 1 + a)
    test_l = loo.table.lookup(np.zeros(n_test, dtype=np.int64))
    acc_train_l = float(np.mean((loo.values < t_l) == (y == 1)))
    acc_test_l = float(np.mean((test_l < t_l) == (y_test == 1)))
    return LeakageReport(t_g, acc_train_g, acc_test_g, t_l, acc_train_l, acc_test_l, n_train, n_test)


def p1_check(mode: str, n_train: int = 1000, n_test: int = 1000, a: float = 1.0, p: float = 0.5,
             seed=0, significance: float = 0.01):
    """P1 test on the distinct-category construction for one encoder.

    Train and test rows carry fresh categories; the test encodings are the
    apply-time values (the prior for every unseen category).
    """
    rng = np.random.default_rng(seed)
    y = rng.integers(0, 2, n_train).astype(np.float64)
    y_test = rng.integers(0, 2, n_test).astype(np.float64)
    ids = np.arange(n_train)
    cfg = TSConfig(a, p, mode)
    if mode == HOLDOUT:
        res = holdout_ts(ids, y, cfg, partition_seed=rng.integers(2 ** 63))
    elif mode == ORDERED:
        res = encode(ids, y, cfg, perm=Permutation(rng.permutation(n_train)))
    else:
        res = encode(ids, y, cfg)
    test_values = res.table.lookup(np.full(n_test, -1))
    return p1_test(res.values, y[res.rows], test_values, y_test, significance)
