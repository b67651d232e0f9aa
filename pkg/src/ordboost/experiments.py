"""Desk-scale ablation grids and their CSV/JSON reports.

Every grid trains on a train/test split per seed and reports test logloss
and zero-one loss, plus the relative change (in %) against a baseline
variant of the same seed; positive means worse than the baseline.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import expit

from .boosting import BoostParams, train
from .dataset import Dataset, FeatureSchema, load_csv, split
from .metrics import eval_metrics
from .shift_lab import TwoStumpConfig, simulate_two_stumps

KINDS = ("ts-compare", "mode-compare", "permutations", "combinations", "shift", "size-sweep")

# parameters that make the grids finish in seconds on one core
DESK_PARAMS = {"mode": "plain", "iterations": 200, "learning_rate": 0.1, "depth": 6, "border_count": 64}

DEFAULTS = {
    "dataset": "synthetic",
    "n_rows": 10_000,
    "n_categories": 2_000,
    "effect_scale": 1.0,
    "seeds": [0, 1, 2, 3, 4],
    "test_fraction": 0.2,
}

KIND_DEFAULTS = {
    "ts-compare": {"variants": ["ordered", "greedy", "leave_one_out", "holdout"], "baseline": "ordered"},
    "mode-compare": {"variants": ["ordered", "plain"], "baseline": "ordered", "n_rows": 2_000, "n_categories": 400},
    "permutations": {"variants": [1, 3, 9], "baseline": 1},
    "combinations": {"variants": [1, 2, 3, 4], "baseline": 1},
    "size-sweep": {"fractions": [0.1, 0.25, 0.5, 1.0], "variants": ["ordered", "plain"], "baseline": "ordered",
                   "n_rows": 2_000, "n_categories": 400},
    "shift": {"n": 10, "c1": 2.0, "c2": 1.0, "replicates": 200_000, "shared_data": True, "seed": 0},
}

# ordered-mode grids score every row against its own prefix; keep them smaller
KIND_PARAMS = {
    "mode-compare": {"iterations": 100, "border_count": 32},
    "size-sweep": {"iterations": 100, "border_count": 32},
}

# which BoostParams field each grid varies
VARIED = {
    "ts-compare": "ts_mode",
    "mode-compare": "mode",
    "permutations": "permutations",
    "combinations": "max_combination",
    "size-sweep": "mode",
}


def config_hash(config) -> str:
    return hashlib.sha256(json.dumps(config, sort_keys=True, separators=(",", ":")).encode()).hexdigest()


def make_high_cardinality(n_rows: int = 10_000, n_categories: int = 2_000, seed=0, constant_heavy: bool = False,
                          effect_scale: float = 1.0) -> Dataset:
    """Binary task driven by a many-valued categorical feature.

    Each category has a normal effect on the logit; one numerical feature
    adds a weaker effect and another is noise. ``constant_heavy`` adds two
    constant categorical features and a binary noise feature.
    """
    rng = np.random.default_rng(seed)
    effects = rng.normal(0.0, effect_scale, n_categories)
    cats = rng.integers(0, n_categories, n_rows)
    x = rng.normal(size=(n_rows, 2))
    y = (rng.random(n_rows) < expit(effects[cats] + 0.5 * x[:, 0])).astype(np.float64)
    cat_cols = [cats]
    names = ["category"]
    if constant_heavy:
        cat_cols += [np.zeros(n_rows, dtype=np.int64), np.zeros(n_rows, dtype=np.int64), rng.integers(0, 2, n_rows)]
        names += ["constant_a", "constant_b", "coin"]
    return Dataset.from_arrays(x, np.column_stack(cat_cols), y, num_names=["signal", "noise"], cat_names=names)


def load_dataset(exp: dict, seed, schema: dict | None = None, missing_policy: str = "impute") -> Dataset:
    kind = exp["dataset"]
    if kind in ("synthetic", "synthetic-constant"):
        return make_high_cardinality(exp["n_rows"], exp["n_categories"], seed,
                                     constant_heavy=kind == "synthetic-constant",
                                     effect_scale=exp["effect_scale"])
    if schema is None:
        raise ValueError("a CSV dataset needs a schema")
    with open(kind, newline="") as fh:
        header = [h.strip() for h in next(csv.reader(fh))]
    return load_csv(kind, FeatureSchema.from_spec(schema, header), missing_policy)


@dataclass(frozen=True)
class ExperimentResult:
    kind: str
    rows: list
    summary: dict


def _relative(value: float, base: float) -> float:
    return 100.0 * (value - base) / base if base else float("nan")


def _grid(kind: str, exp: dict, params: BoostParams, schema, missing_policy, chash: str) -> ExperimentResult:
    field = VARIED[kind]
    variants = exp["variants"]
    baseline = exp["baseline"]
    if baseline not in variants:
        raise ValueError(f"baseline {baseline!r} is not among the variants")
    fractions = exp.get("fractions", [1.0]) if kind == "size-sweep" else [1.0]
    rows = []
    for seed in exp["seeds"]:
        data = load_dataset(exp, seed, schema, missing_policy)
        train_set, test_set = split(data, exp["test_fraction"], seed)
        for frac in fractions:
            sub = train_set
            if frac < 1.0:
                size = max(2, int(frac * train_set.n_rows))
                keep = np.sort(np.random.default_rng(seed).permutation(train_set.n_rows)[:size])
                sub = train_set.subset(keep)
            results = {}
            for v in variants:
                model = train(sub, params.replace(**{field: v, "seed": int(seed)}))
                results[v] = eval_metrics(model.predict(test_set), test_set.y)
            base = results[baseline]
            for v in variants:
                m = results[v]
                rows.append({
                    "kind": kind, "variant": v, "fraction": frac, "seed": seed, "n_train": sub.n_rows,
                    "logloss": m.logloss, "zero_one": m.zero_one,
                    "rel_logloss_pct": _relative(m.logloss, base.logloss),
                    "rel_zero_one_pct": _relative(m.zero_one, base.zero_one),
                    "config_hash": chash,
                })
    summary = {"kind": kind, "baseline": baseline, "config_hash": chash, "variants": {}}
    for frac in fractions:
        for v in variants:
            sel = [r for r in rows if r["variant"] == v and r["fraction"] == frac]
            base = [r for r in rows if r["variant"] == baseline and r["fraction"] == frac]
            ll = float(np.mean([r["logloss"] for r in sel]))
            zo = float(np.mean([r["zero_one"] for r in sel]))
            entry = {
                "logloss": ll, "zero_one": zo,
                "rel_logloss_pct": _relative(ll, float(np.mean([r["logloss"] for r in base]))),
                "rel_zero_one_pct": _relative(zo, float(np.mean([r["zero_one"] for r in base]))),
            }
            key = str(v) if kind != "size-sweep" else f"{v}@{frac}"
            summary["variants"][key] = entry
    return ExperimentResult(kind, rows, summary)


def _shift(exp: dict, chash: str) -> ExperimentResult:
    cfg = TwoStumpConfig(n=exp["n"], c1=exp["c1"], c2=exp["c2"], shared_data=exp["shared_data"],
                         replicates=exp["replicates"], seed=exp["seed"])
    report = simulate_two_stumps(cfg)
    rows = [{**r, "config_hash": chash} for r in report.rows()]
    summary = {"kind": "shift", "config_hash": chash, "accepted": report.count, "rejected": report.rejected}
    return ExperimentResult("shift", rows, summary)


def resolve(kind: str, experiment: dict | None) -> dict:
    if kind not in KINDS:
        raise ValueError(f"unknown experiment kind {kind!r}; choose from {KINDS}")
    base = dict(KIND_DEFAULTS[kind]) if kind == "shift" else {**DEFAULTS, **KIND_DEFAULTS[kind]}
    experiment = dict(experiment or {})
    unknown = set(experiment) - set(base)
    if unknown:
        raise ValueError(f"unknown experiment keys for {kind}: {sorted(unknown)}")
    base.update(experiment)
    return base


def run_experiment(kind: str, config: dict) -> ExperimentResult:
    """``config`` holds optional ``params``, ``schema``, ``missing_policy`` and
    ``experiment`` sections; unset grid settings take the desk defaults."""
    exp = resolve(kind, config.get("experiment"))
    chash = config_hash({"kind": kind, **config})
    if kind == "shift":
        return _shift(exp, chash)
    params = BoostParams.from_dict({**DESK_PARAMS, **KIND_PARAMS.get(kind, {}), **config.get("params", {})})
    return _grid(kind, exp, params, config.get("schema"), config.get("missing_policy", "impute"), chash)


def write_report(result: ExperimentResult, out_dir) -> tuple[Path, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / f"{result.kind}.csv"
    with open(csv_path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(result.rows[0]), lineterminator="\n")
        w.writeheader()
        for r in result.rows:
            w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in r.items()})
    json_path = out / f"{result.kind}_summary.json"
    json_path.write_text(json.dumps(result.summary, indent=2, sort_keys=True) + "\n")
    return csv_path, json_path
