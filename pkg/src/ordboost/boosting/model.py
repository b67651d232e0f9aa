from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import expit

from ..dataset import Dataset, DatasetLayout, SchemaError
from ..tree import ObliviousTree, SplitAttribute, TS, get_leaf
from .features import ApplyTable, ApplyView
from .params import LOGLOSS, BoostParams

FORMAT = "ordboost-model"
VERSION = 1


@dataclass(frozen=True, eq=False)
class TrainedModel:
    """Ensemble ``F(x) = sum_t learning_rate * leaf_values[t][leaf_t(x)]`` with
    leaves resolved through apply-time TS tables."""

    params: BoostParams
    layout: DatasetLayout
    trees: tuple[ObliviousTree, ...] = ()
    leaf_values: tuple[np.ndarray, ...] = ()
    tables: dict = field(default_factory=dict)
    prior: float = 0.0
    combinations: tuple[tuple[int, ...], ...] = ()

    @property
    def learning_rate(self) -> float:
        return self.params.learning_rate

    def predict(self, data: Dataset) -> np.ndarray:
        return predict(self, data)

    def predict_proba(self, data: Dataset) -> np.ndarray:
        if self.params.loss != LOGLOSS:
            raise ValueError("probabilities are only defined for logloss models")
        return expit(self.predict(data))

    def to_dict(self) -> dict:
        return {
            "format": FORMAT,
            "version": VERSION,
            "params": self.params.to_dict(),
            "layout": self.layout.to_dict(),
            "prior": self.prior,
            "trees": [
                {"splits": [s.to_dict() for s in t.splits], "leaf_values": v.tolist()}
                for t, v in zip(self.trees, self.leaf_values)
            ],
            "tables": [self.tables[k].to_dict() for k in sorted(self.tables)],
            "combinations": [list(c) for c in self.combinations],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    def save(self, path) -> None:
        Path(path).write_text(self.dumps())

    @classmethod
    def from_dict(cls, d) -> "TrainedModel":
        if d.get("format") != FORMAT:
            raise ValueError("not a model file")
        if d.get("version") != VERSION:
            raise ValueError(f"unsupported model version {d.get('version')}")
        trees, values = [], []
        for t in d["trees"]:
            trees.append(ObliviousTree(tuple(SplitAttribute.from_dict(s) for s in t["splits"])))
            values.append(np.asarray(t["leaf_values"], dtype=np.float64))
        tables = {}
        for td in d["tables"]:
            table = ApplyTable.from_dict(td)
            tables[table.features] = table
        return cls(
            params=BoostParams.from_dict(d["params"]),
            layout=DatasetLayout.from_dict(d["layout"]),
            trees=tuple(trees),
            leaf_values=tuple(values),
            tables=tables,
            prior=float(d["prior"]),
            combinations=tuple(tuple(c) for c in d.get("combinations", ())),
        )

    @classmethod
    def loads(cls, text: str) -> "TrainedModel":
        return cls.from_dict(json.loads(text))

    @classmethod
    def load(cls, path) -> "TrainedModel":
        return cls.loads(Path(path).read_text())


def predict(model: TrainedModel, data: Dataset) -> np.ndarray:
    """Raw scores; the input is first mapped onto the model's vocabulary."""
    if data.num_names != model.layout.num_names or data.cat_names != model.layout.cat_names:
        raise SchemaError(
            f"feature columns {data.num_names + data.cat_names} do not match "
            f"model columns {model.layout.feature_names}"
        )
    data = data.align(model.layout)
    view = ApplyView(data, model.tables)
    scores = np.zeros(data.n_rows)
    lr = model.learning_rate
    for tree, values in zip(model.trees, model.leaf_values):
        scores += lr * values[get_leaf(view, tree)]
    return scores


def used_ts_features(trees) -> list[tuple[int, ...]]:
    out = []
    for t in trees:
        for s in t.splits:
            if s.kind == TS and s.features not in out:
                out.append(s.features)
    return out
