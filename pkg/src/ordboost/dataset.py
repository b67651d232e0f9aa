"""Data ingestion: feature schema, CSV loading, splitting, permutations and
border quantization for numerical features.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

NUMERICAL = "numerical"
CATEGORICAL = "categorical"
TARGET = "target"
KINDS = (NUMERICAL, CATEGORICAL, TARGET)

MISSING_TOKENS = frozenset({"", "na", "nan", "null", "none", "?"})
MISSING_CATEGORY = "<missing>"
UNSEEN = -1

DEFAULT_BORDER_COUNT = 255


class DataError(ValueError):
    """Malformed input data."""


class SchemaError(DataError):
    """Data does not conform to the expected feature schema."""


@dataclass(frozen=True)
class FeatureSchema:
    """Column name -> kind mapping, in file order."""

    columns: tuple[tuple[str, str], ...]

    def __post_init__(self):
        names = [name for name, _ in self.columns]
        if len(set(names)) != len(names):
            raise SchemaError("duplicate column names in schema")
        for name, kind in self.columns:
            if kind not in KINDS:
                raise SchemaError(f"column {name!r}: unknown kind {kind!r}")
        n_target = sum(kind == TARGET for _, kind in self.columns)
        if n_target != 1:
            raise SchemaError(f"schema needs exactly one target column, got {n_target}")
        if len(self.columns) < 2:
            raise SchemaError("schema needs at least one feature column")

    @classmethod
    def from_mapping(cls, mapping: Mapping[str, str]) -> "FeatureSchema":
        return cls(tuple((str(k), str(v)) for k, v in mapping.items()))

    @classmethod
    def from_spec(cls, spec: Mapping, header: Sequence[str] | None = None) -> "FeatureSchema":
        """Build a schema from either ``{"columns": {name: kind}}`` or the
        shorthand ``{"target": name, "categorical": [...], "numerical": [...]}``.

        In the shorthand form, columns of ``header`` that are not listed are
        numerical.
        """
        if "columns" in spec:
            unknown = set(spec) - {"columns"}
            if unknown:
                raise SchemaError(f"unknown schema keys: {sorted(unknown)}")
            return cls.from_mapping(spec["columns"])
        unknown = set(spec) - {"target", "categorical", "numerical"}
        if unknown:
            raise SchemaError(f"unknown schema keys: {sorted(unknown)}")
        if "target" not in spec:
            raise SchemaError("schema shorthand requires 'target'")
        target = spec["target"]
        cats = list(spec.get("categorical", []))
        nums = spec.get("numerical")
        if nums is None:
            if header is None:
                raise SchemaError("numerical columns must be listed when no header is available")
            nums = [h for h in header if h != target and h not in cats]
        kinds = {name: NUMERICAL for name in nums}
        kinds.update({name: CATEGORICAL for name in cats})
        kinds[target] = TARGET
        order = list(header) if header is not None else list(kinds)
        missing = [name for name in kinds if name not in order]
        return cls(tuple((name, kinds[name]) for name in order + missing if name in kinds))

    @classmethod
    def from_json(cls, path: str | Path, header: Sequence[str] | None = None) -> "FeatureSchema":
        with open(path) as fh:
            return cls.from_spec(json.load(fh), header)

    def names(self, kind: str) -> list[str]:
        return [name for name, k in self.columns if k == kind]

    @property
    def target(self) -> str:
        return self.names(TARGET)[0]

    def to_dict(self) -> dict:
        return {"columns": dict(self.columns)}


@dataclass(frozen=True)
class DatasetLayout:
    """Everything needed to encode new rows exactly like the training data."""

    num_names: tuple[str, ...]
    cat_names: tuple[str, ...]
    vocab: tuple[tuple[str, ...], ...]
    dummies: tuple[str, ...] = ()
    target_name: str | None = None

    @property
    def feature_names(self) -> tuple[str, ...]:
        return self.num_names + self.cat_names

    def to_dict(self) -> dict:
        return {
            "num_names": list(self.num_names),
            "cat_names": list(self.cat_names),
            "vocab": [list(v) for v in self.vocab],
            "dummies": list(self.dummies),
            "target_name": self.target_name,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "DatasetLayout":
        return cls(
            num_names=tuple(d["num_names"]),
            cat_names=tuple(d["cat_names"]),
            vocab=tuple(tuple(v) for v in d["vocab"]),
            dummies=tuple(d.get("dummies", ())),
            target_name=d.get("target_name"),
        )


def dummy_name(column: str) -> str:
    return f"{column}__missing"


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Dataset:
    """Rows of numerical and categorical features plus an optional target.

    ``cat`` holds interned category ids, dense ``0..K-1`` per feature in order
    of first appearance; ``-1`` marks a category unseen in the vocabulary.
    """

    num: np.ndarray
    cat: np.ndarray
    y: np.ndarray | None
    num_names: tuple[str, ...]
    cat_names: tuple[str, ...]
    vocab: tuple[tuple[str, ...], ...]
    dummies: tuple[str, ...] = ()
    target_name: str | None = None

    def __post_init__(self):
        num = np.ascontiguousarray(self.num, dtype=np.float64).reshape(len(self.num), -1)
        cat = np.ascontiguousarray(self.cat, dtype=np.int64).reshape(len(self.cat), -1)
        if num.shape[0] != cat.shape[0]:
            raise DataError("numerical and categorical blocks have different row counts")
        if num.shape[1] != len(self.num_names) or cat.shape[1] != len(self.cat_names):
            raise DataError("column names do not match array shapes")
        if len(self.vocab) != len(self.cat_names):
            raise DataError("one vocabulary per categorical feature is required")
        if not np.all(np.isfinite(num)):
            raise DataError("numerical features must be finite after ingestion")
        object.__setattr__(self, "num", _readonly(num))
        object.__setattr__(self, "cat", _readonly(cat))
        if self.y is not None:
            y = np.array(self.y, dtype=np.float64).ravel()
            if len(y) != num.shape[0]:
                raise DataError("target length does not match row count")
            if not np.all(np.isfinite(y)):
                raise DataError("target must be finite")
            object.__setattr__(self, "y", _readonly(y))

    @classmethod
    def from_arrays(cls, num=None, cat=None, y=None, num_names=None, cat_names=None) -> "Dataset":
        """Wrap in-memory arrays. Categorical columns may hold any hashable
        values; they are interned by first appearance."""
        n = len(y) if y is not None else len(num if num is not None else cat)
        num = np.zeros((n, 0)) if num is None else np.asarray(num, dtype=np.float64).reshape(n, -1)
        raw_cat = np.zeros((n, 0), dtype=object) if cat is None else np.asarray(cat).reshape(n, -1)
        num_names = tuple(num_names or (f"x{i}" for i in range(num.shape[1])))
        cat_names = tuple(cat_names or (f"c{i}" for i in range(raw_cat.shape[1])))
        ids = np.empty(raw_cat.shape, dtype=np.int64)
        vocab = []
        for f in range(raw_cat.shape[1]):
            col_ids, values = intern(str(v) for v in raw_cat[:, f])
            ids[:, f] = col_ids
            vocab.append(tuple(values))
        return cls(num, ids, y, num_names, cat_names, tuple(vocab), target_name="target" if y is not None else None)

    @property
    def n_rows(self) -> int:
        return self.num.shape[0]

    @property
    def n_num(self) -> int:
        return self.num.shape[1]

    @property
    def n_cat(self) -> int:
        return self.cat.shape[1]

    def n_categories(self, feature: int) -> int:
        return len(self.vocab[feature])

    def layout(self) -> DatasetLayout:
        return DatasetLayout(self.num_names, self.cat_names, self.vocab, self.dummies, self.target_name)

    def subset(self, rows) -> "Dataset":
        rows = np.asarray(rows)
        return Dataset(
            self.num[rows], self.cat[rows], None if self.y is None else self.y[rows],
            self.num_names, self.cat_names, self.vocab, self.dummies, self.target_name,
        )

    def align(self, layout: DatasetLayout) -> "Dataset":
        """Re-express this dataset's categories in ``layout``'s vocabulary."""
        if self.num_names != layout.num_names or self.cat_names != layout.cat_names:
            raise SchemaError(
                f"feature columns {self.num_names + self.cat_names} do not match "
                f"model columns {layout.feature_names}"
            )
        if self.vocab == layout.vocab:
            return self
        cat = np.empty_like(self.cat)
        for f, (mine, theirs) in enumerate(zip(self.vocab, layout.vocab)):
            index = {v: i for i, v in enumerate(theirs)}
            mapping = np.array([index.get(v, UNSEEN) for v in mine] + [UNSEEN], dtype=np.int64)
            cat[:, f] = mapping[self.cat[:, f]]  # -1 indexes the trailing UNSEEN slot
        return Dataset(self.num, cat, self.y, self.num_names, self.cat_names, layout.vocab,
                       layout.dummies, self.target_name)


def intern(values: Iterable[str], vocab: Sequence[str] | None = None) -> tuple[np.ndarray, list[str]]:
    """Map values to dense ids by first appearance. With a fixed ``vocab``,
    unknown values map to ``UNSEEN``."""
    if vocab is not None:
        index = {v: i for i, v in enumerate(vocab)}
        return np.array([index.get(v, UNSEEN) for v in values], dtype=np.int64), list(vocab)
    index: dict[str, int] = {}
    ids = [index.setdefault(v, len(index)) for v in values]
    return np.array(ids, dtype=np.int64), list(index)


def _is_missing(token: str) -> bool:
    return token.strip().lower() in MISSING_TOKENS


def load_csv(path, schema: FeatureSchema, missing_policy: str = "impute",
             layout: DatasetLayout | None = None, require_target: bool = True) -> Dataset:
    """Read a headed CSV file into a :class:`Dataset`.

    Parameters
    ----------
    missing_policy : {"impute", "error"}
        ``impute`` replaces missing categorical values by a dedicated category
        and missing numerical values by zero, appending a binary indicator
        column for every numerical feature with at least one missing value.
        ``error`` rejects any missing cell.
    layout : DatasetLayout, optional
        Encode against an existing vocabulary and indicator set (used when
        scoring new data with a trained model).
    require_target : bool
        When false, a file without the target column is accepted (``y`` is None).
    """
    if missing_policy not in ("impute", "error"):
        raise ValueError(f"unknown missing_policy {missing_policy!r}")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise DataError(f"{path}: line {lineno}: expected {len(header)} fields, got {len(row)}")
            rows.append((lineno, row))

    kinds = dict(schema.columns)
    target = schema.target
    extra = [h for h in header if h not in kinds]
    if extra:
        raise SchemaError(f"{path}: columns not in schema: {extra}")
    absent = [name for name in kinds if name not in header and (require_target or name != target)]
    if absent:
        raise SchemaError(f"{path}: schema columns missing from file: {absent}")
    col = {h: i for i, h in enumerate(header)}

    num_cols = schema.names(NUMERICAL)
    cat_cols = schema.names(CATEGORICAL)
    if layout is not None:
        base_nums = [c for c in layout.num_names if c not in {dummy_name(d) for d in layout.dummies}]
        if base_nums != num_cols or list(layout.cat_names) != cat_cols:
            raise SchemaError(f"{path}: schema does not match the model layout")

    num = np.zeros((len(rows), len(num_cols)))
    missing_mask = np.zeros((len(rows), len(num_cols)), dtype=bool)
    for j, name in enumerate(num_cols):
        c = col[name]
        for i, (lineno, row) in enumerate(rows):
            token = row[c]
            if _is_missing(token):
                if missing_policy == "error":
                    raise DataError(f"{path}: line {lineno}: missing value in {name!r}")
                missing_mask[i, j] = True
                continue
            try:
                value = float(token)
            except ValueError:
                raise DataError(f"{path}: line {lineno}: non-numeric value {token!r} in {name!r}") from None
            if not math.isfinite(value):
                raise DataError(f"{path}: line {lineno}: non-finite value {token!r} in {name!r}")
            num[i, j] = value

    if layout is not None:
        dummies = list(layout.dummies)
    else:
        dummies = [name for j, name in enumerate(num_cols) if missing_mask[:, j].any()]
    flags = [missing_mask[:, num_cols.index(d)].astype(np.float64) for d in dummies]
    num_names = tuple(num_cols) + tuple(dummy_name(d) for d in dummies)
    if flags:
        num = np.column_stack([num] + flags)

    cat = np.zeros((len(rows), len(cat_cols)), dtype=np.int64)
    vocab = []
    for j, name in enumerate(cat_cols):
        c = col[name]
        tokens = []
        for lineno, row in rows:
            token = row[c]
            if _is_missing(token):
                if missing_policy == "error":
                    raise DataError(f"{path}: line {lineno}: missing value in {name!r}")
                token = MISSING_CATEGORY
            tokens.append(token)
        ids, values = intern(tokens, None if layout is None else layout.vocab[j])
        cat[:, j] = ids
        vocab.append(tuple(values))

    y = None
    if target in col:
        y = np.empty(len(rows))
        c = col[target]
        for i, (lineno, row) in enumerate(rows):
            try:
                y[i] = float(row[c])
            except ValueError:
                raise DataError(f"{path}: line {lineno}: bad target value {row[c]!r}") from None

    return Dataset(num, cat, y, num_names, tuple(cat_cols), tuple(vocab), tuple(dummies), target)


def split(dataset: Dataset, test_fraction: float, seed) -> tuple[Dataset, Dataset]:
    """Random train/test partition; deterministic given ``seed``."""
    if not 0 < test_fraction < 1:
        raise ValueError("test_fraction must lie in (0, 1)")
    n = dataset.n_rows
    if n < 2:
        raise ValueError("need at least two rows to split")
    n_test = min(max(int(round(n * test_fraction)), 1), n - 1)
    perm = np.random.default_rng(seed).permutation(n)
    return dataset.subset(np.sort(perm[n_test:])), dataset.subset(np.sort(perm[:n_test]))


@dataclass(frozen=True, eq=False)
class Permutation:
    """A bijection of row indices.

    ``order[k]`` is the row placed at (0-based) position ``k``;
    ``position[i]`` is the position of row ``i``, so the 1-based
    permutation value is ``position[i] + 1``.
    """

    order: np.ndarray
    seed: object = None
    position: np.ndarray = field(init=False)

    def __post_init__(self):
        order = np.asarray(self.order, dtype=np.int64)
        position = np.empty_like(order)
        position[order] = np.arange(len(order))
        if not np.array_equal(np.sort(order), np.arange(len(order))):
            raise ValueError("order is not a permutation")
        object.__setattr__(self, "order", _readonly(order))
        object.__setattr__(self, "position", _readonly(position))

    def __len__(self) -> int:
        return len(self.order)

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(np.arange(n))


def _seed_sequence(seed) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(seed)


def gen_permutations(n: int, s: int, seed) -> list[Permutation]:
    """``s + 1`` independent uniform permutations of ``n`` rows."""
    if n < 1 or s < 1:
        raise ValueError("need n >= 1 and s >= 1")
    children = _seed_sequence(seed).spawn(s + 1)
    return [Permutation(np.random.default_rng(c).permutation(n), seed=c.entropy) for c in children]


def quantize(values, border_count: int = DEFAULT_BORDER_COUNT) -> np.ndarray:
    """Candidate split thresholds for a numerical column.

    Borders sit at midpoints between adjacent distinct values. When there are
    more than ``border_count + 1`` distinct values, boundaries are chosen so
    that buckets hold roughly equal numbers of rows.
    """
    if border_count < 1:
        raise ValueError("border_count must be >= 1")
    v = np.sort(np.asarray(values, dtype=np.float64).ravel())
    if len(v) == 0:
        return np.empty(0)
    uniq, counts = np.unique(v, return_counts=True)
    if len(uniq) < 2:
        return np.empty(0)
    if len(uniq) <= border_count + 1:
        cut = np.arange(len(uniq) - 1)
    else:
        # boundary b sits after distinct value b, with cum[b] rows on its left
        cum = np.cumsum(counts)[:-1]
        targets = np.arange(1, border_count + 1) * (len(v) / (border_count + 1))
        right = np.clip(np.searchsorted(cum, targets), 0, len(cum) - 1)
        left = np.clip(right - 1, 0, len(cum) - 1)
        pick_left = np.abs(cum[left] - targets) <= np.abs(cum[right] - targets)
        cut = np.unique(np.where(pick_left, left, right))
    lo, hi = uniq[cut], uniq[cut + 1]
    mid = lo + (hi - lo) / 2
    # adjacent doubles: keep the predicate x > t separating lo from hi
    return np.where((mid > lo) & (mid < hi), mid, lo)


def binarize(values, borders) -> np.ndarray:
    """Bin index = number of borders strictly below the value, so
    ``value > borders[k]`` iff ``bin > k``."""
    return np.searchsorted(borders, values, side="left").astype(np.int64)
