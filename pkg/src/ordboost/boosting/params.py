from __future__ import annotations

from dataclasses import asdict, dataclass, fields

from ..dataset import DEFAULT_BORDER_COUNT
from ..target_stats import ORDERED, TS_MODES
from ..tree import DEFAULT_DEPTH

PLAIN = "plain"
ORDERED_MODE = "ordered"
MODES = (PLAIN, ORDERED_MODE)

LOGLOSS = "logloss"
MSE = "mse"
LOSSES = (LOGLOSS, MSE)


@dataclass(frozen=True)
class BoostParams:
    """Training parameters.

    ``permutations`` is the number ``s`` of permutations used to choose tree
    structures (one more is drawn for leaf values). ``discard_fraction`` of
    the earliest rows of the sampled permutation (at least one row when
    positive) are left out of the split score. ``couple_permutations``
    computes ordered TS on the same permutation as the supporting models;
    turning it off draws independent permutations for TS.
    """

    mode: str = ORDERED_MODE
    iterations: int = 100
    learning_rate: float = 0.1
    permutations: int = 4
    loss: str = LOGLOSS
    depth: int = DEFAULT_DEPTH
    border_count: int = DEFAULT_BORDER_COUNT
    bootstrap_temperature: float = 1.0
    discard_fraction: float = 0.02
    max_combination: int = 2
    couple_permutations: bool = True
    ts_mode: str = ORDERED
    prior_weight: float = 1.0
    prior: float | None = None
    seed: int = 0

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.loss not in LOSSES:
            raise ValueError(f"loss must be one of {LOSSES}")
        if self.ts_mode not in TS_MODES:
            raise ValueError(f"ts_mode must be one of {TS_MODES}")
        if self.iterations < 0:
            raise ValueError("iterations must be >= 0")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be > 0")
        if self.permutations < 1:
            raise ValueError("permutations must be >= 1")
        if self.depth < 0:
            raise ValueError("depth must be >= 0")
        if self.border_count < 1:
            raise ValueError("border_count must be >= 1")
        if self.bootstrap_temperature < 0:
            raise ValueError("bootstrap_temperature must be >= 0")
        if not 0 <= self.discard_fraction < 1:
            raise ValueError("discard_fraction must lie in [0, 1)")
        if self.max_combination < 1:
            raise ValueError("max_combination must be >= 1")
        if self.prior_weight < 0:
            raise ValueError("prior_weight must be >= 0")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "BoostParams":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown parameters: {sorted(unknown)}")
        return cls(**d)

    def replace(self, **changes) -> "BoostParams":
        return self.from_dict({**self.to_dict(), **changes})
