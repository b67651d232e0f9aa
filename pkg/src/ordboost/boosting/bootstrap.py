from __future__ import annotations

import numpy as np


def bootstrap_weights(n: int, temperature: float, seed) -> np.ndarray:
    """Bayesian bootstrap weights raised to ``temperature``.

    The base weights are ``n`` times the gaps between ``n - 1`` sorted
    uniforms on [0, 1] (a flat Dirichlet draw scaled to mean one).
    Temperature 0 gives unit weights. ``seed`` may be a Generator.
    """
    if temperature < 0:
        raise ValueError("temperature must be >= 0")
    if temperature == 0:
        return np.ones(n)
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    cuts = np.sort(rng.random(n - 1))
    gaps = np.diff(np.concatenate(([0.0], cuts, [1.0])))
    return (n * gaps) ** temperature
