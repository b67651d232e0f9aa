from __future__ import annotations

import numpy as np
from scipy.special import expit

from .params import LOGLOSS, MSE


def calc_gradient(loss: str, predictions, y) -> np.ndarray:
    """Derivative of the loss in the prediction, ``dL(y, s)/ds``.

    MSE drops the factor 2 (absorbed by the step size), so the negative
    gradient is the plain residual ``y - s``.
    """
    s = np.asarray(predictions, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if s.shape != y.shape:
        raise ValueError("predictions and targets differ in shape")
    if not np.all(np.isfinite(s)):
        raise ValueError("non-finite prediction")
    if loss == MSE:
        return s - y
    if loss == LOGLOSS:
        return expit(s) - y
    raise ValueError(f"unknown loss {loss!r}")


def loss_value(loss: str, predictions, y) -> float:
    s = np.asarray(predictions, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if loss == MSE:
        return float(np.mean((y - s) ** 2))
    if loss == LOGLOSS:
        # log(1 + e^s) - y s, computed stably
        return float(np.mean(np.logaddexp(0.0, s) - y * s))
    raise ValueError(f"unknown loss {loss!r}")
