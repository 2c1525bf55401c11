"""Evaluation metrics: binary AUC, multi-class log loss, RMSE.

All three are pure functions over numpy arrays.  AUC is computed as the
Mann-Whitney rank statistic with midranks, which equals the pair-counting
definition (ties get half credit) and is exact under any strictly
increasing transform of the scores.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    LengthMismatch,
    SingleClass,
    UnknownClass,
    ZeroDuration,
)

LOGLOSS_EPS = 1e-15

# metric id -> whether larger values are better
HIGHER_IS_BETTER = {"auc": True, "logloss": False, "rmse": False}

METRICS = tuple(HIGHER_IS_BETTER)


@dataclass(frozen=True)
class Score:
    metric: str
    value: float

    @property
    def higher_is_better(self) -> bool:
        return HIGHER_IS_BETTER[self.metric]


def _midranks(x: np.ndarray) -> np.ndarray:
    """Ranks 1..n with tied values sharing the average of their ranks."""
    order = np.argsort(x, kind="mergesort")
    ranks = np.empty(len(x), dtype=float)
    sx = x[order]
    i = 0
    while i < len(sx):
        j = i
        while j + 1 < len(sx) and sx[j + 1] == sx[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def auc_binary(scores, truth) -> float:
    """Area under the ROC curve for binary labels coded 0/1.

    Equals (#correctly ordered (pos, neg) pairs + 0.5 * ties) / (n_pos * n_neg).
    Raises SingleClass when only one label is present.
    """
    scores = np.asarray(scores, dtype=float)
    truth = np.asarray(truth)
    if scores.shape != truth.shape:
        raise LengthMismatch(f"scores {scores.shape} vs truth {truth.shape}")
    pos = truth == 1
    n_pos = int(pos.sum())
    n_neg = len(truth) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise SingleClass("AUC needs both classes present in the truth")
    ranks = _midranks(scores)
    rank_sum_pos = ranks[pos].sum()
    return float((rank_sum_pos - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def log_loss(probabilities, truth, class_list) -> float:
    """Mean negative log of the probability assigned to the true class.

    `probabilities` is an (n_rows, n_classes) array aligned with
    `class_list`; probabilities are clipped to [1e-15, 1 - 1e-15] before
    taking the log.
    """
    probabilities = np.asarray(probabilities, dtype=float)
    truth = np.asarray(truth)
    if probabilities.ndim != 2 or probabilities.shape[0] != len(truth):
        raise LengthMismatch(
            f"probabilities {probabilities.shape} vs {len(truth)} truth rows"
        )
    index = {c: i for i, c in enumerate(class_list)}
    try:
        cols = np.array([index[t] for t in truth])
    except KeyError as exc:
        raise UnknownClass(f"truth label {exc} not in class list") from exc
    p_true = probabilities[np.arange(len(truth)), cols]
    p_true = np.clip(p_true, LOGLOSS_EPS, 1.0 - LOGLOSS_EPS)
    return float(np.mean(-np.log(p_true)))


def rmse(predictions, truth) -> float:
    """Root mean squared error."""
    predictions = np.asarray(predictions, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if predictions.shape != truth.shape or len(predictions) == 0:
        raise LengthMismatch(
            f"predictions {predictions.shape} vs truth {truth.shape}"
        )
    return float(np.sqrt(np.mean((predictions - truth) ** 2)))


def inference_rows_per_second(measurement) -> float:
    """Normalize an inference measurement to rows per second."""
    if measurement.median_s <= 0:
        raise ZeroDuration("median duration must be positive")
    return measurement.rows / measurement.median_s
