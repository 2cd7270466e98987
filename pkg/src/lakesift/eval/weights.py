"""Fitting the five evidence weights with logistic regression."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from sklearn.linear_model import LogisticRegression
from sklearn.model_selection import train_test_split

from ..relatedness import EvidenceWeights

logger = logging.getLogger(__name__)

MIN_PAIRS = 20
MIN_WEIGHT = 1e-6


class FitError(ValueError):
    pass


@dataclass(frozen=True)
class LabeledPair:
    dv: tuple[float, float, float, float, float]
    label: int
    target: str = ""
    candidate: str = ""

    def __post_init__(self) -> None:
        if len(self.dv) != 5 or any(not 0.0 <= x <= 1.0 for x in self.dv):
            raise FitError(f"dv must hold five values in [0, 1], got {self.dv}")
        if self.label not in (0, 1):
            raise FitError("label must be 0 or 1")


@dataclass(frozen=True)
class FitResult:
    weights: EvidenceWeights
    coefficients: tuple[float, ...]
    intercept: float
    accuracy: float
    n_train: int
    n_test: int


def fit_weights(pairs: Sequence[LabeledPair], seed: int = 42, test_size: float = 0.25
                ) -> FitResult:
    """Logistic regression on the five aggregate distances.

    The weights are the coefficient magnitudes, floored at 1e-6 so the
    combined distance stays a norm. Accuracy is measured on a stratified
    held-out share of the pairs.
    """
    if len(pairs) < MIN_PAIRS:
        raise FitError(f"need at least {MIN_PAIRS} labeled pairs, got {len(pairs)}")
    X = np.array([p.dv for p in pairs], dtype=np.float64)
    y = np.array([p.label for p in pairs], dtype=np.int64)
    if len(np.unique(y)) < 2:
        raise FitError("training pairs carry a single label")
    X_tr, X_te, y_tr, y_te = train_test_split(
        X, y, test_size=test_size, random_state=seed, stratify=y)
    # liblinear is a coordinate-descent solver; fixed settings keep fits repeatable.
    model = LogisticRegression(solver="liblinear", C=1.0, random_state=seed, max_iter=1000)
    model.fit(X_tr, y_tr)
    coef = model.coef_[0]
    accuracy = float(model.score(X_te, y_te))
    w = tuple(max(abs(float(c)), MIN_WEIGHT) for c in coef)
    logger.info("fitted weights %s, held-out accuracy %.3f", w, accuracy)
    return FitResult(EvidenceWeights(w), tuple(float(c) for c in coef),
                     float(model.intercept_[0]), accuracy, len(y_tr), len(y_te))
