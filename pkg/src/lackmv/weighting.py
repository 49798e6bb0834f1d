"""View-weight strategies.

Four ways of weighting the views of a multi-view objective:

``EQUAL``
    every view gets ``1/P``.
``DATA_DRIVEN``
    ``1 / (2 ||X_p - U_p Q||_F)``, the parameter-free fitting-error weight.
``DATA_DRIVEN_GAMMA``
    simplex weights ``(g e_p)^(1/(1-g)) / sum_q (g e_q)^(1/(1-g))``.
``LABEL_DRIVEN``
    number of labeled samples that view p's own centroids put in the
    right class.

Label-driven weights are raw counts.  Only their ratios matter to the
assignment step, so :func:`normalized` is applied for reporting only.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import kernels
from .mvdata import IndicatorMatrix, ValidationError

EPSILON = 1e-9


class Strategy(str, enum.Enum):
    EQUAL = "EQUAL"
    DATA_DRIVEN = "DATA_DRIVEN"
    DATA_DRIVEN_GAMMA = "DATA_DRIVEN_GAMMA"
    LABEL_DRIVEN = "LABEL_DRIVEN"


@dataclass(frozen=True)
class WeightVector:
    d: np.ndarray
    strategy_tag: Strategy

    def __post_init__(self):
        d = np.asarray(self.d, dtype=np.float64)
        if d.ndim != 1 or d.size == 0:
            raise ValidationError("weights must be a non-empty 1-d vector")
        if np.any(d < 0) or not np.any(d > 0):
            raise ValidationError(f"weights must be nonnegative with one positive entry, got {d}")
        if self.strategy_tag is Strategy.DATA_DRIVEN_GAMMA and abs(d.sum() - 1.0) > 1e-12:
            raise ValidationError("gamma weights must sum to one")
        object.__setattr__(self, "d", d)

    @property
    def normalized(self) -> np.ndarray:
        return normalized(self.d)


@dataclass(frozen=True)
class GammaConfig:
    gamma: float

    def __post_init__(self):
        if not self.gamma > 1:
            raise ValidationError(f"gamma must exceed 1, got {self.gamma}")


def normalized(d) -> np.ndarray:
    d = np.asarray(d, dtype=np.float64)
    return d / d.sum()


def equal_weights(P: int) -> WeightVector:
    return WeightVector(np.full(P, 1.0 / P), Strategy.EQUAL)


def predict_labeled_per_view(X_labeled: np.ndarray, U: np.ndarray) -> np.ndarray:
    """Nearest-centroid class of every column of ``X_labeled`` (m_p x l).

    Only this view's centroids ``U`` (m_p x c) are consulted; ties go to the
    lower class index.
    """
    rows = np.ascontiguousarray(np.asarray(X_labeled, dtype=np.float64).T)
    cents = np.ascontiguousarray(np.asarray(U, dtype=np.float64).T)
    table = kernels.sq_dist_table(rows, cents)
    return np.argmin(table, axis=1).astype(np.int64)


def label_driven_weight(pred, truth, epsilon: float = EPSILON) -> float:
    """Agreement count between predicted and true labels, floored at ``epsilon``.

    Equal to the Frobenius inner product of the two one-hot matrices.
    """
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if pred.shape != truth.shape:
        raise ValidationError(f"prediction length {pred.shape} differs from truth {truth.shape}")
    return max(float(np.count_nonzero(pred == truth)), epsilon)


def residual_norm(X: np.ndarray, U: np.ndarray, Q: IndicatorMatrix) -> float:
    """``||X - U onehot(Q)||_F`` over the set columns of Q."""
    rows = np.ascontiguousarray(np.asarray(X, dtype=np.float64).T)
    cents = np.ascontiguousarray(np.asarray(U, dtype=np.float64).T)
    return float(np.sqrt(kernels.sq_residual(rows, cents, Q.assignments)))


def data_driven_weight(X: np.ndarray, U: np.ndarray, Q: IndicatorMatrix, epsilon: float = EPSILON) -> float:
    if not Q.all_set:
        raise ValidationError("data-driven weight needs every column of Q assigned")
    return 1.0 / (2.0 * max(residual_norm(X, U, Q), epsilon))


def data_driven_weight_gamma(errors, cfg: GammaConfig) -> WeightVector:
    e = np.asarray(errors, dtype=np.float64)
    if np.any(e <= 0):
        raise ValidationError(f"fitting errors must be positive, got {e}")
    # work in logs: (g e)^(1/(1-g)) under/overflows for large g or tiny e
    logw = np.log(cfg.gamma * e) / (1.0 - cfg.gamma)
    w = np.exp(logw - logw.max())
    return WeightVector(w / w.sum(), Strategy.DATA_DRIVEN_GAMMA)
