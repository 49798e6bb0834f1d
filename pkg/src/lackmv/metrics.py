"""Classification scores on the unlabeled portion.

``accuracy`` compares class ids directly: the constrained solvers anchor
every centroid to a true class, so no label matching is needed.  For the
unsupervised K-means baseline use :func:`matched_accuracy`, which first
aligns predicted clusters to classes with the Hungarian algorithm.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .mvdata import ValidationError


@dataclass
class EvalReport:
    acc: float
    f_score: float
    precision: float
    recall: float
    n_eval: int
    macro_f_score: float = float("nan")
    macro_precision: float = float("nan")
    macro_recall: float = float("nan")

    def as_percent(self) -> dict:
        out = asdict(self)
        for key, val in out.items():
            if key != "n_eval":
                out[key] = round(100.0 * val, 2)
        return out


def _check(pred, truth, min_len=1):
    pred = np.asarray(pred, dtype=np.int64)
    truth = np.asarray(truth, dtype=np.int64)
    if pred.shape != truth.shape or pred.ndim != 1:
        raise ValidationError(f"prediction shape {pred.shape} differs from truth shape {truth.shape}")
    if pred.size < min_len:
        raise ValidationError(f"need at least {min_len} samples, got {pred.size}")
    return pred, truth


def accuracy(pred, truth) -> float:
    pred, truth = _check(pred, truth)
    return float(np.count_nonzero(pred == truth)) / pred.size


def _contingency(pred, truth) -> np.ndarray:
    _, p_idx = np.unique(pred, return_inverse=True)
    _, t_idx = np.unique(truth, return_inverse=True)
    table = np.zeros((p_idx.max() + 1, t_idx.max() + 1), dtype=np.int64)
    np.add.at(table, (p_idx, t_idx), 1)
    return table


def _pairs(x):
    x = np.asarray(x, dtype=np.int64)
    return int(np.sum(x * (x - 1) // 2))


def f_measure(precision: float, recall: float) -> float:
    denom = precision + recall
    return 2.0 * precision * recall / denom if denom > 0 else 0.0


def pairwise_prf(pred, truth) -> tuple[float, float, float]:
    """Pair-counting precision, recall and F over all unordered sample pairs.

    An empty denominator counts as a perfect score (no pair to get wrong).
    """
    pred, truth = _check(pred, truth, min_len=2)
    table = _contingency(pred, truth)
    tp = _pairs(table)
    together_pred = _pairs(table.sum(axis=1))
    together_truth = _pairs(table.sum(axis=0))
    precision = tp / together_pred if together_pred else 1.0
    recall = tp / together_truth if together_truth else 1.0
    return precision, recall, f_measure(precision, recall)


def macro_prf(pred, truth) -> tuple[float, float, float]:
    """Per-class precision, recall and F1, averaged over the union of classes seen."""
    pred, truth = _check(pred, truth)
    classes = np.union1d(pred, truth)
    ps, rs, fs = [], [], []
    for k in classes:
        hit = np.count_nonzero((pred == k) & (truth == k))
        n_pred = np.count_nonzero(pred == k)
        n_true = np.count_nonzero(truth == k)
        p = hit / n_pred if n_pred else 0.0
        r = hit / n_true if n_true else 0.0
        ps.append(p)
        rs.append(r)
        fs.append(f_measure(p, r))
    return float(np.mean(ps)), float(np.mean(rs)), float(np.mean(fs))


def hungarian_relabel(pred, truth) -> np.ndarray:
    """Rename predicted clusters so that agreement with ``truth`` is maximal."""
    pred, truth = _check(pred, truth)
    p_vals, p_idx = np.unique(pred, return_inverse=True)
    t_vals, t_idx = np.unique(truth, return_inverse=True)
    size = max(p_vals.size, t_vals.size)
    table = np.zeros((size, size), dtype=np.int64)
    np.add.at(table, (p_idx, t_idx), 1)
    rows, cols = linear_sum_assignment(-table)
    target = np.empty(size, dtype=np.int64)
    # clusters matched to a padding column get ids no true class uses
    spare = iter(range(int(truth.max()) + 1, int(truth.max()) + 1 + size))
    for r, col in zip(rows, cols):
        target[r] = t_vals[col] if col < t_vals.size else next(spare)
    return target[p_idx]


def matched_accuracy(pred, truth) -> float:
    return accuracy(hungarian_relabel(pred, truth), truth)


def evaluate(pred, truth, align: bool = False) -> EvalReport:
    """All scores for one prediction; ``align`` applies Hungarian matching first."""
    pred, truth = _check(pred, truth)
    if align:
        pred = hungarian_relabel(pred, truth)
    if pred.size >= 2:
        precision, recall, f = pairwise_prf(pred, truth)
    else:
        precision = recall = f = float(pred[0] == truth[0])
    mp, mr, mf = macro_prf(pred, truth)
    return EvalReport(
        acc=accuracy(pred, truth),
        f_score=f,
        precision=precision,
        recall=recall,
        n_eval=int(pred.size),
        macro_f_score=mf,
        macro_precision=mp,
        macro_recall=mr,
    )
