"""Alternating optimisation for label-constrained multi-view K-means.

One outer iteration, for every strategy:

1. recompute each view's centroids as per-class means of the current
   assignment (on the first pass only the labeled samples are assigned);
2. update the view weights (label-driven: count of labeled samples each
   view's centroids classify correctly; data-driven: inverse fitting error;
   equal: unchanged);
3. move every unlabeled sample to the class minimising the weighted sum of
   per-view squared distances.

Labeled samples never change class.  The loop stops when an iteration moves
no unlabeled sample, or after ``max_iter`` iterations.
"""
from __future__ import annotations

import enum
import time
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .mvdata import (
    UNSET,
    CentroidSet,
    DegenerateClassError,
    IndicatorMatrix,
    LabelInfo,
    MultiViewDataset,
    ValidationError,
    build_label_constraint,
    concatenate_views,
)
from .rng import Stream
from .weighting import (
    EPSILON,
    Strategy,
    WeightVector,
    data_driven_weight,
    label_driven_weight,
    normalized,
)

METHOD_STRATEGY = {
    "MLCK": Strategy.EQUAL,
    "DACK": Strategy.DATA_DRIVEN,
    "LACK": Strategy.LABEL_DRIVEN,
}


class LabeledArgminMode(str, enum.Enum):
    PER_VIEW = "PER_VIEW"
    WEIGHTED_SUM = "WEIGHTED_SUM"


@dataclass
class SolverConfig:
    """Solver settings.

    ``weight_scale`` multiplies every view weight before the assignment
    step.  It has no effect on the result and exists to audit that claim.
    ``record_assignments`` keeps a copy of Q in every trace record.
    """

    strategy: Strategy = Strategy.LABEL_DRIVEN
    max_iter: int = 50
    stop_on_Q_fixed: bool = True
    epsilon: float = EPSILON
    labeled_argmin_mode: LabeledArgminMode = LabeledArgminMode.PER_VIEW
    seed: int = 0
    weight_scale: float = 1.0
    record_assignments: bool = False

    def __post_init__(self):
        self.strategy = Strategy(self.strategy)
        self.labeled_argmin_mode = LabeledArgminMode(self.labeled_argmin_mode)
        if self.strategy is Strategy.DATA_DRIVEN_GAMMA:
            raise ValidationError("the solver supports EQUAL, DATA_DRIVEN and LABEL_DRIVEN")
        if self.max_iter < 1:
            raise ValidationError(f"max_iter must be >= 1, got {self.max_iter}")
        if not self.weight_scale > 0:
            raise ValidationError("weight_scale must be positive")


@dataclass
class IterationRecord:
    iteration: int
    weights: np.ndarray
    objective: float
    changed: int
    wall_time: float
    # objective at the half steps, NaN on the first pass (Q not fully set):
    # before/after the centroid update at the previous weights, then before
    # the assignment update at the new weights
    objective_before_centroids: float = float("nan")
    objective_after_centroids: float = float("nan")
    objective_before_assign: float = float("nan")
    assignments: np.ndarray | None = None

    @property
    def weights_normalized(self) -> np.ndarray:
        return normalized(self.weights)


@dataclass
class SolveTrace:
    initial_weights: np.ndarray
    records: list[IterationRecord] = field(default_factory=list)
    note: str = ""

    def __len__(self):
        return len(self.records)


@dataclass
class SolveResult:
    assignments: np.ndarray
    weights_final: WeightVector
    trace: SolveTrace
    iterations_run: int
    converged: bool
    centroids: CentroidSet
    labeled_ids: np.ndarray

    @property
    def unlabeled_ids(self) -> np.ndarray:
        mask = np.ones(self.assignments.shape[0], dtype=bool)
        mask[self.labeled_ids] = False
        return np.flatnonzero(mask)


def _centroids_from(ds: MultiViewDataset, assign: np.ndarray, c: int, prev: CentroidSet | None) -> CentroidSet:
    # U_p = X_p Q^T (Q Q^T)^-1 with Q Q^T = diag(class counts): per-class means.
    # (The bare Q^T (Q Q^T)^-1 form drops X_p and does not type-check.)
    out = []
    for p, rows in enumerate(ds.rows):
        sums, counts = kernels.class_sums(rows, assign, c)
        empty = counts == 0
        if empty.any() and prev is None:
            raise DegenerateClassError(f"classes {np.flatnonzero(empty).tolist()} have no assigned sample")
        safe = np.where(empty, 1, counts)
        means = sums / safe[:, None]
        if empty.any():
            means[empty] = prev.centroids[p].T[empty]
        out.append(np.ascontiguousarray(means.T))
    return CentroidSet(out)


def init_centroids(ds: MultiViewDataset, Q: IndicatorMatrix) -> CentroidSet:
    """Class means over the assigned columns of Q; every class must be present."""
    return _centroids_from(ds, Q.assignments, Q.c, None)


def update_centroids(ds: MultiViewDataset, Q: IndicatorMatrix, prev: CentroidSet) -> CentroidSet:
    """Class means over Q; an empty class keeps its column from ``prev``."""
    return _centroids_from(ds, Q.assignments, Q.c, prev)


def _distance_tables(rows_list, U: CentroidSet) -> np.ndarray:
    return np.stack([kernels.sq_dist_table(rows, U.rows(p)) for p, rows in enumerate(rows_list)])


def assign_unlabeled(ds: MultiViewDataset, U: CentroidSet, d, Q: IndicatorMatrix) -> IndicatorMatrix:
    """Each unlabeled sample goes to ``argmin_k sum_p d_p ||x_p - u_pk||^2``."""
    d = np.asarray(getattr(d, "d", d), dtype=np.float64)
    unl = Q.unlabeled_ids
    return _assign(Q, _distance_tables([r[unl] for r in ds.rows], U), d, unl)


def _assign(Q: IndicatorMatrix, tables: np.ndarray, d: np.ndarray, unl: np.ndarray) -> IndicatorMatrix:
    new = Q.assignments.copy()
    if unl.size:
        new[unl] = kernels.weighted_argmin(tables, d)
    return Q.with_unlabeled(new)


def objective(ds: MultiViewDataset, Q: IndicatorMatrix, U: CentroidSet, d) -> float:
    """``sum_p d_p ||X_p - U_p Q||_F^2``."""
    if not Q.all_set:
        raise ValidationError("objective needs every column of Q assigned")
    d = np.asarray(getattr(d, "d", d), dtype=np.float64)
    return float(sum(d[p] * kernels.sq_residual(rows, U.rows(p), Q.assignments) for p, rows in enumerate(ds.rows)))


def _objective_unchecked(ds, assign, U, d) -> float:
    return float(sum(d[p] * kernels.sq_residual(rows, U.rows(p), assign) for p, rows in enumerate(ds.rows)))


def solve(ds: MultiViewDataset, labels: LabelInfo, cfg: SolverConfig | None = None) -> SolveResult:
    cfg = cfg or SolverConfig()
    if labels.n != ds.n:
        raise ValidationError(f"labels cover {labels.n} samples but the dataset has {ds.n}")
    Q = build_label_constraint(labels, ds.n)
    P = ds.P
    lab, unl = Q.labeled_ids, Q.unlabeled_ids
    lab_truth = Q.labeled_truth
    lab_rows = [r[lab] for r in ds.rows]
    unl_rows = [r[unl] for r in ds.rows]

    d = np.full(P, 1.0 / P)
    trace = SolveTrace(initial_weights=d.copy())
    if cfg.strategy is Strategy.DATA_DRIVEN:
        trace.note = "objective uses the data-driven weights of the same iteration"

    U: CentroidSet | None = None
    converged = False
    for t in range(1, cfg.max_iter + 1):
        t0 = time.perf_counter()
        first = not Q.all_set
        d_prev = d * cfg.weight_scale
        obj_bc = obj_ac = obj_ba = float("nan")
        if not first:
            obj_bc = _objective_unchecked(ds, Q.assignments, U, d_prev)

        U = init_centroids(ds, Q) if U is None else update_centroids(ds, Q, U)
        if not first:
            obj_ac = _objective_unchecked(ds, Q.assignments, U, d_prev)

        d = d.copy()
        if cfg.strategy is Strategy.LABEL_DRIVEN:
            if cfg.labeled_argmin_mode is LabeledArgminMode.PER_VIEW:
                for p in range(P):
                    table = kernels.sq_dist_table(lab_rows[p], U.rows(p))
                    pred = np.argmin(table, axis=1)
                    d[p] = label_driven_weight(pred, lab_truth, cfg.epsilon)
            else:
                tables = _distance_tables(lab_rows, U)
                for p in range(P):
                    pred = kernels.weighted_argmin(tables, d)
                    d[p] = label_driven_weight(pred, lab_truth, cfg.epsilon)
        elif cfg.strategy is Strategy.DATA_DRIVEN and not first:
            for p in range(P):
                d[p] = data_driven_weight(ds.views[p], U.centroids[p], Q, cfg.epsilon)

        d_used = d * cfg.weight_scale
        if not first:
            obj_ba = _objective_unchecked(ds, Q.assignments, U, d_used)
        newQ = _assign(Q, _distance_tables(unl_rows, U), d_used, unl)
        changed = int(np.count_nonzero(newQ.assignments != Q.assignments))
        Q = newQ
        trace.records.append(
            IterationRecord(
                iteration=t,
                weights=d.copy(),
                objective=_objective_unchecked(ds, Q.assignments, U, d_used),
                changed=changed,
                wall_time=time.perf_counter() - t0,
                objective_before_centroids=obj_bc,
                objective_after_centroids=obj_ac,
                objective_before_assign=obj_ba,
                assignments=Q.assignments.copy() if cfg.record_assignments else None,
            )
        )
        if changed == 0:
            converged = True
            if cfg.stop_on_Q_fixed:
                break

    return SolveResult(
        assignments=Q.assignments.copy(),
        weights_final=WeightVector(d, cfg.strategy),
        trace=trace,
        iterations_run=len(trace.records),
        converged=converged,
        centroids=U,
        labeled_ids=lab.copy(),
    )


def solve_constrained_kmeans(ds: MultiViewDataset, labels: LabelInfo, max_iter: int = 50) -> SolveResult:
    """Single-view constrained K-means on the concatenation of all views."""
    return solve(concatenate_views(ds), labels, SolverConfig(strategy=Strategy.EQUAL, max_iter=max_iter))


def _lloyd(rows: np.ndarray, c: int, start: np.ndarray, max_iter: int) -> tuple[np.ndarray, float]:
    cents = rows[start].copy()
    assign = np.full(rows.shape[0], UNSET, dtype=np.int64)
    for _ in range(max_iter):
        new = np.argmin(kernels.sq_dist_table(rows, cents), axis=1).astype(np.int64)
        if np.array_equal(new, assign):
            break
        assign = new
        sums, counts = kernels.class_sums(rows, assign, c)
        filled = counts > 0
        cents[filled] = sums[filled] / counts[filled, None]
    return assign, kernels.sq_residual(rows, cents, assign)


def solve_kmeans_single_view(X: np.ndarray, c: int, seed: int = 0, max_iter: int = 100, n_init: int = 1) -> np.ndarray:
    """Plain Lloyd iterations from ``c`` distinct random samples as initial centroids.

    With ``n_init > 1`` the run with the lowest within-cluster sum of squares
    is kept (first one on ties).
    """
    rows = np.ascontiguousarray(np.asarray(X, dtype=np.float64).T)
    n = rows.shape[0]
    if not 1 <= c <= n:
        raise ValidationError(f"need 1 <= c <= n, got c={c}, n={n}")
    if n_init < 1:
        raise ValidationError("n_init must be >= 1")
    stream = Stream(seed, stream=0xC1A55)
    best, best_cost = None, np.inf
    for _ in range(n_init):
        assign, cost = _lloyd(rows, c, stream.sample_without_replacement(n, c), max_iter)
        if cost < best_cost:
            best, best_cost = assign, cost
    return best
