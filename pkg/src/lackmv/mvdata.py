"""Multi-view datasets, label bookkeeping and matrix file formats.

Views are stored feature-major, ``X_p`` with shape (m_p, n), one column per
sample.  Internally each view is also kept as a C-contiguous sample-major
copy (``rows``), which is what the kernels consume.
"""
from __future__ import annotations

import hashlib
import json
import math
import struct
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Sequence

import numpy as np

from .rng import Stream

UNSET = -1
MAGIC = b"MVM1"
MATRIX_FORMATS = ("csv", "f64bin")


class ValidationError(ValueError):
    """Input data or configuration violates a documented invariant."""


class DegenerateClassError(ValidationError):
    """A class has no member where at least one is required."""


class MultiViewDataset:
    """P dense views over one shared sample axis."""

    def __init__(self, views: Sequence[np.ndarray], view_names: Sequence[str] | None = None):
        if len(views) == 0:
            raise ValidationError("a dataset needs at least one view")
        if view_names is None:
            view_names = [f"view{p + 1}" for p in range(len(views))]
        view_names = [str(v) for v in view_names]
        if len(view_names) != len(views):
            raise ValidationError(
                f"{len(views)} views but {len(view_names)} view names"
            )
        rows = []
        n = None
        first = None
        for name, view in zip(view_names, views):
            arr = np.asarray(view, dtype=np.float64)
            if arr.ndim != 2:
                raise ValidationError(f"view {name!r}: expected a 2-d matrix, got {arr.ndim}-d")
            m_p, n_p = arr.shape
            if m_p < 1 or n_p < 1:
                raise ValidationError(f"view {name!r}: empty matrix of shape {arr.shape}")
            if n is None:
                n, first = n_p, name
            elif n_p != n:
                raise ValidationError(
                    f"shape mismatch: view {first!r} has {n} columns (samples) "
                    f"but view {name!r} has {n_p}"
                )
            bad = np.argwhere(~np.isfinite(arr))
            if bad.size:
                r, col = bad[0]
                raise ValidationError(
                    f"view {name!r}: non-finite entry {arr[r, col]} at row {r}, column {col}"
                )
            r_ = np.ascontiguousarray(arr.T)
            r_.setflags(write=False)
            rows.append(r_)
        self._rows = tuple(rows)
        self.view_names = tuple(view_names)
        self.n = int(n)
        self.P = len(rows)

    @property
    def views(self) -> list[np.ndarray]:
        """Feature-major read-only views, ``views[p].shape == (m_p, n)``."""
        return [r.T for r in self._rows]

    @property
    def rows(self) -> tuple[np.ndarray, ...]:
        """Sample-major contiguous copies, ``rows[p].shape == (n, m_p)``."""
        return self._rows

    @property
    def dims(self) -> list[int]:
        return [r.shape[1] for r in self._rows]

    def subset_views(self, indices: Sequence[int]) -> "MultiViewDataset":
        return MultiViewDataset([self.views[i] for i in indices], [self.view_names[i] for i in indices])

    def __repr__(self):
        return f"MultiViewDataset(P={self.P}, n={self.n}, dims={self.dims})"


@dataclass(frozen=True)
class LabelInfo:
    """Ground truth for all samples plus the ascending ids of the revealed ones."""

    ground_truth: np.ndarray
    c: int
    labeled_ids: np.ndarray

    def __post_init__(self):
        truth = np.asarray(self.ground_truth, dtype=np.int64)
        ids = np.asarray(self.labeled_ids, dtype=np.int64)
        n = truth.shape[0]
        if truth.ndim != 1 or n == 0:
            raise ValidationError("ground truth must be a non-empty 1-d class vector")
        if self.c < 1:
            raise ValidationError(f"class count must be positive, got {self.c}")
        if truth.min() < 0 or truth.max() >= self.c:
            raise ValidationError(f"ground truth contains classes outside [0, {self.c})")
        if ids.ndim != 1 or ids.size > n:
            raise ValidationError("labeled_ids must be a 1-d list of at most n indices")
        if ids.size and (ids.min() < 0 or ids.max() >= n):
            raise ValidationError(f"labeled_ids out of range [0, {n})")
        if np.any(np.diff(ids) <= 0):
            raise ValidationError("labeled_ids must be distinct and ascending")
        missing = np.setdiff1d(np.arange(self.c), truth[ids])
        if missing.size:
            raise DegenerateClassError(
                f"classes {missing.tolist()} have no labeled sample; "
                "every class needs at least one"
            )
        truth.setflags(write=False)
        ids.setflags(write=False)
        object.__setattr__(self, "ground_truth", truth)
        object.__setattr__(self, "labeled_ids", ids)

    @property
    def n(self) -> int:
        return self.ground_truth.shape[0]

    @property
    def l(self) -> int:  # noqa: E743
        return self.labeled_ids.shape[0]

    @property
    def labeled_mask(self) -> np.ndarray:
        mask = np.zeros(self.n, dtype=bool)
        mask[self.labeled_ids] = True
        return mask

    @property
    def unlabeled_ids(self) -> np.ndarray:
        return np.flatnonzero(~self.labeled_mask)


@dataclass
class IndicatorMatrix:
    """Hard class assignments ``Q = [C, D]``.

    ``assignments`` is kept in the caller's sample order; ``order`` is the
    labeled-first permutation, so ``assignments[order]`` lists the fixed block
    C followed by D.  Unassigned samples hold :data:`UNSET`.
    """

    assignments: np.ndarray
    c: int
    labeled_ids: np.ndarray
    labeled_truth: np.ndarray = field(repr=False)

    @property
    def n(self) -> int:
        return self.assignments.shape[0]

    @property
    def labeled_prefix_len(self) -> int:
        return self.labeled_ids.shape[0]

    @property
    def order(self) -> np.ndarray:
        mask = np.zeros(self.n, dtype=bool)
        mask[self.labeled_ids] = True
        return np.concatenate([self.labeled_ids, np.flatnonzero(~mask)])

    @property
    def unlabeled_ids(self) -> np.ndarray:
        mask = np.ones(self.n, dtype=bool)
        mask[self.labeled_ids] = False
        return np.flatnonzero(mask)

    @property
    def all_set(self) -> bool:
        return bool(np.all(self.assignments >= 0))

    def onehot(self, labeled_first: bool = False) -> np.ndarray:
        """The c x n binary matrix; UNSET columns are all zero."""
        a = self.assignments[self.order] if labeled_first else self.assignments
        out = np.zeros((self.c, a.shape[0]))
        cols = np.flatnonzero(a >= 0)
        out[a[cols], cols] = 1.0
        return out

    def with_unlabeled(self, values: np.ndarray) -> "IndicatorMatrix":
        """Copy with D replaced; C is re-imposed from ground truth."""
        assign = np.array(values, dtype=np.int64, copy=True)
        assign[self.labeled_ids] = self.labeled_truth
        return IndicatorMatrix(assign, self.c, self.labeled_ids, self.labeled_truth)


@dataclass
class CentroidSet:
    """Per-view centroid matrices, ``centroids[p].shape == (m_p, c)``."""

    centroids: list[np.ndarray]

    @property
    def c(self) -> int:
        return self.centroids[0].shape[1]

    def rows(self, p: int) -> np.ndarray:
        """Class-major contiguous copy of view p's centroids, shape (c, m_p)."""
        return np.ascontiguousarray(self.centroids[p].T)


def encode_labels(tokens: Sequence) -> tuple[np.ndarray, list[str]]:
    """Map arbitrary class tokens to dense ids by first appearance."""
    mapping: dict[str, int] = {}
    ids = np.empty(len(tokens), dtype=np.int64)
    for i, tok in enumerate(tokens):
        key = str(tok).strip()
        ids[i] = mapping.setdefault(key, len(mapping))
    return ids, list(mapping)


def stratified_label_sample(truth: Sequence[int], tau: float, seed: int) -> LabelInfo:
    """Reveal ``ceil(tau * n_c)`` uniformly chosen samples from every class.

    Classes are visited in ascending order, all drawing from one stream keyed
    by ``seed``.  ``tau * n_c`` is evaluated on the decimal value of ``tau``
    so that e.g. 0.1 * 30 gives 3, not 4.
    """
    if not 0.0 < tau <= 1.0:
        raise ValidationError(f"tau must lie in (0, 1], got {tau}")
    truth = np.asarray(truth, dtype=np.int64)
    c = int(truth.max()) + 1
    stream = Stream(seed, stream=0x5EED)
    frac = Fraction(repr(float(tau)))
    chosen = []
    for k in range(c):
        members = np.flatnonzero(truth == k)
        if members.size == 0:
            raise ValidationError(f"class {k} has no samples")
        take = min(members.size, math.ceil(frac * members.size))
        chosen.append(members[stream.sample_without_replacement(members.size, take)])
    return LabelInfo(truth, c, np.sort(np.concatenate(chosen)))


def build_label_constraint(label_info: LabelInfo, n: int | None = None) -> IndicatorMatrix:
    """Q with C filled from ground truth and every unlabeled column unset."""
    if n is not None and n != label_info.n:
        raise ValidationError(f"label info covers {label_info.n} samples, dataset has {n}")
    if label_info.l == 0:
        raise DegenerateClassError("at least one labeled sample per class is required")
    assign = np.full(label_info.n, UNSET, dtype=np.int64)
    ids = label_info.labeled_ids
    truth = label_info.ground_truth[ids].copy()
    assign[ids] = truth
    return IndicatorMatrix(assign, label_info.c, ids.copy(), truth)


def concatenate_views(ds: MultiViewDataset) -> MultiViewDataset:
    """Stack all views into one, in view order."""
    stacked = np.vstack(ds.views)
    return MultiViewDataset([stacked], ["+".join(ds.view_names)])


def zscore_views(ds: MultiViewDataset) -> MultiViewDataset:
    """Standardise every feature row of every view across samples."""
    out = []
    for v in ds.views:
        mu = v.mean(axis=1, keepdims=True)
        sd = v.std(axis=1, keepdims=True)
        sd[sd == 0] = 1.0
        out.append((v - mu) / sd)
    return MultiViewDataset(out, ds.view_names)


# ---------------------------------------------------------------- file I/O


def write_matrix(path, mat: np.ndarray, fmt: str = "csv") -> None:
    mat = np.asarray(mat, dtype=np.float64)
    path = Path(path)
    if fmt == "csv":
        np.savetxt(path, mat, delimiter=",", fmt="%.17g")
    elif fmt == "f64bin":
        rows, cols = mat.shape
        with open(path, "wb") as fh:
            fh.write(MAGIC)
            fh.write(struct.pack("<QQ", rows, cols))
            fh.write(np.asfortranarray(mat).astype("<f8").tobytes(order="F"))
    else:
        raise ValidationError(f"unknown matrix format {fmt!r}; expected one of {MATRIX_FORMATS}")


def read_matrix(path, fmt: str = "csv") -> np.ndarray:
    path = Path(path)
    if fmt == "csv":
        try:
            return np.loadtxt(path, delimiter=",", ndmin=2, dtype=np.float64)
        except ValueError as exc:
            raise ValidationError(f"{path}: unparsable CSV matrix ({exc})") from exc
    if fmt == "f64bin":
        blob = path.read_bytes()
        if blob[:4] != MAGIC or len(blob) < 20:
            raise ValidationError(f"{path}: missing MVM1 header")
        rows, cols = struct.unpack("<QQ", blob[4:20])
        body = blob[20:]
        if len(body) != 8 * rows * cols:
            raise ValidationError(
                f"{path}: header says {rows}x{cols} but payload holds {len(body) // 8} values"
            )
        return np.frombuffer(body, dtype="<f8").astype(np.float64).reshape((rows, cols), order="F")
    raise ValidationError(f"unknown matrix format {fmt!r}; expected one of {MATRIX_FORMATS}")


def read_label_tokens(path) -> list[str]:
    lines = Path(path).read_text().splitlines()
    return [ln.strip() for ln in lines if ln.strip()]


def write_label_tokens(path, tokens) -> None:
    Path(path).write_text("".join(f"{t}\n" for t in tokens))


def _read_manifest(manifest_path) -> tuple[dict, Path]:
    manifest_path = Path(manifest_path)
    try:
        doc = json.loads(manifest_path.read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{manifest_path}: invalid JSON ({exc})") from exc
    if not isinstance(doc.get("views"), list) or not doc["views"]:
        raise ValidationError(f"{manifest_path}: manifest needs a non-empty 'views' list")
    return doc, manifest_path.parent


def load_dataset(manifest_path, normalize: bool = False) -> MultiViewDataset:
    """Read every view listed in a manifest and validate the result."""
    doc, base = _read_manifest(manifest_path)
    views, names = [], []
    for p, entry in enumerate(doc["views"]):
        name = entry.get("name", f"view{p + 1}")
        path = base / entry["path"]
        if not path.exists():
            raise FileNotFoundError(f"view {name!r}: matrix file {path} not found")
        try:
            views.append(read_matrix(path, entry.get("format", "csv")))
        except ValidationError as exc:
            raise ValidationError(f"view {name!r}: {exc}") from exc
        names.append(name)
    ds = MultiViewDataset(views, names)
    return zscore_views(ds) if normalize else ds


def load_ground_truth(manifest_path) -> tuple[np.ndarray, list[str]]:
    """Dense class ids and the token for each id, from the manifest's labels file."""
    doc, base = _read_manifest(manifest_path)
    if "labels" not in doc:
        raise ValidationError(f"{manifest_path}: manifest has no 'labels' entry")
    path = base / doc["labels"]["path"]
    if not path.exists():
        raise FileNotFoundError(f"labels file {path} not found")
    return encode_labels(read_label_tokens(path))


def save_dataset(
    ds: MultiViewDataset,
    directory,
    labels: Sequence | None = None,
    fmt: str = "csv",
    extra: dict | None = None,
) -> Path:
    """Write views, optional labels and a ``manifest.json``; returns the manifest path."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    ext = "csv" if fmt == "csv" else "bin"
    entries = []
    for p, (name, view) in enumerate(zip(ds.view_names, ds.views)):
        fname = f"view{p + 1}.{ext}"
        write_matrix(directory / fname, view, fmt)
        entries.append({"name": name, "path": fname, "format": fmt})
    doc: dict = {"views": entries}
    if labels is not None:
        if len(labels) != ds.n:
            raise ValidationError(f"{len(labels)} labels for {ds.n} samples")
        write_label_tokens(directory / "labels.csv", labels)
        doc["labels"] = {"path": "labels.csv", "format": "csv"}
    if extra:
        doc.update(extra)
    manifest = directory / "manifest.json"
    manifest.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return manifest


def manifest_hash(manifest_path) -> str:
    """SHA-256 over the manifest and every file it references, in listed order."""
    doc, base = _read_manifest(manifest_path)
    h = hashlib.sha256(Path(manifest_path).read_bytes())
    files = [v["path"] for v in doc["views"]]
    if "labels" in doc:
        files.append(doc["labels"]["path"])
    for rel in files:
        h.update((base / rel).read_bytes())
    return h.hexdigest()
