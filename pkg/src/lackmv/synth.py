"""Synthetic multi-view data and low-quality-view corruptions."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .mvdata import MultiViewDataset, ValidationError
from .rng import Stream

# stream ids, so that each kind of draw has its own Philox key
_CENTERS, _SAMPLES, _ORDER, _FAKE_A, _FAKE_B, _NOISE = 1, 2, 3, 4, 5, 6


@dataclass
class BlobSpec:
    """Gaussian class blobs seen through P independent views.

    In view p, class centers are ``N(0, I) * separation / sqrt(m_p)`` (so a
    center's RMS norm is ``separation`` whatever the dimension) and samples
    are ``center + N(0, spread^2 I)``.  ``separation`` and ``spread`` may be
    scalars or per-view lists.
    """

    c: int = 3
    n_per_class: int | list[int] = 100
    dims: list[int] = field(default_factory=lambda: [10, 10])
    separation: float | list[float] = 10.0
    spread: float | list[float] = 1.0
    seed: int = 0
    shuffle: bool = True

    @property
    def P(self) -> int:
        return len(self.dims)

    def counts(self) -> list[int]:
        if isinstance(self.n_per_class, int):
            return [self.n_per_class] * self.c
        return list(self.n_per_class)

    def per_view(self, value) -> list[float]:
        if np.ndim(value) == 0:
            return [float(value)] * self.P
        return [float(v) for v in value]

    def validate(self):
        if self.c < 1 or self.P < 1:
            raise ValidationError("need at least one class and one view")
        counts = self.counts()
        if len(counts) != self.c or min(counts) < 1:
            raise ValidationError(f"n_per_class must give a positive count for each of {self.c} classes")
        seps, spreads = self.per_view(self.separation), self.per_view(self.spread)
        if len(seps) != self.P or len(spreads) != self.P:
            raise ValidationError("per-view separation/spread lists must match dims")
        if min(seps) <= 0 or min(spreads) < 0:
            raise ValidationError("separation must be positive and spread nonnegative")
        if min(self.dims) < 1:
            raise ValidationError("every view needs at least one feature")


def gen_blobs(spec: BlobSpec) -> tuple[MultiViewDataset, np.ndarray]:
    spec.validate()
    truth = np.repeat(np.arange(spec.c), spec.counts())
    if spec.shuffle:
        perm = Stream(spec.seed, _ORDER).sample_without_replacement(truth.size, truth.size)
        truth = truth[perm]
    views = []
    seps, spreads = spec.per_view(spec.separation), spec.per_view(spec.spread)
    for p, m in enumerate(spec.dims):
        key = (spec.seed << 8) | p
        centers = Stream(key, _CENTERS).normal((m, spec.c)) * (seps[p] / np.sqrt(m))
        noise = Stream(key, _SAMPLES).normal((m, truth.size)) * spreads[p]
        views.append(centers[:, truth] + noise)
    return MultiViewDataset(views, [f"view{p + 1}" for p in range(spec.P)]), truth


def make_fake_view(n: int, rank: int, dim: int, seed: int = 0, target_norm: float | None = None) -> np.ndarray:
    """Low-rank ``A @ B`` with uniform [0, 1) factors, shape (dim, n).

    With ``target_norm`` the result is rescaled to that Frobenius norm.
    """
    if not 1 <= rank <= min(dim, n):
        raise ValidationError(f"rank must lie in [1, min(dim, n)] = [1, {min(dim, n)}], got {rank}")
    A = Stream(seed, _FAKE_A).uniform((dim, rank))
    B = Stream(seed, _FAKE_B).uniform((rank, n))
    X = A @ B
    if target_norm is not None:
        X *= target_norm / np.linalg.norm(X)
    return X


def add_gaussian_noise_snr(X: np.ndarray, snr: float, seed: int = 0) -> np.ndarray:
    """``X + N`` with i.i.d. Gaussian ``N`` of variance ``mean(X**2) / snr``."""
    X = np.asarray(X, dtype=np.float64)
    if not snr > 0:
        raise ValidationError(f"snr must be positive, got {snr}")
    power = float(np.mean(X * X))
    if power == 0:
        raise ValidationError("signal power of an all-zero matrix is undefined")
    sigma = np.sqrt(power / snr)
    return X + sigma * Stream(seed, _NOISE).normal(X.shape)


def append_view(ds: MultiViewDataset, X: np.ndarray, name: str | None = None) -> MultiViewDataset:
    return MultiViewDataset(ds.views + [X], list(ds.view_names) + [name or f"view{ds.P + 1}"])


def replace_view(ds: MultiViewDataset, index: int, X: np.ndarray, name: str | None = None) -> MultiViewDataset:
    if not 0 <= index < ds.P:
        raise ValidationError(f"view index {index} out of range for {ds.P} views")
    views = ds.views
    names = list(ds.view_names)
    views[index] = X
    if name is not None:
        names[index] = name
    return MultiViewDataset(views, names)
