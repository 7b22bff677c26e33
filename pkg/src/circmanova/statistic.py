"""Likelihood ratio statistic for equal mean vectors under a circular covariance.

Index conventions: the math is written 1-based (``j = 1..p``); storage is
0-based, so math index ``j`` lives at array position ``j - 1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (
    DataError,
    DegenerateScatterError,
    InsufficientSampleError,
    InvalidDimensionError,
)

__all__ = [
    "GroupedSample",
    "LrtResult",
    "build_u_matrix",
    "within_scatter",
    "between_scatter",
    "lrt_statistic",
    "pair_average",
    "lrt_w_from_projected",
]


@dataclass(frozen=True)
class GroupedSample:
    """``q`` groups of observations, group ``k`` stored as an ``n_k x p`` array."""

    groups: tuple[np.ndarray, ...]
    p: int = field(init=False)
    n: int = field(init=False)

    def __init__(self, groups: Sequence[np.ndarray]):
        arrays = []
        for g in groups:
            a = np.asarray(g, dtype=float)
            if a.ndim == 1:
                a = a.reshape(-1, 1)
            if a.ndim != 2:
                raise DataError("each group must be a 2-d array (rows = observations)")
            arrays.append(a)
        if len(arrays) < 2:
            raise DataError(f"need at least 2 groups, got {len(arrays)}")
        dims = {a.shape[1] for a in arrays}
        if len(dims) != 1:
            raise DataError(f"groups disagree on dimension: {sorted(dims)}")
        p = dims.pop()
        if p < 1:
            raise InvalidDimensionError("dimension p must be >= 1")
        if any(a.shape[0] < 1 for a in arrays):
            raise DataError("every group needs at least one observation")
        if not all(np.all(np.isfinite(a)) for a in arrays):
            raise DataError("observations must be finite")
        n = sum(a.shape[0] for a in arrays)
        if n <= len(arrays):
            raise InsufficientSampleError(f"need n > q, got n={n}, q={len(arrays)}")
        object.__setattr__(self, "groups", tuple(arrays))
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "n", n)

    @property
    def q(self) -> int:
        return len(self.groups)

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(g.shape[0] for g in self.groups)

    def stacked(self) -> np.ndarray:
        return np.vstack(self.groups)


@dataclass(frozen=True)
class LrtResult:
    lam: float
    w: float
    vstar: np.ndarray
    vdstar: np.ndarray
    a_diag: np.ndarray
    c_diag: np.ndarray


def build_u_matrix(p: int) -> np.ndarray:
    """Orthogonal ``p x p`` matrix with entries (cos + sin)(2 pi (i-1)(j-1)/p) / sqrt(p)."""
    if int(p) != p or p < 1:
        raise InvalidDimensionError(f"p must be a positive integer, got {p!r}")
    p = int(p)
    k = np.arange(p)
    # reduce the product mod p first so large p keeps full angular accuracy
    ang = 2.0 * np.pi * (np.outer(k, k) % p) / p
    return (np.cos(ang) + np.sin(ang)) / np.sqrt(p)


def _symmetrize(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.T)


def within_scatter(s: GroupedSample) -> np.ndarray:
    """A = sum_k (n_k - 1) S_k; groups of size one contribute nothing."""
    a = np.zeros((s.p, s.p))
    for g in s.groups:
        c = g - g.mean(axis=0)
        a += c.T @ c
    return _symmetrize(a)


def between_scatter(s: GroupedSample) -> np.ndarray:
    """B = sum_k n_k (mean_k - mean)(mean_k - mean)^T."""
    means = np.array([g.mean(axis=0) for g in s.groups])
    sizes = np.array(s.sizes, dtype=float)
    grand = sizes @ means / s.n
    d = means - grand
    return _symmetrize((d * sizes[:, None]).T @ d)


def pair_average(diag: np.ndarray) -> np.ndarray:
    """Average diagonal entries j and p-j+2 (1-based); singletons stay as they are.

    Entry j=1 and, for even p, entry j=p/2+1 are their own partners.
    """
    diag = np.asarray(diag, dtype=float)
    p = diag.shape[-1]
    partner = (-np.arange(p)) % p  # 0-based image of j -> p-j+2
    return 0.5 * (diag + diag[..., partner])


def lrt_w_from_projected(a_diag: np.ndarray, c_diag: np.ndarray) -> np.ndarray:
    """W = -log Lambda from diagonals of U A U^T and U (A+B) U^T (batched on leading axes)."""
    vstar = pair_average(a_diag)
    vdstar = pair_average(c_diag)
    if np.any(vstar <= 0) or np.any(vdstar <= 0):
        raise DegenerateScatterError(
            "projected scatter has a nonpositive diagonal entry (rank-deficient data)"
        )
    return np.sum(np.log(vdstar) - np.log(vstar), axis=-1)


def lrt_statistic(s: GroupedSample) -> LrtResult:
    """Lambda = prod_j v*_j / v**_j and W = -log Lambda for a grouped sample."""
    if s.n <= s.q:
        raise InsufficientSampleError(f"need n > q, got n={s.n}, q={s.q}")
    u = build_u_matrix(s.p)
    a = within_scatter(s)
    c = a + between_scatter(s)
    a_diag = np.diag(u @ a @ u.T).copy()
    c_diag = np.diag(u @ c @ u.T).copy()
    vstar = pair_average(a_diag)
    vdstar = pair_average(c_diag)
    if np.any(vstar <= 0) or np.any(vdstar <= 0):
        raise DegenerateScatterError(
            "projected scatter has a nonpositive diagonal entry (rank-deficient data)"
        )
    # B is PSD so the ratio cannot exceed one; clip pure round-off
    ratio = np.minimum(vstar / vdstar, 1.0)
    w = float(-np.sum(np.log(ratio)))
    return LrtResult(
        lam=float(np.exp(-w)),
        w=w,
        vstar=vstar,
        vdstar=vdstar,
        a_diag=a_diag,
        c_diag=c_diag,
    )
