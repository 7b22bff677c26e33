"""Covariance builders and multivariate generators for the simulation study."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConfigurationError, DataError

__all__ = [
    "Circular",
    "CompoundSymmetric",
    "Spherical",
    "Diagonal",
    "FullPD",
    "Toeplitz",
    "build_covariance",
    "circular_from_correlations",
    "DistributionSpec",
    "PreparedSampler",
    "sample",
    "apply_shift",
]


# --- covariance structures ---------------------------------------------------


@dataclass(frozen=True)
class Circular:
    """sigma[i, j] = sigmas[cyclic distance between i and j]; needs floor(p/2)+1 values."""

    sigmas: tuple[float, ...]


@dataclass(frozen=True)
class CompoundSymmetric:
    variance: float
    rho: float


@dataclass(frozen=True)
class Spherical:
    variance: float


@dataclass(frozen=True)
class Diagonal:
    variances: tuple[float, ...]


@dataclass(frozen=True)
class FullPD:
    matrix: np.ndarray


@dataclass(frozen=True)
class Toeplitz:
    """AR(1)-type rho**|i-j| matrix: positive definite but not circular."""

    variance: float
    rho: float


def _mod_star(a: int, b: int) -> int:
    # mod(a, b), except that multiples of b map to b (1-based cyclic index)
    r = a % b
    return b if r == 0 else r


def _circular_matrix(sigmas: Sequence[float], p: int) -> np.ndarray:
    m = p // 2
    if len(sigmas) != m + 1:
        raise DataError(f"circular covariance for p={p} needs {m + 1} values, got {len(sigmas)}")
    out = np.empty((p, p))
    for i in range(1, p + 1):
        for ell in range(m + 1):
            out[i - 1, _mod_star(i + ell, p) - 1] = sigmas[ell]
            out[i - 1, _mod_star(i + p - ell, p) - 1] = sigmas[ell]
    return out


def _check_pd(mat: np.ndarray) -> np.ndarray:
    if not np.allclose(mat, mat.T, rtol=0, atol=1e-12 * max(1.0, np.abs(mat).max())):
        raise DataError("covariance matrix is not symmetric")
    eig = np.linalg.eigvalsh(mat)
    if eig[0] <= 1e-10 * max(eig[-1], 0.0) or eig[0] <= 0:
        raise DataError(f"covariance matrix is not positive definite (min eigenvalue {eig[0]:.3e})")
    return mat


def build_covariance(spec, p: int) -> np.ndarray:
    """Realize a covariance structure as a p x p symmetric positive-definite matrix."""
    if int(p) != p or p < 1:
        raise DataError(f"p must be a positive integer, got {p!r}")
    if isinstance(spec, Circular):
        mat = _circular_matrix(spec.sigmas, p)
    elif isinstance(spec, CompoundSymmetric):
        if p > 1 and not -1.0 / (p - 1) < spec.rho < 1.0:
            raise DataError(f"rho={spec.rho} outside (-1/(p-1), 1)")
        mat = spec.variance * ((1 - spec.rho) * np.eye(p) + spec.rho * np.ones((p, p)))
    elif isinstance(spec, Spherical):
        mat = spec.variance * np.eye(p)
    elif isinstance(spec, Diagonal):
        if len(spec.variances) != p:
            raise DataError(f"diagonal covariance needs {p} variances, got {len(spec.variances)}")
        mat = np.diag(np.asarray(spec.variances, dtype=float))
    elif isinstance(spec, FullPD):
        mat = np.asarray(spec.matrix, dtype=float)
        if mat.shape != (p, p):
            raise DataError(f"full covariance has shape {mat.shape}, expected {(p, p)}")
    elif isinstance(spec, Toeplitz):
        idx = np.arange(p)
        mat = spec.variance * spec.rho ** np.abs(idx[:, None] - idx[None, :])
    else:
        raise DataError(f"unknown covariance spec {spec!r}")
    return _check_pd(mat)


def circular_from_correlations(p: int, lo: float, hi: float) -> Circular:
    """Unit-variance circular structure whose correlations fall linearly from ``hi`` to ``lo``.

    Lag 1 gets ``hi`` and lag floor(p/2) gets ``lo``.
    """
    m = p // 2
    if m == 0:
        return Circular((1.0,))
    lags = np.linspace(hi, lo, m) if m > 1 else np.array([hi])
    return Circular(tuple([1.0, *map(float, lags)]))


# --- distributions -------------------------------------------------------------

_FAMILIES = ("normal", "t", "cauchy", "skewnormal", "skewt", "skewcauchy")


@dataclass(frozen=True)
class DistributionSpec:
    """Family, location and scale of a p-variate generator.

    ``nu`` is used by t/skewt; ``slant`` is the shape vector alpha of the
    skew families (a scalar is broadcast to all coordinates).  cauchy and
    skewcauchy are t and skewt with nu = 1.
    """

    family: str
    scale: object
    location: float | tuple[float, ...] = 0.0
    nu: float | None = None
    slant: float | tuple[float, ...] = 0.0

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise DataError(f"unknown family {self.family!r}; choose from {_FAMILIES}")
        if self.family in ("t", "skewt"):
            if self.nu is None or not self.nu > 0:
                raise DataError(f"{self.family} needs nu > 0, got {self.nu}")

    @property
    def degrees_of_freedom(self) -> float | None:
        if self.family in ("cauchy", "skewcauchy"):
            return 1.0
        if self.family in ("t", "skewt"):
            return float(self.nu)
        return None

    @property
    def skewed(self) -> bool:
        return self.family.startswith("skew")


def _vector(value, p: int, name: str) -> np.ndarray:
    arr = np.broadcast_to(np.asarray(value, dtype=float), (p,)) if np.ndim(value) == 0 else np.asarray(value, dtype=float)
    if arr.shape != (p,):
        raise DataError(f"{name} must have length {p}, got {arr.shape}")
    return np.array(arr)


class PreparedSampler:
    """Scale factorization for one (DistributionSpec, p), reusable across draws.

    Normal rows are L z with L the Cholesky factor of the scale matrix.  The t
    families divide by sqrt(chi2_nu / nu).  The skew families use the
    additive representation Z = delta |U0| + U1 with U1 ~ N(0, Rbar - delta delta')
    on the correlation scale, delta = Rbar alpha / sqrt(1 + alpha' Rbar alpha),
    then rescale by the standard deviations.
    """

    def __init__(self, dist: DistributionSpec, p: int):
        cov = build_covariance(dist.scale, p)
        self.p = p
        self.loc = _vector(dist.location, p, "location")
        self.nu = dist.degrees_of_freedom
        self.delta = None
        if dist.skewed:
            self.omega = np.sqrt(np.diag(cov))
            rbar = cov / np.outer(self.omega, self.omega)
            alpha = _vector(dist.slant, p, "slant")
            ra = rbar @ alpha
            self.delta = ra / np.sqrt(1.0 + alpha @ ra)
            self.factor = np.linalg.cholesky(rbar - np.outer(self.delta, self.delta))
        else:
            self.factor = np.linalg.cholesky(cov)

    def draw(self, rng: np.random.Generator, n_rows: int) -> np.ndarray:
        if n_rows < 1:
            raise DataError("n_rows must be >= 1")
        if self.delta is not None:
            u0 = np.abs(rng.standard_normal(n_rows))
            u1 = rng.standard_normal((n_rows, self.p)) @ self.factor.T
            z = (u0[:, None] * self.delta + u1) * self.omega
        else:
            z = rng.standard_normal((n_rows, self.p)) @ self.factor.T
        if self.nu is not None:
            z = z / np.sqrt(rng.chisquare(self.nu, size=n_rows) / self.nu)[:, None]
        return z + self.loc


def sample(dist: DistributionSpec, n_rows: int, p: int, seed) -> np.ndarray:
    """Draw ``n_rows`` i.i.d. p-variate rows; deterministic for a given seed."""
    return PreparedSampler(dist, p).draw(np.random.default_rng(seed), n_rows)


def apply_shift(groups: Sequence[np.ndarray], shift: Sequence[float]) -> list[np.ndarray]:
    """Add a block mean-shift to every group except the first (baseline).

    The variables are split into ``len(shift)`` contiguous blocks (as evenly
    as possible, earlier blocks taking the extra variable); block b of each
    non-baseline group is moved by ``shift[b]``.
    """
    shift = [float(v) for v in shift]
    if not groups:
        raise ConfigurationError("no groups to shift")
    p = np.asarray(groups[0]).shape[1]
    if not 1 <= len(shift) <= p:
        raise ConfigurationError(f"shift has {len(shift)} values but p={p}")
    vec = np.concatenate([np.full(len(b), v) for b, v in zip(np.array_split(np.arange(p), len(shift)), shift)])
    out = [np.array(groups[0], dtype=float, copy=True)]
    for g in groups[1:]:
        g = np.asarray(g, dtype=float)
        if g.shape[1] != p:
            raise ConfigurationError("groups disagree on dimension")
        out.append(g + vec)
    return out
