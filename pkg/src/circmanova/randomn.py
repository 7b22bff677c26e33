"""Null distribution of Lambda when the total sample size N is random.

The law of Lambda becomes a mixture over n >= q + 1 of the fixed-n laws,
weighted by P(N = n) = f_N(n) / (1 - sum_{i=0}^{q} f_N(i)).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from . import nulldist
from .errors import DataError

__all__ = [
    "CountModel",
    "Poisson",
    "Binomial",
    "NegativeBinomial",
    "PointMass",
    "TruncatedWeights",
    "truncated_weights",
    "mixture_cdf_lambda",
    "mixture_cdf_w",
    "mixture_normal_pdf",
    "mixture_quantile_lambda",
    "sample_lambda_two_stage",
]


class CountModel:
    """Distribution of the total sample size N."""

    def frozen(self):
        raise NotImplementedError


@dataclass(frozen=True)
class Poisson(CountModel):
    lam: float

    def __post_init__(self):
        if not self.lam > 0:
            raise DataError(f"Poisson rate must be > 0, got {self.lam}")

    def frozen(self):
        return stats.poisson(self.lam)


@dataclass(frozen=True)
class Binomial(CountModel):
    n_total: int
    prob: float

    def __post_init__(self):
        if int(self.n_total) != self.n_total or self.n_total < 1:
            raise DataError(f"Binomial size must be a positive integer, got {self.n_total}")
        if not 0 < self.prob < 1:
            raise DataError(f"Binomial probability must lie in (0, 1), got {self.prob}")

    def frozen(self):
        return stats.binom(int(self.n_total), self.prob)


@dataclass(frozen=True)
class NegativeBinomial(CountModel):
    """Number of trials needed for ``successes`` successes (support starts at ``successes``)."""

    successes: int
    prob: float

    def __post_init__(self):
        if int(self.successes) != self.successes or self.successes < 1:
            raise DataError(f"successes must be a positive integer, got {self.successes}")
        if not 0 < self.prob < 1:
            raise DataError(f"probability must lie in (0, 1), got {self.prob}")

    def frozen(self):
        # scipy counts failures; shift by r to count trials
        return stats.nbinom(int(self.successes), self.prob, loc=int(self.successes))


@dataclass(frozen=True)
class PointMass(CountModel):
    n0: int

    def frozen(self):
        return None


@dataclass(frozen=True)
class TruncatedWeights:
    support: np.ndarray
    weights: np.ndarray
    tail_mass_dropped: float

    def mean(self) -> float:
        return float(self.support @ self.weights)


def truncated_weights(cm: CountModel, q: int, tail_eps: float = 1e-10) -> TruncatedWeights:
    """P(N = n | N >= q+1) on a finite support.

    Infinite supports stop at the smallest u whose unnormalized tail
    P(N > u) is below ``tail_eps``; Binomial support stops at its size.
    """
    if q < 2:
        raise DataError(f"q must be >= 2, got {q}")
    if not tail_eps > 0:
        raise DataError("tail_eps must be positive")
    if isinstance(cm, PointMass):
        if cm.n0 < q + 1:
            raise DataError(f"PointMass n0={cm.n0} must be >= q+1={q + 1}")
        return TruncatedWeights(np.array([int(cm.n0)]), np.array([1.0]), 0.0)

    dist = cm.frozen()
    renorm = dist.sf(q)  # 1 - sum_{i<=q} f_N(i)
    if not renorm > 0:
        raise DataError(f"all probability mass of {cm} lies at or below q={q}")
    if isinstance(cm, Binomial):
        upper = int(cm.n_total)
        tail = 0.0
    else:
        upper = int(dist.isf(tail_eps))
        while dist.sf(upper) >= tail_eps:
            upper += 1
        while upper > q + 1 and dist.sf(upper - 1) < tail_eps:
            upper -= 1
        tail = float(dist.sf(upper))
    support = np.arange(q + 1, upper + 1)
    pmf = dist.pmf(support)
    keep = pmf > 0
    support, pmf = support[keep], pmf[keep]
    if support.size == 0:
        raise DataError(f"no support at or above q+1 for {cm}")
    weights = pmf / pmf.sum()
    return TruncatedWeights(support, weights, tail)


def _component_models(tw: TruncatedWeights, q: int, p: int):
    return [nulldist.beta_product_model(int(n), q, p) for n in tw.support]


def mixture_cdf_w(tw: TruncatedWeights, q: int, p: int, w, method: str = "exact"):
    """sum_n P(N=n) F_W(w | n, q, p)."""
    arr = np.atleast_1d(np.asarray(w, dtype=float))
    total = np.zeros_like(arr)
    for model, weight in zip(_component_models(tw, q, p), tw.weights):
        total += weight * np.asarray(nulldist.cdf_w(model, arr, method))
    total = np.clip(total, 0.0, 1.0)
    return float(total[0]) if np.ndim(w) == 0 else total


def mixture_cdf_lambda(tw: TruncatedWeights, q: int, p: int, z, method: str = "exact"):
    """sum_n P(N=n) F_Lambda(z | n, q, p) for z in (0, 1)."""
    arr = np.asarray(z, dtype=float)
    if np.any((arr <= 0) | (arr >= 1)):
        raise DataError("z must lie in (0, 1)")
    out = 1.0 - np.atleast_1d(mixture_cdf_w(tw, q, p, -np.log(np.atleast_1d(arr)), method))
    return float(out[0]) if arr.ndim == 0 else out


def mixture_normal_pdf(tw: TruncatedWeights, q: int, p: int, grid) -> np.ndarray:
    """Mixture of the large-p Normal laws of W = -log Lambda, evaluated on ``grid``.

    Each component is Normal(mean(n), variance(n)) on the W scale.
    """
    x = np.asarray(grid, dtype=float)
    out = np.zeros_like(x)
    for n, weight in zip(tw.support, tw.weights):
        na = nulldist.normal_approx(int(n), q, p)
        out += weight * stats.norm.pdf(x, na.mean, na.sd)
    return out


def mixture_quantile_lambda(
    tw: TruncatedWeights, q: int, p: int, alpha: float, method: str = "exact"
) -> float:
    """z with mixture F_Lambda(z) = alpha, found on the W scale."""
    if not 0 < alpha < 1:
        raise DataError(f"alpha must lie in (0, 1), got {alpha}")
    approx = [nulldist.normal_approx(int(n), q, p) for n in tw.support]
    if method == "asymptotic":
        def f(x):
            return float(sum(wt * stats.norm.cdf(x, a.mean, a.sd) for wt, a in zip(tw.weights, approx)))
    else:
        def f(x):
            return mixture_cdf_w(tw, q, p, x, method)
    target = 1.0 - alpha
    hi = max(a.mean + 10 * a.sd for a in approx)
    while f(hi) < target:
        hi *= 2.0
    w = nulldist._bracketed_root(f, target, 0.0, hi, 1e-10)
    return float(np.exp(-w))


def sample_lambda_two_stage(
    tw: TruncatedWeights, q: int, p: int, count: int, seed: int
) -> np.ndarray:
    """Draw N from the truncated law, then Lambda | N from the Beta product."""
    rng = np.random.default_rng(seed)
    ns = rng.choice(tw.support, size=count, p=tw.weights)
    out = np.empty(count)
    child_seeds = np.random.SeedSequence(seed).spawn(len(tw.support))
    for n, ss in zip(tw.support, child_seeds):
        idx = np.flatnonzero(ns == n)
        if idx.size:
            model = nulldist.beta_product_model(int(n), q, p)
            out[idx] = np.exp(-nulldist.mc_sample_w(model, idx.size, ss))
    return out
