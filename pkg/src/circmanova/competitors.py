"""Competing high-dimensional mean tests: Fujikoshi et al., Schott, Chen-Qin, Zhang et al.

All four reject for large values of their statistic.  Fujikoshi and Schott
handle any q >= 2; Chen-Qin and Zhang are two-sample tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .errors import (
    EstimationDegenerateError,
    InsufficientSampleError,
    UnsupportedDesignError,
)
from .statistic import GroupedSample, between_scatter, within_scatter

__all__ = [
    "CompetitorResult",
    "fujikoshi_stat",
    "schott_stat",
    "chen_qin_stat",
    "zhang_stat",
    "COMPETITORS",
]


@dataclass(frozen=True)
class CompetitorResult:
    """Outcome of one competitor test.

    ``reference`` is ``"standard-normal"`` or ``"gamma"``; for the latter,
    ``params`` holds ``d`` and ``beta`` and the statistic is referred to
    beta * chi2_d, i.e. a Gamma law with shape d/2 and scale 2*beta (mean d*beta).
    """

    name: str
    statistic: float
    reference: str
    p_value: float
    params: dict = field(default_factory=dict)


def _trace_moments(s: GroupedSample):
    """Error degrees of freedom, tr(S), tr(S^2) for the pooled S = A / (n - q)."""
    dfe = s.n - s.q
    if dfe < 2:
        raise InsufficientSampleError(
            f"need n - q >= 2 to estimate tr(Sigma^2), got n={s.n}, q={s.q}"
        )
    a = within_scatter(s)
    sm = a / dfe
    tr1 = float(np.trace(sm))
    tr2 = float(np.sum(sm * sm))
    return dfe, a, tr1, tr2


def _normal_result(name: str, z: float) -> CompetitorResult:
    return CompetitorResult(name, float(z), "standard-normal", float(stats.norm.sf(z)))


def schott_stat(s: GroupedSample) -> CompetitorResult:
    """t = tr(B)/(q-1) - tr(A)/(n-q), divided by its estimated standard deviation.

    Var(t) = 2 tr(Sigma^2) (1/(q-1) + 1/(n-q)) under the null, with tr(Sigma^2)
    estimated without bias under normality.
    """
    dfe, a, tr1, tr2 = _trace_moments(s)
    dfh = s.q - 1
    t = float(np.trace(between_scatter(s))) / dfh - float(np.trace(a)) / dfe
    trsig2 = dfe**2 / ((dfe - 1) * (dfe + 2)) * (tr2 - tr1**2 / dfe)
    if not trsig2 > 0:
        raise EstimationDegenerateError("estimated tr(Sigma^2) is not positive")
    return _normal_result("schott", t / math.sqrt(2.0 * trsig2 * (1.0 / dfh + 1.0 / dfe)))


def fujikoshi_stat(s: GroupedSample) -> CompetitorResult:
    """Dempster trace ratio ((n-q)/(q-1)) tr(B)/tr(A) - 1, standardized.

    The variance is 2 (a2/a1^2) (1/(q-1) + 1/(n-q)) with the plug-in
    a1 = tr(S) and a2 = tr(S^2) - tr(S)^2/(n-q), written without the
    dimension factors (they cancel).
    """
    dfe, a, tr1, tr2 = _trace_moments(s)
    dfh = s.q - 1
    tra = float(np.trace(a))
    if not tra > 0:
        raise EstimationDegenerateError("tr(A) is zero: no within-group variation")
    ratio = dfe / dfh * float(np.trace(between_scatter(s))) / tra - 1.0
    a2 = tr2 - tr1**2 / dfe
    if not a2 > 0:
        raise EstimationDegenerateError("estimated tr(Sigma^2) is not positive")
    sd = math.sqrt(2.0 * a2 / tr1**2 * (1.0 / dfh + 1.0 / dfe))
    return _normal_result("fujikoshi", ratio / sd)


def _require_two_groups(s: GroupedSample, name: str, min_size: int) -> tuple[np.ndarray, np.ndarray]:
    if s.q != 2:
        raise UnsupportedDesignError(f"{name} is a two-sample test; got q={s.q}")
    x1, x2 = s.groups
    if min(x1.shape[0], x2.shape[0]) < min_size:
        raise InsufficientSampleError(f"{name} needs at least {min_size} observations per group")
    return x1, x2


def _leave_two_out_trace(g: np.ndarray) -> float:
    """Chen-Qin estimator of tr(Sigma^2) from the Gram matrix of one sample.

    (1/(n(n-1))) sum_{j != k} (X_j' (X_k - m_jk)) (X_k' (X_j - m_jk)),
    where m_jk is the sample mean without observations j and k.
    """
    n = g.shape[0]
    rows = g.sum(axis=1)
    diag = np.diag(g)
    # x_j'(x_k - m_jk) with m_jk = (sum - x_j - x_k)/(n-2)
    left = g - (rows[:, None] - diag[:, None] - g) / (n - 2)
    prod = left * left.T
    np.fill_diagonal(prod, 0.0)
    return float(prod.sum()) / (n * (n - 1))


def chen_qin_stat(s: GroupedSample) -> CompetitorResult:
    """Two-sample statistic without the within-sample squared terms, standardized.

    T = sum_{i!=j} X1i'X1j/(n1(n1-1)) + sum_{i!=j} X2i'X2j/(n2(n2-1)) - 2 sum X1i'X2j/(n1 n2)
    and Var(T) = 2 tr(S1^2)/(n1(n1-1)) + 2 tr(S2^2)/(n2(n2-1)) + 4 tr(S1 S2)/(n1 n2),
    with the traces estimated by leave-out means (needs n_k >= 3).
    """
    x1, x2 = _require_two_groups(s, "chen_qin", 3)
    n1, n2 = x1.shape[0], x2.shape[0]
    g1, g2, c = x1 @ x1.T, x2 @ x2.T, x1 @ x2.T
    t = (
        (g1.sum() - np.trace(g1)) / (n1 * (n1 - 1))
        + (g2.sum() - np.trace(g2)) / (n2 * (n2 - 1))
        - 2.0 * c.sum() / (n1 * n2)
    )
    tr11 = _leave_two_out_trace(g1)
    tr22 = _leave_two_out_trace(g2)
    rsum = c.sum(axis=1)[:, None]  # X1l' sum_k X2k
    csum = c.sum(axis=0)[None, :]  # X2k' sum_l X1l
    left = c - (rsum - c) / (n2 - 1)
    right = c - (csum - c) / (n1 - 1)
    tr12 = float((left * right).sum()) / (n1 * n2)
    var = 2.0 * tr11 / (n1 * (n1 - 1)) + 2.0 * tr22 / (n2 * (n2 - 1)) + 4.0 * tr12 / (n1 * n2)
    if not var > 0:
        raise EstimationDegenerateError("estimated variance of the Chen-Qin statistic is not positive")
    return _normal_result("chen_qin", float(t) / math.sqrt(var))


def zhang_stat(s: GroupedSample) -> CompetitorResult:
    """T = (n1 n2 / n) ||mean1 - mean2||^2 referred to beta * chi2_d.

    beta = tr(Sigma^2)/tr(Sigma) and d = tr(Sigma)^2/tr(Sigma^2), each trace
    functional estimated without bias from the pooled covariance.
    """
    x1, x2 = _require_two_groups(s, "zhang", 2)
    n1, n2 = x1.shape[0], x2.shape[0]
    diff = x1.mean(axis=0) - x2.mean(axis=0)
    t = n1 * n2 / (n1 + n2) * float(diff @ diff)
    m, _, tr1, tr2 = _trace_moments(s)
    trsig2 = m**2 / ((m - 1) * (m + 2)) * (tr2 - tr1**2 / m)
    tr2sig = tr1**2 - 2.0 * trsig2 / m
    if not (trsig2 > 0 and tr2sig > 0 and tr1 > 0):
        raise EstimationDegenerateError("Zhang parameter estimates are not positive")
    beta = trsig2 / tr1
    d = tr2sig / trsig2
    pval = float(stats.gamma.sf(t, d / 2.0, scale=2.0 * beta))
    return CompetitorResult("zhang", t, "gamma", pval, {"d": d, "beta": beta})


COMPETITORS = {
    "fujikoshi": fujikoshi_stat,
    "schott": schott_stat,
    "chen_qin": chen_qin_stat,
    "zhang": zhang_stat,
}
