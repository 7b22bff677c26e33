"""Null distribution of Lambda and of W = -log Lambda.

Under the null hypothesis, with Normal data and a circular covariance,

    Lambda ~ Y1 * Y2**mod(p+1, 2) * prod_{j=2}^{p-m} (Yj*)**2,

with Y1, Y2 ~ Beta((n-q)/2, (q-1)/2) and Yj* ~ Beta(n-q, q-1), all
independent and m = floor(p/2).  This module offers four views of that law:

* a Monte Carlo sampler (the oracle the other paths are checked against),
* the closed form for odd q, where W is a sum of independent Gamma
  variables with integer shapes and distinct rates,
* fixed-Talbot inversion of the Laplace transform of W, valid for any q,
* the Normal approximation for large p, with exact mean and variance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
import mpmath
import numpy as np
from scipy import integrate, optimize, special, stats

from . import specialfn
from .errors import (
    DataError,
    EmptyRequestError,
    InsufficientSampleError,
    NumericError,
    PrecisionError,
    RepresentationError,
    UnsupportedParityError,
)

__all__ = [
    "BetaProductModel",
    "GigRepresentation",
    "NormalApprox",
    "DeltaControl",
    "METHODS",
    "beta_product_model",
    "mc_sample_w",
    "gig_representation",
    "gig_cdf_w",
    "gig_pdf_w",
    "egig_cdf_lambda",
    "gig_cf",
    "cf_w",
    "laplace_w",
    "cdf_w_by_inversion",
    "normal_approx",
    "cdf_w",
    "cdf_lambda",
    "quantile_w",
    "quantile_lambda",
    "p_value",
    "delta_measure",
]

METHODS = ("exact", "exact-egig", "cf-inversion", "asymptotic")

# Fixed-Talbot node count.  In double precision the contour factor exp(2M/5)
# amplifies round-off, so the usable range is roughly M in [12, 32].
DEFAULT_TALBOT_NODES = 20


@dataclass(frozen=True)
class BetaProductModel:
    n: int
    q: int
    p: int

    def __post_init__(self):
        for name in ("n", "q", "p"):
            v = getattr(self, name)
            if int(v) != v:
                raise DataError(f"{name} must be an integer, got {v!r}")
        if self.q < 2:
            raise DataError(f"q must be >= 2, got {self.q}")
        if self.p < 1:
            raise DataError(f"p must be >= 1, got {self.p}")
        if self.n <= self.q:
            raise InsufficientSampleError(f"need n > q, got n={self.n}, q={self.q}")

    @property
    def m(self) -> int:
        return self.p // 2

    @property
    def n_single(self) -> int:
        """Count of Beta((n-q)/2, (q-1)/2) factors (1 for odd p, 2 for even p)."""
        return 1 + (self.p + 1) % 2

    @property
    def n_paired(self) -> int:
        """Count of squared Beta(n-q, q-1) factors."""
        return self.p - self.m - 1

    @property
    def single_params(self) -> tuple[float, float]:
        return ((self.n - self.q) / 2.0, (self.q - 1) / 2.0)

    @property
    def paired_params(self) -> tuple[float, float]:
        return (float(self.n - self.q), float(self.q - 1))


def beta_product_model(n: int, q: int, p: int) -> BetaProductModel:
    return BetaProductModel(int(n), int(q), int(p))


def mc_sample_w(model: BetaProductModel, count: int, seed: int) -> np.ndarray:
    """Draw ``count`` i.i.d. copies of W from the Beta-product representation.

    -log Beta(a, b) is drawn as log1p(G_b / G_a) from two independent Gamma
    variates, which keeps precision when the Beta draw is close to one.
    """
    if count < 1:
        raise EmptyRequestError("count must be >= 1")
    rng = np.random.default_rng(seed)
    a, b = model.single_params
    w = np.zeros(count)
    if model.n_single:
        ga = rng.standard_gamma(a, size=(count, model.n_single))
        gb = rng.standard_gamma(b, size=(count, model.n_single))
        w += np.log1p(gb / ga).sum(axis=1)
    if model.n_paired:
        a2, b2 = model.paired_params
        ga = rng.standard_gamma(a2, size=(count, model.n_paired))
        gb = rng.standard_gamma(b2, size=(count, model.n_paired))
        w += 2.0 * np.log1p(gb / ga).sum(axis=1)
    return w


# ---------------------------------------------------------------------------
# Closed form for odd q
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GigRepresentation:
    """W as a sum of independent Gamma(shape_l, rate_l) variables.

    Terms with zero shape (p <= 2 and even l) are dropped, so ``depth`` can be
    smaller than q - 1.
    """

    shapes: tuple[int, ...]
    rates: tuple[float, ...]

    def __post_init__(self):
        if len(self.shapes) != len(self.rates) or not self.shapes:
            raise RepresentationError("shapes and rates must be nonempty and aligned")
        if any(int(r) != r or r < 1 for r in self.shapes):
            raise RepresentationError(f"shapes must be positive integers: {self.shapes}")
        if any(lam <= 0 for lam in self.rates):
            raise RepresentationError(f"rates must be positive: {self.rates}")
        if len(set(self.rates)) != len(self.rates):
            raise RepresentationError(f"rates must be pairwise distinct: {self.rates}")

    @property
    def depth(self) -> int:
        return len(self.shapes)


def gig_representation(n: int, q: int, p: int) -> GigRepresentation:
    """Shapes/rates of W for odd q.

    Shape floor(p/2)+1 for odd l and p-floor(p/2)-1 for even l;
    rate (n-q+l-1)/2, l = 1..q-1.
    """
    model = beta_product_model(n, q, p)
    if q % 2 == 0:
        raise UnsupportedParityError(
            f"closed form needs odd q (got q={q}); use cf-inversion instead"
        )
    shapes, rates = [], []
    for ell in range(1, q):
        r = model.m + 1 if ell % 2 == 1 else model.p - model.m - 1
        if r > 0:
            shapes.append(r)
            rates.append((n - q + ell - 1) / 2.0)
    return GigRepresentation(tuple(shapes), tuple(rates))


def _gig_coefficients(shapes, rates, ctx=None):
    """Partial-fraction weights c[j][k-1] with

        prod_l (rate_l / (rate_l + s))**shape_l = sum_j sum_k c_jk (rate_j / (rate_j + s))**k.

    The Taylor coefficients of the cofactor around s = -rate_j follow from
    k a_k = sum_i B_i a_{k-i}, B_i = sum_{l != j} shape_l (rate_j - rate_l)**-i.
    ``ctx`` is either None (floats) or an mpmath context.
    """
    conv = (lambda x: x) if ctx is None else ctx.mpf
    lam = [conv(x) for x in rates]
    out = []
    for j, (rj, lj) in enumerate(zip(shapes, lam)):
        others = [(shapes[l], lam[l]) for l in range(len(lam)) if l != j]
        a0 = conv(1)
        for rl, ll in others:
            a0 *= (ll / (ll - lj)) ** rl
        bs = [None] + [
            sum(rl * (lj - ll) ** (-i) for rl, ll in others) for i in range(1, rj)
        ]
        a = [a0]
        for k in range(1, rj):
            a.append(sum(bs[i] * a[k - i] for i in range(1, k + 1)) / k)
        # c_{j,k} = rate_j**(shape_j - k) * a_{shape_j - k}
        out.append([lj ** (rj - k) * a[rj - k] for k in range(1, rj + 1)])
    return out


# partial fractions are used while sum |c_jk| stays below this (round-off ~ bound * 1e-16)
_PF_BOUND = 1e6
_SERIES_MAX_TERMS = 20_000


def _positive_series_weights(shapes, rates, tol: float = 1e-14):
    """Weights w_k >= 0 with  sum of Gammas  =  sum_k w_k Gamma(rho + k, rate_max).

    Moschopoulos' expansion: with c_l = rate_l / rate_max <= 1,
    w_0 = prod c_l**r_l, g_i = sum_l r_l (1 - c_l)**i / i and
    (k+1) w_{k+1} = sum_{i=1}^{k+1} i g_i w_{k+1-i}.  No cancellation; the
    series is cut once the weights account for 1 - tol of the mass.
    Returns None if the leading weight underflows or the series is too long.
    """
    lam_max = max(rates)
    c = np.array(rates, dtype=float) / lam_max
    r = np.array(shapes, dtype=float)
    log_w0 = float(np.sum(r * np.log(c)))
    if log_w0 < -700:
        return None
    w = [math.exp(log_w0)]
    ig = []  # i * g_i
    total = w[0]
    one_minus = 1.0 - c
    k = 0
    # summation round-off keeps 1 - total from reaching ~1e-16, so also stop
    # once the (eventually decreasing) weights are negligible
    while 1.0 - total > tol and not (k > 1 and w[-1] < w[-2] and w[-1] < 1e-3 * tol):
        if k >= _SERIES_MAX_TERMS:
            return None
        i = k + 1
        ig.append(float(np.sum(r * one_minus**i)))
        nxt = float(np.dot(ig, w[::-1])) / i
        w.append(nxt)
        total += nxt
        k += 1
    return np.array(w)


class _GigEvaluator:
    """Evaluates GIG cdf/pdf.

    Partial fractions in double precision when the coefficients are
    moderate; otherwise the positive Gamma-mixture series, and only if that
    is unavailable, partial fractions in multiprecision.
    """

    _cache: dict = {}

    def __init__(self, rep: GigRepresentation):
        self.rep = rep
        self.rho = int(sum(rep.shapes))
        self.lam_max = max(rep.rates)
        self.series = None
        self.dps = None
        coefs = _gig_coefficients(rep.shapes, rep.rates)
        self.bound = sum(abs(c) for row in coefs for c in row)
        self.coefs = coefs
        if math.isfinite(self.bound) and self.bound <= _PF_BOUND:
            return
        self.series = _positive_series_weights(rep.shapes, rep.rates)
        if self.series is not None:
            return
        if math.isfinite(self.bound):
            digits = math.log10(self.bound)
        else:
            with mpmath.workdps(50):
                mc = _gig_coefficients(rep.shapes, rep.rates, mpmath.mp)
                digits = float(mpmath.log10(sum(abs(c) for row in mc for c in row)))
        self.dps = int(digits) + 25
        with mpmath.workdps(self.dps):
            self.mp_coefs = _gig_coefficients(rep.shapes, rep.rates, mpmath.mp)

    @classmethod
    def get(cls, rep: GigRepresentation) -> "_GigEvaluator":
        ev = cls._cache.get(rep)
        if ev is None:
            ev = cls._cache[rep] = cls(rep)
        return ev

    def cdf(self, w: np.ndarray) -> np.ndarray:
        w = np.asarray(w, dtype=float)
        out = np.zeros_like(w)
        pos = w > 0
        if not np.any(pos):
            return out
        x = w[pos]
        if self.series is not None:
            y = self.lam_max * x
            acc = np.zeros_like(x)
            for k, wk in enumerate(self.series):
                acc += wk * special.gammainc(self.rho + k, y)
            out[pos] = acc
        elif self.dps is None:
            acc = np.zeros_like(x)
            for row, lam in zip(self.coefs, self.rep.rates):
                for k, c in enumerate(row, start=1):
                    acc += c * special.gammaincc(k, lam * x)
            out[pos] = 1.0 - acc
        else:
            out[pos] = [self._mp_sum(float(v), cdf=True) for v in x]
        return np.clip(out, 0.0, 1.0)

    def pdf(self, w: np.ndarray) -> np.ndarray:
        w = np.asarray(w, dtype=float)
        out = np.zeros_like(w)
        pos = w > 0
        if not np.any(pos):
            return out
        x = w[pos]
        if self.series is not None:
            acc = np.zeros_like(x)
            for k, wk in enumerate(self.series):
                acc += wk * stats.gamma.pdf(x, self.rho + k, scale=1.0 / self.lam_max)
            out[pos] = acc
        elif self.dps is None:
            acc = np.zeros_like(x)
            for row, lam in zip(self.coefs, self.rep.rates):
                for k, c in enumerate(row, start=1):
                    acc += c * stats.gamma.pdf(x, k, scale=1.0 / lam)
            out[pos] = acc
        else:
            out[pos] = [self._mp_sum(float(v), cdf=False) for v in x]
        return np.maximum(out, 0.0)

    def _mp_sum(self, x: float, cdf: bool) -> float:
        with mpmath.workdps(self.dps):
            xm = mpmath.mpf(x)
            acc = mpmath.mpf(0)
            for row, lam in zip(self.mp_coefs, self.rep.rates):
                lm = mpmath.mpf(lam)
                for k, c in enumerate(row, start=1):
                    if cdf:
                        acc += c * mpmath.gammainc(k, lm * xm, mpmath.inf, regularized=True)
                    else:
                        acc += c * lm**k * xm ** (k - 1) * mpmath.exp(-lm * xm) / mpmath.factorial(k - 1)
            return float(1 - acc) if cdf else float(acc)


def gig_cdf_w(rep: GigRepresentation, w) -> np.ndarray | float:
    """CDF of a sum of independent Gammas with integer shapes and distinct rates."""
    arr = np.asarray(w, dtype=float)
    out = _GigEvaluator.get(rep).cdf(np.atleast_1d(arr))
    return float(out[0]) if arr.ndim == 0 else out


def gig_pdf_w(rep: GigRepresentation, w) -> np.ndarray | float:
    arr = np.asarray(w, dtype=float)
    out = _GigEvaluator.get(rep).pdf(np.atleast_1d(arr))
    return float(out[0]) if arr.ndim == 0 else out


def egig_cdf_lambda(rep: GigRepresentation, z) -> np.ndarray | float:
    """F_Lambda(z) = 1 - F_W(-log z) for z in (0, 1)."""
    arr = np.asarray(z, dtype=float)
    if np.any((arr <= 0) | (arr >= 1)):
        raise DataError("z must lie in (0, 1)")
    out = 1.0 - np.atleast_1d(gig_cdf_w(rep, -np.log(arr)))
    return float(out[0]) if arr.ndim == 0 else out


def gig_cf(rep: GigRepresentation, t) -> np.ndarray | complex:
    """CF of the Gamma sum: prod_l (1 - i t / rate_l)**(-shape_l)."""
    t = np.asarray(t, dtype=float)
    out = np.ones(t.shape, dtype=complex)
    for r, lam in zip(rep.shapes, rep.rates):
        out *= (1.0 - 1j * t / lam) ** (-r)
    return complex(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# Characteristic function and Talbot inversion
# ---------------------------------------------------------------------------


def _log_mgf(model: BetaProductModel, s: np.ndarray, lngamma) -> np.ndarray:
    """log E[exp(-s W)] = log E[Lambda**s], as a function of complex s."""
    a, c = model.single_params
    b = a + c
    out = np.zeros(np.shape(s), dtype=complex)
    if model.n_single:
        # same log-gamma routine for the constant, so the transform is exactly 1 at s = 0
        const = lngamma(complex(b)) - lngamma(complex(a))
        out += model.n_single * (const + lngamma(a + s) - lngamma(b + s))
    if model.n_paired:
        a2 = float(model.n - model.q)
        b2 = float(model.n - 1)
        const = lngamma(complex(b2)) - lngamma(complex(a2))
        out += model.n_paired * (const + lngamma(a2 + 2 * s) - lngamma(b2 + 2 * s))
    return out


def cf_w(model: BetaProductModel, t) -> np.ndarray | complex:
    """Phi_W(t) = E[exp(i t W)]."""
    t = np.asarray(t, dtype=float)
    out = np.exp(_log_mgf(model, -1j * t, specialfn.ln_gamma_complex))
    return complex(out) if out.ndim == 0 else out


def laplace_w(model: BetaProductModel, s) -> np.ndarray | complex:
    """E[exp(-s W)] for complex s off the poles on the negative real axis."""
    s = np.asarray(s, dtype=complex)
    out = np.exp(_log_mgf(model, s, specialfn.ln_gamma_complex_any))
    return complex(out) if out.ndim == 0 else out


def _talbot(transform, t: np.ndarray, nodes: int) -> np.ndarray:
    """Fixed-Talbot inversion of ``transform`` at positive times ``t`` (double precision)."""
    t = np.asarray(t, dtype=float)[:, None]
    r = 2.0 * nodes / (5.0 * t)
    theta = np.arange(1, nodes) * np.pi / nodes
    cot = 1.0 / np.tan(theta)
    s = r * theta * (cot + 1j)
    sigma = theta + (theta * cot - 1.0) * cot
    head = 0.5 * np.exp(r[:, 0] * t[:, 0]) * transform(r[:, 0] + 0j).real
    body = (np.exp(t * s) * transform(s) * (1.0 + 1j * sigma)).real.sum(axis=1)
    return r[:, 0] / nodes * (head + body)


def _laplace_cdf_mp(model: BetaProductModel, s):
    """E[exp(-sW)] / s in the current mpmath precision."""
    a, c = model.single_params
    b = a + c
    lg = mpmath.loggamma
    out = mpmath.mpf(0)
    if model.n_single:
        out += model.n_single * (lg(b) - lg(a) + lg(a + s) - lg(b + s))
    if model.n_paired:
        a2, b2 = model.n - model.q, model.n - 1
        out += model.n_paired * (lg(b2) - lg(a2) + lg(a2 + 2 * s) - lg(b2 + 2 * s))
    return mpmath.exp(out) / s


def _talbot_mp(model: BetaProductModel, t: float, nodes: int) -> float:
    """Fixed-Talbot inversion of the CDF transform with ``nodes + 10`` digits."""
    with mpmath.workdps(nodes + 10):
        tm = mpmath.mpf(t)
        r = mpmath.mpf(2 * nodes) / (5 * tm)
        acc = mpmath.exp(r * tm) * _laplace_cdf_mp(model, r) / 2
        for k in range(1, nodes):
            th = k * mpmath.pi / nodes
            cot = mpmath.cot(th)
            s = r * th * mpmath.mpc(cot, 1)
            sig = th + (th * cot - 1) * cot
            acc += mpmath.re(mpmath.exp(tm * s) * _laplace_cdf_mp(model, s) * mpmath.mpc(1, sig))
        return float(r / nodes * acc)


# node ladder for the multiprecision fallback; the contour needs more nodes
# as the density of W narrows relative to its location (large p)
_MP_LADDER = (48, 64, 96, 128, 192, 256)


def _cdf_w_adaptive(model: BetaProductModel, w: np.ndarray, tol: float) -> np.ndarray:
    transform = lambda s: laplace_w(model, s) / s  # noqa: E731
    with np.errstate(over="ignore", invalid="ignore"):
        lo = _talbot(transform, w, DEFAULT_TALBOT_NODES)
        hi = _talbot(transform, w, DEFAULT_TALBOT_NODES + 8)
    out = hi.copy()
    bad = ~(np.isfinite(lo) & np.isfinite(hi) & (np.abs(lo - hi) < tol))
    for i in np.flatnonzero(bad):
        prev = hi[i] if np.isfinite(hi[i]) else None
        for nodes in _MP_LADDER:
            cur = _talbot_mp(model, float(w[i]), nodes)
            if prev is not None and abs(cur - prev) < tol:
                break
            prev = cur
        else:
            raise PrecisionError(
                f"Talbot inversion did not converge at w={w[i]} (last change {abs(cur - prev):.2e})"
            )
        out[i] = cur
    return out


def cdf_w_by_inversion(
    model: BetaProductModel, w, nodes: int | None = None, tol: float = 1e-10
) -> np.ndarray | float:
    """F_W(w) by fixed-Talbot inversion of E[exp(-sW)] / s.

    With ``nodes=None`` the node count is chosen adaptively: a double-precision
    pass at 20 and 28 nodes, and a multiprecision ladder wherever the two
    disagree by more than ``tol``.  An explicit ``nodes`` runs a single pass,
    in double precision up to 32 nodes and in multiprecision above.
    """
    arr = np.asarray(w, dtype=float)
    flat = np.atleast_1d(arr).ravel()
    out = np.zeros_like(flat)
    pos = flat > 0
    if np.any(pos):
        x = flat[pos]
        if nodes is None:
            vals = _cdf_w_adaptive(model, x, tol)
        elif nodes < 2:
            raise DataError("need at least 2 Talbot nodes")
        elif nodes <= 32:
            with np.errstate(over="ignore", invalid="ignore"):
                vals = _talbot(lambda s: laplace_w(model, s) / s, x, int(nodes))
        else:
            vals = np.array([_talbot_mp(model, float(v), int(nodes)) for v in x])
        if not np.all(np.isfinite(vals)):
            raise PrecisionError("Talbot inversion produced non-finite values")
        out[pos] = np.clip(vals, 0.0, 1.0)
    out = out.reshape(np.atleast_1d(arr).shape)
    return float(out[0]) if arr.ndim == 0 else out


# ---------------------------------------------------------------------------
# Normal approximation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NormalApprox:
    mu: float
    mu_star: float
    sigma2: float
    sigma2_star: float
    mean: float
    variance: float

    @property
    def sd(self) -> float:
        return math.sqrt(self.variance)


def normal_approx(n: int, q: int, p: int) -> NormalApprox:
    """Mean and variance of W; both are exact moments, not only limits."""
    model = beta_product_model(n, q, p)
    dg, tg = specialfn.digamma, specialfn.trigamma
    mu = dg((n - 1) / 2.0) - dg((n - q) / 2.0)
    mu_star = dg(n - 1.0) - dg(n - q)
    sigma2 = tg((n - q) / 2.0) - tg((n - 1) / 2.0)
    sigma2_star = tg(n - q) - tg(n - 1.0)
    mean = model.n_single * mu + 2 * model.n_paired * mu_star
    variance = model.n_single * sigma2 + 4 * model.n_paired * sigma2_star
    return NormalApprox(mu, mu_star, sigma2, sigma2_star, mean, variance)


# ---------------------------------------------------------------------------
# Method dispatch, quantiles, p-values
# ---------------------------------------------------------------------------


def _resolve_method(model: BetaProductModel, method: str) -> str:
    if method not in METHODS:
        raise DataError(f"unknown method {method!r}; choose from {METHODS}")
    if method == "exact":
        return "exact-egig" if model.q % 2 == 1 else "cf-inversion"
    if method == "exact-egig" and model.q % 2 == 0:
        raise UnsupportedParityError(
            f"exact-egig needs odd q (got q={model.q}); use cf-inversion"
        )
    return method


def cdf_w(model: BetaProductModel, w, method: str = "exact"):
    method = _resolve_method(model, method)
    if method == "exact-egig":
        return gig_cdf_w(gig_representation(model.n, model.q, model.p), w)
    if method == "cf-inversion":
        return cdf_w_by_inversion(model, w)
    na = normal_approx(model.n, model.q, model.p)
    out = stats.norm.cdf(np.asarray(w, dtype=float), na.mean, na.sd)
    return float(out) if np.ndim(out) == 0 else out


def cdf_lambda(model: BetaProductModel, z, method: str = "exact"):
    """F_Lambda(z) = P(W >= -log z)."""
    arr = np.asarray(z, dtype=float)
    if np.any((arr <= 0) | (arr > 1)):
        raise DataError("z must lie in (0, 1]")
    out = 1.0 - np.asarray(cdf_w(model, -np.log(arr), method))
    return float(out) if np.ndim(out) == 0 else out


def _bracketed_root(f, target: float, lo: float, hi: float, tol: float) -> float:
    """Root of f(x) = target on [lo, hi] for nondecreasing f.

    Brent's method keeps the bracket of plain bisection but needs far fewer
    CDF evaluations; the result is polished until |f - target| < tol.
    """
    g = lambda x: f(x) - target  # noqa: E731
    glo, ghi = g(lo), g(hi)
    if glo > 0 or ghi < 0:
        raise NumericError(f"bracket [{lo}, {hi}] does not straddle the target")
    if glo == 0:
        return lo
    if ghi == 0:
        return hi
    x = optimize.brentq(g, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    if abs(g(x)) >= tol:
        # flat CDF regions can stall brentq on x; finish by bisection on f
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            gm = g(mid)
            if abs(gm) < tol or hi - lo <= 4 * np.spacing(mid):
                return mid
            lo, hi = (mid, hi) if gm < 0 else (lo, mid)
    return x


def quantile_w(model: BetaProductModel, prob: float, method: str = "exact", tol: float = 1e-10) -> float:
    """w with F_W(w) = prob."""
    if not 0 < prob < 1:
        raise DataError(f"probability must lie in (0, 1), got {prob}")
    method = _resolve_method(model, method)
    na = normal_approx(model.n, model.q, model.p)
    if method == "asymptotic":
        return float(stats.norm.ppf(prob, na.mean, na.sd))
    f = lambda x: float(cdf_w(model, x, method))  # noqa: E731
    hi = na.mean + 10 * na.sd
    while f(hi) < prob:
        hi *= 2.0
    lo = max(0.0, na.mean - 10 * na.sd)
    if f(lo) > prob:
        lo = 0.0
    return _bracketed_root(f, prob, lo, hi, tol)


def quantile_lambda(model: BetaProductModel, alpha: float, method: str = "exact") -> float:
    """Lower alpha-quantile of Lambda: P(Lambda <= z) = alpha.

    The asymptotic method maps the Normal quantile of W and can, for tiny p,
    return a value outside (0, 1); it is not clipped.
    """
    if not 0 < alpha < 1:
        raise DataError(f"alpha must lie in (0, 1), got {alpha}")
    return math.exp(-quantile_w(model, 1.0 - alpha, method))


def p_value(model: BetaProductModel, w_obs: float, method: str = "exact") -> float:
    """Upper-tail probability P(W >= w_obs); large W (small Lambda) rejects."""
    method = _resolve_method(model, method)
    if method == "asymptotic":
        na = normal_approx(model.n, model.q, model.p)
        return float(stats.norm.sf(w_obs, na.mean, na.sd))
    return float(min(1.0, max(0.0, 1.0 - float(cdf_w(model, w_obs, method)))))


# ---------------------------------------------------------------------------
# Distance to normality
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DeltaControl:
    """Quadrature settings for :func:`delta_measure`.

    ``t_max`` fixes the truncation point; when None it grows until the tail
    bound drops below ``tail_tol`` (or ``t_cap`` is hit, which is an error).
    """

    t_max: float | None = None
    tail_tol: float = 1e-10
    t_cap: float = 1e4
    limit: int = 400
    epsabs: float = 1e-12


def _third_cumulant_w(model: BetaProductModel) -> float:
    a, c = model.single_params
    b = a + c
    pg = lambda x: float(special.polygamma(2, x))  # noqa: E731
    k3 = model.n_single * (pg(b) - pg(a))
    k3 += 8 * model.n_paired * (pg(model.n - 1.0) - pg(float(model.n - model.q)))
    return k3


def _decay_exponent(model: BetaProductModel) -> float:
    # |Phi_W(t)| ~ |t|**(-d) for large |t|
    return model.n_single * (model.q - 1) / 2.0 + model.n_paired * (model.q - 1)


def delta_measure(model: BetaProductModel, ctrl: DeltaControl | None = None) -> float:
    """(1/2pi) * integral |Phi_Z(t) - exp(-t^2/2)| / |t| dt over the real line.

    Phi_Z is the CF of (W - mean)/sd.  The integrand is even in t, so the
    integral is taken over (0, T] and doubled.  Near t = 0 the integrand is
    replaced by its leading term |kappa_3| t^2 / 6.
    """
    ctrl = ctrl or DeltaControl()
    na = normal_approx(model.n, model.q, model.p)
    sd, mean = na.sd, na.mean
    k3 = abs(_third_cumulant_w(model)) / sd**3
    d = _decay_exponent(model)

    def phi_z(t):
        return np.exp(-1j * t * mean / sd) * cf_w(model, t / sd)

    def integrand(t):
        if t < 1e-4:
            return k3 * t * t / 6.0
        return abs(phi_z(t) - math.exp(-0.5 * t * t)) / t

    def tail_bound(t):
        # integral_T^inf |Phi_Z|/t <= |Phi_Z(T)| / d for power decay; plus Gaussian part
        return abs(phi_z(t)) / max(d, 1e-12) + math.exp(-0.5 * t * t) / (t * t)

    if ctrl.t_max is not None:
        t_hi = float(ctrl.t_max)
    else:
        t_hi = 8.0
        while tail_bound(t_hi) > ctrl.tail_tol:
            t_hi *= 2.0
            if t_hi > ctrl.t_cap:
                raise PrecisionError(
                    f"CF tail does not fall below {ctrl.tail_tol} before t={ctrl.t_cap}"
                )
    edges = [0.0, 1.0]
    while edges[-1] < t_hi:
        edges.append(min(2.0 * edges[-1], t_hi))
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        val, _ = integrate.quad(integrand, lo, hi, limit=ctrl.limit, epsabs=ctrl.epsabs)
        total += val
    return total / math.pi

